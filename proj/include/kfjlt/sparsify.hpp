#pragma once

// Fiber sparsification x = sum_{S subset [d]} x^(S).
//
// For every axis subset S and every fiber (fixed coordinates j on S^c), K(S)
// keeps the s^|S| entries of the fiber with the largest magnitude (the whole
// fiber if it is smaller). Each index i is then assigned to S(i), the largest
// S with i in K(S); x^(S) keeps exactly the entries assigned to S.
//
// Ties are broken deterministically: equal magnitudes prefer the smaller
// linearized position inside the fiber, equal cardinalities prefer the
// lexicographically smallest subset.

#include <cstddef>
#include <vector>

#include "kfjlt/index_algebra.hpp"

namespace kfjlt {

/// s^k, saturating at SIZE_MAX.
std::size_t saturating_power(std::size_t s, int k) noexcept;

/// K(S) as sorted flat positions.
std::vector<FlatIndex> select_K(const Array& x, AxisSet subset, std::size_t s);

/// K(S) as a membership mask over 0-based storage offsets.
std::vector<bool> select_K_mask(const Array& x, AxisSet subset, std::size_t s);

struct SparsifySplit {
  KronDims dims;
  std::size_t s = 1;
  /// parts[S.mask()] holds x^(S); there are 2^d parts.
  std::vector<Array> parts;
  /// S(i) for every 0-based storage offset.
  std::vector<AxisSet> assignment;

  const Array& part(AxisSet subset) const { return parts.at(subset.mask()); }
};

/// Throws ArgumentError if s < 1.
SparsifySplit split(const Array& x, std::size_t s);

/// For every S and fiber j on S^c, at most s^|S| nonzero entries of x^(S).
bool check_fiber_sparsity(const SparsifySplit& parts);

enum class Inequality { max_entry, max_fiber_sum };

struct InequalityViolation {
  Inequality which = Inequality::max_entry;
  AxisSet S;
  AxisSet T;
  std::size_t fiber = 0;  // 1-based flat index of k on the remaining axes
  double lhs = 0.0;
  double rhs = 0.0;
};

struct MaxSumReport {
  std::size_t checks = 0;
  std::vector<InequalityViolation> violations;
  bool ok() const noexcept { return violations.empty(); }
};

/// Exhaustively checks, for all admissible (S, T, k):
///   |S| < |T|:      max_j |x^(S)_{j x k}|^2            <= s^-|T| sum_j |x_{j x k}|^2
///   S, T disjoint:  max_j sum_i |x^(S)_{i x j x k}|^2  <= s^-|T| sum_j sum_i |x_{i x j x k}|^2
MaxSumReport check_max_sum_inequalities(const Array& x, const SparsifySplit& parts);

}  // namespace kfjlt
