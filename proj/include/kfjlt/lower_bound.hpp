#pragma once

// Subspaces of F_2^n and the adversarial point set built from their indicators.
//
// A vector w in F_2^n is stored as an n-bit word; coordinate 1 is the most
// significant bit. Position k of a length-2^n real vector corresponds to the
// word k - 1, so the orthonormal Hadamard entry is (-1)^<j-1, k-1> / sqrt(2^n).

#include <cstddef>
#include <cstdint>
#include <vector>

#include "kfjlt/index_algebra.hpp"

namespace kfjlt {

inline constexpr int kMaxGf2Dimension = 24;

/// Subspace of F_2^n held as its reduced row-echelon basis. The pivot of a row is
/// its most significant set bit; rows are sorted by decreasing pivot and every
/// pivot bit is cleared in all other rows, so equal subspaces compare equal.
class Gf2Subspace {
 public:
  /// Row space of `generators` (which may be dependent). Throws ArgumentError if
  /// n is outside [0, 24] or a generator has bits beyond n.
  Gf2Subspace(int n, const std::vector<std::uint32_t>& generators);

  static Gf2Subspace zero(int n) { return Gf2Subspace(n, {}); }
  static Gf2Subspace full(int n);

  int n() const noexcept { return n_; }
  int dim() const noexcept { return static_cast<int>(basis_.size()); }
  const std::vector<std::uint32_t>& basis() const noexcept { return basis_; }
  bool contains(std::uint32_t word) const noexcept;
  /// All 2^dim members in increasing order.
  std::vector<std::uint32_t> elements() const;

  friend bool operator==(const Gf2Subspace&, const Gf2Subspace&) = default;

 private:
  int n_ = 0;
  std::vector<std::uint32_t> basis_;
};

/// Uniform r-dimensional subspace: a uniformly random full-rank r x n matrix, reduced.
/// Throws ArgumentError unless 0 <= r <= n.
Gf2Subspace random_subspace(int n, int r, std::uint64_t seed);

/// Every r-dimensional subspace of F_2^n, one per reduced row-echelon pattern.
std::vector<Gf2Subspace> enumerate_subspaces(int n, int r);

/// Number of r-dimensional subspaces of F_2^n (Gaussian binomial at q = 2).
std::uint64_t gaussian_binomial2(int n, int r);

/// Normalized indicator: 1/sqrt|V| on members of V, 0 elsewhere; length 2^n.
std::vector<double> indicator(const Gf2Subspace& v);

/// {w : <v, w> = 0 for all v in V}.
Gf2Subspace orthogonal_complement(const Gf2Subspace& v);

struct FailureProbability {
  double probability = 1.0;  // (1 - s^-d)^m
  double lower_bound = 1.0;  // exp(-2 m / s^d)
};

/// Throws DomainError if s^d < 2 or d < 1.
FailureProbability failure_probability_exact(std::size_t s, int d, std::size_t m);

/// Subspaces V_1..V_d of equal dimension r; E is the set of sign-modulated
/// Kronecker products of their indicators.
struct AdversarialSet {
  KronDims dims;
  std::vector<Gf2Subspace> subspaces;

  int r() const noexcept { return subspaces.empty() ? 0 : subspaces.front().dim(); }
  std::size_t s() const noexcept { return std::size_t{1} << r(); }
  /// Unsigned base point 1_{V_1} x ... x 1_{V_d} as per-axis factors.
  std::vector<std::vector<double>> base_factors() const;
  /// Number of distinct elements of E: 2^{d s - (d - 1)}, saturating.
  std::uint64_t distinct_size() const noexcept;
};

/// Draws V_j uniformly in G_{log2 n_j, r}. Throws ArgumentError unless every n_j is
/// a power of two with log2 n_j >= r.
AdversarialSet make_adversarial_set(const KronDims& dims, int r, std::uint64_t seed);

/// Up to `limit` distinct elements of E as dense vectors of length N. Sign factors
/// 2..d are normalized to be +1 on their first support position so that no
/// element is produced twice.
std::vector<std::vector<double>> enumerate_points(const AdversarialSet& set, std::size_t limit);

struct EmpiricalFailure {
  std::size_t trials = 0;
  std::size_t failures = 0;
  double estimate = 0.0;
  double std_error = 0.0;
  /// Failing trials whose witness satisfied |‖A x̂‖² - 1| = 1 with x̂ in E.
  std::size_t witnesses_checked = 0;
  bool witnesses_ok = true;
  /// Every trial's x̂ = D_xi x was a unit element of E with D_xi x̂ = x.
  bool membership_ok = true;
};

/// Fraction of fresh operators with P_Omega H x = 0 for x = 1_{V_1} x ... x 1_{V_d}.
/// Trial t uses build_operator(dims, m, derive_key(seed, t)). Throws ArgumentError
/// if trials < 1000.
EmpiricalFailure failure_probability_empirical(const AdversarialSet& set, std::size_t m,
                                               std::size_t trials, std::uint64_t seed);

/// Convenience overload that draws the subspaces from `seed` first.
EmpiricalFailure failure_probability_empirical(const KronDims& dims, int r, std::size_t m,
                                               std::size_t trials, std::uint64_t seed);

}  // namespace kfjlt
