#pragma once

// Exact restricted isometry constants for small matrices.
//
// delta_s = max over supports T with |T| = s of ||Phi_T^* Phi_T - I||_{2->2},
// computed by enumerating all supports and taking the extreme eigenvalues of
// each s x s Gram block.

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace kfjlt {

inline constexpr std::uint64_t kDefaultSupportBudget = 10'000'000;

/// C(n, k), saturating at UINT64_MAX.
std::uint64_t binomial(std::uint64_t n, std::uint64_t k) noexcept;

struct RipReport {
  std::size_t sparsity = 0;
  double delta = 0.0;
  std::vector<std::size_t> witness_support;  // 1-based column labels
  std::uint64_t supports_checked = 0;
};

/// Throws ArgumentError unless 1 <= s <= N, BudgetError if C(N, s) > budget.
RipReport rip_constant(const Eigen::MatrixXd& phi, std::size_t s,
                       std::uint64_t budget = kDefaultSupportBudget);

struct SubmatrixCheckOptions {
  /// Maximum number of (S, T) pairs to enumerate before falling back to sampling.
  std::uint64_t pair_budget = 50'000'000;
  /// Pairs drawn in the sampling fallback.
  std::uint64_t sampled_pairs = 1'000'000;
  std::uint64_t seed = 0;
  /// Relative slack on the comparison against delta.
  double tolerance = 1e-12;
};

struct SubmatrixCheck {
  bool holds = true;
  double worst_norm = 0.0;
  std::vector<std::size_t> worst_rows;  // S, 1-based
  std::vector<std::size_t> worst_cols;  // T, 1-based
  std::uint64_t pairs_checked = 0;
  bool sampled = false;
};

/// Checks ||(Phi^* Phi - I)_{S,T}||_{2->2} <= delta over pairs |S| = |T| = s.
/// Both orders of a pair give the same norm, so unordered pairs are enumerated.
SubmatrixCheck check_disjoint_submatrix_bound(const Eigen::MatrixXd& phi, std::size_t s,
                                              double delta,
                                              const SubmatrixCheckOptions& options = {});

/// max_{i != j} |<phi_i, phi_j>| over columns.
double coherence(const Eigen::MatrixXd& phi);

}  // namespace kfjlt
