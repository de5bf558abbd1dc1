#pragma once

// Rademacher chaos utilities at desk scale.
//
// For an order-k array B and a partition {I_1, ..., I_kappa} of [k], the
// partition norm is
//
//   ||B||_{I_1,...,I_kappa} = sup sum_i B_i a1_{i_I1} ... a_kappa_{i_Ikappa}
//
// over unit-norm arrays a_l on the axes of I_l. One block gives the Euclidean
// norm of B, two blocks the spectral norm of the matricization. Three or more
// blocks are computed by alternating maximization, which returns a value that
// is attained by explicit unit factors and is therefore a lower bound.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "kfjlt/index_algebra.hpp"

namespace kfjlt {

inline constexpr int kMaxPartitionGround = 12;
inline constexpr std::size_t kMaxPartitionNormEntries = 100'000;

/// Blocks are nonempty, pairwise disjoint and sorted by their smallest label.
struct SetPartition {
  std::vector<AxisSet> blocks;

  std::size_t size() const noexcept { return blocks.size(); }
  AxisSet ground() const noexcept;
  /// True if every block of `finer` lies inside a block of this partition.
  bool coarsens(const SetPartition& finer) const noexcept;

  friend bool operator==(const SetPartition&, const SetPartition&) = default;
};

/// All partitions of `ground`, optionally only those with `kappa` blocks.
/// Throws BudgetError if |ground| > 12.
std::vector<SetPartition> enumerate_partitions(AxisSet ground, std::optional<int> kappa = std::nullopt);

struct PartitionNormOptions {
  int restarts = 32;
  double tolerance = 1e-10;
  int max_iterations = 10'000;
  std::uint64_t seed = 0x5EED;
};

struct PartitionNormResult {
  double value = 0.0;
  bool exact = false;  // true for one or two blocks
  int restarts = 0;
  long iterations = 0;  // sweeps summed over restarts
  bool converged = true;
};

/// Throws ArgumentError unless the blocks partition [order of B], BudgetError
/// if B has more than 1e5 entries.
PartitionNormResult partition_norm(const Array& B, const SetPartition& partition,
                                   const PartitionNormOptions& options = {});

struct MomentBound {
  double value = 0.0;
  bool exact = true;  // false if any three-or-more block norm entered
};

/// m_p(B) = sum_kappa p^(kappa/2) sum_{partitions of [k] into kappa blocks} ||B||_{I_1..I_kappa}.
MomentBound moment_bound_mp(const Array& B, double p, const PartitionNormOptions& options = {});

/// Coefficients of the order-2d chaos over base dims n. The array has shape
/// (n_1..n_d, n_1..n_d); its vectorization is the column-major N x N matrix
/// M with M(L(i), L(i')) = B_{i +. i'}.
struct ChaosCoefficients {
  KronDims base;
  Array B;

  Eigen::MatrixXd matrix() const;
};

/// B_{i+.i'} = (Phi^T Phi - I)_{L(i), L(i')}.
ChaosCoefficients chaos_coefficients(const KronDims& base, const Eigen::MatrixXd& phi);
/// B_{i+.i'} = (Phi^T Phi - I)_{L(i), L(i')} x_i x_{i'}.
ChaosCoefficients chaos_coefficients(const KronDims& base, const Eigen::MatrixXd& phi,
                                     std::span<const double> x);
/// Wraps an arbitrary N x N coefficient matrix.
ChaosCoefficients chaos_from_matrix(const KronDims& base, const Eigen::MatrixXd& m);

enum class ChaosMode {
  coupled,    // sum B_{i+.i'} xi_i xi_{i'} - E[...], the same sign vectors on both sides
  decoupled,  // sum B_{i+.i'} xi_i xibar_{i'}, independent copies
};

struct MomentEstimate {
  double p = 0.0;
  double lp = 0.0;         // (mean |X|^p)^(1/p)
  double std_error = 0.0;  // bootstrap
};

struct MomentProfile {
  std::vector<MomentEstimate> moments;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  ChaosMode mode = ChaosMode::decoupled;
};

/// sum_i B_{i+.i}, the mean of the uncentered coupled chaos.
double chaos_expectation(const ChaosCoefficients& c);

/// Sign vectors are Kronecker products of per-axis Rademacher factors.
/// Throws ArgumentError unless trials >= 1000, every p lies in [1, 10] and bootstrap >= 2.
MomentProfile estimate_chaos_moments(const ChaosCoefficients& c, ChaosMode mode,
                                     const std::vector<double>& p_list, std::size_t trials,
                                     std::uint64_t seed, std::size_t bootstrap = 200);

/// e^{p0} exp(-min_k max_l (t / (e d gamma_kl))^{1/e_kl}) with d = gammas.size().
/// Throws ArgumentError for t <= 0, nonpositive gammas or exponents, or ragged input.
double moment_to_tail(const std::vector<std::vector<double>>& gammas,
                      const std::vector<std::vector<double>>& exponents, double p0, double t);

struct PartitionCountingReport {
  int d = 0;
  std::uint64_t checked = 0;
  std::uint64_t violations = 0;
  bool ok() const noexcept { return violations == 0; }
};

/// For all S, T subsets of [d] and every partition of [2d] \ (S u (T+d)), merges the
/// blocks inside [d] into I, those inside [2d]\[d] into I', the rest into J, and
/// checks |J|/4 + (|I| + |I'|)/2 >= kappa/2. Throws ArgumentError unless 1 <= d <= 4.
PartitionCountingReport check_partition_counting(int d);

struct ExpectationBoundReport {
  double expectation = 0.0;   // sum_i (Phi^T Phi - I)_{ii} x_i^2
  double max_diagonal = 0.0;  // max_j |(Phi^T Phi - I)_{jj}|
  double delta1 = 0.0;        // RIP constant for s = 1
  bool holds = false;         // |E| <= max_diagonal ||x||^2 <= delta1 ||x||^2
};

ExpectationBoundReport check_expectation_bound(const Eigen::MatrixXd& phi, std::span<const double> x);

}  // namespace kfjlt
