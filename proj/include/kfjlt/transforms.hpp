#pragma once

// The Kronecker fast Johnson-Lindenstrauss transform
//
//   A = sqrt(N/m) * P_Omega * (H_{n_1} (x) ... (x) H_{n_d}) * D_xi,
//   xi = xi^(1) (x) ... (x) xi^(d),
//
// with orthonormal Walsh-Hadamard factors and rows drawn uniformly with
// replacement. Kronecker products follow the linearization of
// index_algebra.hpp: the first factor varies fastest.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "kfjlt/index_algebra.hpp"

namespace kfjlt {

constexpr bool is_power_of_two(std::size_t n) noexcept { return n > 0 && (n & (n - 1)) == 0; }

/// In-place orthonormal fast Walsh-Hadamard transform (Sylvester ordering).
/// Throws DimensionError if the length is not a power of two.
void fwht_inplace(std::span<double> x);

/// Returns H x.
std::vector<double> fwht(std::vector<double> x);

/// Applies H_{n_axis} along one tensor axis of an array stored in linearization order.
void fwht_axis(std::span<double> data, const KronDims& dims, int axis);

/// Applies H_{n_1} (x) ... (x) H_{n_d}, axis 1 first.
void kron_fwht_inplace(std::span<double> data, const KronDims& dims);

/// The dense orthonormal Hadamard matrix of size n (test oracle and RIP input).
Eigen::MatrixXd hadamard_matrix(std::size_t n);

struct RademacherFactors {
  std::vector<std::vector<double>> factors;  // entries exactly +1 or -1
  std::uint64_t seed = 0;

  /// xi^(1) (x) ... (x) xi^(d)
  std::vector<double> kron() const;
};

struct SampleSet {
  std::vector<std::size_t> rows;  // 1-based, duplicates allowed
  std::size_t m() const noexcept { return rows.size(); }
};

RademacherFactors draw_signs(const KronDims& dims, std::uint64_t seed);
/// m rows of [N], independently and uniformly, with replacement.
SampleSet draw_samples(std::size_t total, std::size_t m, std::uint64_t seed);

class KfjltOperator {
 public:
  /// Validates the pieces; throws ArgumentError on inconsistent input.
  KfjltOperator(KronDims dims, RademacherFactors signs, SampleSet samples);

  const KronDims& dims() const noexcept { return dims_; }
  const RademacherFactors& signs() const noexcept { return signs_; }
  const SampleSet& samples() const noexcept { return samples_; }
  std::size_t rows() const noexcept { return samples_.m(); }
  std::size_t cols() const noexcept { return dims_.total(); }
  /// sqrt(N / m)
  double scale() const noexcept { return scale_; }
  /// xi as a length-N vector (cached).
  const std::vector<double>& sign_vector() const noexcept { return xi_; }

 private:
  KronDims dims_;
  RademacherFactors signs_;
  SampleSet samples_;
  double scale_;
  std::vector<double> xi_;
};

/// Deterministic in (dims, m, seed). Signs come from sub-stream 0 and rows from
/// sub-stream 1 of `seed`. Throws ArgumentError if m < 1 or a dim is not a power of two.
KfjltOperator build_operator(const KronDims& dims, std::size_t m, std::uint64_t seed);

/// A x for an arbitrary x of length N, through the separable FWHT.
std::vector<double> apply_dense(const KfjltOperator& op, std::span<const double> x);

/// (H_{n_1} (x) ... (x) H_{n_d}) D_xi x, the exact isometry before subsampling.
std::vector<double> apply_unsampled(const KfjltOperator& op, std::span<const double> x);

/// A (x^(1) (x) ... (x) x^(d)) without forming the Kronecker product:
/// O(sum n_j log n_j + m d).
std::vector<double> apply_factored(const KfjltOperator& op,
                                   const std::vector<std::vector<double>>& factors);

/// x^(1) (x) ... (x) x^(d) with the first factor fastest. Throws ArgumentError on an empty list.
std::vector<double> kron_materialize(const std::vector<std::vector<double>>& factors);

/// Dense m x N matrix of the operator.
Eigen::MatrixXd materialize(const KfjltOperator& op);

/// sqrt(N/m) P_Omega H, i.e. the operator without its sign diagonal.
Eigen::MatrixXd sampled_hadamard(const KfjltOperator& op);

/// i.i.d. N(0, 1/m) matrix used as a fully random comparison point.
class GaussianOperator {
 public:
  GaussianOperator(std::size_t m, std::size_t n, std::uint64_t seed);

  std::size_t rows() const noexcept { return static_cast<std::size_t>(matrix_.rows()); }
  std::size_t cols() const noexcept { return static_cast<std::size_t>(matrix_.cols()); }
  const Eigen::MatrixXd& matrix() const noexcept { return matrix_; }
  std::vector<double> apply(std::span<const double> x) const;

 private:
  Eigen::MatrixXd matrix_;
};

GaussianOperator gaussian_baseline(std::size_t m, std::size_t n, std::uint64_t seed);

}  // namespace kfjlt
