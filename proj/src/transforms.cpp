#include "kfjlt/transforms.hpp"

#include <cmath>
#include <string>

#include "kfjlt/errors.hpp"
#include "kfjlt/random.hpp"

namespace kfjlt {

namespace {

void require_power_of_two(std::size_t n, const char* what) {
  if (!is_power_of_two(n)) {
    throw DimensionError(std::string(what) + " length " + std::to_string(n) +
                         " is not a power of two");
  }
}

// Butterfly passes along an axis of size n whose elements are `stride` apart,
// repeated for `outer` consecutive blocks of n * stride entries.
void strided_butterflies(double* data, std::size_t n, std::size_t stride, std::size_t outer) {
  for (std::size_t h = 1; h < n; h <<= 1) {
    for (std::size_t o = 0; o < outer; ++o) {
      double* block = data + o * n * stride;
      for (std::size_t i = 0; i < n; i += 2 * h) {
        for (std::size_t j = i; j < i + h; ++j) {
          double* a = block + j * stride;
          double* b = a + h * stride;
          for (std::size_t t = 0; t < stride; ++t) {
            const double x = a[t];
            const double y = b[t];
            a[t] = x + y;
            b[t] = x - y;
          }
        }
      }
    }
  }
  const double norm = 1.0 / std::sqrt(static_cast<double>(n));
  const std::size_t count = n * stride * outer;
  for (std::size_t k = 0; k < count; ++k) data[k] *= norm;
}

}  // namespace

void fwht_inplace(std::span<double> x) {
  require_power_of_two(x.size(), "fwht input");
  strided_butterflies(x.data(), x.size(), 1, 1);
}

std::vector<double> fwht(std::vector<double> x) {
  fwht_inplace(x);
  return x;
}

void fwht_axis(std::span<double> data, const KronDims& dims, int axis) {
  if (data.size() != dims.total()) throw DimensionError("array length does not match dims");
  const std::size_t n = dims.size(axis);
  require_power_of_two(n, "axis");
  std::size_t stride = 1;
  for (int l = 1; l < axis; ++l) stride *= dims.size(l);
  strided_butterflies(data.data(), n, stride, dims.total() / (n * stride));
}

void kron_fwht_inplace(std::span<double> data, const KronDims& dims) {
  for (int axis = 1; axis <= dims.order(); ++axis) fwht_axis(data, dims, axis);
}

Eigen::MatrixXd hadamard_matrix(std::size_t n) {
  require_power_of_two(n, "Hadamard");
  Eigen::MatrixXd h(n, n);
  const double v = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k) {
      h(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) =
          (__builtin_popcountll(j & k) & 1) != 0 ? -v : v;
    }
  }
  return h;
}

std::vector<double> RademacherFactors::kron() const { return kron_materialize(factors); }

RademacherFactors draw_signs(const KronDims& dims, std::uint64_t seed) {
  Rng stream = Rng(seed).substream(0);
  RademacherFactors out;
  out.seed = seed;
  for (std::size_t n : dims.sizes()) {
    std::vector<double> f(n);
    for (double& v : f) v = stream.sign();
    out.factors.push_back(std::move(f));
  }
  return out;
}

SampleSet draw_samples(std::size_t total, std::size_t m, std::uint64_t seed) {
  Rng stream = Rng(seed).substream(1);
  SampleSet out;
  out.rows.resize(m);
  for (std::size_t& r : out.rows) r = static_cast<std::size_t>(stream.below(total)) + 1;
  return out;
}

KfjltOperator::KfjltOperator(KronDims dims, RademacherFactors signs, SampleSet samples)
    : dims_(std::move(dims)), signs_(std::move(signs)), samples_(std::move(samples)) {
  if (samples_.m() < 1) throw ArgumentError("target dimension m must be at least 1");
  for (std::size_t n : dims_.sizes()) {
    if (!is_power_of_two(n)) {
      throw ArgumentError("axis size " + std::to_string(n) + " is not a power of two");
    }
  }
  if (signs_.factors.size() != static_cast<std::size_t>(dims_.order())) {
    throw ArgumentError("need one sign factor per axis");
  }
  for (std::size_t j = 0; j < signs_.factors.size(); ++j) {
    if (signs_.factors[j].size() != dims_.sizes()[j]) {
      throw ArgumentError("sign factor " + std::to_string(j + 1) + " has the wrong length");
    }
    for (double v : signs_.factors[j]) {
      if (v != 1.0 && v != -1.0) throw ArgumentError("sign factors must be +1 or -1");
    }
  }
  for (std::size_t r : samples_.rows) {
    if (r < 1 || r > dims_.total()) throw ArgumentError("sampled row outside [1, N]");
  }
  scale_ = std::sqrt(static_cast<double>(dims_.total()) / static_cast<double>(samples_.m()));
  xi_ = signs_.kron();
}

KfjltOperator build_operator(const KronDims& dims, std::size_t m, std::uint64_t seed) {
  if (m < 1) throw ArgumentError("target dimension m must be at least 1");
  for (std::size_t n : dims.sizes()) {
    if (!is_power_of_two(n)) {
      throw ArgumentError("axis size " + std::to_string(n) + " is not a power of two");
    }
  }
  return KfjltOperator(dims, draw_signs(dims, seed), draw_samples(dims.total(), m, seed));
}

std::vector<double> apply_unsampled(const KfjltOperator& op, std::span<const double> x) {
  if (x.size() != op.cols()) {
    throw DimensionError("input has length " + std::to_string(x.size()) + ", operator expects " +
                         std::to_string(op.cols()));
  }
  const auto& xi = op.sign_vector();
  std::vector<double> y(x.size());
  for (std::size_t k = 0; k < y.size(); ++k) y[k] = xi[k] * x[k];
  kron_fwht_inplace(y, op.dims());
  return y;
}

std::vector<double> apply_dense(const KfjltOperator& op, std::span<const double> x) {
  const std::vector<double> y = apply_unsampled(op, x);
  std::vector<double> out(op.rows());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = op.scale() * y[op.samples().rows[k] - 1];
  return out;
}

std::vector<double> apply_factored(const KfjltOperator& op,
                                   const std::vector<std::vector<double>>& factors) {
  const KronDims& dims = op.dims();
  if (factors.size() != static_cast<std::size_t>(dims.order())) {
    throw DimensionError("expected " + std::to_string(dims.order()) + " factors, got " +
                         std::to_string(factors.size()));
  }
  std::vector<std::vector<double>> transformed(factors.size());
  for (std::size_t j = 0; j < factors.size(); ++j) {
    if (factors[j].size() != dims.sizes()[j]) {
      throw DimensionError("factor " + std::to_string(j + 1) + " has length " +
                           std::to_string(factors[j].size()) + ", expected " +
                           std::to_string(dims.sizes()[j]));
    }
    std::vector<double> z(factors[j].size());
    const auto& sign = op.signs().factors[j];
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = sign[i] * factors[j][i];
    fwht_inplace(z);
    transformed[j] = std::move(z);
  }
  std::vector<double> out(op.rows());
  for (std::size_t k = 0; k < out.size(); ++k) {
    std::size_t rest = op.samples().rows[k] - 1;
    double prod = op.scale();
    for (std::size_t j = 0; j < transformed.size(); ++j) {
      const std::size_t n = dims.sizes()[j];
      prod *= transformed[j][rest % n];
      rest /= n;
    }
    out[k] = prod;
  }
  return out;
}

std::vector<double> kron_materialize(const std::vector<std::vector<double>>& factors) {
  if (factors.empty()) throw ArgumentError("kron_materialize needs at least one factor");
  std::vector<double> out{1.0};
  // Each new factor becomes the slowest axis.
  for (const auto& f : factors) {
    if (f.empty()) throw ArgumentError("factors must be nonempty");
    std::vector<double> next;
    next.reserve(out.size() * f.size());
    for (double b : f) {
      for (double a : out) next.push_back(a * b);
    }
    out = std::move(next);
  }
  return out;
}

Eigen::MatrixXd materialize(const KfjltOperator& op) {
  Eigen::MatrixXd a = sampled_hadamard(op);
  const auto& xi = op.sign_vector();
  for (Eigen::Index c = 0; c < a.cols(); ++c) a.col(c) *= xi[static_cast<std::size_t>(c)];
  return a;
}

Eigen::MatrixXd sampled_hadamard(const KfjltOperator& op) {
  const std::size_t n = op.cols();
  Eigen::MatrixXd a(static_cast<Eigen::Index>(op.rows()), static_cast<Eigen::Index>(n));
  const double v = op.scale() / std::sqrt(static_cast<double>(n));
  for (std::size_t k = 0; k < op.rows(); ++k) {
    const std::size_t row = op.samples().rows[k] - 1;
    for (std::size_t c = 0; c < n; ++c) {
      a(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c)) =
          (__builtin_popcountll(row & c) & 1) != 0 ? -v : v;
    }
  }
  return a;
}

GaussianOperator::GaussianOperator(std::size_t m, std::size_t n, std::uint64_t seed) {
  if (m < 1 || n < 1) throw ArgumentError("Gaussian baseline needs m, N >= 1");
  matrix_.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  Rng stream(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  for (Eigen::Index r = 0; r < matrix_.rows(); ++r) {
    for (Eigen::Index c = 0; c < matrix_.cols(); ++c) matrix_(r, c) = scale * stream.normal();
  }
}

std::vector<double> GaussianOperator::apply(std::span<const double> x) const {
  if (x.size() != cols()) throw DimensionError("input length does not match the baseline operator");
  const Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
  const Eigen::VectorXd y = matrix_ * xv;
  return {y.data(), y.data() + y.size()};
}

GaussianOperator gaussian_baseline(std::size_t m, std::size_t n, std::uint64_t seed) {
  return GaussianOperator(m, n, seed);
}

}  // namespace kfjlt
