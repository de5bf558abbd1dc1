#include "kfjlt/rip.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "kfjlt/errors.hpp"
#include "kfjlt/random.hpp"

namespace kfjlt {

namespace {

using Index = Eigen::Index;

bool next_combination(std::vector<std::size_t>& c, std::size_t n) {
  const std::size_t k = c.size();
  for (std::size_t i = k; i-- > 0;) {
    if (c[i] < n - k + i) {
      ++c[i];
      for (std::size_t j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
      return true;
    }
  }
  return false;
}

std::vector<std::size_t> first_combination(std::size_t k) {
  std::vector<std::size_t> c(k);
  std::iota(c.begin(), c.end(), std::size_t{0});
  return c;
}

std::vector<std::size_t> one_based(const std::vector<std::size_t>& c) {
  std::vector<std::size_t> out(c);
  for (auto& v : out) ++v;
  return out;
}

// Largest |eigenvalue| of the symmetric block gram(rows, rows).
template <int S>
double symmetric_block_radius(const Eigen::MatrixXd& gram, const std::vector<std::size_t>& idx) {
  Eigen::Matrix<double, S, S> block;
  for (int i = 0; i < S; ++i) {
    for (int j = 0; j < S; ++j) block(i, j) = gram(static_cast<Index>(idx[i]), static_cast<Index>(idx[j]));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, S, S>> es;
  es.computeDirect(block, Eigen::EigenvaluesOnly);
  return std::max(std::abs(es.eigenvalues()(0)), std::abs(es.eigenvalues()(S - 1)));
}

double symmetric_block_radius_dynamic(const Eigen::MatrixXd& gram, const std::vector<std::size_t>& idx) {
  const Index s = static_cast<Index>(idx.size());
  Eigen::MatrixXd block(s, s);
  for (Index i = 0; i < s; ++i) {
    for (Index j = 0; j < s; ++j) block(i, j) = gram(static_cast<Index>(idx[i]), static_cast<Index>(idx[j]));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(block, Eigen::EigenvaluesOnly);
  return std::max(std::abs(es.eigenvalues()(0)), std::abs(es.eigenvalues()(s - 1)));
}

double support_radius(const Eigen::MatrixXd& gram, const std::vector<std::size_t>& idx) {
  switch (idx.size()) {
    case 1: return std::abs(gram(static_cast<Index>(idx[0]), static_cast<Index>(idx[0])));
    case 2: return symmetric_block_radius<2>(gram, idx);
    case 3: return symmetric_block_radius<3>(gram, idx);
    default: return symmetric_block_radius_dynamic(gram, idx);
  }
}

// Spectral norm of the rectangular block gram(rows, cols) via the eigenvalues of B^T B.
template <int S>
double block_norm_fixed(const Eigen::MatrixXd& gram, const std::vector<std::size_t>& rows,
                        const std::vector<std::size_t>& cols) {
  Eigen::Matrix<double, S, S> b;
  for (int i = 0; i < S; ++i) {
    for (int j = 0; j < S; ++j) b(i, j) = gram(static_cast<Index>(rows[i]), static_cast<Index>(cols[j]));
  }
  const Eigen::Matrix<double, S, S> btb = b.transpose() * b;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, S, S>> es;
  es.computeDirect(btb, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues()(S - 1)));
}

double block_norm(const Eigen::MatrixXd& gram, const std::vector<std::size_t>& rows,
                  const std::vector<std::size_t>& cols) {
  switch (rows.size()) {
    case 1: return std::abs(gram(static_cast<Index>(rows[0]), static_cast<Index>(cols[0])));
    case 2: return block_norm_fixed<2>(gram, rows, cols);
    case 3: return block_norm_fixed<3>(gram, rows, cols);
    default: {
      const Index s = static_cast<Index>(rows.size());
      Eigen::MatrixXd b(s, s);
      for (Index i = 0; i < s; ++i) {
        for (Index j = 0; j < s; ++j) b(i, j) = gram(static_cast<Index>(rows[i]), static_cast<Index>(cols[j]));
      }
      const Eigen::MatrixXd btb = b.transpose() * b;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(btb, Eigen::EigenvaluesOnly);
      return std::sqrt(std::max(0.0, es.eigenvalues()(s - 1)));
    }
  }
}

Eigen::MatrixXd gram_minus_identity(const Eigen::MatrixXd& phi) {
  Eigen::MatrixXd g = phi.transpose() * phi;
  g.diagonal().array() -= 1.0;
  return g;
}

std::vector<std::size_t> random_support(Rng& rng, std::size_t n, std::size_t k) {
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) noexcept {
  if (k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 acc = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    acc = acc * (n - k + i) / i;
    if (acc > std::numeric_limits<std::uint64_t>::max()) return std::numeric_limits<std::uint64_t>::max();
  }
  return static_cast<std::uint64_t>(acc);
}

RipReport rip_constant(const Eigen::MatrixXd& phi, std::size_t s, std::uint64_t budget) {
  const std::size_t n = static_cast<std::size_t>(phi.cols());
  if (s < 1 || s > n) {
    throw ArgumentError("sparsity " + std::to_string(s) + " outside [1, " + std::to_string(n) + "]");
  }
  const std::uint64_t supports = binomial(n, s);
  if (supports > budget) {
    throw BudgetError("C(" + std::to_string(n) + ", " + std::to_string(s) + ") = " +
                      std::to_string(supports) + " supports exceed the budget of " +
                      std::to_string(budget));
  }
  const Eigen::MatrixXd gram = gram_minus_identity(phi);
  RipReport report;
  report.sparsity = s;
  report.delta = -1.0;
  auto support = first_combination(s);
  do {
    const double r = support_radius(gram, support);
    ++report.supports_checked;
    if (r > report.delta) {
      report.delta = r;
      report.witness_support = one_based(support);
    }
  } while (next_combination(support, n));
  return report;
}

SubmatrixCheck check_disjoint_submatrix_bound(const Eigen::MatrixXd& phi, std::size_t s,
                                              double delta, const SubmatrixCheckOptions& options) {
  const std::size_t n = static_cast<std::size_t>(phi.cols());
  if (s < 1 || s > n) {
    throw ArgumentError("sparsity " + std::to_string(s) + " outside [1, " + std::to_string(n) + "]");
  }
  const Eigen::MatrixXd gram = gram_minus_identity(phi);
  SubmatrixCheck out;
  out.worst_norm = -1.0;
  auto record = [&](const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols) {
    const double v = block_norm(gram, rows, cols);
    ++out.pairs_checked;
    if (v > out.worst_norm) {
      out.worst_norm = v;
      out.worst_rows = one_based(rows);
      out.worst_cols = one_based(cols);
    }
  };

  const std::uint64_t supports = binomial(n, s);
  const bool exhaustive = supports < (std::uint64_t{1} << 32) &&
                          supports * (supports + 1) / 2 <= options.pair_budget;
  if (exhaustive) {
    auto rows = first_combination(s);
    do {
      auto cols = rows;
      do {
        record(rows, cols);
      } while (next_combination(cols, n));
    } while (next_combination(rows, n));
  } else {
    out.sampled = true;
    Rng rng(options.seed);
    for (std::uint64_t k = 0; k < options.sampled_pairs; ++k) {
      record(random_support(rng, n, s), random_support(rng, n, s));
    }
  }
  out.holds = out.worst_norm <= delta * (1.0 + options.tolerance) + options.tolerance;
  return out;
}

double coherence(const Eigen::MatrixXd& phi) {
  const Eigen::MatrixXd g = phi.transpose() * phi;
  double mu = 0.0;
  for (Index i = 0; i < g.rows(); ++i) {
    for (Index j = i + 1; j < g.cols(); ++j) mu = std::max(mu, std::abs(g(i, j)));
  }
  return mu;
}

}  // namespace kfjlt
