#include "kfjlt/chaos.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "kfjlt/errors.hpp"
#include "kfjlt/random.hpp"
#include "kfjlt/rip.hpp"
#include "kfjlt/transforms.hpp"

namespace kfjlt {

namespace {

constexpr double kRelSlack = 1e-12;

void validate_partition(const Array& B, const SetPartition& partition) {
  const int k = B.dims().order();
  AxisSet seen;
  for (AxisSet block : partition.blocks) {
    if (block.empty()) throw ArgumentError("partition blocks must be nonempty");
    if (!seen.disjoint(block)) throw ArgumentError("partition blocks overlap");
    seen = seen | block;
  }
  if (seen != AxisSet::full(k)) {
    throw ArgumentError("partition does not cover the " + std::to_string(k) + " axes of the array");
  }
}

double spectral_norm_of(const Eigen::MatrixXd& m) {
  const Eigen::MatrixXd gram = m.rows() <= m.cols() ? Eigen::MatrixXd(m * m.transpose())
                                                    : Eigen::MatrixXd(m.transpose() * m);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues()(es.eigenvalues().size() - 1)));
}

struct AlternatingRun {
  double value = 0.0;
  long sweeps = 0;
  bool converged = false;
};

AlternatingRun alternating_maximize(std::span<const double> values,
                                    const std::vector<std::vector<std::size_t>>& proj,
                                    const std::vector<std::size_t>& extents, Rng rng,
                                    const PartitionNormOptions& options) {
  const std::size_t kappa = proj.size();
  std::vector<std::vector<double>> alpha(kappa);
  for (std::size_t l = 0; l < kappa; ++l) {
    alpha[l].resize(extents[l]);
    double norm2 = 0.0;
    for (double& a : alpha[l]) {
      a = rng.normal();
      norm2 += a * a;
    }
    const double inv = norm2 > 0.0 ? 1.0 / std::sqrt(norm2) : 1.0;
    for (double& a : alpha[l]) a *= inv;
  }

  AlternatingRun run;
  double previous = -1.0;
  std::vector<double> g;
  for (int it = 0; it < options.max_iterations; ++it) {
    ++run.sweeps;
    double current = 0.0;
    for (std::size_t l = 0; l < kappa; ++l) {
      g.assign(extents[l], 0.0);
      for (std::size_t p = 0; p < values.size(); ++p) {
        double w = values[p];
        if (w == 0.0) continue;
        for (std::size_t o = 0; o < kappa; ++o) {
          if (o != l) w *= alpha[o][proj[o][p]];
        }
        g[proj[l][p]] += w;
      }
      double norm2 = 0.0;
      for (double v : g) norm2 += v * v;
      current = std::sqrt(norm2);
      if (current == 0.0) break;
      for (std::size_t r = 0; r < g.size(); ++r) alpha[l][r] = g[r] / current;
    }
    run.value = current;
    if (current - previous <= options.tolerance * std::max(1.0, current)) {
      run.converged = true;
      break;
    }
    previous = current;
  }
  return run;
}

Eigen::MatrixXd gram_minus_identity(const Eigen::MatrixXd& phi) {
  Eigen::MatrixXd g = phi.transpose() * phi;
  g.diagonal().array() -= 1.0;
  return g;
}

void append_partitions(const std::vector<int>& elements, std::size_t pos, std::vector<AxisSet>& blocks,
                       std::optional<int> kappa, std::vector<SetPartition>& out) {
  if (pos == elements.size()) {
    if (!kappa || static_cast<int>(blocks.size()) == *kappa) out.push_back(SetPartition{blocks});
    return;
  }
  const std::size_t remaining = elements.size() - pos;
  if (kappa && static_cast<int>(blocks.size()) > *kappa) return;
  if (kappa && static_cast<int>(blocks.size() + remaining) < *kappa) return;
  const AxisSet single = AxisSet::of({elements[pos]});
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    blocks[b] = blocks[b] | single;
    append_partitions(elements, pos + 1, blocks, kappa, out);
    blocks[b] = blocks[b] - single;
  }
  blocks.push_back(single);
  append_partitions(elements, pos + 1, blocks, kappa, out);
  blocks.pop_back();
}

}  // namespace

AxisSet SetPartition::ground() const noexcept {
  AxisSet g;
  for (AxisSet b : blocks) g = g | b;
  return g;
}

bool SetPartition::coarsens(const SetPartition& finer) const noexcept {
  if (ground() != finer.ground()) return false;
  return std::all_of(finer.blocks.begin(), finer.blocks.end(), [&](AxisSet f) {
    return std::any_of(blocks.begin(), blocks.end(), [&](AxisSet c) { return f.subset_of(c); });
  });
}

std::vector<SetPartition> enumerate_partitions(AxisSet ground, std::optional<int> kappa) {
  if (ground.size() > kMaxPartitionGround) {
    throw BudgetError("partition enumeration over " + std::to_string(ground.size()) +
                      " elements exceeds the limit of " + std::to_string(kMaxPartitionGround));
  }
  std::vector<SetPartition> out;
  if (kappa && *kappa < 0) return out;
  std::vector<AxisSet> blocks;
  append_partitions(ground.axes(), 0, blocks, kappa, out);
  return out;
}

PartitionNormResult partition_norm(const Array& B, const SetPartition& partition,
                                   const PartitionNormOptions& options) {
  validate_partition(B, partition);
  if (B.size() > kMaxPartitionNormEntries) {
    throw BudgetError("array with " + std::to_string(B.size()) + " entries exceeds the partition-norm budget");
  }
  PartitionNormResult result;
  const auto values = B.values();
  const std::size_t kappa = partition.size();

  if (kappa == 1) {
    result.value = B.norm();
    result.exact = true;
    return result;
  }
  if (kappa == 2) {
    const auto rows = project_offsets(B.dims(), partition.blocks[0]);
    const auto cols = project_offsets(B.dims(), partition.blocks[1]);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(B.dims().extent(partition.blocks[0])),
                                              static_cast<Eigen::Index>(B.dims().extent(partition.blocks[1])));
    for (std::size_t p = 0; p < values.size(); ++p) {
      m(static_cast<Eigen::Index>(rows[p]), static_cast<Eigen::Index>(cols[p])) = values[p];
    }
    result.value = spectral_norm_of(m);
    result.exact = true;
    return result;
  }

  std::vector<std::vector<std::size_t>> proj;
  std::vector<std::size_t> extents;
  for (AxisSet block : partition.blocks) {
    proj.push_back(project_offsets(B.dims(), block));
    extents.push_back(B.dims().extent(block));
  }
  const Rng root(options.seed);
  result.converged = false;
  for (int r = 0; r < options.restarts; ++r) {
    const AlternatingRun run = alternating_maximize(values, proj, extents, root.substream(r), options);
    ++result.restarts;
    result.iterations += run.sweeps;
    if (run.value > result.value || r == 0) {
      result.value = run.value;
      result.converged = run.converged;
    }
  }
  return result;
}

MomentBound moment_bound_mp(const Array& B, double p, const PartitionNormOptions& options) {
  const int k = B.dims().order();
  MomentBound out;
  for (const SetPartition& part : enumerate_partitions(AxisSet::full(k))) {
    const PartitionNormResult r = partition_norm(B, part, options);
    out.exact = out.exact && r.exact;
    out.value += std::pow(p, static_cast<double>(part.size()) / 2.0) * r.value;
  }
  return out;
}

Eigen::MatrixXd ChaosCoefficients::matrix() const {
  const auto n = static_cast<Eigen::Index>(base.total());
  return Eigen::Map<const Eigen::MatrixXd>(B.values().data(), n, n);
}

ChaosCoefficients chaos_from_matrix(const KronDims& base, const Eigen::MatrixXd& m) {
  const auto n = static_cast<Eigen::Index>(base.total());
  if (m.rows() != n || m.cols() != n) {
    throw ShapeError("coefficient matrix must be N x N with N = " + std::to_string(base.total()));
  }
  std::vector<double> values(m.data(), m.data() + m.size());
  return ChaosCoefficients{base, Array(base.doubled(), std::move(values))};
}

ChaosCoefficients chaos_coefficients(const KronDims& base, const Eigen::MatrixXd& phi) {
  if (phi.cols() != static_cast<Eigen::Index>(base.total())) {
    throw ShapeError("Phi must have N = " + std::to_string(base.total()) + " columns");
  }
  return chaos_from_matrix(base, gram_minus_identity(phi));
}

ChaosCoefficients chaos_coefficients(const KronDims& base, const Eigen::MatrixXd& phi,
                                     std::span<const double> x) {
  if (x.size() != base.total()) throw ShapeError("x must have length N");
  Eigen::MatrixXd g = chaos_coefficients(base, phi).matrix();
  const Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
  g = xv.asDiagonal() * g * xv.asDiagonal();
  return chaos_from_matrix(base, g);
}

double chaos_expectation(const ChaosCoefficients& c) { return c.matrix().trace(); }

MomentProfile estimate_chaos_moments(const ChaosCoefficients& c, ChaosMode mode,
                                     const std::vector<double>& p_list, std::size_t trials,
                                     std::uint64_t seed, std::size_t bootstrap) {
  if (trials < 1000) throw ArgumentError("chaos moment estimation needs at least 1000 trials");
  if (bootstrap < 2) throw ArgumentError("bootstrap needs at least 2 replicates");
  for (double p : p_list) {
    if (!(p >= 1.0 && p <= 10.0)) throw ArgumentError("moment order p must lie in [1, 10]");
  }

  const Eigen::MatrixXd m = c.matrix();
  const double mean = mode == ChaosMode::coupled ? m.trace() : 0.0;
  const auto n = static_cast<Eigen::Index>(c.base.total());
  std::vector<double> samples(trials);
  auto draw = [&](Rng& rng) {
    std::vector<std::vector<double>> factors;
    for (std::size_t size : c.base.sizes()) {
      std::vector<double> f(size);
      for (double& v : f) v = rng.sign();
      factors.push_back(std::move(f));
    }
    const std::vector<double> xi = kron_materialize(factors);
    return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(xi.data(), n));
  };
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng(derive_key(seed, t));
    const Eigen::VectorXd xi = draw(rng);
    if (mode == ChaosMode::coupled) {
      samples[t] = xi.dot(m * xi) - mean;
    } else {
      const Eigen::VectorXd xibar = draw(rng);
      samples[t] = xi.dot(m * xibar);
    }
  }

  MomentProfile profile;
  profile.trials = trials;
  profile.seed = seed;
  profile.mode = mode;
  const std::size_t np = p_list.size();
  std::vector<std::vector<double>> powers(np, std::vector<double>(trials));
  for (std::size_t k = 0; k < np; ++k) {
    double sum = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
      powers[k][t] = std::pow(std::abs(samples[t]), p_list[k]);
      sum += powers[k][t];
    }
    profile.moments.push_back({p_list[k], std::pow(sum / static_cast<double>(trials), 1.0 / p_list[k]), 0.0});
  }

  Rng resample = Rng(seed).substream(0xB007);
  std::vector<double> sum(np), sum_sq(np, 0.0), total(np);
  std::fill(sum.begin(), sum.end(), 0.0);
  for (std::size_t b = 0; b < bootstrap; ++b) {
    std::fill(total.begin(), total.end(), 0.0);
    for (std::size_t t = 0; t < trials; ++t) {
      const std::size_t pick = static_cast<std::size_t>(resample.below(trials));
      for (std::size_t k = 0; k < np; ++k) total[k] += powers[k][pick];
    }
    for (std::size_t k = 0; k < np; ++k) {
      const double lp = std::pow(total[k] / static_cast<double>(trials), 1.0 / p_list[k]);
      sum[k] += lp;
      sum_sq[k] += lp * lp;
    }
  }
  const double reps = static_cast<double>(bootstrap);
  for (std::size_t k = 0; k < np; ++k) {
    const double var = (sum_sq[k] - sum[k] * sum[k] / reps) / (reps - 1.0);
    profile.moments[k].std_error = std::sqrt(std::max(0.0, var));
  }
  return profile;
}

double moment_to_tail(const std::vector<std::vector<double>>& gammas,
                      const std::vector<std::vector<double>>& exponents, double p0, double t) {
  if (!(t > 0.0)) throw ArgumentError("t must be positive");
  if (gammas.empty() || gammas.size() != exponents.size()) {
    throw ArgumentError("gammas and exponents must be nonempty with matching shapes");
  }
  const double d = static_cast<double>(gammas.size());
  double exponent = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < gammas.size(); ++k) {
    if (gammas[k].empty() || gammas[k].size() != exponents[k].size()) {
      throw ArgumentError("gammas and exponents must be nonempty with matching shapes");
    }
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < gammas[k].size(); ++l) {
      if (!(gammas[k][l] > 0.0)) throw ArgumentError("gammas must be positive");
      if (!(exponents[k][l] > 0.0)) throw ArgumentError("exponents must be positive");
      best = std::max(best, std::pow(t / (std::numbers::e * d * gammas[k][l]), 1.0 / exponents[k][l]));
    }
    exponent = std::min(exponent, best);
  }
  return std::exp(p0) * std::exp(-exponent);
}

PartitionCountingReport check_partition_counting(int d) {
  if (d < 1 || d > 4) throw ArgumentError("partition counting is checked for 1 <= d <= 4");
  PartitionCountingReport report;
  report.d = d;
  const AxisSet left = AxisSet::full(d);
  const AxisSet all = AxisSet::full(2 * d);
  const std::uint64_t subsets = std::uint64_t{1} << d;
  for (std::uint64_t sm = 0; sm < subsets; ++sm) {
    for (std::uint64_t tm = 0; tm < subsets; ++tm) {
      const AxisSet removed = AxisSet::from_mask(sm) | AxisSet::from_mask(tm).shifted(d);
      for (const SetPartition& part : enumerate_partitions(all - removed)) {
        int i_left = 0;
        int i_right = 0;
        int j_both = 0;
        for (AxisSet block : part.blocks) {
          if (block.subset_of(left)) {
            i_left += block.size();
          } else if (block.disjoint(left)) {
            i_right += block.size();
          } else {
            j_both += block.size();
          }
        }
        ++report.checked;
        // |J|/4 + (|I| + |I'|)/2 >= kappa/2, scaled by 4.
        if (j_both + 2 * (i_left + i_right) < 2 * static_cast<int>(part.size())) ++report.violations;
      }
    }
  }
  return report;
}

ExpectationBoundReport check_expectation_bound(const Eigen::MatrixXd& phi, std::span<const double> x) {
  if (x.size() != static_cast<std::size_t>(phi.cols())) throw ShapeError("x must have one entry per column of Phi");
  const Eigen::MatrixXd g = gram_minus_identity(phi);
  ExpectationBoundReport report;
  double norm2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double gii = g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
    report.expectation += gii * x[i] * x[i];
    report.max_diagonal = std::max(report.max_diagonal, std::abs(gii));
    norm2 += x[i] * x[i];
  }
  report.delta1 = rip_constant(phi, 1).delta;
  const double first = report.max_diagonal * norm2;
  const double second = report.delta1 * norm2;
  report.holds = std::abs(report.expectation) <= first * (1.0 + kRelSlack) + kRelSlack &&
                 first <= second * (1.0 + kRelSlack) + kRelSlack;
  return report;
}

}  // namespace kfjlt
