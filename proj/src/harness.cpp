#include "kfjlt/harness.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>
#include <tuple>

#include "json.hpp"
#include "kfjlt/chaos.hpp"
#include "kfjlt/errors.hpp"
#include "kfjlt/lower_bound.hpp"
#include "kfjlt/random.hpp"
#include "kfjlt/rip.hpp"
#include "kfjlt/transforms.hpp"

namespace kfjlt {

namespace {

using Json = nlohmann::ordered_json;

constexpr std::uint64_t kGaussianEntryBudget = std::uint64_t{1} << 24;
constexpr double kDegenerateDistance = 1e-24;

// Splits [0, trials) into contiguous ranges, one per worker. Each worker fills its
// own accumulator; accumulators are merged with += in worker order.
template <class Acc, class Body>
Acc run_trials(std::size_t trials, std::size_t workers, const Acc& zero, Body body) {
  workers = std::max<std::size_t>(1, std::min(workers, trials));
  std::vector<Acc> partial(workers, zero);
  if (workers == 1) {
    for (std::size_t t = 0; t < trials; ++t) body(t, partial[0]);
    return partial[0];
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        const std::size_t begin = trials * w / workers;
        const std::size_t end = trials * (w + 1) / workers;
        for (std::size_t t = begin; t < end; ++t) body(t, partial[w]);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  Acc total = zero;
  for (const Acc& a : partial) total += a;
  return total;
}

struct Counts {
  std::vector<std::size_t> values;
  Counts& operator+=(const Counts& o) {
    for (std::size_t k = 0; k < values.size(); ++k) values[k] += o.values[k];
    return *this;
  }
};

std::uint64_t family_id(VectorFamily f) { return 0x100 + static_cast<std::uint64_t>(f); }

std::vector<double> unit_normal(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  double norm2 = 0.0;
  for (double& x : v) {
    x = rng.normal();
    norm2 += x * x;
  }
  const double inv = 1.0 / std::sqrt(norm2);
  for (double& x : v) x *= inv;
  return v;
}

std::vector<std::vector<double>> kron_family_factors(const KronDims& dims, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<double>> factors;
  for (std::size_t n : dims.sizes()) factors.push_back(unit_normal(rng, n));
  return factors;
}

double squared_norm(const std::vector<double>& y) {
  double s = 0.0;
  for (double v : y) s += v * v;
  return s;
}

[[noreturn]] void config_error(const std::string& field, const std::string& what) { throw ConfigError(field, what); }

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(y.size());
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

// Image of every point under one operator draw, stored column by column (m x p).
std::vector<double> embed_points(const KfjltOperator& op, const std::vector<std::vector<double>>& points) {
  std::vector<double> y;
  y.reserve(op.rows() * points.size());
  for (const auto& x : points) {
    const auto ax = apply_dense(op, x);
    y.insert(y.end(), ax.begin(), ax.end());
  }
  return y;
}

std::vector<double> pairwise_squared_distances(const std::vector<std::vector<double>>& points) {
  const std::size_t p = points.size();
  std::vector<double> dist(p * p, 0.0);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = i + 1; j < p; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < points[i].size(); ++k) {
        const double diff = points[i][k] - points[j][k];
        s += diff * diff;
      }
      dist[i * p + j] = s;
    }
  }
  return dist;
}

void validate_points(const KronDims& dims, const std::vector<std::vector<double>>& points) {
  if (points.size() < 2) throw ArgumentError("point-set preservation needs at least two points");
  for (const auto& x : points) {
    if (x.size() != dims.total()) throw DimensionError("every point must have length N");
  }
}

struct PairCounts {
  std::size_t joint = 0;
  std::size_t pair_failures = 0;
  PairCounts& operator+=(const PairCounts& o) {
    joint += o.joint;
    pair_failures += o.pair_failures;
    return *this;
  }
};

PairCounts count_pair_failures(const KronDims& dims, const std::vector<std::vector<double>>& points,
                               const std::vector<double>& dist, std::size_t m, double eps, std::size_t trials,
                               std::uint64_t seed, std::size_t workers, bool stop_at_first,
                               Preservation what = Preservation::distances) {
  const std::size_t p = points.size();
  return run_trials(trials, workers, PairCounts{}, [&](std::size_t t, PairCounts& acc) {
    const KfjltOperator op = build_operator(dims, m, derive_key(seed, t));
    bool any = false;
    if (what == Preservation::norms) {
      for (const auto& x : points) {
        const double n0 = squared_norm(x);
        if (n0 <= kDegenerateDistance) continue;
        if (std::abs(squared_norm(apply_dense(op, x)) / n0 - 1.0) > eps) {
          any = true;
          ++acc.pair_failures;
          if (stop_at_first) break;
        }
      }
      if (any) ++acc.joint;
      return;
    }
    const std::vector<double> y = embed_points(op, points);
    for (std::size_t i = 0; i < p; ++i) {
      const double* yi = y.data() + i * m;
      for (std::size_t j = i + 1; j < p; ++j) {
        const double d0 = dist[i * p + j];
        if (d0 <= kDegenerateDistance) continue;
        const double* yj = y.data() + j * m;
        double s = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
          const double diff = yi[k] - yj[k];
          s += diff * diff;
        }
        if (std::abs(s / d0 - 1.0) > eps) {
          any = true;
          ++acc.pair_failures;
          if (stop_at_first) break;
        }
      }
      if (any && stop_at_first) break;
    }
    if (any) ++acc.joint;
  });
}

}  // namespace

std::string to_string(VectorFamily f) {
  switch (f) {
    case VectorFamily::kron: return "kron";
    case VectorFamily::dense: return "dense";
    case VectorFamily::onehot: return "onehot";
  }
  return "?";
}

std::string to_string(Baseline b) { return b == Baseline::kfjlt ? "kfjlt" : "gaussian"; }

std::string to_string(ReportKind k) {
  switch (k) {
    case ReportKind::rip: return "rip";
    case ReportKind::chaos: return "chaos";
    case ReportKind::partition: return "partition";
  }
  return "?";
}

VectorFamily parse_family(const std::string& s) {
  if (s == "kron") return VectorFamily::kron;
  if (s == "dense") return VectorFamily::dense;
  if (s == "onehot") return VectorFamily::onehot;
  config_error("family", "unknown family '" + s + "' (expected kron, dense or onehot)");
}

Baseline parse_baseline(const std::string& s) {
  if (s == "kfjlt") return Baseline::kfjlt;
  if (s == "gaussian") return Baseline::gaussian;
  config_error("baseline", "unknown baseline '" + s + "' (expected kfjlt or gaussian)");
}

ReportKind parse_report_kind(const std::string& s) {
  if (s == "rip") return ReportKind::rip;
  if (s == "chaos") return ReportKind::chaos;
  if (s == "partition") return ReportKind::partition;
  config_error("kind", "unknown report kind '" + s + "' (expected rip, chaos or partition)");
}

PointSource parse_point_source(const std::string& s) {
  if (s == "adversarial") return PointSource::adversarial;
  if (s == "random") return PointSource::random;
  config_error("source", "unknown point source '" + s + "' (expected adversarial or random)");
}

ChaosSource parse_chaos_source(const std::string& s) {
  if (s == "kfjlt") return ChaosSource::kfjlt;
  if (s == "zero") return ChaosSource::zero;
  config_error("chaos-source", "unknown chaos source '" + s + "' (expected kfjlt or zero)");
}

void ExperimentConfig::validate() const {
  if (dims.empty()) config_error("dims", "at least one axis is required");
  for (std::size_t n : dims) {
    if (n < 1) config_error("dims", "axis sizes must be positive");
    if (!is_power_of_two(n)) config_error("dims", "axis size " + std::to_string(n) + " is not a power of two");
  }
  if (trials < 1) config_error("trials", "trial count must be positive");
  if (workers < 1) config_error("workers", "worker count must be positive");
  for (std::size_t m : m_values) {
    if (m < 1) config_error("m", "target dimensions must be positive");
  }
  switch (kind) {
    case ExperimentKind::jl_sweep:
      if (m_values.empty()) config_error("m", "at least one target dimension is required");
      if (eps_values.empty()) config_error("eps", "at least one eps is required");
      if (families.empty()) config_error("family", "at least one vector family is required");
      for (double e : eps_values) {
        if (!(e > 0.0)) config_error("eps", "eps values must be positive");
      }
      break;
    case ExperimentKind::pointset:
      if (m_values.empty()) config_error("m", "at least one target dimension is required");
      if (eps_values.empty()) config_error("eps", "at least one eps is required");
      for (double e : eps_values) {
        if (!(e > 0.0)) config_error("eps", "eps values must be positive");
      }
      if (points < 2) config_error("points", "at least two points are required");
      if (point_source == PointSource::adversarial) {
        for (std::size_t n : dims) {
          if (r < 0 || std::countr_zero(n) < r) config_error("r", "need 0 <= r <= log2 n_j on every axis");
        }
      }
      break;
    case ExperimentKind::lower_bound:
      if (trials < 1000) config_error("trials", "the lower-bound sweep needs at least 1000 trials");
      if (!(nu > 0.0 && nu < 1.0)) config_error("nu", "nu must lie in (0, 1)");
      for (int rv : r_values) {
        for (std::size_t n : dims) {
          if (rv < 0 || std::countr_zero(n) < rv) config_error("r", "need 0 <= r <= log2 n_j on every axis");
        }
        if (std::pow(std::ldexp(1.0, rv), static_cast<double>(dims.size())) < 2.0) {
          config_error("r", "s^d must be at least 2; r = 0 is outside the closed-form regime");
        }
      }
      break;
    case ExperimentKind::report:
      if (reports.empty()) config_error("kind", "at least one report kind is required");
      for (ReportKind k : reports) {
        if (k == ReportKind::rip || k == ReportKind::chaos) {
          if (m_values.empty()) config_error("m", "reports use the first target dimension");
        }
        if (k == ReportKind::rip && (sparsity < 1 || sparsity > KronDims(dims).total())) {
          config_error("sparsity", "sparsity must lie in [1, N]");
        }
        if (k == ReportKind::chaos) {
          if (trials < 1000) config_error("trials", "chaos moments need at least 1000 trials");
          if (p_values.empty()) config_error("p", "at least one moment order is required");
          for (double p : p_values) {
            if (!(p >= 1.0 && p <= 10.0)) config_error("p", "moment orders must lie in [1, 10]");
          }
        }
        if (k == ReportKind::partition && (partition_d < 1 || partition_d > 4)) {
          config_error("partition-d", "partition counting supports 1 <= d <= 4");
        }
      }
      break;
  }
}

std::string format_dims(const std::vector<std::size_t>& dims) {
  std::string out;
  for (std::size_t k = 0; k < dims.size(); ++k) {
    if (k) out += 'x';
    out += std::to_string(dims[k]);
  }
  return out;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::vector<double> family_vector(const KronDims& dims, VectorFamily family, std::uint64_t seed) {
  switch (family) {
    case VectorFamily::kron: return kron_materialize(kron_family_factors(dims, seed));
    case VectorFamily::dense: {
      Rng rng(seed);
      return unit_normal(rng, dims.total());
    }
    case VectorFamily::onehot: {
      Rng rng(seed);
      std::vector<double> v(dims.total(), 0.0);
      v[static_cast<std::size_t>(rng.below(dims.total()))] = 1.0;
      return v;
    }
  }
  throw ArgumentError("unknown vector family");
}

std::vector<SweepRecord> jl_failure_sweep(const ExperimentConfig& cfg) {
  ExperimentConfig checked = cfg;
  checked.kind = ExperimentKind::jl_sweep;
  checked.validate();
  const KronDims dims = cfg.kron_dims();
  const std::size_t n_total = dims.total();
  if (cfg.baseline == Baseline::gaussian) {
    const std::size_t m_max = *std::max_element(cfg.m_values.begin(), cfg.m_values.end());
    if (static_cast<std::uint64_t>(m_max) * n_total > kGaussianEntryBudget) {
      throw BudgetError("Gaussian baseline with m = " + std::to_string(m_max) + " and N = " + std::to_string(n_total) +
                        " exceeds the dense-matrix budget");
    }
  }

  std::vector<SweepRecord> rows;
  for (VectorFamily family : cfg.families) {
    const std::uint64_t vector_seed = derive_key(cfg.seed, family_id(family));
    const auto factors = kron_family_factors(dims, vector_seed);
    const std::vector<double> x = family_vector(dims, family, vector_seed);
    for (std::size_t m : cfg.m_values) {
      const std::uint64_t cell = derive_key(derive_key(cfg.seed, 0x200 + family_id(family)), m);
      const auto start = std::chrono::steady_clock::now();
      const Counts zero{std::vector<std::size_t>(cfg.eps_values.size(), 0)};
      const Counts counts = run_trials(cfg.trials, cfg.workers, zero, [&](std::size_t t, Counts& acc) {
        const std::uint64_t key = derive_key(cell, t);
        double norm2 = 0.0;
        if (cfg.baseline == Baseline::gaussian) {
          norm2 = squared_norm(GaussianOperator(m, n_total, key).apply(x));
        } else if (cfg.path == OperatorPath::unsampled) {
          norm2 = squared_norm(apply_unsampled(build_operator(dims, 1, key), x));
        } else {
          const KfjltOperator op = build_operator(dims, m, key);
          norm2 = squared_norm(family == VectorFamily::kron ? apply_factored(op, factors) : apply_dense(op, x));
        }
        const double deviation = std::abs(norm2 - 1.0);
        for (std::size_t e = 0; e < cfg.eps_values.size(); ++e) {
          if (deviation > cfg.eps_values[e]) ++acc.values[e];
        }
      });
      const double elapsed =
          cfg.record_timing
              ? std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count()
              : 0.0;
      for (std::size_t e = 0; e < cfg.eps_values.size(); ++e) {
        SweepRecord rec;
        rec.family = cfg.baseline == Baseline::gaussian ? "gaussian:" + to_string(family) : to_string(family);
        rec.d = dims.order();
        rec.dims = format_dims(cfg.dims);
        rec.N = n_total;
        rec.m = cfg.path == OperatorPath::unsampled && cfg.baseline == Baseline::kfjlt ? n_total : m;
        rec.eps = cfg.eps_values[e];
        rec.trials = cfg.trials;
        rec.failures = counts.values[e];
        rec.eta_hat = static_cast<double>(rec.failures) / static_cast<double>(rec.trials);
        rec.std_error = std::sqrt(rec.eta_hat * (1.0 - rec.eta_hat) / static_cast<double>(rec.trials));
        rec.seed = cfg.seed;
        rec.wall_ms = elapsed;
        rows.push_back(rec);
      }
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const SweepRecord& a, const SweepRecord& b) {
    return std::tie(a.family, a.m, a.eps) < std::tie(b.family, b.m, b.eps);
  });
  return rows;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRecord>& rows) {
  os << kSweepHeader << '\n';
  for (const auto& r : rows) {
    os << r.family << ',' << r.d << ',' << r.dims << ',' << r.N << ',' << r.m << ',' << format_number(r.eps) << ','
       << r.trials << ',' << r.failures << ',' << format_number(r.eta_hat) << ',' << format_number(r.std_error)
       << ',' << r.seed << ',' << format_number(r.wall_ms) << '\n';
  }
}

PointsetReport pointset_preservation(const KronDims& dims, const std::vector<std::vector<double>>& points,
                                     std::size_t m, double eps, std::size_t trials, std::uint64_t seed,
                                     std::size_t workers) {
  validate_points(dims, points);
  if (trials < 1) throw ArgumentError("trial count must be positive");
  const std::size_t p = points.size();
  const auto dist = pairwise_squared_distances(points);
  PointsetReport report;
  report.p = p;
  report.m = m;
  report.eps = eps;
  report.trials = trials;
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = i + 1; j < p; ++j) {
      if (dist[i * p + j] <= kDegenerateDistance) {
        ++report.degenerate_pairs;
      } else {
        ++report.pairs;
      }
    }
  }
  const PairCounts counts = count_pair_failures(dims, points, dist, m, eps, trials, seed, workers, false);
  const double t = static_cast<double>(trials);
  report.joint_failures = counts.joint;
  report.joint_estimate = static_cast<double>(counts.joint) / t;
  report.std_error = std::sqrt(report.joint_estimate * (1.0 - report.joint_estimate) / t);
  report.pair_failure =
      report.pairs == 0 ? 0.0 : static_cast<double>(counts.pair_failures) / (t * static_cast<double>(report.pairs));
  report.union_bound = static_cast<double>(p) * static_cast<double>(p - 1) * report.pair_failure;
  return report;
}

double joint_failure_rate(const KronDims& dims, const std::vector<std::vector<double>>& points, std::size_t m,
                          double eps, std::size_t trials, std::uint64_t seed, std::size_t workers,
                          Preservation what) {
  validate_points(dims, points);
  if (trials < 1) throw ArgumentError("trial count must be positive");
  const auto dist = what == Preservation::distances ? pairwise_squared_distances(points) : std::vector<double>{};
  const PairCounts counts = count_pair_failures(dims, points, dist, m, eps, trials, seed, workers, true, what);
  return static_cast<double>(counts.joint) / static_cast<double>(trials);
}

std::size_t required_dimension(const KronDims& dims, const std::vector<std::vector<double>>& points, double eps,
                               double target, std::size_t trials, std::uint64_t seed, std::size_t m_max,
                               std::size_t workers, Preservation what) {
  auto ok = [&](std::size_t m) {
    return joint_failure_rate(dims, points, m, eps, trials, derive_key(seed, m), workers, what) <= target;
  };
  if (!ok(m_max)) return m_max + 1;
  std::size_t lo = 1;
  std::size_t hi = m_max;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (ok(mid)) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return lo;
}

std::vector<std::vector<double>> random_points(const KronDims& dims, std::size_t p, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<double>> out;
  for (std::size_t k = 0; k < p; ++k) out.push_back(unit_normal(rng, dims.total()));
  return out;
}

std::vector<std::vector<double>> adversarial_points(const KronDims& dims, int r, std::size_t p, std::uint64_t seed) {
  std::vector<std::vector<double>> points;
  for (std::uint64_t copy = 1; points.size() < p; ++copy) {
    const AdversarialSet set = make_adversarial_set(dims, r, derive_key(seed, copy));
    auto more = enumerate_points(set, p - points.size());
    points.insert(points.end(), more.begin(), more.end());
  }
  return points;
}

std::vector<PointsetReport> pointset_sweep(const ExperimentConfig& cfg) {
  ExperimentConfig checked = cfg;
  checked.kind = ExperimentKind::pointset;
  checked.validate();
  const KronDims dims = cfg.kron_dims();
  const auto points = cfg.point_source == PointSource::adversarial
                          ? adversarial_points(dims, cfg.r, cfg.points, derive_key(cfg.seed, 0x300))
                          : random_points(dims, cfg.points, derive_key(cfg.seed, 0x301));
  std::vector<PointsetReport> rows;
  for (std::size_t m : cfg.m_values) {
    for (double eps : cfg.eps_values) {
      const std::uint64_t cell = derive_key(derive_key(cfg.seed, 0x302), m);
      rows.push_back(pointset_preservation(dims, points, m, eps, cfg.trials, cell, cfg.workers));
    }
  }
  return rows;
}

void write_pointset_csv(std::ostream& os, const ExperimentConfig& cfg, const std::vector<PointsetReport>& rows) {
  const KronDims dims = cfg.kron_dims();
  os << kPointsetHeader << '\n';
  for (const auto& r : rows) {
    os << dims.order() << ',' << format_dims(cfg.dims) << ',' << dims.total() << ',' << r.p << ',' << r.m << ','
       << format_number(r.eps) << ',' << r.trials << ',' << r.joint_failures << ',' << format_number(r.joint_estimate)
       << ',' << format_number(r.std_error) << ',' << format_number(r.pair_failure) << ','
       << format_number(r.union_bound) << ',' << r.pairs << ',' << r.degenerate_pairs << ',' << cfg.seed << '\n';
  }
}

ScalingResult scaling_experiment(const std::vector<std::size_t>& p_values, double eps, double target,
                                 std::size_t trials, std::uint64_t seed, std::size_t workers,
                                 Preservation what) {
  ScalingResult result;
  for (int d = 1; d <= 2; ++d) {
    const KronDims dims = d == 1 ? KronDims{64} : KronDims{8, 8};
    std::vector<double> x;
    std::vector<double> y;
    for (std::size_t p : p_values) {
      if (p < 2) throw ArgumentError("scaling experiment needs p >= 2");
      std::size_t s = 1;
      while ((s * 2) * static_cast<std::size_t>(d) <= static_cast<std::size_t>(std::log2(static_cast<double>(p)))) {
        s *= 2;
      }
      const int r = std::countr_zero(s);
      const std::uint64_t cell = derive_key(derive_key(seed, static_cast<std::uint64_t>(d)), p);
      const auto points = adversarial_points(dims, r, p, cell);
      const std::size_t m_star =
          required_dimension(dims, points, eps, target, trials, derive_key(cell, 3), 64 * dims.total(), workers, what);
      result.rows.push_back({d, format_dims(dims.sizes()), p, s, m_star});
      x.push_back(std::log(std::log(static_cast<double>(p))));
      y.push_back(std::log(static_cast<double>(m_star)));
    }
    (d == 1 ? result.slope_d1 : result.slope_d2) = least_squares_slope(x, y);
  }
  result.ratio = result.slope_d1 != 0.0 ? result.slope_d2 / result.slope_d1 : 0.0;
  return result;
}

void write_scaling_csv(std::ostream& os, const ScalingResult& result, double eps, double target,
                       std::size_t trials, std::uint64_t seed) {
  os << "d,dims,p,s,m_star,eps,target,trials,seed\n";
  for (const auto& row : result.rows) {
    os << row.d << ',' << row.dims << ',' << row.p << ',' << row.s << ',' << row.m_star << ',' << format_number(eps)
       << ',' << format_number(target) << ',' << trials << ',' << seed << '\n';
  }
}

std::vector<LowerBoundRecord> lower_bound_sweep(const ExperimentConfig& cfg) {
  ExperimentConfig checked = cfg;
  checked.kind = ExperimentKind::lower_bound;
  checked.validate();
  const KronDims dims = cfg.kron_dims();
  const int d = dims.order();
  std::vector<LowerBoundRecord> rows;
  for (int r : cfg.r_values) {
    const std::uint64_t r_key = derive_key(cfg.seed, static_cast<std::uint64_t>(r));
    const AdversarialSet set = make_adversarial_set(dims, r, r_key);
    for (std::size_t m : cfg.m_values) {
      LowerBoundRecord rec;
      rec.d = d;
      rec.dims = format_dims(cfg.dims);
      rec.r = r;
      rec.s = set.s();
      const double sd = std::pow(static_cast<double>(rec.s), d);
      rec.p = std::ldexp(1.0, d * static_cast<int>(rec.s));
      rec.m = m;
      const EmpiricalFailure emp = failure_probability_empirical(set, m, cfg.trials, derive_key(r_key, m));
      rec.trials = emp.trials;
      rec.failures = emp.failures;
      rec.empirical = emp.estimate;
      rec.std_error = emp.std_error;
      const FailureProbability exact = failure_probability_exact(rec.s, d, m);
      rec.closed_form = exact.probability;
      rec.lower_bound = exact.lower_bound;
      rec.m_required = 0.5 * std::log(1.0 / cfg.nu) * sd;
      rec.nu = cfg.nu;
      rec.flag = rec.empirical > cfg.nu && static_cast<double>(m) < rec.m_required;
      rec.seed = cfg.seed;
      rows.push_back(rec);
    }
  }
  return rows;
}

void write_lower_bound_csv(std::ostream& os, const std::vector<LowerBoundRecord>& rows) {
  os << kLowerBoundHeader << '\n';
  for (const auto& r : rows) {
    os << r.d << ',' << r.dims << ',' << r.r << ',' << r.s << ',' << format_number(r.p) << ',' << r.m << ','
       << r.trials << ',' << r.failures << ',' << format_number(r.empirical) << ',' << format_number(r.std_error)
       << ',' << format_number(r.closed_form) << ',' << format_number(r.lower_bound) << ','
       << format_number(r.m_required) << ',' << format_number(r.nu) << ',' << (r.flag ? 1 : 0) << ',' << r.seed
       << '\n';
  }
}

std::string run_report(const ExperimentConfig& cfg, ReportKind kind) {
  ExperimentConfig checked = cfg;
  checked.kind = ExperimentKind::report;
  checked.reports = {kind};
  checked.validate();
  const KronDims dims = cfg.kron_dims();

  Json doc;
  doc["schema"] = kReportSchema;
  doc["kind"] = to_string(kind);
  doc["seed"] = cfg.seed;

  if (kind == ReportKind::partition) {
    const PartitionCountingReport rep = check_partition_counting(cfg.partition_d);
    doc["d"] = rep.d;
    doc["checked"] = rep.checked;
    doc["violations"] = rep.violations;
    return doc.dump(2) + "\n";
  }

  const std::size_t m = cfg.m_values.front();
  const KfjltOperator op = build_operator(dims, m, cfg.seed);
  const Eigen::MatrixXd phi = materialize(op);
  doc["dims"] = cfg.dims;
  doc["N"] = dims.total();
  doc["m"] = m;

  if (kind == ReportKind::rip) {
    const RipReport rip = rip_constant(phi, cfg.sparsity);
    doc["s"] = cfg.sparsity;
    doc["delta"] = rip.delta;
    doc["witness_support"] = rip.witness_support;
    doc["supports_checked"] = rip.supports_checked;
    const std::size_t s2 = 2 * cfg.sparsity;
    if (s2 <= dims.total() && binomial(dims.total(), s2) <= kDefaultSupportBudget) {
      const RipReport rip2 = rip_constant(phi, s2);
      SubmatrixCheckOptions opts;
      opts.seed = cfg.seed;
      const SubmatrixCheck sub = check_disjoint_submatrix_bound(phi, cfg.sparsity, rip2.delta, opts);
      doc["delta_2s"] = rip2.delta;
      doc["submatrix_bound"] = {{"holds", sub.holds},
                                {"worst_norm", sub.worst_norm},
                                {"worst_rows", sub.worst_rows},
                                {"worst_cols", sub.worst_cols},
                                {"pairs_checked", sub.pairs_checked},
                                {"sampled", sub.sampled}};
    }
    return doc.dump(2) + "\n";
  }

  // chaos
  ChaosCoefficients coeffs;
  if (cfg.chaos_source == ChaosSource::zero) {
    const auto n = static_cast<Eigen::Index>(dims.total());
    coeffs = chaos_from_matrix(dims, Eigen::MatrixXd::Zero(n, n));
  } else {
    const auto x = family_vector(dims, VectorFamily::kron, derive_key(cfg.seed, family_id(VectorFamily::kron)));
    coeffs = chaos_coefficients(dims, phi, x);
  }
  doc["source"] = cfg.chaos_source == ChaosSource::zero ? "zero" : "kfjlt";
  doc["trials"] = cfg.trials;
  doc["expectation"] = chaos_expectation(coeffs);
  MomentProfile decoupled;
  for (ChaosMode mode : {ChaosMode::coupled, ChaosMode::decoupled}) {
    MomentProfile prof = estimate_chaos_moments(coeffs, mode, cfg.p_values, cfg.trials, cfg.seed);
    Json list = Json::array();
    for (const auto& mom : prof.moments) {
      list.push_back({{"p", mom.p}, {"lp", mom.lp}, {"stderr", mom.std_error}});
    }
    doc[mode == ChaosMode::coupled ? "coupled" : "decoupled"] = list;
    if (mode == ChaosMode::decoupled) decoupled = std::move(prof);
  }
  if (coeffs.B.size() <= kMaxPartitionNormEntries && 2 * dims.order() <= 6) {
    Json bounds = Json::array();
    double fitted = 0.0;
    for (const auto& mom : decoupled.moments) {
      const MomentBound mb = moment_bound_mp(coeffs.B, std::max(2.0, mom.p));
      if (mb.value > 0.0) fitted = std::max(fitted, mom.lp / mb.value);
      bounds.push_back({{"p", mom.p}, {"m_p", mb.value}, {"exact", mb.exact}});
    }
    doc["moment_bounds"] = bounds;
    doc["fitted_constant"] = fitted;
  }
  return doc.dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open '" + path + "' for writing");
  f << text;
  f.flush();
  if (!f) throw Error("failed writing '" + path + "'");
}

void run_reports(const ExperimentConfig& cfg, std::ostream& fallback) {
  ExperimentConfig checked = cfg;
  checked.kind = ExperimentKind::report;
  checked.validate();
  if (!cfg.out.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(cfg.out, ec);
    if (ec) throw Error("cannot create report directory '" + cfg.out + "': " + ec.message());
  }
  for (ReportKind kind : cfg.reports) {
    const std::string text = run_report(cfg, kind);
    if (cfg.out.empty()) {
      fallback << text;
    } else {
      write_text_file((std::filesystem::path(cfg.out) / (to_string(kind) + ".json")).string(), text);
    }
  }
}

}  // namespace kfjlt
