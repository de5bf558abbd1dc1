// Acceptance run: one PASS/FAIL line per criterion. Exits 1 if any criterion fails.
//
// Seeds come from fixtures/acceptance.ini; tolerances are fixed below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "CLI11.hpp"
#include "kfjlt/chaos.hpp"
#include "kfjlt/harness.hpp"
#include "kfjlt/lower_bound.hpp"
#include "kfjlt/random.hpp"
#include "kfjlt/rip.hpp"
#include "kfjlt/sparsify.hpp"
#include "kfjlt/transforms.hpp"
#include "oracles.hpp"

using namespace kfjlt;

namespace {

constexpr double kHadamardTol = 1e-12;
constexpr double kFactoredTol = 1e-10;
constexpr double kFourierTol = 1e-12;
constexpr double kSigmas = 3.0;
constexpr double kPartitionNormTol = 1e-10;
constexpr double kMergeSlack = 1e-9;
constexpr double kRatioLow = 1.5;
constexpr double kRatioHigh = 3.0;
constexpr double kHadamardSeconds = 10.0;
constexpr double kFactoredSeconds = 30.0;
constexpr double kLowerBoundSeconds = 120.0;
constexpr double kSweepSeconds = 300.0;

struct Seeds {
  std::uint64_t hadamard = 0;
  std::uint64_t factored = 0;
  std::uint64_t lower_bound = 0;
  std::uint64_t jl_sweep = 0;
  std::uint64_t scaling = 0;
  std::uint64_t rip = 0;
  std::uint64_t sparsify = 0;
  std::uint64_t chaos = 0;
};

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Every artifact produced by a criterion, for the rerun comparison.
std::vector<std::pair<std::string, std::function<std::string()>>> g_artifacts;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::vector<double> normals(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

std::vector<double> unit(Rng& rng, std::size_t n) {
  auto v = normals(rng, n);
  double s = 0.0;
  for (double x : v) s += x * x;
  for (double& x : v) x /= std::sqrt(s);
  return v;
}

Outcome hadamard_identities(const Seeds& seeds) {
  const auto t0 = std::chrono::steady_clock::now();
  double worst_orth = 0.0;
  double worst_inv = 0.0;
  double worst_oracle = 0.0;
  Rng rng(seeds.hadamard);
  for (std::size_t n = 2; n <= 1024; n *= 2) {
    const Eigen::MatrixXd h = hadamard_matrix(n);
    const auto id = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    worst_orth = std::max(worst_orth, (h.transpose() * h - id).cwiseAbs().maxCoeff());
    worst_oracle = std::max(worst_oracle, (h - oracle::hadamard(n)).cwiseAbs().maxCoeff());
    const auto x = normals(rng, n);
    const auto back = fwht(fwht(x));
    double err = 0.0;
    double scale = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      err = std::max(err, std::abs(back[k] - x[k]));
      scale = std::max(scale, std::abs(x[k]));
    }
    worst_inv = std::max(worst_inv, err / scale);
  }
  const double secs = seconds_since(t0);
  return {worst_orth <= kHadamardTol && worst_inv <= kHadamardTol && worst_oracle <= kHadamardTol &&
              secs < kHadamardSeconds,
          "max|H^T H - I| " + fmt("%.2e", worst_orth) + ", involution rel " + fmt("%.2e", worst_inv) +
              ", vs explicit " + fmt("%.2e", worst_oracle) + ", " + fmt("%.2f", secs) + " s"};
}

Outcome factored_equivalence(const Seeds& seeds) {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(seeds.factored);
  const std::size_t sizes[] = {2, 4, 8, 16};
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int d = 1 + static_cast<int>(rng.below(3));
    std::vector<std::size_t> dims;
    std::vector<std::vector<double>> factors;
    for (int j = 0; j < d; ++j) {
      dims.push_back(sizes[rng.below(4)]);
      factors.push_back(normals(rng, dims.back()));
    }
    const std::size_t m = 1 + rng.below(64);
    const KfjltOperator op = build_operator(KronDims(dims), m, rng.next_u64());
    const auto dense = apply_dense(op, kron_materialize(factors));
    const auto fact = apply_factored(op, factors);
    double err = 0.0;
    double norm = 0.0;
    for (std::size_t k = 0; k < dense.size(); ++k) {
      err = std::max(err, std::abs(dense[k] - fact[k]));
      norm += dense[k] * dense[k];
    }
    worst = std::max(worst, err / std::max(std::sqrt(norm), 1e-300));
  }
  const double secs = seconds_since(t0);
  return {worst <= kFactoredTol && secs < kFactoredSeconds,
          "worst relative deviation " + fmt("%.2e", worst) + " over 1000 trials, " + fmt("%.2f", secs) + " s"};
}

Outcome subspace_fourier() {
  std::size_t checked = 0;
  std::size_t failures = 0;
  for (int n = 0; n <= 5; ++n) {
    for (int r = 0; r <= n; ++r) {
      for (const auto& v : enumerate_subspaces(n, r)) {
        const auto lhs = fwht(indicator(v));
        const auto rhs = indicator(orthogonal_complement(v));
        ++checked;
        for (std::size_t k = 0; k < lhs.size(); ++k) {
          if (std::abs(lhs[k] - rhs[k]) > kFourierTol) {
            ++failures;
            break;
          }
        }
      }
    }
  }
  return {failures == 0 && checked > 0,
          std::to_string(checked) + " subspaces of F_2^n, n <= 5, " + std::to_string(failures) + " failures"};
}

std::string lower_bound_csv(std::uint64_t seed, std::size_t workers_unused, std::vector<LowerBoundRecord>* keep) {
  (void)workers_unused;
  std::ostringstream os;
  for (std::size_t dims_case = 0; dims_case < 2; ++dims_case) {
    ExperimentConfig cfg;
    cfg.dims = dims_case == 0 ? std::vector<std::size_t>{16} : std::vector<std::size_t>{16, 16};
    cfg.r_values = {2};
    cfg.m_values = {4, 8, 16, 32};
    cfg.trials = 10'000;
    cfg.seed = seed;
    const auto rows = lower_bound_sweep(cfg);
    write_lower_bound_csv(os, rows);
    if (keep) keep->insert(keep->end(), rows.begin(), rows.end());
  }
  return os.str();
}

Outcome lower_bound_probability(const Seeds& seeds) {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<LowerBoundRecord> rows;
  lower_bound_csv(seeds.lower_bound, 1, &rows);
  const double secs = seconds_since(t0);
  bool ok = rows.size() == 8;
  double worst_z = 0.0;
  for (const auto& r : rows) {
    const double sigma = std::sqrt(r.closed_form * (1 - r.closed_form) / static_cast<double>(r.trials));
    const double z = std::abs(r.empirical - r.closed_form) / sigma;
    worst_z = std::max(worst_z, z);
    if (z > kSigmas || r.lower_bound > r.closed_form) ok = false;
    if (r.s != 4) ok = false;
  }
  g_artifacts.emplace_back("lower-bound CSV", [s = seeds.lower_bound] { return lower_bound_csv(s, 1, nullptr); });
  return {ok && secs < kLowerBoundSeconds,
          "8 grid points, worst |z| " + fmt("%.2f", worst_z) + ", bound below closed form everywhere, " +
              fmt("%.1f", secs) + " s"};
}

ExperimentConfig jl_config(std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.dims = {16, 16};
  cfg.m_values = {8, 16, 32, 64, 128};
  cfg.eps_values = {0.5};
  cfg.trials = 10'000;
  cfg.seed = seed;
  cfg.families = {VectorFamily::kron};
  return cfg;
}

Outcome jl_monotone(const Seeds& seeds) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto rows = jl_failure_sweep(jl_config(seeds.jl_sweep));
  const double secs = seconds_since(t0);
  bool ok = rows.size() == 5;
  std::string etas;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    etas += (k ? "," : "") + fmt("%.4f", rows[k].eta_hat);
    if (k == 0) continue;
    const double band = kSigmas * std::hypot(rows[k].std_error, rows[k - 1].std_error);
    if (rows[k].eta_hat > rows[k - 1].eta_hat + band) ok = false;
  }
  g_artifacts.emplace_back("jl-sweep CSV", [s = seeds.jl_sweep] {
    std::ostringstream os;
    write_sweep_csv(os, jl_failure_sweep(jl_config(s)));
    return os.str();
  });
  g_artifacts.emplace_back("jl-sweep CSV, 3 workers", [s = seeds.jl_sweep] {
    ExperimentConfig cfg = jl_config(s);
    cfg.workers = 3;
    std::ostringstream os;
    write_sweep_csv(os, jl_failure_sweep(cfg));
    return os.str();
  });
  return {ok && secs < kSweepSeconds, "eta_hat over m = 8..128: " + etas + ", " + fmt("%.1f", secs) + " s"};
}

Outcome scaling_exponent(const Seeds& seeds) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto run = [s = seeds.scaling] { return scaling_experiment({4, 16, 64, 256}, 0.5, 0.1, 1000, s); };
  const ScalingResult res = run();
  const double secs = seconds_since(t0);
  std::string ms;
  for (const auto& r : res.rows) ms += (ms.empty() ? "" : ",") + std::to_string(r.m_star);
  g_artifacts.emplace_back("scaling CSV", [run, s = seeds.scaling] {
    std::ostringstream os;
    write_scaling_csv(os, run(), 0.5, 0.1, 1000, s);
    return os.str();
  });
  return {res.ratio >= kRatioLow && res.ratio <= kRatioHigh,
          "slopes d=1 " + fmt("%.3f", res.slope_d1) + ", d=2 " + fmt("%.3f", res.slope_d2) + ", ratio " +
              fmt("%.3f", res.ratio) + " (m* = " + ms + "), " + fmt("%.1f", secs) + " s"};
}

Outcome rip_machinery(const Seeds& seeds) {
  bool ok = true;
  for (Eigen::Index n = 1; n <= 20; ++n) {
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
    for (std::size_t s = 1; s <= std::min<std::size_t>(3, static_cast<std::size_t>(n)); ++s) {
      if (rip_constant(id, s).delta != 0.0) ok = false;
    }
  }
  const bool identity_ok = ok;
  Rng rng(seeds.rip);
  std::uint64_t pairs = 0;
  double worst_ratio = 0.0;
  bool monotone = true;
  bool bound = true;
  for (int inst = 0; inst < 50; ++inst) {
    const std::size_t n = inst % 2 == 0 ? 16 : 8;
    const std::size_t m = 2 + rng.below(n);
    const Eigen::MatrixXd phi = materialize(build_operator(KronDims{n}, m, rng.next_u64()));
    std::vector<double> delta(7, 0.0);
    for (std::size_t s = 1; s <= 6; ++s) delta[s] = rip_constant(phi, s).delta;
    for (std::size_t s = 1; s < 6; ++s) {
      if (delta[s] > delta[s + 1] + 1e-12) monotone = false;
    }
    for (std::size_t s = 1; s <= 3; ++s) {
      const SubmatrixCheck c = check_disjoint_submatrix_bound(phi, s, delta[2 * s]);
      pairs += c.pairs_checked;
      if (!c.holds || c.sampled) bound = false;
      if (delta[2 * s] > 0) worst_ratio = std::max(worst_ratio, c.worst_norm / delta[2 * s]);
    }
  }
  return {identity_ok && monotone && bound,
          std::string("delta(I_N) = 0 for N <= 20: ") + (identity_ok ? "yes" : "no") + ", submatrix bound on 50 " +
              "instances (" + std::to_string(pairs) + " pairs, worst norm/delta " + fmt("%.3f", worst_ratio) +
              "): " + (bound ? "holds" : "violated") + ", monotone: " + (monotone ? "yes" : "no")};
}

Outcome sparsification(const Seeds& seeds) {
  Rng rng(seeds.sparsify);
  std::size_t arrays = 0;
  std::size_t bad_reconstruction = 0;
  std::size_t bad_support = 0;
  std::size_t bad_fiber = 0;
  std::size_t violations = 0;
  std::size_t checks = 0;
  for (const KronDims& dims : {KronDims{4, 4}, KronDims{2, 4, 2}}) {
    for (int t = 0; t < 10'000; ++t) {
      const Array x(dims, normals(rng, dims.total()));
      ++arrays;
      for (std::size_t s : {2u, 3u}) {
        const SparsifySplit sp = split(x, s);
        for (std::size_t p = 0; p < dims.total(); ++p) {
          double sum = 0.0;
          int nonzero = 0;
          for (const auto& part : sp.parts) {
            sum += part.values()[p];
            nonzero += part.values()[p] != 0.0;
          }
          if (sum != x.values()[p]) ++bad_reconstruction;
          if (nonzero > 1) ++bad_support;
        }
        if (!check_fiber_sparsity(sp)) ++bad_fiber;
        const MaxSumReport rep = check_max_sum_inequalities(x, sp);
        checks += rep.checks;
        violations += rep.violations.size();
      }
    }
  }
  const bool ok = bad_reconstruction == 0 && bad_support == 0 && bad_fiber == 0 && violations == 0;
  return {ok, std::to_string(arrays) + " arrays x s in {2,3}: reconstruction errors " +
                  std::to_string(bad_reconstruction) + ", overlapping supports " + std::to_string(bad_support) +
                  ", fiber-count failures " + std::to_string(bad_fiber) + ", inequality violations " +
                  std::to_string(violations) + " of " + std::to_string(checks)};
}

Eigen::MatrixXd matricize(const Array& b, AxisSet rows) {
  const KronDims& dims = b.dims();
  const int k = dims.order();
  const AxisSet cols = rows.complement(k);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(dims.extent(rows)), static_cast<Eigen::Index>(dims.extent(cols)));
  for (std::size_t p = 1; p <= dims.total(); ++p) {
    const PartialIndex full = delinearize(dims, AxisSet::full(k), FlatIndex{p});
    out(static_cast<Eigen::Index>(linearize(dims, restrict_to(full, rows)).value - 1),
        static_cast<Eigen::Index>(linearize(dims, restrict_to(full, cols)).value - 1)) = b[full];
  }
  return out;
}

Outcome chaos_oracles(const Seeds& seeds) {
  Rng rng(seeds.chaos);
  std::vector<std::string> notes;
  bool ok = true;

  // Partition norms of order-4 arrays against SVD / Frobenius.
  const KronDims order4{2, 3, 2, 3};
  double worst_norm = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Array b(order4, normals(rng, order4.total()));
    worst_norm = std::max(worst_norm, std::abs(partition_norm(b, SetPartition{{AxisSet::full(4)}}).value -
                                               matricize(b, AxisSet::full(4)).norm()));
    for (const auto& p : enumerate_partitions(AxisSet::full(4), 2)) {
      worst_norm = std::max(worst_norm, std::abs(partition_norm(b, p).value -
                                                 oracle::spectral_norm(matricize(b, p.blocks[0]))));
    }
  }
  if (worst_norm > kPartitionNormTol) ok = false;
  notes.push_back("norm deviation " + fmt("%.1e", worst_norm));

  // Block-merge monotonicity.
  const KronDims small{2, 2, 2, 2};
  const auto parts = enumerate_partitions(AxisSet::full(4));
  std::size_t merge_violations = 0;
  for (int t = 0; t < 1000; ++t) {
    const Array b(small, normals(rng, small.total()));
    std::vector<double> value(parts.size());
    for (std::size_t k = 0; k < parts.size(); ++k) value[k] = partition_norm(b, parts[k]).value;
    for (std::size_t a = 0; a < parts.size(); ++a) {
      for (std::size_t f = 0; f < parts.size(); ++f) {
        if (a != f && parts[a].coarsens(parts[f]) && value[a] < value[f] * (1 - kMergeSlack)) ++merge_violations;
      }
    }
  }
  if (merge_violations != 0) ok = false;
  notes.push_back("merge violations " + std::to_string(merge_violations));

  // d = 1 coupled moments against 2^N enumeration.
  double worst_z = 0.0;
  for (std::size_t n : {4u, 8u, 12u}) {
    Eigen::MatrixXd phi;
    if (n == 12) {
      phi = Eigen::MatrixXd(6, 12);
      for (Eigen::Index i = 0; i < phi.size(); ++i) phi.data()[i] = rng.normal() / std::sqrt(6.0);
    } else {
      phi = materialize(build_operator(KronDims{n}, n / 2, rng.next_u64()));
    }
    const auto x = unit(rng, n);
    const ChaosCoefficients c = chaos_coefficients(KronDims{n}, phi, x);
    const auto prof = estimate_chaos_moments(c, ChaosMode::coupled, {2.0, 4.0, 6.0}, 10'000, rng.next_u64());
    for (const auto& mom : prof.moments) {
      const double exact = oracle::exact_centered_chaos_moment(c.matrix(), mom.p);
      const double z = std::abs(mom.lp - exact) / mom.std_error;
      worst_z = std::max(worst_z, z);
      if (z > kSigmas) ok = false;
    }
  }
  notes.push_back("moment |z| <= " + fmt("%.2f", worst_z));

  // Partition-counting inequality.
  std::uint64_t counted = 0;
  for (int d = 1; d <= 3; ++d) {
    const auto rep = check_partition_counting(d);
    counted += rep.checked;
    if (!rep.ok()) ok = false;
  }
  notes.push_back(std::to_string(counted) + " counting cases");

  // Expectation bound.
  std::size_t exp_fail = 0;
  const std::size_t sizes[] = {2, 4, 8};
  for (int t = 0; t < 1000; ++t) {
    std::vector<std::size_t> dims{sizes[rng.below(3)], sizes[rng.below(3)]};
    const KronDims kd(dims);
    const Eigen::MatrixXd phi = materialize(build_operator(kd, 1 + rng.below(kd.total()), rng.next_u64()));
    const auto x = unit(rng, kd.total());
    const auto rep = check_expectation_bound(phi, x);
    if (!rep.holds || std::abs(rep.expectation) > rep.delta1 * (1 + 1e-12)) ++exp_fail;
  }
  if (exp_fail != 0) ok = false;
  notes.push_back("expectation bound failures " + std::to_string(exp_fail));

  g_artifacts.emplace_back("chaos JSON", [] {
    ExperimentConfig cfg;
    cfg.dims = {4, 2};
    cfg.m_values = {4};
    cfg.trials = 2000;
    cfg.seed = 11;
    return run_report(cfg, ReportKind::chaos);
  });
  g_artifacts.emplace_back("rip JSON", [] {
    ExperimentConfig cfg;
    cfg.dims = {16};
    cfg.m_values = {8};
    cfg.seed = 7;
    return run_report(cfg, ReportKind::rip);
  });

  std::string detail;
  for (const auto& n : notes) detail += (detail.empty() ? "" : ", ") + n;
  return {ok, detail};
}

int run_cli(const std::string& args, std::string& out) {
  std::string cmd = std::string(KFJLT_CLI) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return -1;
  char buf[4096];
  std::size_t got = 0;
  out.clear();
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, got);
  const int status = pclose(pipe);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome reproducibility() {
  std::size_t compared = 0;
  std::vector<std::string> differing;
  // Worker-count variants must equal the single-worker artifact that precedes them.
  std::string previous;
  for (const auto& [name, make] : g_artifacts) {
    const std::string a = make();
    const std::string b = make();
    ++compared;
    if (a != b || a.empty()) differing.push_back(name);
    if (name.find("workers") != std::string::npos && a != previous) differing.push_back(name + " vs 1 worker");
    previous = a;
  }
  const std::string fixtures = KFJLT_FIXTURES;
  for (const char* f : {"jl_sweep.ini", "lower_bound.ini", "report.ini"}) {
    const std::string name(f);
    const std::string sub = name == "jl_sweep.ini" ? "jl-sweep" : name == "lower_bound.ini" ? "lower-bound" : "report";
    std::string a;
    std::string b;
    const int ca = run_cli("--config " + fixtures + "/" + name + " " + sub, a);
    const int cb = run_cli("--config " + fixtures + "/" + name + " " + sub, b);
    ++compared;
    if (ca != 0 || cb != 0 || a != b || a.empty()) differing.push_back("kfjlt " + sub);
  }
  std::string detail = std::to_string(compared) + " CSV/JSON artifacts regenerated";
  if (!differing.empty()) {
    detail += "; differing:";
    for (const auto& d : differing) detail += " " + d;
  }
  return {differing.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::string config = std::string(KFJLT_FIXTURES) + "/acceptance.ini";
  Seeds seeds;
  app.set_config("--config", config, "seed fixture");
  app.add_option("--hadamard_seed", seeds.hadamard);
  app.add_option("--factored_seed", seeds.factored);
  app.add_option("--lower_bound_seed", seeds.lower_bound);
  app.add_option("--jl_sweep_seed", seeds.jl_sweep);
  app.add_option("--scaling_seed", seeds.scaling);
  app.add_option("--rip_seed", seeds.rip);
  app.add_option("--sparsify_seed", seeds.sparsify);
  app.add_option("--chaos_seed", seeds.chaos);
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"1 Hadamard identities", [&] { return hadamard_identities(seeds); }},
      {"2 factored-path equivalence", [&] { return factored_equivalence(seeds); }},
      {"3 subspace Fourier identity", [] { return subspace_fourier(); }},
      {"4 lower-bound probability", [&] { return lower_bound_probability(seeds); }},
      {"5 JL monotone sweep", [&] { return jl_monotone(seeds); }},
      {"6 scaling exponent", [&] { return scaling_exponent(seeds); }},
      {"7 RIP machinery", [&] { return rip_machinery(seeds); }},
      {"8 sparsification", [&] { return sparsification(seeds); }},
      {"9 chaos oracles", [&] { return chaos_oracles(seeds); }},
      {"10 reproducibility", [] { return reproducibility(); }},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << name << ": " << o.detail << std::endl;
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
