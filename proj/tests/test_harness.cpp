#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <sys/wait.h>

#include "json.hpp"
#include "kfjlt/errors.hpp"
#include "kfjlt/harness.hpp"
#include "kfjlt/lower_bound.hpp"
#include "kfjlt/random.hpp"

using namespace kfjlt;
namespace fs = std::filesystem;

namespace {

std::string sweep_csv(const ExperimentConfig& cfg) {
  std::ostringstream os;
  write_sweep_csv(os, jl_failure_sweep(cfg));
  return os.str();
}

ExperimentConfig small_sweep() {
  ExperimentConfig cfg;
  cfg.dims = {4, 4};
  cfg.m_values = {16, 4, 8};
  cfg.eps_values = {0.5, 0.25};
  cfg.trials = 2000;
  cfg.seed = 7;
  cfg.families = {VectorFamily::onehot, VectorFamily::kron, VectorFamily::dense};
  return cfg;
}

int run_cli(const std::string& args, std::string* out = nullptr) {
  const fs::path tmp = fs::temp_directory_path() / ("kfjlt_cli_" + std::to_string(::getpid()) + ".txt");
  const std::string cmd = std::string(KFJLT_CLI) + " " + args + " > " + tmp.string() + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  if (out) {
    std::ifstream f(tmp);
    std::stringstream ss;
    ss << f.rdbuf();
    *out = ss.str();
  }
  fs::remove(tmp);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

TEST(Config, ParsersRejectUnknownNames) {
  EXPECT_EQ(parse_family("kron"), VectorFamily::kron);
  EXPECT_EQ(parse_baseline("gaussian"), Baseline::gaussian);
  try {
    parse_family("sparse");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "family");
  }
  try {
    parse_baseline("srht");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "baseline");
  }
}

TEST(Config, ValidationNamesField) {
  auto field_of = [](const ExperimentConfig& cfg) {
    try {
      cfg.validate();
    } catch (const ConfigError& e) {
      return e.field();
    }
    return std::string();
  };
  ExperimentConfig cfg;
  EXPECT_EQ(field_of(cfg), "");
  cfg.dims = {4, 6};
  EXPECT_EQ(field_of(cfg), "dims");
  cfg = ExperimentConfig{};
  cfg.eps_values = {-0.1};
  EXPECT_EQ(field_of(cfg), "eps");
  cfg = ExperimentConfig{};
  cfg.trials = 0;
  EXPECT_EQ(field_of(cfg), "trials");
  cfg = ExperimentConfig{};
  cfg.m_values = {};
  EXPECT_EQ(field_of(cfg), "m");
  cfg = ExperimentConfig{};
  cfg.kind = ExperimentKind::lower_bound;
  cfg.nu = 1.5;
  EXPECT_EQ(field_of(cfg), "nu");
}

TEST(JlSweep, HeaderIsExact) {
  EXPECT_STREQ(kSweepHeader, "family,d,dims,N,m,eps,trials,failures,eta_hat,stderr,seed,wall_ms");
  EXPECT_EQ(first_line(sweep_csv(small_sweep())), kSweepHeader);
}

TEST(JlSweep, RowsSortedAndConsistent) {
  const auto rows = jl_failure_sweep(small_sweep());
  ASSERT_EQ(rows.size(), 3u * 3u * 2u);
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const auto& a = rows[k - 1];
    const auto& b = rows[k];
    EXPECT_TRUE(std::tie(a.family, a.m, a.eps) < std::tie(b.family, b.m, b.eps));
  }
  for (const auto& r : rows) {
    EXPECT_GE(r.eta_hat, 0.0);
    EXPECT_LE(r.eta_hat, 1.0);
    EXPECT_DOUBLE_EQ(r.std_error, std::sqrt(r.eta_hat * (1 - r.eta_hat) / r.trials));
    EXPECT_EQ(r.wall_ms, 0.0);
    EXPECT_EQ(r.dims, "4x4");
    EXPECT_EQ(r.N, 16u);
  }
  // A smaller eps can only fail more often.
  for (std::size_t k = 0; k + 1 < rows.size(); k += 2) EXPECT_GE(rows[k].failures, rows[k + 1].failures);
}

TEST(JlSweep, ByteIdenticalAcrossRunsAndWorkers) {
  ExperimentConfig cfg = small_sweep();
  const std::string a = sweep_csv(cfg);
  EXPECT_EQ(a, sweep_csv(cfg));
  cfg.workers = 3;
  EXPECT_EQ(a, sweep_csv(cfg));
}

TEST(JlSweep, UnsampledPathNeverFails) {
  ExperimentConfig cfg = small_sweep();
  cfg.path = OperatorPath::unsampled;
  cfg.eps_values = {1e-9};
  for (const auto& r : jl_failure_sweep(cfg)) {
    EXPECT_EQ(r.failures, 0u) << r.family;
    EXPECT_EQ(r.m, 16u);
  }
}

TEST(JlSweep, GaussianBaselineLabelAndBudget) {
  ExperimentConfig cfg = small_sweep();
  cfg.baseline = Baseline::gaussian;
  cfg.families = {VectorFamily::dense};
  cfg.trials = 500;
  const auto rows = jl_failure_sweep(cfg);
  for (const auto& r : rows) EXPECT_EQ(r.family, "gaussian:dense");
  cfg.dims = {4096, 4096};
  cfg.m_values = {8};
  EXPECT_THROW(jl_failure_sweep(cfg), BudgetError);
}

TEST(JlSweep, FamilyVectorsAreUnit) {
  const KronDims dims{4, 8};
  for (VectorFamily f : {VectorFamily::kron, VectorFamily::dense, VectorFamily::onehot}) {
    double s = 0.0;
    for (double v : family_vector(dims, f, 3)) s += v * v;
    EXPECT_NEAR(s, 1.0, 1e-14);
  }
}

TEST(Pointset, IdenticalPointsAreDegenerate) {
  const KronDims dims{4, 4};
  const auto p = random_points(dims, 1, 5);
  const PointsetReport rep = pointset_preservation(dims, {p[0], p[0]}, 8, 0.5, 100, 1);
  EXPECT_EQ(rep.pairs, 0u);
  EXPECT_EQ(rep.degenerate_pairs, 1u);
  EXPECT_EQ(rep.joint_failures, 0u);
}

TEST(Pointset, TooFewPointsThrows) {
  const KronDims dims{4, 4};
  EXPECT_THROW(pointset_preservation(dims, random_points(dims, 1, 5), 8, 0.5, 100, 1), ArgumentError);
}

TEST(Pointset, JointFailureBelowUnionBound) {
  const KronDims dims{8, 8};
  for (std::size_t m : {8u, 32u}) {
    const auto rep = pointset_preservation(dims, random_points(dims, 6, 2), m, 0.5, 2000, 3 + m);
    EXPECT_LE(rep.joint_estimate, rep.union_bound + 3 * rep.std_error);
    EXPECT_EQ(rep.pairs, 15u);
  }
}

TEST(Pointset, NormModeMatchesDistanceToOrigin) {
  const KronDims dims{4, 4};
  auto pts = adversarial_points(dims, 1, 6, 9);
  const double norms = joint_failure_rate(dims, pts, 6, 0.5, 1000, 4, 1, Preservation::norms);
  pts.push_back(std::vector<double>(16, 0.0));
  // Distances now include every ||x - 0||; they can only fail at least as often.
  EXPECT_GE(joint_failure_rate(dims, pts, 6, 0.5, 1000, 4), norms);
}

TEST(Pointset, AdversarialPointsFillWithFurtherCopies) {
  const KronDims dims{4, 4};
  const auto pts = adversarial_points(dims, 1, 20, 3);
  ASSERT_EQ(pts.size(), 20u);
  for (const auto& x : pts) {
    double s = 0.0;
    int support = 0;
    for (double v : x) {
      s += v * v;
      support += v != 0.0;
    }
    EXPECT_NEAR(s, 1.0, 1e-14);
    EXPECT_EQ(support, 4);
  }
}

TEST(Pointset, RequiredDimensionBisects) {
  const KronDims dims{8, 8};
  const auto pts = random_points(dims, 4, 1);
  const std::size_t m = required_dimension(dims, pts, 0.5, 0.1, 500, 2, 512);
  ASSERT_LE(m, 512u);
  EXPECT_LE(joint_failure_rate(dims, pts, m, 0.5, 500, derive_key(2, m)), 0.1);
  if (m > 1) {
    EXPECT_GT(joint_failure_rate(dims, pts, m - 1, 0.5, 500, derive_key(2, m - 1)), 0.1);
  }
  EXPECT_EQ(required_dimension(dims, pts, 0.01, 0.0, 200, 2, 2), 3u);
}

TEST(Pointset, SweepCsvHeader) {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::pointset;
  cfg.dims = {4, 4};
  cfg.m_values = {8};
  cfg.trials = 200;
  cfg.points = 4;
  cfg.r = 1;
  std::ostringstream os;
  write_pointset_csv(os, cfg, pointset_sweep(cfg));
  EXPECT_EQ(first_line(os.str()), kPointsetHeader);
}

TEST(LowerBound, GridMatchesClosedForm) {
  ExperimentConfig cfg;
  cfg.dims = {4, 4};
  cfg.r_values = {2};
  cfg.m_values = {16, 64, 256};
  cfg.trials = 2000;
  const auto rows = lower_bound_sweep(cfg);
  ASSERT_EQ(rows.size(), 3u);
  for (const auto& r : rows) {
    const auto f = failure_probability_exact(4, 2, r.m);
    EXPECT_EQ(r.closed_form, f.probability);
    EXPECT_EQ(r.lower_bound, f.lower_bound);
    EXPECT_EQ(r.s, 4u);
    EXPECT_DOUBLE_EQ(r.p, 256.0);
    EXPECT_NEAR(r.m_required, 0.5 * std::log(1 / cfg.nu) * std::pow(std::log(256.0) / (2 * std::log(2.0)), 2),
                1e-12);
  }
}

TEST(LowerBound, FlagFollowsInequalityDirection) {
  ExperimentConfig cfg;
  cfg.dims = {4, 4};
  cfg.r_values = {2};
  cfg.m_values = {4, 8, 16, 64};
  cfg.trials = 2000;
  cfg.nu = failure_probability_exact(4, 2, 16).probability;
  for (const auto& r : lower_bound_sweep(cfg)) {
    EXPECT_EQ(r.flag, r.empirical > r.nu && static_cast<double>(r.m) < r.m_required);
    if (r.m >= 16) {
      EXPECT_FALSE(r.flag);
    }
  }
}

TEST(LowerBound, EmptyGridIsHeaderOnly) {
  ExperimentConfig cfg;
  cfg.dims = {4, 4};
  cfg.m_values = {};
  std::ostringstream os;
  write_lower_bound_csv(os, lower_bound_sweep(cfg));
  EXPECT_EQ(os.str(), std::string(kLowerBoundHeader) + "\n");
}

TEST(Reports, RipReport) {
  ExperimentConfig cfg;
  cfg.dims = {16};
  cfg.m_values = {8};
  cfg.sparsity = 2;
  cfg.seed = 7;
  const auto doc = nlohmann::json::parse(run_report(cfg, ReportKind::rip));
  EXPECT_EQ(doc["schema"], kReportSchema);
  EXPECT_EQ(doc["kind"], "rip");
  EXPECT_GE(doc["delta"].get<double>(), 0.0);
  EXPECT_EQ(doc["witness_support"].size(), 2u);
  EXPECT_TRUE(doc["submatrix_bound"]["holds"].get<bool>());
  EXPECT_EQ(run_report(cfg, ReportKind::rip), run_report(cfg, ReportKind::rip));
}

TEST(Reports, ChaosReportWithZeroCoefficients) {
  ExperimentConfig cfg;
  cfg.dims = {4};
  cfg.m_values = {2};
  cfg.trials = 1000;
  cfg.chaos_source = ChaosSource::zero;
  const auto doc = nlohmann::json::parse(run_report(cfg, ReportKind::chaos));
  EXPECT_EQ(doc["expectation"].get<double>(), 0.0);
  for (const char* mode : {"coupled", "decoupled"}) {
    for (const auto& m : doc[mode]) EXPECT_EQ(m["lp"].get<double>(), 0.0);
  }
}

TEST(Reports, PartitionReport) {
  ExperimentConfig cfg;
  cfg.partition_d = 2;
  const auto doc = nlohmann::json::parse(run_report(cfg, ReportKind::partition));
  EXPECT_EQ(doc["violations"].get<int>(), 0);
  EXPECT_GT(doc["checked"].get<int>(), 0);
}

TEST(Reports, WritesFilesAndSurfacesPath) {
  ExperimentConfig cfg;
  cfg.reports = {ReportKind::partition};
  cfg.out = (fs::temp_directory_path() / "kfjlt_reports_test").string();
  std::ostringstream unused;
  run_reports(cfg, unused);
  EXPECT_TRUE(fs::exists(fs::path(cfg.out) / "partition.json"));
  fs::remove_all(cfg.out);
  try {
    write_text_file("/nonexistent-dir/x.csv", "x");
    FAIL() << "expected Error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent-dir/x.csv"), std::string::npos);
  }
}

TEST(Selftest, AllChecksPass) {
  std::ostringstream os;
  EXPECT_EQ(selftest(os), 0);
  EXPECT_EQ(os.str().find("FAIL"), std::string::npos);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run_cli("selftest"), 0);
  EXPECT_EQ(run_cli("jl-sweep --dims 4,6 --m 4 --trials 10"), 1);
  EXPECT_EQ(run_cli("jl-sweep --family sparse --trials 10"), 1);
  EXPECT_EQ(run_cli("jl-sweep --bogus"), 1);
  EXPECT_EQ(run_cli(""), 1);
  EXPECT_EQ(run_cli("jl-sweep --dims 4096,4096 --m 8 --baseline gaussian --trials 10"), 2);
  EXPECT_EQ(run_cli("report --kind rip --dims 64 --m 8 --s 8"), 2);
}

TEST(Cli, SweepCsvAndConfigFile) {
  std::string flags;
  ASSERT_EQ(run_cli("jl-sweep --dims 4,8,2 --m 8,16,32 --eps 0.25,0.5 --trials 1000 --seed 42 --family kron", &flags),
            0);
  EXPECT_EQ(first_line(flags), kSweepHeader);
  std::string again;
  ASSERT_EQ(run_cli("jl-sweep --dims 4,8,2 --m 8,16,32 --eps 0.25,0.5 --trials 1000 --seed 42 --family kron", &again),
            0);
  EXPECT_EQ(flags, again);

  const fs::path ini = fs::temp_directory_path() / "kfjlt_cli_test.ini";
  {
    std::ofstream f(ini);
    f << "[jl-sweep]\ndims=4,8,2\nm=8,16,32\neps=0.25,0.5\ntrials=1000\nseed=1\nfamily=kron\n";
  }
  std::string from_file;
  ASSERT_EQ(run_cli("--config " + ini.string() + " jl-sweep --seed 42", &from_file), 0);
  EXPECT_EQ(from_file, flags);
  fs::remove(ini);
}

TEST(Cli, OutFileMatchesStdout) {
  const fs::path out = fs::temp_directory_path() / "kfjlt_cli_out.csv";
  std::string printed;
  ASSERT_EQ(run_cli("lower-bound --dims 4,4 --r 2 --m 4,8 --trials 1000 --seed 3", &printed), 0);
  ASSERT_EQ(run_cli("lower-bound --dims 4,4 --r 2 --m 4,8 --trials 1000 --seed 3 --out " + out.string()), 0);
  std::ifstream f(out);
  std::stringstream ss;
  ss << f.rdbuf();
  EXPECT_EQ(ss.str(), printed);
  fs::remove(out);
}
