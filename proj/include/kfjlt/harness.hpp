#pragma once

// Seeded Monte Carlo experiments and their CSV / JSON output.
//
// Every trial draws its operator from a key derived from (master seed, cell,
// trial index), and results are aggregated as counts, so outputs do not depend
// on the number of worker threads. Wall-clock time is only recorded when
// `record_timing` is set; otherwise the wall_ms column is 0 and reruns are
// byte-identical.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "kfjlt/index_algebra.hpp"

namespace kfjlt {

enum class ExperimentKind { jl_sweep, pointset, lower_bound, report };
enum class VectorFamily { kron, dense, onehot };
enum class Baseline { kfjlt, gaussian };
/// `unsampled` applies H D_xi only (an exact isometry); m is ignored.
enum class OperatorPath { sampled, unsampled };
enum class ReportKind { rip, chaos, partition };
enum class PointSource { adversarial, random };
enum class ChaosSource { kfjlt, zero };
/// What a point-set trial must preserve: all pairwise distances, or the norm of every point.
enum class Preservation { distances, norms };

std::string to_string(VectorFamily f);
std::string to_string(Baseline b);
std::string to_string(ReportKind k);
VectorFamily parse_family(const std::string& s);  // throws ConfigError("family", ...)
Baseline parse_baseline(const std::string& s);    // throws ConfigError("baseline", ...)
ReportKind parse_report_kind(const std::string& s);
PointSource parse_point_source(const std::string& s);
ChaosSource parse_chaos_source(const std::string& s);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::jl_sweep;
  std::vector<std::size_t> dims{16, 16};
  std::vector<std::size_t> m_values{8, 16, 32, 64, 128};
  std::vector<double> eps_values{0.5};
  std::size_t trials = 10'000;
  std::uint64_t seed = 42;
  std::string out;  // empty: standard output
  std::vector<VectorFamily> families{VectorFamily::kron};
  Baseline baseline = Baseline::kfjlt;
  OperatorPath path = OperatorPath::sampled;
  std::size_t workers = 1;
  bool record_timing = false;

  // pointset
  std::size_t points = 16;
  PointSource point_source = PointSource::adversarial;
  int r = 2;

  // lower bound
  std::vector<int> r_values{2};
  double nu = 0.1;

  // reports
  std::vector<ReportKind> reports{ReportKind::rip, ReportKind::chaos, ReportKind::partition};
  std::size_t sparsity = 2;
  std::vector<double> p_values{2.0, 4.0, 6.0};
  int partition_d = 2;
  ChaosSource chaos_source = ChaosSource::kfjlt;

  /// Throws ConfigError naming the offending field.
  void validate() const;
  KronDims kron_dims() const { return KronDims(dims); }
};

struct SweepRecord {
  std::string family;
  int d = 0;
  std::string dims;  // "16x16"
  std::size_t N = 0;
  std::size_t m = 0;
  double eps = 0.0;
  std::size_t trials = 0;
  std::size_t failures = 0;
  double eta_hat = 0.0;
  double std_error = 0.0;
  std::uint64_t seed = 0;
  double wall_ms = 0.0;
};

inline constexpr const char* kSweepHeader = "family,d,dims,N,m,eps,trials,failures,eta_hat,stderr,seed,wall_ms";

std::string format_dims(const std::vector<std::size_t>& dims);
/// Shortest form used in every CSV cell ("%.12g").
std::string format_number(double v);

/// Deterministic unit test vector of the given family for this configuration.
std::vector<double> family_vector(const KronDims& dims, VectorFamily family, std::uint64_t seed);

/// P(|‖Ax‖² - 1| > eps) per (family, m, eps); rows sorted by (family, m, eps).
std::vector<SweepRecord> jl_failure_sweep(const ExperimentConfig& cfg);
void write_sweep_csv(std::ostream& os, const std::vector<SweepRecord>& rows);

struct PointsetReport {
  std::size_t p = 0;
  std::size_t m = 0;
  double eps = 0.0;
  std::size_t trials = 0;
  std::size_t pairs = 0;             // nondegenerate pairs
  std::size_t degenerate_pairs = 0;  // zero distance, skipped
  std::size_t joint_failures = 0;    // trials with at least one violating pair
  double joint_estimate = 0.0;
  double std_error = 0.0;
  double pair_failure = 0.0;  // mean per-pair failure probability
  double union_bound = 0.0;   // p (p - 1) * pair_failure
};

/// Throws ArgumentError if fewer than two points are given.
PointsetReport pointset_preservation(const KronDims& dims, const std::vector<std::vector<double>>& points,
                                     std::size_t m, double eps, std::size_t trials, std::uint64_t seed,
                                     std::size_t workers = 1);

inline constexpr const char* kPointsetHeader =
    "d,dims,N,p,m,eps,trials,joint_failures,joint_eta,stderr,pair_eta,union_bound,pairs,degenerate_pairs,seed";

/// pointset_preservation over every (m, eps) of the configuration, on points from
/// the configured source.
std::vector<PointsetReport> pointset_sweep(const ExperimentConfig& cfg);
void write_pointset_csv(std::ostream& os, const ExperimentConfig& cfg, const std::vector<PointsetReport>& rows);

/// Fraction of trials with any pair (or point) violating (1 +- eps) preservation.
double joint_failure_rate(const KronDims& dims, const std::vector<std::vector<double>>& points, std::size_t m,
                          double eps, std::size_t trials, std::uint64_t seed, std::size_t workers = 1,
                          Preservation what = Preservation::distances);

/// Smallest m in [1, m_max] with joint_failure_rate <= target, by bisection.
/// Returns m_max + 1 if even m_max fails.
std::size_t required_dimension(const KronDims& dims, const std::vector<std::vector<double>>& points, double eps,
                               double target, std::size_t trials, std::uint64_t seed, std::size_t m_max,
                               std::size_t workers = 1, Preservation what = Preservation::distances);

/// p points: elements of adversarial sets built from r-dimensional subspaces. If one
/// set has fewer than p distinct elements, further sets from independent subspace
/// draws are appended.
std::vector<std::vector<double>> adversarial_points(const KronDims& dims, int r, std::size_t p, std::uint64_t seed);
std::vector<std::vector<double>> random_points(const KronDims& dims, std::size_t p, std::uint64_t seed);

struct ScalingRow {
  int d = 0;
  std::string dims;
  std::size_t p = 0;
  std::size_t s = 0;
  std::size_t m_star = 0;
};

struct ScalingResult {
  std::vector<ScalingRow> rows;
  double slope_d1 = 0.0;
  double slope_d2 = 0.0;
  double ratio = 0.0;  // slope_d2 / slope_d1
};

/// Regresses log m* on log log p for p in `p_values` and d in {1, 2}, using the
/// adversarial point sets with s the largest power of two such that 2^{d s} <= p.
/// m* is searched in [1, 64 N] with N = 64.
ScalingResult scaling_experiment(const std::vector<std::size_t>& p_values, double eps, double target,
                                 std::size_t trials, std::uint64_t seed, std::size_t workers = 1,
                                 Preservation what = Preservation::norms);
void write_scaling_csv(std::ostream& os, const ScalingResult& result, double eps, double target,
                       std::size_t trials, std::uint64_t seed);

struct LowerBoundRecord {
  int d = 0;
  std::string dims;
  int r = 0;
  std::size_t s = 0;
  double p = 0.0;  // 2^{d s}
  std::size_t m = 0;
  std::size_t trials = 0;
  std::size_t failures = 0;
  double empirical = 0.0;
  double std_error = 0.0;
  double closed_form = 0.0;
  double lower_bound = 0.0;
  double m_required = 0.0;  // (1/2) log(1/nu) (log p / (d log 2))^d
  double nu = 0.0;
  bool flag = false;  // empirical > nu while m < m_required
  std::uint64_t seed = 0;
};

inline constexpr const char* kLowerBoundHeader =
    "d,dims,r,s,p,m,trials,failures,empirical,stderr,closed_form,lower_bound,m_required,nu,flag,seed";

std::vector<LowerBoundRecord> lower_bound_sweep(const ExperimentConfig& cfg);
void write_lower_bound_csv(std::ostream& os, const std::vector<LowerBoundRecord>& rows);

inline constexpr const char* kReportSchema = "kfjlt.report/1";

/// One JSON document (serialized) for the given report kind.
std::string run_report(const ExperimentConfig& cfg, ReportKind kind);

/// Writes <out>/<kind>.json for every requested kind, or prints them to `fallback`
/// when `out` is empty. Throws Error with the path on I/O failure.
void run_reports(const ExperimentConfig& cfg, std::ostream& fallback);

/// Writes `text` to `path`, throwing Error naming the path on failure.
void write_text_file(const std::string& path, const std::string& text);

/// Exhaustive oracle suite; prints one line per check. Returns 0 if all pass.
int selftest(std::ostream& os);

}  // namespace kfjlt
