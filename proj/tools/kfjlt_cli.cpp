// kfjlt: experiment driver.
//
// Options may also come from a config file given with --config (INI or TOML;
// one section per subcommand, e.g. [jl-sweep]). Values on the command line
// override the file.

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kfjlt/errors.hpp"
#include "kfjlt/harness.hpp"

namespace {

enum ExitCode { kOk = 0, kConfigError = 1, kBudgetError = 2, kSelftestFailure = 3 };

void emit(const std::string& out, const std::string& text) {
  if (out.empty()) {
    std::cout << text;
  } else {
    kfjlt::write_text_file(out, text);
  }
}

void add_common(CLI::App* cmd, kfjlt::ExperimentConfig& cfg, bool with_eps) {
  cmd->add_option("--dims", cfg.dims, "axis sizes, e.g. 4,8,2")->delimiter(',')->capture_default_str();
  cmd->add_option("--m", cfg.m_values, "target dimensions")->delimiter(',')->capture_default_str();
  if (with_eps) cmd->add_option("--eps", cfg.eps_values, "distortion levels")->delimiter(',')->capture_default_str();
  cmd->add_option("--trials", cfg.trials, "Monte Carlo trials per cell")->capture_default_str();
  cmd->add_option("--seed", cfg.seed, "master seed")->capture_default_str();
  cmd->add_option("--out", cfg.out, "output path (standard output if omitted)");
  cmd->add_option("--workers", cfg.workers, "worker threads; results do not depend on it")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kronecker fast Johnson-Lindenstrauss experiments"};
  app.set_config("--config", "", "read options from an INI/TOML file");
  app.require_subcommand(1);

  kfjlt::ExperimentConfig cfg;

  auto* jl = app.add_subcommand("jl-sweep", "distributional JL failure-probability sweep (CSV)");
  add_common(jl, cfg, true);
  std::vector<std::string> families{"kron"};
  std::string baseline = "kfjlt";
  bool unsampled = false;
  jl->add_option("--family", families, "kron, dense or onehot")->delimiter(',')->capture_default_str();
  jl->add_option("--baseline", baseline, "kfjlt or gaussian")->capture_default_str();
  jl->add_flag("--unsampled", unsampled, "apply H D_xi without row sampling (exact isometry)");
  jl->add_flag("--timing", cfg.record_timing, "fill the wall_ms column");

  auto* ps = app.add_subcommand("pointset", "pairwise-distance preservation over a point set (CSV)");
  add_common(ps, cfg, true);
  std::string source = "adversarial";
  bool scaling = false;
  std::vector<std::size_t> p_values{4, 16, 64, 256};
  double target = 0.1;
  ps->add_option("--points", cfg.points, "number of points")->capture_default_str();
  ps->add_option("--source", source, "adversarial or random")->capture_default_str();
  ps->add_option("--r", cfg.r, "subspace dimension for adversarial points")->capture_default_str();
  ps->add_flag("--scaling", scaling, "estimate m* over --p for d = 1, 2 and report the slope ratio");
  ps->add_option("--p", p_values, "point counts for --scaling")->delimiter(',')->capture_default_str();
  ps->add_option("--target", target, "target joint failure for --scaling")->capture_default_str();
  bool distances = false;
  ps->add_flag("--distances", distances, "with --scaling, require pairwise distances to be preserved, not only norms");

  auto* lb = app.add_subcommand("lower-bound", "adversarial lower-bound sweep (CSV)");
  add_common(lb, cfg, false);
  lb->add_option("--r", cfg.r_values, "subspace dimensions")->delimiter(',')->capture_default_str();
  lb->add_option("--nu", cfg.nu, "failure level used for the flag column")->capture_default_str();

  auto* rep = app.add_subcommand("report", "JSON reports: rip, chaos, partition");
  add_common(rep, cfg, false);
  std::vector<std::string> kinds{"rip", "chaos", "partition"};
  std::string chaos_source = "kfjlt";
  rep->add_option("--kind", kinds, "report kinds")->delimiter(',')->capture_default_str();
  rep->add_option("--s", cfg.sparsity, "sparsity for the rip report")->capture_default_str();
  rep->add_option("--p", cfg.p_values, "moment orders for the chaos report")->delimiter(',')->capture_default_str();
  rep->add_option("--partition-d", cfg.partition_d, "order for the partition-counting report")->capture_default_str();
  rep->add_option("--chaos-source", chaos_source, "kfjlt or zero")->capture_default_str();

  auto* st = app.add_subcommand("selftest", "exhaustive oracle suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (st->parsed()) {
      return kfjlt::selftest(std::cout) == 0 ? kOk : kSelftestFailure;
    }
    if (jl->parsed()) {
      cfg.kind = kfjlt::ExperimentKind::jl_sweep;
      cfg.families.clear();
      for (const auto& f : families) cfg.families.push_back(kfjlt::parse_family(f));
      cfg.baseline = kfjlt::parse_baseline(baseline);
      cfg.path = unsampled ? kfjlt::OperatorPath::unsampled : kfjlt::OperatorPath::sampled;
      std::ostringstream os;
      kfjlt::write_sweep_csv(os, kfjlt::jl_failure_sweep(cfg));
      emit(cfg.out, os.str());
    } else if (ps->parsed()) {
      cfg.kind = kfjlt::ExperimentKind::pointset;
      cfg.point_source = kfjlt::parse_point_source(source);
      std::ostringstream os;
      if (scaling) {
        if (cfg.eps_values.empty()) throw kfjlt::ConfigError("eps", "at least one eps is required");
        if (cfg.trials < 1) throw kfjlt::ConfigError("trials", "trial count must be positive");
        const auto result = kfjlt::scaling_experiment(p_values, cfg.eps_values.front(), target, cfg.trials,
                                                      cfg.seed, cfg.workers,
                                                      distances ? kfjlt::Preservation::distances
                                                                : kfjlt::Preservation::norms);
        kfjlt::write_scaling_csv(os, result, cfg.eps_values.front(), target, cfg.trials, cfg.seed);
        std::cerr << "slope d=1 " << kfjlt::format_number(result.slope_d1) << ", d=2 "
                  << kfjlt::format_number(result.slope_d2) << ", ratio " << kfjlt::format_number(result.ratio)
                  << '\n';
      } else {
        kfjlt::write_pointset_csv(os, cfg, kfjlt::pointset_sweep(cfg));
      }
      emit(cfg.out, os.str());
    } else if (lb->parsed()) {
      cfg.kind = kfjlt::ExperimentKind::lower_bound;
      std::ostringstream os;
      kfjlt::write_lower_bound_csv(os, kfjlt::lower_bound_sweep(cfg));
      emit(cfg.out, os.str());
    } else if (rep->parsed()) {
      cfg.kind = kfjlt::ExperimentKind::report;
      cfg.reports.clear();
      for (const auto& k : kinds) cfg.reports.push_back(kfjlt::parse_report_kind(k));
      cfg.chaos_source = kfjlt::parse_chaos_source(chaos_source);
      kfjlt::run_reports(cfg, std::cout);
    }
  } catch (const kfjlt::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const kfjlt::BudgetError& e) {
    std::cerr << "budget error: " << e.what() << '\n';
    return kBudgetError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  }
  return kOk;
}
