#include <CLI11.hpp>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "nnpde/bounds.hpp"
#include "nnpde/experiment.hpp"

using namespace nnpde;

namespace {

struct RunArgs {
  std::string target;
  std::optional<std::uint64_t> seed;
  std::vector<std::uint64_t> seeds;
  std::string out;
  std::optional<long> iterations;
  bool no_wall_time = false;
  bool quiet = false;
};

int run_command(const RunArgs& a) {
  ExperimentConfig config;
  try {
    config = is_preset(a.target) ? preset(a.target) : load_config(a.target);
    if (a.seed) config.train.seed = *a.seed;
    if (a.iterations) config.train.iterations = *a.iterations;
    if (a.no_wall_time) config.train.wall_time = false;
    if (!a.out.empty()) config.out_dir = a.out;
    config.train.validate();
  } catch (const ConfigError& e) {
    std::cerr << "invalid config: " << e.what() << '\n';
    return kExitInvalidConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid config: " << e.what() << '\n';
    return kExitInvalidConfig;
  }

  std::vector<std::uint64_t> seeds = a.seeds;
  const bool sweep = !seeds.empty();
  if (!sweep) seeds.push_back(config.train.seed);
  int status = kExitOk;
  for (std::uint64_t s : seeds) {
    ExperimentConfig c = config;
    c.train.seed = s;
    if (sweep) c.out_dir = config.out_dir / ("seed_" + std::to_string(s));
    const RunSummary r = run_experiment(c, c.out_dir, a.quiet ? nullptr : &std::cerr);
    std::cout << c.name << " seed " << s << ": final " << std::setprecision(4) << 100 * r.final_val << "%, best "
              << 100 * r.best_val << "% at iteration " << r.best_iter << " -> " << c.out_dir.string() << '\n';
    if (r.result.aborted) {
      std::cerr << c.name << " seed " << s << " aborted: " << r.result.abort_reason << '\n';
      status = kExitAborted;
    }
  }
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neural-network solvers for second-order elliptic problems"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Train one preset or config file and write its artifacts");
  run_cmd->add_option("target", run.target, "Preset name or config path")->required();
  run_cmd->add_option("--seed", run.seed, "Seed override");
  run_cmd->add_option("--seeds", run.seeds, "Comma-separated seeds; each run writes to <out>/seed_<s>")
      ->delimiter(',');
  run_cmd->add_option("--out", run.out, "Output directory");
  run_cmd->add_option("--iterations", run.iterations, "Iteration count override");
  run_cmd->add_flag("--no-wall-time", run.no_wall_time, "Write 0 in the seconds column");
  run_cmd->add_flag("--quiet", run.quiet, "No progress output");
  run_cmd->get_option("--seed")->excludes("--seeds");

  std::string show_target;
  auto* show_cmd = app.add_subcommand("show", "Print the resolved config of a preset or config file");
  show_cmd->add_option("target", show_target, "Preset name or config path")->required();

  auto* list_cmd = app.add_subcommand("list-presets", "List the built-in presets");

  NetClassSpec spec;
  std::optional<int> L;
  std::optional<double> nL, R;
  double n = 4000, m = 1000, alpha = 1.0, mu = 0.5;
  std::vector<double> eps;
  std::string csv_path;
  bool csv_only = false;
  auto* bounds_cmd = app.add_subcommand("bounds", "Evaluate the error-analysis bounds");
  bounds_cmd->add_option("--d", spec.d, "Input dimension")->required();
  bounds_cmd->add_option("--L", L, "Depth");
  bounds_cmd->add_option("--nL", nL, "Parameter count");
  bounds_cmd->add_option("--R", R, "Weight bound");
  bounds_cmd->add_option("--f-inf", spec.f_inf, "Bound on |f|");
  bounds_cmd->add_option("--g-inf", spec.g_inf, "Bound on |g|");
  bounds_cmd->add_option("--eta", spec.eta, "Constant in Lambda_i");
  bounds_cmd->add_option("--c", spec.c, "Constant in the complexity bounds");
  bounds_cmd->add_option("--n", n, "Interior sample count");
  bounds_cmd->add_option("--m", m, "Boundary sample count");
  bounds_cmd->add_option("--alpha", alpha, "Boundary weight");
  bounds_cmd->add_option("--eps", eps, "Tolerances for the size prescriptions")->delimiter(',');
  bounds_cmd->add_option("--mu", mu, "Exponent parameter in (0, 1)");
  bounds_cmd->add_option("--csv", csv_path, "Also write the report as CSV to this file");
  bounds_cmd->add_flag("--csv-only", csv_only, "Print CSV instead of the table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (*run_cmd) return run_command(run);

  if (*show_cmd) {
    try {
      write_config(std::cout, is_preset(show_target) ? preset(show_target) : load_config(show_target));
    } catch (const ConfigError& e) {
      std::cerr << "invalid config: " << e.what() << '\n';
      return kExitInvalidConfig;
    }
    return kExitOk;
  }

  if (*list_cmd) {
    std::size_t w = 0, wb = 0;
    for (const PresetInfo& p : presets()) {
      w = std::max(w, p.name.size());
      wb = std::max(wb, p.benchmark.size());
    }
    for (const PresetInfo& p : presets())
      std::cout << std::left << std::setw(int(w) + 2) << p.name << std::setw(int(wb) + 2) << p.benchmark << p.summary
                << '\n';
    return kExitOk;
  }

  if (*bounds_cmd) {
    const bool any_class = L || nL || R;
    if (any_class && !(L && nL && R)) {
      std::cerr << "bounds: --L, --nL and --R go together\n";
      return kExitUsage;
    }
    if (!any_class && eps.empty()) {
      std::cerr << "bounds: give --L, --nL and --R, or --eps\n";
      return kExitUsage;
    }
    BoundReport report;
    try {
      if (any_class) {
        spec.L = *L;
        spec.nL = *nL;
        spec.R = *R;
        report = make_report(spec, n, m, alpha, eps, mu);
      } else {
        report = make_prescription_report(spec.d, eps, mu);
      }
    } catch (const std::invalid_argument& e) {
      std::cerr << "bounds: " << e.what() << '\n';
      return kExitUsage;
    }
    if (csv_only)
      write_csv(std::cout, report);
    else
      write_table(std::cout, report);
    if (!csv_path.empty()) {
      std::ofstream f(csv_path);
      write_csv(f, report);
    }
    return kExitOk;
  }
  return kExitUsage;
}
