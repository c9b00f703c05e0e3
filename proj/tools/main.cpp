#include <filesystem>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "satmud/harness.hpp"

namespace {

using namespace satmud;

struct CommonOpts {
  std::optional<uint64_t> seed;
  std::optional<int> trials;
  std::optional<int> threads;
  std::optional<std::string> variant;
  std::string out;
};

void apply_overrides(ExperimentPlan& plan, const CommonOpts& opts) {
  if (opts.seed) plan.seed = *opts.seed;
  if (opts.trials) plan.trials = *opts.trials;
  if (opts.threads) plan.threads = *opts.threads;
  if (opts.variant) {
    if (*opts.variant == "as_printed") plan.variant = InterferenceVariant::as_printed;
    else if (*opts.variant == "complement") plan.variant = InterferenceVariant::complement;
    else throw ConfigError("--interference-variant must be as_printed|complement");
  }
}

std::string out_dir(const CommonOpts& opts) {
  const std::string dir = opts.out.empty() ? "." : opts.out;
  std::filesystem::create_directories(dir);
  return dir;
}

std::string meta_json(const ExperimentPlan& plan) {
  std::ostringstream os;
  os << "{\n  \"q_s\": " << plan.q_s << ",\n  \"q_l\": [";
  const std::vector<double> values =
      plan.sweep == SweepVar::q_s ? plan.sweep_values : std::vector<double>{double(plan.q_s)};
  for (size_t i = 0; i < values.size(); ++i) {
    const int qs = static_cast<int>(values[i]);
    os << (i ? ", " : "")
       << effective_q_l(plan, qs, plan.scenario.num_users, plan.scenario.num_sats);
  }
  os << "],\n  \"epsilon\": " << plan.epsilon << ",\n  \"trials\": " << plan.trials
     << ",\n  \"seed\": " << plan.seed << ",\n  \"interference_variant\": \""
     << (plan.variant == InterferenceVariant::as_printed ? "as_printed" : "complement")
     << "\"\n}\n";
  return os.str();
}

int run_solve(const std::string& config_path, const CommonOpts& opts,
              const std::string& report_path) {
  ExperimentPlan plan = load_plan(config_path);
  apply_overrides(plan, opts);
  if (opts.seed) plan.scenario.rng_seed = *opts.seed;

  const Scenario sc = make_scenario(plan.scenario);
  const double q_l =
      effective_q_l(plan, plan.q_s, plan.scenario.num_users, plan.scenario.num_sats);
  const RateModelParams params = params_for(sc, plan.epsilon, plan.variant);
  const AllocationReport rep = solve(sc, params, plan.q_s, q_l, plan.solver);

  std::cout << "sum_rate=" << rep.rounded_sum_rate
            << " relaxed_objective=" << rep.relaxed_objective
            << " outer_iters=" << rep.outer_iters
            << " converged=" << (rep.converged ? "yes" : "no") << "\nload=[";
  for (size_t j = 0; j < rep.load.size(); ++j)
    std::cout << (j ? ", " : "") << rep.load[j];
  std::cout << "]\n";
  if (!rep.warning.empty()) std::cout << "warning: " << rep.warning << "\n";
  if (!report_path.empty()) {
    write_file(report_path, report_to_json(rep));
    std::cout << "report written to " << report_path << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"processing-load allocation for cooperative satellite multi-user detection"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string config_path, report_path;

  auto add_common = [&](CLI::App* cmd, bool with_out) {
    cmd->add_option("config", config_path, "key=value config file")->required();
    cmd->add_option("--seed", opts.seed, "override the experiment seed");
    cmd->add_option("--trials", opts.trials, "override the trial count");
    cmd->add_option("--threads", opts.threads, "worker threads (0 = hardware)");
    cmd->add_option("--interference-variant", opts.variant,
                    "as_printed | complement");
    if (with_out) cmd->add_option("--out", opts.out, "output directory");
  };

  CLI::App* solve_cmd = app.add_subcommand("solve", "run the proposed solver once");
  add_common(solve_cmd, false);
  solve_cmd->add_option("--out", report_path, "write the allocation report JSON here");

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "run a sweep experiment");
  add_common(sweep_cmd, true);

  CLI::App* conv_cmd = app.add_subcommand("converge", "per-iteration solver trace");
  add_common(conv_cmd, true);

  CLI::App* trade_cmd = app.add_subcommand("tradeoff", "load vs rate against centralized");
  add_common(trade_cmd, true);

  CLI::App* scen_cmd = app.add_subcommand("scenario", "scenario utilities");
  CLI::App* dump_cmd = scen_cmd->add_subcommand("dump", "write channels and signatures as CSV");
  add_common(dump_cmd, true);

  try {
    app.parse(argc, argv);

    if (*solve_cmd) return run_solve(config_path, opts, report_path);

    if (*sweep_cmd || *conv_cmd || *trade_cmd) {
      ExperimentPlan plan = load_plan(config_path);
      apply_overrides(plan, opts);
      const std::string dir = out_dir(opts);
      ResultTable table;
      std::string name;
      if (*sweep_cmd) {
        table = run_experiment(plan);
        name = "sweep";
      } else if (*conv_cmd) {
        table = converge_trace(plan);
        name = "converge";
      } else {
        table = tradeoff_report(plan);
        name = "tradeoff";
      }
      write_file(dir + "/" + name + ".csv", table.to_csv());
      write_file(dir + "/" + name + ".meta.json", meta_json(plan));
      std::cout << "wrote " << dir << "/" << name << ".csv\n";
      return 0;
    }

    if (*scen_cmd) {
      if (!*dump_cmd) throw ConfigError("usage: scenario dump <config>");
      ExperimentPlan plan = load_plan(config_path);
      apply_overrides(plan, opts);
      if (opts.seed) plan.scenario.rng_seed = *opts.seed;
      const Scenario sc = make_scenario(plan.scenario);
      const std::string dir = out_dir(opts);
      write_file(dir + "/channels.csv", channels_to_csv(sc));
      write_file(dir + "/signatures.csv", signatures_to_csv(sc));
      std::cout << "wrote " << dir << "/channels.csv and " << dir
                << "/signatures.csv\n";
      return 0;
    }
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 2;
  } catch (const satmud::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const satmud::InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 3;
  } catch (const satmud::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
