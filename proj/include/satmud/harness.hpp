#ifndef SATMUD_HARNESS_HPP
#define SATMUD_HARNESS_HPP

#include <map>
#include <string>
#include <vector>

#include "satmud/baselines.hpp"
#include "satmud/fp_solver.hpp"

namespace satmud {

enum class SweepVar { none, epsilon, q_s, num_sats };

// One experiment: a base scenario, an optional sweep axis, a set of
// allocators and a trial count. Scenarios are seeded per (seed, trial) so the
// same trial index sees the same channels at every sweep value.
struct ExperimentPlan {
  ScenarioConfig scenario;
  SweepVar sweep = SweepVar::none;
  std::vector<double> sweep_values;
  std::vector<std::string> allocators = {"proposed", "greedy", "round_robin",
                                         "centralized"};
  int trials = 50;
  uint64_t seed = 1;
  double epsilon = 0.2;
  int q_s = 3;
  double q_l = -1.0;  // negative: derive via clamp_q_l
  InterferenceVariant variant = InterferenceVariant::as_printed;
  SolverConfig solver;
  bool include_timing = true;  // when false, wall_ms columns are written as 0
  int threads = 0;             // 0: hardware concurrency

  void validate() const;  // throws ConfigError
};

struct ResultTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string to_csv() const;
  int column(const std::string& name) const;  // -1 if absent
};

// Per (sweep value x trial x allocator) sample rows followed by mean and
// standard-error aggregate rows. Allocator failures become status codes, not
// exceptions.
ResultTable run_experiment(const ExperimentPlan& plan);

// Per (trial, outer iteration) convergence trace of the proposed solver.
ResultTable converge_trace(const ExperimentPlan& plan);

// Load and rate of the proposed solver relative to centralized processing,
// per swept q_s value.
ResultTable tradeoff_report(const ExperimentPlan& plan);

// Key/value config parsing ("key = value", '#' comments).
std::map<std::string, std::string> parse_config_text(const std::string& text);
ScenarioConfig scenario_from_config(const std::map<std::string, std::string>& kv);
ExperimentPlan plan_from_config(const std::map<std::string, std::string>& kv);
ScenarioConfig load_scenario_config(const std::string& path);
ExperimentPlan load_plan(const std::string& path);

// scenario dump: channel tensor rows (n,k,j,re,im) and signature rows
// (n,k,re,im).
std::string channels_to_csv(const Scenario& sc);
std::string signatures_to_csv(const Scenario& sc);

std::string report_to_json(const AllocationReport& report);

double effective_q_l(const ExperimentPlan& plan, int q_s, int K, int J);

void write_file(const std::string& path, const std::string& content);

}  // namespace satmud

#endif  // SATMUD_HARNESS_HPP
