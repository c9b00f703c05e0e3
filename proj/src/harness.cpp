#include "satmud/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace satmud {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string fmt17(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string sweep_name(SweepVar s) {
  switch (s) {
    case SweepVar::none: return "none";
    case SweepVar::epsilon: return "epsilon";
    case SweepVar::q_s: return "q_s";
    case SweepVar::num_sats: return "num_sats";
  }
  return "none";
}

void parallel_tasks(int n, int threads, const std::function<void(int)>& task) {
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) task(i);
    });
  for (auto& th : pool) th.join();
}

struct AllocatorOutcome {
  std::string status = "ok";
  double sum_rate = 0.0;
  double load_total = 0.0;
  double load_max = 0.0;
  int outer_iters = 0;
  double wall_ms = 0.0;
};

AllocatorOutcome run_allocator(const std::string& name, const Scenario& sc,
                               const RateModelParams& params, int q_s, double q_l,
                               const SolverConfig& solver_cfg, uint64_t rng_seed) {
  AllocatorOutcome out;
  try {
    if (name == "proposed") {
      const AllocationReport rep = solve(sc, params, q_s, q_l, solver_cfg);
      out.sum_rate = rep.rounded_sum_rate;
      out.outer_iters = rep.outer_iters;
      out.wall_ms = rep.wall_time_ms;
      for (double l : rep.load) {
        out.load_total += l;
        out.load_max = std::max(out.load_max, l);
      }
      return out;
    }
    BaselineKind kind;
    if (!baseline_from_name(name, &kind))
      throw ConfigError("unknown allocator: " + name);
    Mat q;
    switch (kind) {
      case BaselineKind::greedy: {
        Rng rng = make_rng(rng_seed);
        q = greedy_allocate(sc, q_s, q_l, rng).q;
        break;
      }
      case BaselineKind::round_robin: {
        Rng rng = make_rng(rng_seed);
        q = round_robin_allocate(sc, q_s, q_l, rng).q;
        break;
      }
      case BaselineKind::centralized:
        q = centralized_allocate(sc.config.num_users, sc.config.num_sats).q;
        break;
      case BaselineKind::exhaustive:
        q = exhaustive_allocate(sc, params, q_s, q_l).q;
        break;
    }
    out.sum_rate = sum_rate(sc, params, q);
    for (double l : processing_load(sc, q)) {
      out.load_total += l;
      out.load_max = std::max(out.load_max, l);
    }
  } catch (const InfeasibleError&) {
    out.status = "infeasible";
  } catch (const ConfigError&) {
    out.status = "config_error";
  } catch (const NumericalError&) {
    out.status = "numerical_error";
  }
  return out;
}

struct TrialSetup {
  Scenario scenario;
  RateModelParams params;
  int q_s;
  double q_l;
};

TrialSetup make_trial(const ExperimentPlan& plan, SweepVar sweep, double value,
                      int trial) {
  ScenarioConfig cfg = plan.scenario;
  cfg.rng_seed = substream(plan.seed, 0xa110c5ULL, static_cast<uint64_t>(trial));
  double epsilon = plan.epsilon;
  int q_s = plan.q_s;
  switch (sweep) {
    case SweepVar::none: break;
    case SweepVar::epsilon: epsilon = value; break;
    case SweepVar::q_s: q_s = static_cast<int>(std::lround(value)); break;
    case SweepVar::num_sats: cfg.num_sats = static_cast<int>(std::lround(value)); break;
  }
  TrialSetup ts{make_scenario(cfg), {}, q_s, 0.0};
  ts.params = params_for(ts.scenario, epsilon, plan.variant);
  ts.q_l = plan.q_l >= 0.0 ? plan.q_l
                           : clamp_q_l(q_s, cfg.num_users, cfg.num_sats);
  return ts;
}

}  // namespace

void ExperimentPlan::validate() const {
  scenario.validate();
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (epsilon < 0) throw ConfigError("epsilon must be >= 0");
  if (q_s < 1 || q_s > scenario.num_users)
    throw ConfigError("q_s must lie in [1, num_users]");
  if (allocators.empty()) throw ConfigError("at least one allocator required");
  for (const auto& a : allocators)
    if (a != "proposed" && a != "greedy" && a != "round_robin" &&
        a != "centralized" && a != "exhaustive")
      throw ConfigError("unknown allocator: " + a);
  if (sweep != SweepVar::none && sweep_values.empty())
    throw ConfigError("sweep_values required when sweep is set");
  for (double v : sweep_values) {
    if (sweep == SweepVar::epsilon && v < 0)
      throw ConfigError("swept epsilon must be >= 0");
    if (sweep == SweepVar::q_s && (v < 1 || v > scenario.num_users))
      throw ConfigError("swept q_s must lie in [1, num_users]");
    if (sweep == SweepVar::num_sats && v < 1)
      throw ConfigError("swept num_sats must be >= 1");
  }
}

int ResultTable::column(const std::string& name) const {
  for (size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

std::string ResultTable::to_csv() const {
  std::ostringstream os;
  for (size_t i = 0; i < header.size(); ++i)
    os << header[i] << (i + 1 < header.size() ? "," : "\n");
  for (const auto& row : rows)
    for (size_t i = 0; i < row.size(); ++i)
      os << row[i] << (i + 1 < row.size() ? "," : "\n");
  return os.str();
}

ResultTable run_experiment(const ExperimentPlan& plan) {
  plan.validate();
  const std::vector<double> values =
      plan.sweep == SweepVar::none ? std::vector<double>{0.0} : plan.sweep_values;

  ResultTable table;
  table.header = {"sweep",      "value",      "trial",    "allocator",
                  "status",     "sum_rate",   "load_total", "load_max",
                  "outer_iters", "wall_ms"};

  const int tasks = static_cast<int>(values.size()) * plan.trials;
  std::vector<std::vector<std::vector<std::string>>> slots(tasks);

  parallel_tasks(tasks, plan.threads, [&](int idx) {
    const int vi = idx / plan.trials;
    const int trial = idx % plan.trials;
    const double value = values[vi];
    const TrialSetup ts = make_trial(plan, plan.sweep, value, trial);
    auto& rows = slots[idx];
    for (size_t ai = 0; ai < plan.allocators.size(); ++ai) {
      const std::string& name = plan.allocators[ai];
      const uint64_t rng_seed =
          substream(plan.seed, 0xba5e11ULL, static_cast<uint64_t>(trial), ai);
      const AllocatorOutcome out = run_allocator(name, ts.scenario, ts.params,
                                                 ts.q_s, ts.q_l, plan.solver, rng_seed);
      rows.push_back({sweep_name(plan.sweep), fmt(value), std::to_string(trial),
                      name, out.status, fmt(out.sum_rate), fmt(out.load_total),
                      fmt(out.load_max), std::to_string(out.outer_iters),
                      fmt(plan.include_timing ? out.wall_ms : 0.0)});
    }
  });

  for (auto& rows : slots)
    for (auto& r : rows) table.rows.push_back(std::move(r));

  // Aggregate mean and standard error of sum_rate per (value, allocator),
  // over trials with status == ok.
  const int c_value = table.column("value");
  const int c_alloc = table.column("allocator");
  const int c_status = table.column("status");
  const int c_rate = table.column("sum_rate");
  for (const double value : values) {
    for (const auto& name : plan.allocators) {
      std::vector<double> xs;
      for (const auto& r : table.rows)
        if (r[c_value] == fmt(value) && r[c_alloc] == name && r[c_status] == "ok")
          xs.push_back(std::stod(r[c_rate]));
      double mean = 0.0, se = 0.0;
      if (!xs.empty()) {
        for (double x : xs) mean += x;
        mean /= xs.size();
        if (xs.size() > 1) {
          double var = 0.0;
          for (double x : xs) var += (x - mean) * (x - mean);
          var /= (xs.size() - 1);
          se = std::sqrt(var / xs.size());
        }
      }
      table.rows.push_back({sweep_name(plan.sweep), fmt(value), "-1", name, "mean",
                            fmt(mean), "0", "0", "0", "0"});
      table.rows.push_back({sweep_name(plan.sweep), fmt(value), "-1", name, "se",
                            fmt(se), "0", "0", "0", "0"});
    }
  }
  return table;
}

ResultTable converge_trace(const ExperimentPlan& plan) {
  plan.validate();
  if (std::find(plan.allocators.begin(), plan.allocators.end(), "proposed") ==
      plan.allocators.end())
    throw ConfigError("converge_trace requires the proposed allocator");

  ResultTable table;
  table.header = {"trial",  "outer_iter", "relaxed_objective", "c_sum",
                  "max_nonintegrality", "lambda", "inner_iters", "converged"};

  std::vector<std::vector<std::vector<std::string>>> slots(plan.trials);
  parallel_tasks(plan.trials, plan.threads, [&](int trial) {
    const TrialSetup ts = make_trial(plan, SweepVar::none, 0.0, trial);
    const AllocationReport rep =
        solve(ts.scenario, ts.params, ts.q_s, ts.q_l, plan.solver);
    auto& rows = slots[trial];
    for (const auto& ot : rep.trace)
      rows.push_back({std::to_string(trial), std::to_string(ot.outer),
                      fmt(ot.penalized_objective), fmt(ot.c_sum),
                      fmt(ot.max_nonintegrality), fmt(ot.lambda),
                      std::to_string(ot.inner_iters),
                      rep.converged ? "1" : "0"});
  });
  for (auto& rows : slots)
    for (auto& r : rows) table.rows.push_back(std::move(r));
  return table;
}

ResultTable tradeoff_report(const ExperimentPlan& plan) {
  plan.validate();
  if (std::find(plan.allocators.begin(), plan.allocators.end(), "centralized") ==
      plan.allocators.end())
    throw ConfigError("tradeoff_report requires the centralized reference");
  if (plan.sweep != SweepVar::q_s || plan.sweep_values.empty())
    throw ConfigError("tradeoff_report requires a q_s sweep");

  ResultTable table;
  table.header = {"q_s",       "trial",        "status",
                  "load_ratio", "rate_ratio",  "proposed_rate",
                  "centralized_rate", "proposed_load", "centralized_load"};

  const int tasks = static_cast<int>(plan.sweep_values.size()) * plan.trials;
  std::vector<std::vector<std::string>> slots(tasks);
  parallel_tasks(tasks, plan.threads, [&](int idx) {
    const int vi = idx / plan.trials;
    const int trial = idx % plan.trials;
    const double value = plan.sweep_values[vi];
    const TrialSetup ts = make_trial(plan, SweepVar::q_s, value, trial);
    std::string status = "ok";
    double pr = 0, cr = 0, pl = 0, cl = 0;
    try {
      const AllocationReport rep =
          solve(ts.scenario, ts.params, ts.q_s, ts.q_l, plan.solver);
      pr = rep.rounded_sum_rate;
      for (double l : rep.load) pl += l;
      const Mat ones =
          centralized_allocate(ts.scenario.config.num_users, ts.scenario.config.num_sats).q;
      cr = sum_rate(ts.scenario, ts.params, ones);
      for (double l : processing_load(ts.scenario, ones)) cl += l;
    } catch (const InfeasibleError&) {
      status = "infeasible";
    } catch (const NumericalError&) {
      status = "numerical_error";
    }
    slots[idx] = {fmt(value),
                  std::to_string(trial),
                  status,
                  fmt(cl > 0 ? pl / cl : 0.0),
                  fmt(cr > 0 ? pr / cr : 0.0),
                  fmt(pr),
                  fmt(cr),
                  fmt(pl),
                  fmt(cl)};
  });
  for (auto& r : slots) table.rows.push_back(std::move(r));

  for (size_t vi = 0; vi < plan.sweep_values.size(); ++vi) {
    double lr = 0, rr = 0;
    int n = 0;
    for (int trial = 0; trial < plan.trials; ++trial) {
      const auto& r = table.rows[vi * plan.trials + trial];
      if (r[2] != "ok") continue;
      lr += std::stod(r[3]);
      rr += std::stod(r[4]);
      ++n;
    }
    if (n > 0) {
      lr /= n;
      rr /= n;
    }
    table.rows.push_back({fmt(plan.sweep_values[vi]), "-1", "mean", fmt(lr),
                          fmt(rr), "0", "0", "0", "0"});
  }
  return table;
}

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    const auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty())
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": empty key or value");
    kv[key] = val;
  }
  return kv;
}

namespace {

double to_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': not a number: " + v);
  }
}

int to_int(const std::string& key, const std::string& v) {
  const double d = to_double(key, v);
  if (d != std::floor(d)) throw ConfigError("config key '" + key + "': not an integer: " + v);
  return static_cast<int>(d);
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::istringstream is(v);
  std::string item;
  while (std::getline(is, item, ',')) out.push_back(to_double(key, item));
  if (out.empty()) throw ConfigError("config key '" + key + "': empty list");
  return out;
}

std::vector<std::string> to_names(const std::string& v) {
  std::vector<std::string> out;
  std::istringstream is(v);
  std::string item;
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t");
    const auto b = s.find_last_not_of(" \t");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

ExperimentPlan plan_from_config(const std::map<std::string, std::string>& kv) {
  ExperimentPlan plan;
  for (const auto& [key, val] : kv) {
    if (key == "num_users") plan.scenario.num_users = to_int(key, val);
    else if (key == "num_res") plan.scenario.num_res = to_int(key, val);
    else if (key == "num_sats") plan.scenario.num_sats = to_int(key, val);
    else if (key == "modulation_order") plan.scenario.modulation_order = to_int(key, val);
    else if (key == "carrier_freq_hz") plan.scenario.carrier_freq_hz = to_double(key, val);
    else if (key == "bandwidth_hz") plan.scenario.bandwidth_hz = to_double(key, val);
    else if (key == "orbit_altitude_m") plan.scenario.orbit_altitude_m = to_double(key, val);
    else if (key == "eirp_dbw") plan.scenario.eirp_dbw = to_double(key, val);
    else if (key == "g_over_t_dbk") plan.scenario.g_over_t_dbk = to_double(key, val);
    else if (key == "noise_density_dbm_hz")
      plan.scenario.noise_density_dbm_hz = to_double(key, val);
    else if (key == "fading_model") {
      if (val == "none") plan.scenario.fading_model = FadingModel::none;
      else if (val == "rayleigh") plan.scenario.fading_model = FadingModel::rayleigh;
      else if (val == "rician") plan.scenario.fading_model = FadingModel::rician;
      else throw ConfigError("fading_model must be none|rayleigh|rician");
    } else if (key == "rician_k_db") plan.scenario.rician_k_db = to_double(key, val);
    else if (key == "signature_column_weight")
      plan.scenario.signature_column_weight = to_int(key, val);
    else if (key == "rng_seed")
      plan.scenario.rng_seed = static_cast<uint64_t>(to_double(key, val));
    else if (key == "disc_radius_m") plan.scenario.disc_radius_m = to_double(key, val);
    else if (key == "sat_spacing_m") plan.scenario.sat_spacing_m = to_double(key, val);
    else if (key == "trials") plan.trials = to_int(key, val);
    else if (key == "seed") plan.seed = static_cast<uint64_t>(to_double(key, val));
    else if (key == "epsilon") plan.epsilon = to_double(key, val);
    else if (key == "q_s") plan.q_s = to_int(key, val);
    else if (key == "q_l") plan.q_l = to_double(key, val);
    else if (key == "sweep") {
      if (val == "none") plan.sweep = SweepVar::none;
      else if (val == "epsilon") plan.sweep = SweepVar::epsilon;
      else if (val == "q_s") plan.sweep = SweepVar::q_s;
      else if (val == "num_sats" || val == "J" || val == "j")
        plan.sweep = SweepVar::num_sats;
      else throw ConfigError("sweep must be none|epsilon|q_s|num_sats");
    } else if (key == "sweep_values") plan.sweep_values = to_list(key, val);
    else if (key == "allocators") plan.allocators = to_names(val);
    else if (key == "interference_variant") {
      if (val == "as_printed") plan.variant = InterferenceVariant::as_printed;
      else if (val == "complement") plan.variant = InterferenceVariant::complement;
      else throw ConfigError("interference_variant must be as_printed|complement");
    } else if (key == "include_timing") plan.include_timing = to_int(key, val) != 0;
    else if (key == "threads") plan.threads = to_int(key, val);
    else if (key == "lambda_mode") {
      if (val == "scheduled") plan.solver.lambda_mode = LambdaMode::scheduled;
      else if (val == "fixed") plan.solver.lambda_mode = LambdaMode::fixed;
      else throw ConfigError("lambda_mode must be scheduled|fixed");
    } else if (key == "lambda0_factor") plan.solver.lambda0_factor = to_double(key, val);
    else if (key == "lambda_fixed") plan.solver.lambda_fixed = to_double(key, val);
    else if (key == "theta_in_inner_loop")
      plan.solver.theta_in_inner_loop = to_int(key, val) != 0;
    else throw ConfigError("unknown config key: " + key);
  }
  return plan;
}

ScenarioConfig scenario_from_config(const std::map<std::string, std::string>& kv) {
  return plan_from_config(kv).scenario;
}

namespace {
std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}
}  // namespace

ScenarioConfig load_scenario_config(const std::string& path) {
  return scenario_from_config(parse_config_text(read_file(path)));
}

ExperimentPlan load_plan(const std::string& path) {
  return plan_from_config(parse_config_text(read_file(path)));
}

std::string channels_to_csv(const Scenario& sc) {
  std::ostringstream os;
  os << "n,k,j,re,im\n";
  for (int n = 0; n < sc.config.num_res; ++n)
    for (int k = 0; k < sc.config.num_users; ++k)
      for (int j = 0; j < sc.config.num_sats; ++j) {
        const cplx h = sc.channel.h(n, k, j);
        os << n << ',' << k << ',' << j << ',' << fmt17(h.real()) << ','
           << fmt17(h.imag()) << '\n';
      }
  return os.str();
}

std::string signatures_to_csv(const Scenario& sc) {
  std::ostringstream os;
  os << "n,k,re,im\n";
  for (int n = 0; n < sc.config.num_res; ++n)
    for (int k = 0; k < sc.config.num_users; ++k) {
      const cplx s = sc.signatures.at(n, k);
      os << n << ',' << k << ',' << fmt17(s.real()) << ',' << fmt17(s.imag())
         << '\n';
    }
  return os.str();
}

std::string report_to_json(const AllocationReport& report) {
  nlohmann::json j;
  const Mat& q = report.q_binary.q;
  std::string bits;
  bits.reserve(q.size());
  for (size_t i = 0; i < q.size(); ++i) bits.push_back(q[i] == 1.0 ? '1' : '0');
  j["num_users"] = q.rows();
  j["num_sats"] = q.cols();
  j["q_s"] = report.q_binary.q_s;
  j["q_l"] = report.q_binary.q_l;
  j["q_binary"] = bits;
  j["relaxed_objective"] = report.relaxed_objective;
  j["rounded_sum_rate"] = report.rounded_sum_rate;
  j["load"] = report.load;
  j["converged"] = report.converged;
  j["outer_iters"] = report.outer_iters;
  j["wall_time_ms"] = report.wall_time_ms;
  if (!report.warning.empty()) j["warning"] = report.warning;
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& ot : report.trace) {
    nlohmann::json e;
    e["outer"] = ot.outer;
    e["penalized_objective"] = ot.penalized_objective;
    e["c_sum"] = ot.c_sum;
    e["max_nonintegrality"] = ot.max_nonintegrality;
    e["lambda"] = ot.lambda;
    e["inner_iters"] = ot.inner_iters;
    e["inner_surrogate"] = ot.inner_surrogate;
    e["inner_transform"] = ot.inner_transform;
    trace.push_back(e);
  }
  j["trace"] = trace;
  return j.dump(2);
}

double effective_q_l(const ExperimentPlan& plan, int q_s, int K, int J) {
  return plan.q_l >= 0.0 ? plan.q_l : clamp_q_l(q_s, K, J);
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write file: " + path);
  out << content;
}

}  // namespace satmud
