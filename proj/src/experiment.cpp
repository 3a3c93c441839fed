#include "uavshare/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <ostream>
#include <sstream>

namespace uavshare {

using nlohmann::json;

namespace {

const char* kSweepParams[] = {"theta", "beta", "delta", "num_subchannels"};

double parse_number(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ConfigError("bad number in " + what + ": '" + text + "'");
  }
  if (used != text.size() || !std::isfinite(v)) throw ConfigError("bad number in " + what + ": '" + text + "'");
  return v;
}

std::uint64_t parse_seed(const std::string& text) {
  if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos)
    throw ConfigError("bad seed '" + text + "'");
  try {
    return std::stoull(text);
  } catch (const std::exception&) {
    throw ConfigError("bad seed '" + text + "'");
  }
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

bool is_sweep_param(const std::string& name) {
  return std::find(std::begin(kSweepParams), std::end(kSweepParams), name) != std::end(kSweepParams);
}

std::vector<double> parse_grid(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
  if (parts.size() != 3) throw ConfigError("grid must be a:b:step, got '" + spec + "'");
  const double lo = parse_number(parts[0], "grid"), hi = parse_number(parts[1], "grid"),
               step = parse_number(parts[2], "grid");
  if (!(step > 0.0)) throw ConfigError("grid step must be > 0");
  if (hi < lo) throw ConfigError("grid end must be >= start");
  const auto count = static_cast<long>(std::floor((hi - lo) / step + 1e-9)) + 1;
  if (count > 100000) throw ConfigError("grid has too many points");
  std::vector<double> grid;
  for (long i = 0; i < count; ++i) grid.push_back(lo + static_cast<double>(i) * step);
  return grid;
}

std::vector<std::uint64_t> parse_seed_range(const std::string& spec) {
  const auto dots = spec.find("..");
  if (dots == std::string::npos) return {parse_seed(spec)};
  const auto first = parse_seed(spec.substr(0, dots)), last = parse_seed(spec.substr(dots + 2));
  if (last < first) throw ConfigError("seed range end before start: '" + spec + "'");
  if (last - first >= 100000) throw ConfigError("seed range too large: '" + spec + "'");
  std::vector<std::uint64_t> seeds;
  for (auto s = first; s <= last; ++s) seeds.push_back(s);
  return seeds;
}

std::vector<std::string> parse_methods(const std::string& list) {
  static const BaselineRegistry registry;
  std::vector<std::string> out;
  std::stringstream ss(list);
  for (std::string m; std::getline(ss, m, ',');) {
    if (m.empty()) continue;
    if (m != "proposed") {
      try {
        registry.get(m);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
    }
    out.push_back(m);
  }
  if (out.empty()) throw ConfigError("no methods given");
  return out;
}

ScenarioTemplate apply_override(ScenarioTemplate t, const std::string& param, double value) {
  if (param == "theta") {
    t.power_price = {value, value};
  } else if (param == "beta") {
    t.subchannel_price = {value, value};
  } else if (param == "delta") {
    t.payment_per_mbps = {value, value};
  } else if (param == "num_subchannels") {
    if (value < 1.0 || value != std::floor(value)) throw ConfigError("num_subchannels must be a positive integer");
    t.num_subchannels = static_cast<int>(value);
  } else {
    throw ConfigError("unknown sweep parameter '" + param + "'");
  }
  return t;
}

Scenario apply_override(const Scenario& s, const std::string& param, double value) {
  auto mnos = s.mnos();
  auto sps = s.sps();
  if (param == "theta") {
    for (auto& m : mnos) m.price_per_watt = value;
  } else if (param == "beta") {
    for (auto& m : mnos) std::fill(m.price_per_subchannel.begin(), m.price_per_subchannel.end(), value);
  } else if (param == "delta") {
    for (auto& sp : sps)
      for (auto& u : sp.users) u.payment_per_mbps = value;
  } else if (param == "num_subchannels") {
    if (value < 1.0 || value != std::floor(value)) throw ConfigError("num_subchannels must be a positive integer");
    const int b = static_cast<int>(value);
    for (auto& m : mnos) {
      if (m.user_capacity == m.num_subchannels) m.user_capacity = b;
      m.price_per_subchannel.resize(static_cast<std::size_t>(b), m.price_per_subchannel.front());
      m.num_subchannels = b;
    }
  } else {
    throw ConfigError("unknown sweep parameter '" + param + "'");
  }
  return Scenario(std::move(mnos), std::move(sps), s.radio(), s.seed());
}

namespace {

template <typename T>
T value_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig c;
  if (j.contains("template") && j.contains("scenario")) throw ConfigError("config has both template and scenario");
  if (j.contains("scenario")) c.scenario = scenario_from_json(j.at("scenario"));
  else c.tmpl = j.contains("template") ? template_from_json(j.at("template")) : ScenarioTemplate{};

  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    if (s.contains("woa")) {
      const auto& w = s.at("woa");
      auto& p = c.solver.woa;
      p.population = value_or(w, "population", p.population);
      p.max_iterations = value_or(w, "max_iterations", p.max_iterations);
      p.spiral_b = value_or(w, "spiral_b", p.spiral_b);
      p.penalty = value_or(w, "penalty", p.penalty);
    }
    if (s.contains("power")) {
      const auto& w = s.at("power");
      auto& p = c.solver.power;
      p.step_constant = value_or(w, "step_constant", p.step_constant);
      p.tolerance = value_or(w, "tolerance_w", p.tolerance);
      p.max_iterations = value_or(w, "max_iterations", p.max_iterations);
      p.initial_dual = value_or(w, "initial_dual", p.initial_dual);
      p.verbatim = value_or(w, "verbatim", p.verbatim);
    }
    c.solver.outer_tolerance = value_or(s, "outer_tolerance", c.solver.outer_tolerance);
    c.solver.max_outer = value_or(s, "max_outer", c.solver.max_outer);
  }
  try {
    c.solver.woa.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!(c.solver.power.step_constant > 0.0) || !(c.solver.power.tolerance > 0.0) || c.solver.power.max_iterations < 1 ||
      c.solver.power.initial_dual < 0.0)
    throw ConfigError("invalid power solver parameters");
  if (!(c.solver.outer_tolerance >= 0.0) || c.solver.max_outer < 1) throw ConfigError("invalid outer loop parameters");

  if (j.contains("methods")) {
    std::string list;
    for (const auto& m : j.at("methods")) list += m.get<std::string>() + ",";
    c.methods = parse_methods(list);
  }
  if (j.contains("seeds")) {
    const auto& s = j.at("seeds");
    if (s.is_string()) c.seeds = parse_seed_range(s.get<std::string>());
    else if (s.is_array()) c.seeds = s.get<std::vector<std::uint64_t>>();
    else throw ConfigError("seeds must be a list or \"N..M\"");
    if (c.seeds.empty()) throw ConfigError("no seeds given");
  }
  if (j.contains("sweep")) {
    const auto& s = j.at("sweep");
    SweepSpec spec;
    spec.param = value_or<std::string>(s, "param", "");
    if (!is_sweep_param(spec.param)) throw ConfigError("unknown sweep parameter '" + spec.param + "'");
    if (!s.contains("grid")) throw ConfigError("sweep needs a grid");
    const auto& g = s.at("grid");
    spec.grid = g.is_string() ? parse_grid(g.get<std::string>()) : g.get<std::vector<double>>();
    if (spec.grid.empty()) throw ConfigError("empty sweep grid");
    c.sweep = std::move(spec);
  }
  c.trace = value_or(j, "trace", c.trace);
  return c;
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["format"] = "uavshare.experiment.v1";
  if (c.scenario) j["scenario"] = to_json(*c.scenario);
  if (c.tmpl) j["template"] = to_json(*c.tmpl);
  const auto& w = c.solver.woa;
  const auto& p = c.solver.power;
  j["solver"] = {{"woa",
                  {{"population", w.population},
                   {"max_iterations", w.max_iterations},
                   {"spiral_b", w.spiral_b},
                   {"penalty", w.penalty}}},
                 {"power",
                  {{"step_constant", p.step_constant},
                   {"tolerance_w", p.tolerance},
                   {"max_iterations", p.max_iterations},
                   {"initial_dual", p.initial_dual},
                   {"verbatim", p.verbatim}}},
                 {"outer_tolerance", c.solver.outer_tolerance},
                 {"max_outer", c.solver.max_outer}};
  j["methods"] = c.methods;
  j["seeds"] = c.seeds;
  if (c.sweep) j["sweep"] = {{"param", c.sweep->param}, {"grid", c.sweep->grid}};
  j["trace"] = c.trace;
  return j;
}

TaskResult run_task(const ExperimentConfig& cfg, std::uint64_t seed, const std::string& param, double value,
                    bool keep_reports) {
  const bool swept = !param.empty();
  Scenario scenario = cfg.scenario
                          ? (swept ? apply_override(*cfg.scenario, param, value) : *cfg.scenario)
                          : generate_scenario(swept ? apply_override(*cfg.tmpl, param, value) : *cfg.tmpl, seed);
  const Network net(std::move(scenario));

  TaskResult out;
  out.seed = seed;
  out.param_name = param;
  out.param_value = value;
  out.scenario_digest = scenario_digest(net.scenario);

  SolveParams params = cfg.solver;
  params.seed = seed;
  BaselineParams bparams{cfg.solver.woa, cfg.solver.power};

  std::optional<AssociationMatrix> association;
  static const BaselineRegistry registry;
  for (const auto& method : cfg.methods) {
    MethodOutcome m;
    m.method = method;
    if (method == "proposed") {
      SolveReport r = solve(net, params);
      association = r.association;
      m.utility = r.utility;
      m.iterations = r.iterations;
      m.converged = r.converged;
      m.resource_violations = static_cast<int>(r.resource_violations.size());
      m.qos_violations = static_cast<int>(r.qos_violations.size());
      for (const auto& it : r.iterates) m.trace.push_back(it.utility);
      if (keep_reports) m.report = std::move(r);
    } else {
      if (!association) association = matching_to_association(associate(net).matching, net.scenario);
      const auto alloc = registry.get(method)(net, *association, seed, bparams);
      m.utility = total_utility(*association, alloc.x, alloc.p, net);
      for (const auto& v : check_feasibility(*association, alloc.x, alloc.p, net, true))
        ++(v.constraint == "13b" ? m.qos_violations : m.resource_violations);
    }
    out.methods.push_back(std::move(m));
  }
  return out;
}

std::vector<TaskResult> run_experiment(const ExperimentConfig& cfg, int jobs, bool keep_reports) {
  struct Task {
    std::uint64_t seed;
    double value;
  };
  std::vector<Task> tasks;
  const std::string param = cfg.sweep ? cfg.sweep->param : std::string();
  const std::vector<double> grid = cfg.sweep ? cfg.sweep->grid : std::vector<double>{0.0};
  for (double v : grid)
    for (auto seed : cfg.seeds) tasks.push_back({seed, v});

  std::vector<TaskResult> results(tasks.size());
  if (jobs <= 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i)
      results[i] = run_task(cfg, tasks[i].seed, param, tasks[i].value, keep_reports);
    return results;
  }

  std::vector<std::exception_ptr> errors(tasks.size());
  const auto count = static_cast<long>(tasks.size());
#pragma omp parallel for schedule(dynamic) num_threads(jobs)
  for (long i = 0; i < count; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    try {
      results[idx] = run_task(cfg, tasks[idx].seed, param, tasks[idx].value, keep_reports);
    } catch (...) {
      errors[idx] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

std::string figure_id(const std::string& param) {
  if (param.empty()) return "fig4";
  if (param == "theta") return "fig8";
  if (param == "beta") return "fig9";
  if (param == "delta") return "fig10";
  if (param == "num_subchannels") return "fig11";
  return "custom";
}

void write_csv(std::ostream& os, const std::vector<TaskResult>& results, bool trace_rows) {
  os << "figure_id,method,seed,param_name,param_value,sp_index,revenue,cost,utility,total_utility,iterations,"
        "converged\n";
  auto emit = [&](const std::string& fig, const std::string& method, std::uint64_t seed, const std::string& pname,
                  double pvalue, const UtilityBreakdown& u, int iterations, bool converged) {
    for (std::size_t m = 0; m < u.per_sp.size(); ++m) {
      const auto& sp = u.per_sp[m];
      os << fig << ',' << method << ',' << seed << ',' << pname << ',' << num(pvalue) << ',' << m << ','
         << num(sp.revenue) << ',' << num(sp.cost) << ',' << num(sp.utility) << ',' << num(u.total) << ','
         << iterations << ',' << (converged ? 1 : 0) << '\n';
    }
  };
  for (const auto& r : results) {
    const std::string fig = figure_id(r.param_name);
    const std::string pname = r.param_name.empty() ? "none" : r.param_name;
    for (const auto& m : r.methods) emit(fig, m.method, r.seed, pname, r.param_value, m.utility, m.iterations, m.converged);
  }
  if (!trace_rows) return;
  for (const auto& r : results) {
    if (!r.param_name.empty()) continue;
    for (const auto& m : r.methods)
      for (std::size_t t = 0; t < m.trace.size(); ++t)
        emit("fig3", m.method, r.seed, "outer_iteration", static_cast<double>(t), m.trace[t], m.iterations,
             m.converged);
  }
}

std::vector<SummaryRow> summarize(const std::vector<TaskResult>& results) {
  // Keyed by (param value, method order of first appearance).
  std::map<double, std::vector<std::pair<std::string, std::vector<const MethodOutcome*>>>> groups;
  for (const auto& r : results) {
    auto& bucket = groups[r.param_value];
    for (const auto& m : r.methods) {
      auto it = std::find_if(bucket.begin(), bucket.end(), [&](const auto& e) { return e.first == m.method; });
      if (it == bucket.end()) {
        bucket.push_back({m.method, {}});
        it = std::prev(bucket.end());
      }
      it->second.push_back(&m);
    }
  }
  std::vector<SummaryRow> rows;
  for (const auto& [value, bucket] : groups)
    for (const auto& [method, outcomes] : bucket) {
      SummaryRow row;
      row.method = method;
      row.param_value = value;
      row.samples = static_cast<int>(outcomes.size());
      std::vector<double> totals;
      int converged = 0;
      for (const auto* o : outcomes) {
        totals.push_back(o->utility.total);
        converged += o->converged ? 1 : 0;
      }
      std::sort(totals.begin(), totals.end());
      double sum = 0.0;
      for (double t : totals) sum += t;
      const std::size_t n = totals.size();
      row.mean = sum / static_cast<double>(n);
      row.median = n % 2 ? totals[n / 2] : 0.5 * (totals[n / 2 - 1] + totals[n / 2]);
      row.min = totals.front();
      row.max = totals.back();
      row.converged_fraction = static_cast<double>(converged) / static_cast<double>(n);
      rows.push_back(row);
    }
  return rows;
}

void write_summary_csv(std::ostream& os, const std::vector<TaskResult>& results) {
  const std::string param = results.empty() ? std::string() : results.front().param_name;
  os << "figure_id,method,param_name,param_value,samples,mean_total_utility,median_total_utility,min_total_utility,"
        "max_total_utility,converged_fraction\n";
  const std::string fig = param.empty() ? "fig5" : figure_id(param);
  for (const auto& row : summarize(results))
    os << fig << ',' << row.method << ',' << (param.empty() ? "none" : param) << ',' << num(row.param_value) << ','
       << row.samples << ',' << num(row.mean) << ',' << num(row.median) << ',' << num(row.min) << ','
       << num(row.max) << ',' << num(row.converged_fraction) << '\n';
}

namespace {

json per_sp_json(const UtilityBreakdown& u) {
  auto per_sp = json::array();
  for (const auto& sp : u.per_sp) per_sp.push_back({{"revenue", sp.revenue}, {"cost", sp.cost}, {"utility", sp.utility}});
  return per_sp;
}

UtilityBreakdown utility_from_json(const json& j) {
  UtilityBreakdown u;
  u.total = j.at("total_utility").get<double>();
  for (const auto& sp : j.at("per_sp")) {
    SpUtility e{sp.at("revenue").get<double>(), sp.at("cost").get<double>(), sp.at("utility").get<double>()};
    u.total_revenue += e.revenue;
    u.total_cost += e.cost;
    u.per_sp.push_back(e);
  }
  return u;
}

}  // namespace

json results_json(const std::vector<TaskResult>& results) {
  auto arr = json::array();
  for (const auto& r : results) {
    char digest[17];
    std::snprintf(digest, sizeof digest, "%016llx", static_cast<unsigned long long>(r.scenario_digest));
    json task = {{"seed", r.seed}, {"scenario_digest", digest}};
    if (!r.param_name.empty()) task["param"] = {{"name", r.param_name}, {"value", r.param_value}};
    auto methods = json::array();
    for (const auto& m : r.methods) {
      json e = {{"method", m.method},
                {"total_utility", m.utility.total},
                {"per_sp", per_sp_json(m.utility)},
                {"iterations", m.iterations},
                {"converged", m.converged},
                {"resource_violations", m.resource_violations},
                {"qos_violations", m.qos_violations}};
      if (!m.trace.empty()) {
        auto trace = json::array();
        for (const auto& u : m.trace) trace.push_back({{"total_utility", u.total}, {"per_sp", per_sp_json(u)}});
        e["trace"] = std::move(trace);
      }
      if (m.report) e["report"] = to_json(*m.report);
      methods.push_back(std::move(e));
    }
    task["methods"] = std::move(methods);
    arr.push_back(std::move(task));
  }
  return {{"format", "uavshare.results.v1"}, {"tasks", std::move(arr)}};
}

std::vector<TaskResult> results_from_json(const json& j) {
  if (!j.is_object() || j.value("format", "") != "uavshare.results.v1")
    throw ConfigError("not a uavshare.results.v1 document");
  std::vector<TaskResult> out;
  try {
    for (const auto& t : j.at("tasks")) {
      TaskResult r;
      r.seed = t.at("seed").get<std::uint64_t>();
      r.scenario_digest = std::stoull(t.at("scenario_digest").get<std::string>(), nullptr, 16);
      if (t.contains("param")) {
        r.param_name = t.at("param").at("name").get<std::string>();
        r.param_value = t.at("param").at("value").get<double>();
      }
      for (const auto& e : t.at("methods")) {
        MethodOutcome m;
        m.method = e.at("method").get<std::string>();
        m.utility = utility_from_json(e);
        m.iterations = e.at("iterations").get<int>();
        m.converged = e.at("converged").get<bool>();
        m.resource_violations = e.value("resource_violations", 0);
        m.qos_violations = e.value("qos_violations", 0);
        if (e.contains("trace"))
          for (const auto& u : e.at("trace")) m.trace.push_back(utility_from_json(u));
        r.methods.push_back(std::move(m));
      }
      out.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed results: ") + e.what());
  } catch (const std::logic_error& e) {
    throw ConfigError(std::string("malformed results: ") + e.what());
  }
  return out;
}

}  // namespace uavshare
