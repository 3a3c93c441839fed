#include "uavshare/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

#include "uavshare/baselines.hpp"
#include "uavshare/rng.hpp"

namespace uavshare {

namespace {

constexpr double kPowerSlack = 1e-9;  // relative, for budget checks

OuterIterate make_iterate(int t, AssignmentMatrix x, PowerMatrix p, const AssociationMatrix& a, const Network& net,
                          double xi) {
  OuterIterate it;
  it.t = t;
  it.utility = total_utility(a, x, p, net);
  it.objective = it.utility.total - qos_penalty(it.utility, a, net.scenario, xi);
  it.qos_violations = qos_violations(it.utility, a, net.scenario);
  it.resource_feasible = check_feasibility(a, x, p, net, false).empty();
  it.x = std::move(x);
  it.p = std::move(p);
  return it;
}

}  // namespace

std::vector<Violation> check_feasibility(const AssociationMatrix& a, const AssignmentMatrix& x, const PowerMatrix& p,
                                         const Network& net, bool include_qos) {
  const auto& s = net.scenario;
  std::vector<Violation> out;
  const int users = s.num_users(), uavs = s.num_uavs(), channels = s.num_channels();

  if (include_qos) {
    const auto u = total_utility(a, x, p, net);
    for (int k = 0; k < users; ++k) {
      const double gap = s.user(k).min_rate_bps - u.user_rate_bps[static_cast<std::size_t>(k)];
      if (gap > 0.0) out.push_back({"13b", {k}, gap});
    }
  }
  for (int k = 0; k < users; ++k) {
    int count = 0;
    for (int n = 0; n < uavs; ++n) count += a(k, n);
    if (count > 1) out.push_back({"13c", {k}, static_cast<double>(count - 1)});
  }
  for (int n = 0; n < uavs; ++n) {
    int count = 0;
    for (int k = 0; k < users; ++k) count += a(k, n);
    const int cap = s.mnos()[static_cast<std::size_t>(n)].user_capacity;
    if (count > cap) out.push_back({"13d", {n}, static_cast<double>(count - cap)});
  }
  for (int c = 0; c < channels; ++c) {
    int count = 0;
    for (int k = 0; k < users; ++k) count += x(k, c);
    if (count > 1) out.push_back({"13e", {c}, static_cast<double>(count - 1)});
  }
  for (int n = 0; n < uavs; ++n) {
    const double cap = s.mnos()[static_cast<std::size_t>(n)].max_power_w;
    const double used = p.uav_total(s, n);
    if (used > cap * (1.0 + kPowerSlack)) out.push_back({"13f", {n}, used - cap});
  }
  for (int k = 0; k < users; ++k)
    for (int c = 0; c < channels; ++c) {
      const double cap = s.mnos()[static_cast<std::size_t>(s.uav_of_channel(c))].max_power_w;
      const double v = p(k, c);
      if (v < 0.0) out.push_back({"13g", {k, c}, -v});
      else if (v > cap * (1.0 + kPowerSlack)) out.push_back({"13g", {k, c}, v - cap});
    }
  for (int k = 0; k < users; ++k)
    for (int n = 0; n < uavs; ++n)
      if (a(k, n) > 1) out.push_back({"13h", {k, n}, static_cast<double>(a(k, n))});
  for (int k = 0; k < users; ++k)
    for (int c = 0; c < channels; ++c)
      if (x(k, c) > 1) out.push_back({"13i", {k, c}, static_cast<double>(x(k, c))});
  for (int k = 0; k < users; ++k)
    for (int c = 0; c < channels; ++c) {
      if (x(k, c) && !a(k, s.uav_of_channel(c))) out.push_back({"x_without_a", {k, c}, 1.0});
      if (!x(k, c) && p(k, c) != 0.0) out.push_back({"p_without_x", {k, c}, std::abs(p(k, c))});
    }
  return out;
}

namespace {

bool accept(const OuterIterate& candidate, const OuterIterate& incumbent) {
  if (candidate.resource_feasible != incumbent.resource_feasible) return candidate.resource_feasible;
  if (candidate.utility.total != incumbent.utility.total) return candidate.utility.total > incumbent.utility.total;
  return candidate.objective > incumbent.objective;
}

}  // namespace

DaResult associate(const Network& net) {
  const auto profile = build_preferences(net);
  return deferred_acceptance(profile, uav_capacities(net.scenario));
}

SolveReport solve(const Network& net, const SolveParams& params) {
  const auto start = std::chrono::steady_clock::now();
  const auto& s = net.scenario;
  SolveReport r;
  r.scenario_digest = scenario_digest(s);

  const auto profile = build_preferences(net);
  auto da = deferred_acceptance(profile, uav_capacities(s));
  r.matching = std::move(da.matching);
  r.proposals = da.proposals;
  r.unservable = profile.unservable;
  r.association = matching_to_association(r.matching, s);
  const auto& a = r.association;
  const double xi = params.woa.penalty;

  AssignmentMatrix x0 = equal_assignment(net, a);
  PowerMatrix p0 = equal_split_power(net, x0);
  r.iterates.push_back(make_iterate(0, std::move(x0), std::move(p0), a, net, xi));

  bool any_served = false;
  for (int k = 0; k < s.num_users(); ++k) any_served = any_served || a.uav_of(k) >= 0;

  if (any_served) {
    double previous = r.iterates.back().utility.total;
    for (int t = 1; t <= params.max_outer; ++t) {
      const OuterIterate& best = r.iterates.back();
      WoaParams woa = params.woa;
      woa.seed = Rng::derive(params.seed, static_cast<std::uint64_t>(t)).next();
      auto w = woa_solve(net, a, best.p, woa, &best.x);
      auto pr = solve_power(net, a, w.assignment, params.power);
      r.woa_traces.push_back(std::move(w.trace));
      r.power_traces.push_back(std::move(pr.trace));

      OuterIterate candidate = make_iterate(t, std::move(w.assignment), std::move(pr.power), a, net, xi);
      r.raw_utility.push_back(candidate.utility.total);
      if (accept(candidate, best)) {
        r.iterates.push_back(std::move(candidate));
      } else {
        OuterIterate kept = best;
        kept.t = t;
        r.iterates.push_back(std::move(kept));
      }
      r.iterations = t;
      const double current = r.iterates.back().utility.total;
      if (std::abs(current - previous) <= params.outer_tolerance) {
        r.converged = true;
        break;
      }
      previous = current;
    }
  } else {
    r.converged = true;
  }

  const auto& final_it = r.iterates.back();
  r.x = final_it.x;
  r.p = final_it.p;
  r.utility = final_it.utility;
  for (auto& v : check_feasibility(a, r.x, r.p, net, true))
    (v.constraint == "13b" ? r.qos_violations : r.resource_violations).push_back(std::move(v));
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

nlohmann::json to_json(const Violation& v) {
  return {{"constraint", v.constraint}, {"indices", v.indices}, {"magnitude", v.magnitude}};
}

namespace {

template <typename T>
nlohmann::json grid_json(const Grid<T>& g) {
  auto rows = nlohmann::json::array();
  for (int r = 0; r < g.rows(); ++r) {
    auto row = nlohmann::json::array();
    for (int c = 0; c < g.cols(); ++c) row.push_back(g(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json utility_json(const UtilityBreakdown& u) {
  auto per_sp = nlohmann::json::array();
  for (const auto& sp : u.per_sp) per_sp.push_back({{"revenue", sp.revenue}, {"cost", sp.cost}, {"utility", sp.utility}});
  return {{"per_sp", per_sp},
          {"total_revenue", u.total_revenue},
          {"total_cost", u.total_cost},
          {"total_utility", u.total},
          {"user_rate_bps", u.user_rate_bps}};
}

}  // namespace

nlohmann::json to_json(const SolveReport& r, bool snapshots) {
  char digest[17];
  std::snprintf(digest, sizeof digest, "%016llx", static_cast<unsigned long long>(r.scenario_digest));

  nlohmann::json j;
  j["format"] = "uavshare.report.v1";
  j["scenario_digest"] = digest;
  j["association"] = {{"uav_of_user", r.matching.uav_of_user},
                      {"proposals", r.proposals},
                      {"unservable", r.unservable}};
  auto iterates = nlohmann::json::array();
  for (const auto& it : r.iterates) {
    nlohmann::json e = {{"t", it.t},
                        {"objective", it.objective},
                        {"qos_violations", it.qos_violations},
                        {"utility", utility_json(it.utility)}};
    if (snapshots) {
      e["x"] = grid_json(it.x);
      e["p_w"] = grid_json(it.p);
    }
    iterates.push_back(std::move(e));
  }
  j["iterates"] = std::move(iterates);
  j["raw_utility"] = r.raw_utility;

  auto woa = nlohmann::json::array();
  for (const auto& trace : r.woa_traces) {
    auto rows = nlohmann::json::array();
    for (const auto& row : trace) rows.push_back({row.iteration, row.best_fitness, row.violations});
    woa.push_back(std::move(rows));
  }
  auto power = nlohmann::json::array();
  for (const auto& trace : r.power_traces) {
    auto rows = nlohmann::json::array();
    for (const auto& row : trace) rows.push_back({row.t, row.dual_norm, row.power_change, row.objective});
    power.push_back(std::move(rows));
  }
  j["woa_traces"] = {{"columns", {"iteration", "best_fitness", "violations"}}, {"runs", std::move(woa)}};
  j["power_traces"] = {{"columns", {"t", "dual_norm", "power_change_w", "objective"}}, {"runs", std::move(power)}};

  j["final"] = {{"x", grid_json(r.x)}, {"p_w", grid_json(r.p)}, {"utility", utility_json(r.utility)}};
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  j["wall_seconds"] = r.wall_seconds;
  auto res = nlohmann::json::array(), qos = nlohmann::json::array();
  for (const auto& v : r.resource_violations) res.push_back(to_json(v));
  for (const auto& v : r.qos_violations) qos.push_back(to_json(v));
  j["resource_violations"] = std::move(res);
  j["qos_violations"] = std::move(qos);
  return j;
}

}  // namespace uavshare
