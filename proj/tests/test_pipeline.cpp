#include <doctest.h>

#include <cmath>
#include <limits>

#include "helpers.hpp"
#include "uavshare/baselines.hpp"
#include "uavshare/pipeline.hpp"

using namespace uavshare;

namespace {

SolveParams quick() {
  SolveParams p;
  p.woa.max_iterations = 30;
  p.woa.population = 20;
  p.max_outer = 10;
  return p;
}

bool has(const std::vector<Violation>& vs, const std::string& name) {
  for (const auto& v : vs)
    if (v.constraint == name) return true;
  return false;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("feasibility check flags each constraint") {
  using fixture::mno;
  using fixture::user;
  const auto s = fixture::scenario({mno({0, 0, 100}, 2, 1.0, 2, 4, 1), mno({50, 0, 100}, 2, 1.0, 2, 4)},
                                   {{user({0, 0}, 1, 0.4), user({5, 0}, 1, 0.4)}});
  const Network net(s);
  AssociationMatrix a(s);
  AssignmentMatrix x(s);
  PowerMatrix p(s);
  a(0, 0) = 1;
  x(0, 0) = 1;
  p(0, 0) = 0.5;
  CHECK(check_feasibility(a, x, p, net, false).empty());

  const auto qos = check_feasibility(a, x, p, net, true);
  REQUIRE(qos.size() == 1);
  CHECK(qos[0].constraint == "13b");
  // User 0 is served; user 1 is unassociated and still short of its rate.
  CHECK(qos[0].indices == std::vector<int>{1});
  CHECK(qos[0].magnitude == doctest::Approx(1e6));
  auto weak = p;
  weak(0, 0) = 1e-12;
  const auto short0 = check_feasibility(a, x, weak, net, true);
  REQUIRE(short0.size() == 2);
  CHECK(short0[0].magnitude == doctest::Approx(1e6 - net.link_rate(0, 0, 1e-12)));

  auto a2 = a;
  a2(0, 1) = 1;
  CHECK(has(check_feasibility(a2, x, p, net, false), "13c"));
  a2 = a;
  a2(1, 0) = 1;
  CHECK(has(check_feasibility(a2, x, p, net, false), "13d"));
  auto x2 = x;
  a2 = a;
  a2(1, 0) = 1;
  x2(1, 0) = 1;
  CHECK(has(check_feasibility(a2, x2, p, net, false), "13e"));

  auto p2 = p;
  x2 = x;
  x2(0, 1) = 1;
  p2(0, 1) = 0.6;
  const auto over = check_feasibility(a, x2, p2, net, false);
  REQUIRE(has(over, "13f"));
  for (const auto& v : over)
    if (v.constraint == "13f") CHECK(v.magnitude == doctest::Approx(0.1));

  p2 = p;
  p2(0, 0) = -0.1;
  CHECK(has(check_feasibility(a, x, p2, net, false), "13g"));
  p2(0, 0) = 1.5;
  CHECK(has(check_feasibility(a, x, p2, net, false), "13g"));

  a2 = a;
  a2(0, 0) = 2;
  CHECK(has(check_feasibility(a2, x, p, net, false), "13h"));
  x2 = x;
  x2(0, 0) = 3;
  CHECK(has(check_feasibility(a, x2, p, net, false), "13i"));

  x2 = x;
  x2(1, 1) = 1;
  CHECK(has(check_feasibility(a, x2, p, net, false), "x_without_a"));
  p2 = p;
  p2(0, 1) = 0.1;
  CHECK(has(check_feasibility(a, x, p2, net, false), "p_without_x"));
}

TEST_CASE("infinite tolerance stops after one outer iteration") {
  const auto s = generate_scenario(ScenarioTemplate{}, 1);
  const Network net(s);
  auto params = quick();
  params.outer_tolerance = std::numeric_limits<double>::infinity();
  const auto r = solve(net, params);
  CHECK(r.converged);
  CHECK(r.iterations == 1);
  CHECK(r.iterates.size() == 2u);
}

TEST_CASE("single user settles within two outer iterations") {
  ScenarioTemplate t;
  t.num_uavs = 1;
  t.users_per_sp = {1};
  t.min_rate_mbps = {1.0, 1.0};
  const auto s = generate_scenario(t, 3);
  const Network net(s);
  const auto r = solve(net, quick());
  CHECK(r.converged);
  CHECK(r.iterations <= 2);
}

TEST_CASE("accepted utility is non-decreasing and the result is resource-feasible") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto s = generate_scenario(ScenarioTemplate{}, seed);
    const Network net(s);
    auto params = quick();
    params.seed = seed;
    const auto r = solve(net, params);
    CHECK(r.resource_violations.empty());
    REQUIRE(r.iterates.size() >= 2u);
    for (std::size_t i = 1; i < r.iterates.size(); ++i) {
      if (r.iterates[i - 1].resource_feasible && r.iterates[i].resource_feasible)
        CHECK(r.iterates[i].utility.total >= r.iterates[i - 1].utility.total);
      CHECK(r.iterates[i].t == static_cast<int>(i));
    }
    CHECK(r.raw_utility.size() == static_cast<std::size_t>(r.iterations));
    CHECK(r.woa_traces.size() == static_cast<std::size_t>(r.iterations));
    CHECK(r.utility.total == r.iterates.back().utility.total);
    CHECK(r.scenario_digest == scenario_digest(s));

    // Starting point is the ES allocation.
    const auto es = run_baseline(BaselineKind::ES, net, r.association, seed);
    CHECK(r.iterates.front().utility.total == doctest::Approx(total_utility(r.association, es.x, es.p, net).total));
    CHECK(r.utility.total >= r.iterates.front().utility.total);
  }
}

TEST_CASE("same seed gives the same solve") {
  const auto s = generate_scenario(ScenarioTemplate{}, 4);
  const Network net(s);
  const auto a = solve(net, quick());
  const auto b = solve(net, quick());
  CHECK(a.x == b.x);
  CHECK(a.p == b.p);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("no servable users gives an empty allocation") {
  ScenarioTemplate t;
  t.min_rate_mbps = {1e4, 1e4};
  t.users_per_sp = {3};
  const auto s = generate_scenario(t, 1);
  const Network net(s);
  const auto r = solve(net, quick());
  CHECK(r.converged);
  CHECK(r.iterations == 0);
  CHECK(r.unservable.size() == 3u);
  CHECK(r.utility.total == 0.0);
  CHECK(r.resource_violations.empty());
  CHECK(r.qos_violations.size() == 3u);
}

TEST_CASE("report json") {
  const auto s = generate_scenario(ScenarioTemplate{}, 2);
  const Network net(s);
  auto params = quick();
  params.max_outer = 2;
  const auto r = solve(net, params);
  const auto j = to_json(r, true);
  CHECK(j["format"] == "uavshare.report.v1");
  CHECK(j["scenario_digest"].get<std::string>().size() == 16u);
  CHECK(j["iterates"].size() == r.iterates.size());
  CHECK(j["iterates"][0].contains("x"));
  CHECK(j["final"]["utility"]["total_utility"].get<double>() == r.utility.total);
  CHECK(j["woa_traces"]["columns"][0] == "iteration");
  CHECK_FALSE(to_json(r, false)["iterates"][0].contains("x"));
  CHECK(to_json(Violation{"13f", {1}, 0.5}) == nlohmann::json{{"constraint", "13f"}, {"indices", {1}}, {"magnitude", 0.5}});
}

}  // TEST_SUITE
