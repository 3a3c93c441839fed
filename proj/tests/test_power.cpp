#include <doctest.h>

#include <cmath>
#include <functional>
#include <numbers>

#include "helpers.hpp"
#include "uavshare/association.hpp"
#include "uavshare/baselines.hpp"
#include "uavshare/power.hpp"
#include "uavshare/rng.hpp"

using namespace uavshare;

namespace {

struct Single {
  Scenario s;
  AssociationMatrix a;
  AssignmentMatrix x;
};

Single single(double min_rate_mbps, double delta = 0.4, double theta = 4.0, double pmax = 1.0, Vec2 where = {0, 0}) {
  using fixture::mno;
  using fixture::user;
  Single o{fixture::scenario({mno({0, 0, 100}, 2, pmax, 2.0, theta)}, {{user(where, min_rate_mbps, delta)}}), {}, {}};
  o.a = AssociationMatrix(o.s);
  o.x = AssignmentMatrix(o.s);
  o.a(0, 0) = 1;
  o.x(0, 0) = 1;
  return o;
}

double golden_max(const std::function<double(double)>& f, double lo, double hi) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi, c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < 200; ++i) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

TEST_SUITE("power") {

TEST_CASE("step size") {
  CHECK(step_size(0.1, 1) == doctest::Approx(0.1));
  CHECK(step_size(0.1, 4) == doctest::Approx(0.05));
  CHECK_THROWS_AS(step_size(0.1, 0), std::invalid_argument);
}

TEST_CASE("closed form matches the water-filling expression and is stationary") {
  const auto o = single(1.0);
  const Network net(o.s);
  auto d = DualState::initial(o.s, o.a, o.x, 0.0, 0.1);
  d.lambda[0] = 0.2;
  d.mu[0] = 0.5;
  d.nu(0, 0) = 0.1;
  const double g = net.gains.gain(0, 0);
  const double expected = 0.15 * (0.4 + 0.2) / (std::numbers::ln2 * (4.0 + 0.5 + 0.1)) - net.noise_w / g;
  const double p = closed_form_power(net, o.x, d, 0, 0);
  CHECK(p == doctest::Approx(expected));
  CHECK(std::abs(lagrangian_derivative(net, o.x, d, 0, 0, p)) < 1e-9);
  CHECK(lagrangian_derivative(net, o.x, d, 0, 0, 0.5 * p) > 0.0);
  CHECK(lagrangian_derivative(net, o.x, d, 0, 0, 2.0 * p) < 0.0);

  const double verbatim = closed_form_power(net, o.x, d, 0, 0, true);
  CHECK(verbatim == doctest::Approx(0.15 * 0.6 / 4.6 - net.noise_w / g));
  CHECK(closed_form_power(net, o.x, d, 0, 1) == 0.0);
}

TEST_CASE("closed form clips at zero for a weak link") {
  const auto o = single(1.0, 0.3, 5.0, 1.0, {0, 0});
  RadioParams radio;
  radio.reference_gain = 1e-12;
  const auto s = fixture::scenario(o.s.mnos(), {{o.s.user(0)}}, radio);
  const Network net(s);
  const auto d = DualState::initial(s, o.a, o.x, 0.0, 0.1);
  CHECK(closed_form_power(net, o.x, d, 0, 0) == 0.0);
}

TEST_CASE("closed form rejects a non-positive denominator") {
  const auto o = single(1.0, 0.4, 0.0);
  const Network net(o.s);
  const auto d = DualState::initial(o.s, o.a, o.x, 0.0, 0.1);
  CHECK_THROWS_AS(closed_form_power(net, o.x, d, 0, 0), std::domain_error);
}

TEST_CASE("dual update example") {
  const auto o = single(10.0);
  const Network net(o.s);
  auto d = DualState::initial(o.s, o.a, o.x, 0.5, 0.1);
  d.t = 4;  // step 0.05
  PowerMatrix p(o.s);
  const double g = net.gains.gain(0, 0);
  p(0, 0) = 3.0 * net.noise_w / g;  // 0.3 Mbps
  const auto next = update_duals(d, net, o.a, o.x, p);
  CHECK(next.lambda[0] == doctest::Approx(0.5 - 0.05 * (0.3 - 10.0)));
  CHECK(next.mu[0] == doctest::Approx(std::max(0.0, 0.5 - 0.05 * (1.0 - p(0, 0)))));
  CHECK(next.nu(0, 0) == doctest::Approx(0.5 - 0.05 * (1.0 - p(0, 0))));
  CHECK(next.nu(0, 1) == 0.0);

  // Large positive slack projects to zero.
  d.t = 1;
  d.mu[0] = 0.01;
  CHECK(update_duals(d, net, o.a, o.x, p).mu[0] == 0.0);
}

TEST_CASE("lagrangian is affine in the duals") {
  const auto s = generate_scenario(ScenarioTemplate{}, 3);
  const Network net(s);
  const auto a = matching_to_association(deferred_acceptance(build_preferences(net), uav_capacities(s)).matching, s);
  const auto x = equal_assignment(net, a);
  const auto p = equal_split_power(net, x);
  Rng rng(3);
  auto random_duals = [&] {
    auto d = DualState::initial(s, a, x, 0.0, 0.1);
    for (auto& v : d.lambda) v = rng.uniform(0, 2);
    for (auto& v : d.mu) v = rng.uniform(0, 2);
    for (int k = 0; k < s.num_users(); ++k)
      for (int c = 0; c < s.num_channels(); ++c)
        if (x(k, c)) d.nu(k, c) = rng.uniform(0, 2);
    return d;
  };
  const auto d1 = random_duals(), d2 = random_duals();
  auto mix = d1;
  const double w = 0.3;
  for (std::size_t i = 0; i < mix.lambda.size(); ++i) mix.lambda[i] = w * d1.lambda[i] + (1 - w) * d2.lambda[i];
  for (std::size_t i = 0; i < mix.mu.size(); ++i) mix.mu[i] = w * d1.mu[i] + (1 - w) * d2.mu[i];
  for (int k = 0; k < s.num_users(); ++k)
    for (int c = 0; c < s.num_channels(); ++c) mix.nu(k, c) = w * d1.nu(k, c) + (1 - w) * d2.nu(k, c);
  const double lhs = lagrangian_value(net, a, x, p, mix);
  const double rhs = w * lagrangian_value(net, a, x, p, d1) + (1 - w) * lagrangian_value(net, a, x, p, d2);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));

  // Zero duals reduce to the utility.
  const auto zero = DualState::initial(s, a, x, 0.0, 0.1);
  CHECK(lagrangian_value(net, a, x, p, zero) == doctest::Approx(total_utility(a, x, p, net).total));
}

TEST_CASE("weak duality on feasible points") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    ScenarioTemplate t;
    t.min_rate_mbps = {0.01, 0.02};
    t.users_per_sp = {4, 3};
    t.num_subchannels = 6;
    const auto s = generate_scenario(t, seed);
    const Network net(s);
    const auto a = matching_to_association(deferred_acceptance(build_preferences(net), uav_capacities(s)).matching, s);
    const auto x = equal_assignment(net, a);
    const auto p = equal_split_power(net, x);
    Rng rng(seed);
    auto d = DualState::initial(s, a, x, 0.0, 0.1);
    for (auto& v : d.lambda) v = v + rng.uniform(0, 1);
    for (auto& v : d.mu) v = rng.uniform(0, 1);
    const double primal = total_utility(a, x, p, net).total;
    CHECK(dual_function(net, a, x, d) >= primal - 1e-9);
  }
}

TEST_CASE("single user without binding constraints matches a golden-section oracle") {
  for (double delta : {0.3, 0.4, 0.5}) {
    const auto o = single(0.001, delta, 4.5);
    const Network net(o.s);
    const auto res = solve_power(net, o.a, o.x);
    auto u = [&](double v) {
      PowerMatrix p(o.s);
      p(0, 0) = v;
      return total_utility(o.a, o.x, p, net).total;
    };
    const double oracle = golden_max(u, 0.0, 1.0);
    CHECK(res.converged);
    CHECK(res.power(0, 0) == doctest::Approx(oracle).epsilon(1e-4));
    CHECK(res.objective == doctest::Approx(u(oracle)).epsilon(1e-6));
    CHECK(res.dual_value >= res.objective - 1e-6);
  }
}

TEST_CASE("binding QoS pushes power up to the requirement") {
  // Unconstrained optimum gives about 0.02 W, far below what 3 Mbps needs.
  const auto o = single(3.0, 0.4, 4.0, 1.0, {0, 0});
  const Network net(o.s);
  PowerParams params;
  params.max_iterations = 20000;
  const auto res = solve_power(net, o.a, o.x, params);
  const double g = net.gains.gain(0, 0);
  const double needed = (std::exp2(3.0 / 0.15) - 1.0) * net.noise_w / g;
  REQUIRE(needed < 1.0);
  CHECK(res.power(0, 0) >= needed * (1 - 1e-3));
  CHECK(res.power(0, 0) <= 1.0);
}

TEST_CASE("projection respects per-UAV budgets and support") {
  using fixture::mno;
  using fixture::user;
  const auto s = fixture::scenario({mno({0, 0, 100}, 3, 1.0, 2, 4)}, {{user({0, 0}, 1, 0.4)}});
  const Network net(s);
  AssignmentMatrix x(s);
  x(0, 0) = 1;
  x(0, 1) = 1;
  PowerMatrix p(s);
  p(0, 0) = 0.9;
  p(0, 1) = 0.6;
  p(0, 2) = 0.5;
  project_power(net, x, p);
  CHECK(p(0, 2) == 0.0);
  CHECK(p(0, 0) + p(0, 1) == doctest::Approx(1.0));
  CHECK(p(0, 0) / p(0, 1) == doctest::Approx(1.5));
  PowerMatrix neg(s);
  neg(0, 0) = -0.2;
  neg(0, 1) = 2.0;
  project_power(net, x, neg);
  CHECK(neg(0, 0) == 0.0);
  CHECK(neg(0, 1) == doctest::Approx(1.0));
}

TEST_CASE("solver output stays inside the power box") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto s = generate_scenario(ScenarioTemplate{}, seed);
    const Network net(s);
    const auto a = matching_to_association(deferred_acceptance(build_preferences(net), uav_capacities(s)).matching, s);
    const auto x = equal_assignment(net, a);
    const auto res = solve_power(net, a, x);
    for (int n = 0; n < s.num_uavs(); ++n) CHECK(res.power.uav_total(s, n) <= s.mnos()[static_cast<std::size_t>(n)].max_power_w * (1 + 1e-12));
    for (int k = 0; k < s.num_users(); ++k)
      for (int c = 0; c < s.num_channels(); ++c) {
        CHECK(res.power(k, c) >= 0.0);
        if (!x(k, c)) CHECK(res.power(k, c) == 0.0);
      }
    CHECK(res.trace.size() == static_cast<std::size_t>(res.iterations));
  }
}

TEST_CASE("derivatives and concavity") {
  const auto o = single(1.0);
  const Network net(o.s);
  const double g = net.gains.gain(0, 0);
  CHECK(utility_derivative(net, o.x, 0, 0, 0.0) == doctest::Approx(0.4 * 0.15 * g / (std::numbers::ln2 * net.noise_w) - 4.0));
  CHECK(utility_derivative(net, o.x, 0, 1, 0.3) == doctest::Approx(-4.0));
  CHECK(utility_second_derivative(net, o.x, 0, 0, 0.1) < 0.0);

  const auto s = generate_scenario(ScenarioTemplate{}, 2);
  const Network big(s);
  const auto a = matching_to_association(deferred_acceptance(build_preferences(big), uav_capacities(s)).matching, s);
  const auto rep = verify_concavity(big, a, equal_assignment(big, a), 100, 2);
  CHECK(rep.samples == 100);
  CHECK(rep.max_rel_error < 1e-5);
  CHECK(rep.second_negative);
  CHECK(rep.max_second < 0.0);
}

}  // TEST_SUITE
