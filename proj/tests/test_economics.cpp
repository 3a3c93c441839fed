#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "uavshare/economics.hpp"
#include "uavshare/rng.hpp"

using namespace uavshare;

namespace {

// Termwise re-summation straight from geometry, independent of the
// library's gain table and utility code.
struct OracleTotals {
  std::vector<double> revenue, cost;
  double total = 0.0;
};

OracleTotals oracle(const Scenario& s, const AssociationMatrix& a, const AssignmentMatrix& x, const PowerMatrix& p) {
  OracleTotals o;
  o.revenue.assign(static_cast<std::size_t>(s.num_sps()), 0.0);
  o.cost.assign(static_cast<std::size_t>(s.num_sps()), 0.0);
  const double sigma2 = std::pow(10.0, s.radio().noise_density_dbm_per_hz / 10.0) * 1e-3 * s.radio().subchannel_bandwidth_hz;
  for (int k = 0; k < s.num_users(); ++k) {
    const auto m = static_cast<std::size_t>(s.sp_of_user(k));
    const auto& u = s.user(k);
    for (int c = 0; c < s.num_channels(); ++c) {
      const int n = s.uav_of_channel(c);
      const auto& uav = s.mnos()[static_cast<std::size_t>(n)].uav_position;
      const double dx = u.position.x - uav.x, dy = u.position.y - uav.y;
      const double d = std::sqrt(dx * dx + dy * dy + uav.z * uav.z);
      const double g = s.radio().reference_gain / std::pow(d, s.radio().path_loss_exponent);
      const double r = s.radio().subchannel_bandwidth_hz * std::log2(1.0 + p(k, c) * g / sigma2);
      o.revenue[m] += u.payment_per_mbps * a(k, n) * x(k, c) * r / 1e6;
      o.cost[m] += s.channel_price(c) * a(k, n) * x(k, c);
      o.cost[m] += s.mnos()[static_cast<std::size_t>(n)].price_per_watt * a(k, n) * p(k, c);
    }
  }
  for (int m = 0; m < s.num_sps(); ++m) o.total += o.revenue[static_cast<std::size_t>(m)] - o.cost[static_cast<std::size_t>(m)];
  return o;
}

struct RandomAllocation {
  AssociationMatrix a;
  AssignmentMatrix x;
  PowerMatrix p;
};

RandomAllocation random_allocation(const Scenario& s, Rng& rng) {
  RandomAllocation r{AssociationMatrix(s), AssignmentMatrix(s), PowerMatrix(s)};
  for (int k = 0; k < s.num_users(); ++k) {
    const auto n = static_cast<int>(rng.index(static_cast<std::size_t>(s.num_uavs()) + 1)) - 1;
    if (n >= 0) r.a(k, n) = 1;
  }
  for (int c = 0; c < s.num_channels(); ++c) {
    const auto users = r.a.users_of(s.uav_of_channel(c));
    if (users.empty() || rng.uniform() < 0.3) continue;
    const int k = users[rng.index(users.size())];
    r.x(k, c) = 1;
    r.p(k, c) = rng.uniform(0.0, 0.3);
  }
  return r;
}

}  // namespace

TEST_SUITE("economics") {

TEST_CASE("user rate sums assigned subchannels") {
  using fixture::mno;
  using fixture::user;
  const auto s = fixture::scenario({mno({0, 0, 100}, 2, 1, 2, 4)}, {{user({0, 0}, 1, 0.4)}});
  const Network net(s);
  AssociationMatrix a(s);
  AssignmentMatrix x(s);
  PowerMatrix p(s);
  a(0, 0) = 1;
  CHECK(user_rate(0, a, x, p, net) == 0.0);

  const double g = net.gains.gain(0, 0);
  x(0, 0) = 1;
  p(0, 0) = 3.0 * net.noise_w / g;  // gamma = 3
  CHECK(user_rate(0, a, x, p, net) == doctest::Approx(300e3));

  x(0, 1) = 1;
  p(0, 1) = 0.01;
  const double r2 = 150e3 * std::log2(1.0 + 0.01 * g / net.noise_w);
  CHECK(user_rate(0, a, x, p, net) == doctest::Approx(300e3 + r2));

  a(0, 0) = 0;
  CHECK(user_rate(0, a, x, p, net) == 0.0);
}

TEST_CASE("revenue and cost examples") {
  using fixture::mno;
  using fixture::user;
  // Power chosen so each user gets a known rate on one subchannel.
  const auto s = fixture::scenario({mno({0, 0, 100}, 4, 10, 2.5, 4.5)},
                                   {{user({0, 0}, 1, 0.4)}, {user({0, 0}, 1, 0.5), user({0, 0}, 1, 0.5)}});
  const Network net(s);
  const double g = net.gains.gain(0, 0);
  auto power_for = [&](double mbps) { return (std::exp2(mbps * 1e6 / 150e3) - 1.0) * net.noise_w / g; };

  AssociationMatrix a(s);
  AssignmentMatrix x(s);
  PowerMatrix p(s);
  for (int k = 0; k < 3; ++k) a(k, 0) = 1;
  CHECK(revenue(0, a, x, p, net) == 0.0);

  // delta 0.4 at 30 Mbps -> 12
  x(0, 0) = 1;
  p(0, 0) = power_for(30.0);
  CHECK(revenue(0, a, x, p, net) == doctest::Approx(12.0));

  // delta 0.5 at 10 and 20 Mbps -> 15
  x(1, 1) = 1;
  x(2, 2) = 1;
  p(1, 1) = power_for(10.0);
  p(2, 2) = power_for(20.0);
  CHECK(revenue(1, a, x, p, net) == doctest::Approx(15.0));

  // Two subchannels at 2.5 and 0.5 W at 4.5 -> 7.25
  AssignmentMatrix x2(s);
  PowerMatrix p2(s);
  x2(1, 1) = 1;
  x2(2, 2) = 1;
  p2(1, 1) = 0.2;
  p2(2, 2) = 0.3;
  CHECK(cost(1, a, x2, p2, net) == doctest::Approx(7.25));
  CHECK(cost(0, a, x2, p2, net) == 0.0);

  PowerMatrix doubled = p2;
  doubled(1, 1) *= 2;
  doubled(2, 2) *= 2;
  CHECK(cost(1, a, x2, doubled, net) - cost(1, a, x2, p2, net) == doctest::Approx(2.25));
}

TEST_CASE("empty allocation is all zeros") {
  const auto s = generate_scenario(ScenarioTemplate{}, 1);
  const Network net(s);
  const auto u = total_utility(AssociationMatrix(s), AssignmentMatrix(s), PowerMatrix(s), net);
  CHECK(u.total == 0.0);
  CHECK(u.total_revenue == 0.0);
  CHECK(u.total_cost == 0.0);
  for (const auto& sp : u.per_sp) CHECK(sp.utility == 0.0);
  for (bool met : u.qos_met) CHECK_FALSE(met);
}

TEST_CASE("single SP total equals its utility") {
  ScenarioTemplate t;
  t.users_per_sp = {6};
  const auto s = generate_scenario(t, 8);
  const Network net(s);
  Rng rng(1);
  const auto r = random_allocation(s, rng);
  const auto u = total_utility(r.a, r.x, r.p, net);
  CHECK(u.per_sp.size() == 1);
  CHECK(u.total == doctest::Approx(u.per_sp[0].utility));
}

TEST_CASE("total utility matches termwise oracle on random instances") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    ScenarioTemplate t;
    t.users_per_sp = {3, 2, 2};
    t.num_subchannels = 4;
    const auto s = generate_scenario(t, seed);
    const Network net(s);
    Rng rng(seed * 31);
    const auto r = random_allocation(s, rng);
    const auto u = total_utility(r.a, r.x, r.p, net);
    const auto o = oracle(s, r.a, r.x, r.p);
    CHECK(u.total == doctest::Approx(o.total).epsilon(1e-12));
    for (int m = 0; m < s.num_sps(); ++m) {
      const auto i = static_cast<std::size_t>(m);
      CHECK(u.per_sp[i].revenue == doctest::Approx(o.revenue[i]).epsilon(1e-12));
      CHECK(u.per_sp[i].cost == doctest::Approx(o.cost[i]).epsilon(1e-12));
      CHECK(u.per_sp[i].utility == doctest::Approx(u.per_sp[i].revenue - u.per_sp[i].cost));
    }
    for (int k = 0; k < s.num_users(); ++k)
      CHECK(u.qos_met[static_cast<std::size_t>(k)] == (u.user_rate_bps[static_cast<std::size_t>(k)] >= s.user(k).min_rate_bps));
  }
}

TEST_CASE("power cost with and without the assignment factor agree on supported powers") {
  const auto s = generate_scenario(ScenarioTemplate{}, 6);
  const Network net(s);
  Rng rng(6);
  auto r = random_allocation(s, rng);
  enforce_power_support(r.x, r.p);
  for (int m = 0; m < s.num_sps(); ++m) {
    double with_x = 0.0;
    for (int k = 0; k < s.num_users(); ++k) {
      if (s.sp_of_user(k) != m) continue;
      for (int c = 0; c < s.num_channels(); ++c) {
        const int n = s.uav_of_channel(c);
        with_x += s.channel_price(c) * r.a(k, n) * r.x(k, c) +
                  s.mnos()[static_cast<std::size_t>(n)].price_per_watt * r.a(k, n) * r.x(k, c) * r.p(k, c);
      }
    }
    CHECK(cost(m, r.a, r.x, r.p, net) == doctest::Approx(with_x).epsilon(1e-12));
  }
}

TEST_CASE("permuting users within an SP leaves totals unchanged") {
  const auto s = generate_scenario(ScenarioTemplate{}, 2);
  Rng rng(2);
  const auto r = random_allocation(s, rng);
  const Network net(s);
  const double before = total_utility(r.a, r.x, r.p, net).total;

  // Reverse SP 1's users and carry their rows along.
  auto mnos = s.mnos();
  auto sps = s.sps();
  std::reverse(sps[1].users.begin(), sps[1].users.end());
  const Scenario t(mnos, sps, s.radio(), s.seed());
  const Network net2(t);
  RandomAllocation q{AssociationMatrix(t), AssignmentMatrix(t), PowerMatrix(t)};
  const int first = s.global_user(1, 0), count = static_cast<int>(sps[1].users.size());
  for (int k = 0; k < s.num_users(); ++k) {
    const int j = (k >= first && k < first + count) ? first + (count - 1 - (k - first)) : k;
    for (int n = 0; n < s.num_uavs(); ++n) q.a(j, n) = r.a(k, n);
    for (int c = 0; c < s.num_channels(); ++c) {
      q.x(j, c) = r.x(k, c);
      q.p(j, c) = r.p(k, c);
    }
  }
  CHECK(total_utility(q.a, q.x, q.p, net2).total == doctest::Approx(before).epsilon(1e-12));
}

TEST_CASE("matrix helpers") {
  const auto s = generate_scenario(ScenarioTemplate{}, 1);
  AssociationMatrix a(s);
  a(3, 2) = 1;
  a(7, 2) = 1;
  CHECK(a.uav_of(3) == 2);
  CHECK(a.uav_of(0) == -1);
  CHECK(a.users_of(2) == std::vector<int>{3, 7});
  AssignmentMatrix x(s);
  x(3, 45) = 1;
  x(3, 46) = 1;
  CHECK(x.holder(45) == 3);
  CHECK(x.holder(0) == -1);
  CHECK(x.channels_of(3) == 2);
  PowerMatrix p(s);
  p(3, 45) = 0.5;
  p(3, 46) = 0.25;
  p(3, 47) = 1.0;
  CHECK(p.uav_total(s, 2) == doctest::Approx(1.75));
  enforce_power_support(x, p);
  CHECK(p(3, 47) == 0.0);
  CHECK(p.uav_total(s, 2) == doctest::Approx(0.75));
}

}  // TEST_SUITE
