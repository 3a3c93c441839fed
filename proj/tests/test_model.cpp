#include <doctest.h>

#include "helpers.hpp"
#include "uavshare/rng.hpp"

using namespace uavshare;

TEST_SUITE("model") {

TEST_CASE("dbm to watt") {
  CHECK(dbm_to_watt(30.0) == doctest::Approx(1.0));
  CHECK(dbm_to_watt(0.0) == doctest::Approx(0.001));
  CHECK(dbm_to_watt(35.0) == doctest::Approx(3.1623).epsilon(1e-4));
}

TEST_CASE("noise power from density") {
  CHECK(noise_power(-174.0, 1.0) == doctest::Approx(3.981e-21).epsilon(1e-3));
  CHECK(noise_power(-174.0, 150e3) == doctest::Approx(5.972e-16).epsilon(1e-3));
  CHECK(noise_power(0.0, 1.0) == doctest::Approx(1e-3));
}

TEST_CASE("splitmix64 and xoshiro256** reference streams") {
  std::uint64_t state = 0;
  CHECK(splitmix64(state) == 0xe220a8397b1dcdafULL);

  // Values from an independent Python implementation.
  Rng rng(0);
  CHECK(rng.next() == 0x99ec5f36cb75f2b4ULL);
  CHECK(rng.next() == 0xbf6e1f784956452aULL);
  CHECK(rng.next() == 0x1a5f849d4933e6e0ULL);
  Rng r42(42);
  CHECK(r42.uniform() == doctest::Approx(0.08386297105988216).epsilon(1e-15));
}

TEST_CASE("degenerate uniform range still consumes a draw") {
  Rng a(7), b(7);
  CHECK(a.uniform(3.0, 3.0) == 3.0);
  b.uniform();
  CHECK(a.next() == b.next());
}

TEST_CASE("index stays in range") {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) CHECK(rng.index(7) < 7u);
}

TEST_CASE("default template gives the reference network") {
  const Scenario s = generate_scenario(ScenarioTemplate{}, 1);
  CHECK(s.num_uavs() == 3);
  CHECK(s.num_sps() == 3);
  CHECK(s.num_users() == 35);
  CHECK(s.sps()[0].users.size() == 20);
  CHECK(s.sps()[1].users.size() == 10);
  CHECK(s.sps()[2].users.size() == 5);
  CHECK(s.num_channels() == 60);
  for (const auto& m : s.mnos()) {
    CHECK(m.uav_position.z == 100.0);
    CHECK(m.num_subchannels == 20);
    CHECK(m.user_capacity == 20);
    CHECK(m.max_power_w == doctest::Approx(3.1623).epsilon(1e-4));
    CHECK(m.price_per_watt >= 4.0);
    CHECK(m.price_per_watt <= 5.0);
    for (double beta : m.price_per_subchannel) {
      CHECK(beta == m.price_per_subchannel.front());
      CHECK(beta >= 2.0);
      CHECK(beta <= 3.0);
    }
  }
  CHECK(s.radio().reference_gain == doctest::Approx(0.1));
  CHECK(s.radio().subchannel_bandwidth_hz == 150e3);
  for (int k = 0; k < s.num_users(); ++k) {
    const auto& u = s.user(k);
    CHECK(u.min_rate_bps >= 20e6);
    CHECK(u.min_rate_bps <= 30e6);
    CHECK(u.payment_per_mbps >= 0.3);
    CHECK(u.payment_per_mbps <= 0.5);
    CHECK(u.position.x >= 0.0);
    CHECK(u.position.x <= 400.0);
  }
  CHECK(s.mnos()[0].uav_position.x == doctest::Approx(400.0 / 6));
  CHECK(s.mnos()[2].uav_position.x == doctest::Approx(2000.0 / 6));
}

TEST_CASE("generated draws match an independent reimplementation") {
  const Scenario s = generate_scenario(ScenarioTemplate{}, 1);
  CHECK(s.mnos()[0].price_per_subchannel[0] == doctest::Approx(2.189805324241047).epsilon(1e-14));
  CHECK(s.mnos()[0].price_per_watt == doctest::Approx(4.108414915348931).epsilon(1e-14));
  CHECK(s.mnos()[2].price_per_watt == doctest::Approx(4.755872199269464).epsilon(1e-14));
  CHECK(s.user(0).position.x == doctest::Approx(148.5625408106062).epsilon(1e-14));
  CHECK(s.user(0).position.y == doctest::Approx(93.62481066247894).epsilon(1e-14));
  CHECK(s.user(0).min_rate_bps == doctest::Approx(21343373.312677238).epsilon(1e-14));
  CHECK(s.user(1).payment_per_mbps == doctest::Approx(0.4994834969133067).epsilon(1e-14));
}

TEST_CASE("generation is deterministic per seed") {
  const auto a = generate_scenario(ScenarioTemplate{}, 9);
  const auto b = generate_scenario(ScenarioTemplate{}, 9);
  const auto c = generate_scenario(ScenarioTemplate{}, 10);
  CHECK(to_json(a).dump() == to_json(b).dump());
  CHECK(scenario_digest(a) == scenario_digest(b));
  CHECK(scenario_digest(a) != scenario_digest(c));
}

TEST_CASE("pinning a price range leaves the other draws untouched") {
  ScenarioTemplate pinned;
  pinned.power_price = {4.5, 4.5};
  const auto a = generate_scenario(ScenarioTemplate{}, 4);
  const auto b = generate_scenario(pinned, 4);
  for (int k = 0; k < a.num_users(); ++k) CHECK(a.user(k).position.x == b.user(k).position.x);
  CHECK(a.mnos()[1].price_per_subchannel == b.mnos()[1].price_per_subchannel);
  CHECK(b.mnos()[1].price_per_watt == 4.5);
}

TEST_CASE("single user single UAV template") {
  ScenarioTemplate t;
  t.num_uavs = 1;
  t.users_per_sp = {1};
  const auto s = generate_scenario(t, 5);
  CHECK(s.num_users() == 1);
  CHECK(s.num_uavs() == 1);
  CHECK(s.user(0).min_rate_bps >= 20e6);
  CHECK(s.user(0).min_rate_bps <= 30e6);
  CHECK(s.mnos()[0].uav_position.x == doctest::Approx(200.0));
}

TEST_CASE("per-subchannel prices are drawn independently") {
  ScenarioTemplate t;
  t.per_subchannel_price = true;
  const auto s = generate_scenario(t, 2);
  const auto& prices = s.mnos()[0].price_per_subchannel;
  CHECK(prices.size() == 20);
  CHECK(prices[0] != prices[1]);
}

TEST_CASE("invalid templates and scenarios are rejected") {
  ScenarioTemplate t;
  t.payment_per_mbps = {0.5, 0.3};
  CHECK_THROWS_AS(generate_scenario(t, 1), ConfigError);

  using fixture::mno;
  using fixture::user;
  CHECK_THROWS_AS(fixture::scenario({}, {{user({1, 1}, 1, 0.4)}}), ConfigError);
  CHECK_THROWS_AS(fixture::scenario({mno({0, 0, 100}, 2, 1, 2, 4)}, {{}}), ConfigError);
  CHECK_THROWS_AS(fixture::scenario({mno({0, 0, 0}, 2, 1, 2, 4)}, {{user({1, 1}, 1, 0.4)}}), ConfigError);
  CHECK_THROWS_AS(fixture::scenario({mno({0, 0, 100}, 2, 0, 2, 4)}, {{user({1, 1}, 1, 0.4)}}), ConfigError);
  CHECK_THROWS_AS(fixture::scenario({mno({0, 0, 100}, 2, 1, -1, 4)}, {{user({1, 1}, 1, 0.4)}}), ConfigError);
  CHECK_THROWS_AS(fixture::scenario({mno({0, 0, 100}, 2, 1, 2, 4)}, {{user({1, 1}, 0, 0.4)}}), ConfigError);
  CHECK_THROWS_AS(fixture::scenario({mno({0, 0, 100}, 2, 1, 2, 4)}, {{user({1, 1}, 1, 0.0)}}), ConfigError);
  CHECK_THROWS_AS(fixture::scenario({mno({0, 0, 100}, 2, 1, 2, 4)}, {{user({500, 1}, 1, 0.4)}}), ConfigError);
  RadioParams radio;
  radio.path_loss_exponent = 1.5;
  CHECK_THROWS_AS(fixture::scenario({mno({0, 0, 100}, 2, 1, 2, 4)}, {{user({1, 1}, 1, 0.4)}}, radio), ConfigError);
}

TEST_CASE("flat indexing") {
  using fixture::mno;
  using fixture::user;
  const auto s = fixture::scenario({mno({0, 0, 100}, 2, 1, 2, 4), mno({10, 0, 100}, 3, 1, 2.5, 4)},
                                   {{user({1, 1}, 1, 0.4), user({2, 1}, 1, 0.4)}, {user({3, 1}, 1, 0.3)}});
  CHECK(s.num_channels() == 5);
  CHECK(s.uav_of_channel(1) == 0);
  CHECK(s.uav_of_channel(2) == 1);
  CHECK(s.first_channel(1) == 2);
  CHECK(s.channel_price(4) == 2.5);
  CHECK(s.sp_of_user(2) == 1);
  CHECK(s.local_index(2) == 0);
  CHECK(s.global_user(1, 0) == 2);
}

TEST_CASE("scenario json round trip is lossless") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    ScenarioTemplate t;
    t.per_subchannel_price = seed == 2;
    const auto s = generate_scenario(t, seed);
    const auto text = to_json(s).dump();
    const auto back = scenario_from_json(nlohmann::json::parse(text));
    CHECK(to_json(back).dump() == text);
    CHECK(scenario_digest(back) == scenario_digest(s));
  }
}

TEST_CASE("template json round trip and validation") {
  ScenarioTemplate t;
  t.num_subchannels = 12;
  t.users_per_sp = {4, 2};
  t.uav_positions = {{10, 20}, {30, 40}, {50, 60}};
  const auto back = template_from_json(to_json(t));
  CHECK(to_json(back) == to_json(t));
  CHECK_THROWS_AS(template_from_json(nlohmann::json::parse(R"({"power_price": [1]})")), ConfigError);
  CHECK_THROWS_AS(template_from_json(nlohmann::json::parse(R"({"num_uavs": "three"})")), ConfigError);
  CHECK_THROWS_AS(scenario_from_json(nlohmann::json::parse(R"({"mnos": []})")), ConfigError);
}

}  // TEST_SUITE
