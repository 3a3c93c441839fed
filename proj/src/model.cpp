#include "uavshare/model.hpp"

#include <cmath>

#include "uavshare/rng.hpp"

namespace uavshare {

using nlohmann::json;

double dbm_to_watt(double level_dbm) { return std::pow(10.0, level_dbm / 10.0) * 1e-3; }

double db_to_linear(double level_db) { return std::pow(10.0, level_db / 10.0); }

double noise_power(double density_dbm_per_hz, double bandwidth_hz) {
  return dbm_to_watt(density_dbm_per_hz) * bandwidth_hz;
}

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

Scenario::Scenario(std::vector<MnoConfig> mnos, std::vector<SpConfig> sps, RadioParams radio, std::uint64_t seed)
    : mnos_(std::move(mnos)), sps_(std::move(sps)), radio_(std::move(radio)), seed_(seed) {
  require(!mnos_.empty(), "scenario needs at least one MNO");
  require(!sps_.empty(), "scenario needs at least one SP");

  require(radio_.subchannel_bandwidth_hz > 0.0, "subchannel bandwidth must be > 0");
  require(radio_.reference_gain > 0.0, "reference gain must be > 0");
  require(radio_.path_loss_exponent >= 2.0, "path loss exponent must be >= 2");
  require(radio_.area_side_m > 0.0, "area side must be > 0");
  const double sigma2 = radio_.noise_power_w();
  require(std::isfinite(sigma2) && sigma2 > 0.0, "noise power must be > 0");
  if (radio_.rician_k_factor) require(*radio_.rician_k_factor >= 0.0, "Rician K-factor must be >= 0");

  for (std::size_t n = 0; n < mnos_.size(); ++n) {
    const auto& m = mnos_[n];
    const std::string tag = "mno " + std::to_string(n) + ": ";
    require(m.uav_position.z > 0.0, tag + "altitude must be > 0");
    require(m.num_subchannels >= 1, tag + "needs at least one subchannel");
    require(m.max_power_w > 0.0, tag + "max power must be > 0");
    require(m.price_per_subchannel.size() == static_cast<std::size_t>(m.num_subchannels),
            tag + "one subchannel price per subchannel required");
    for (double beta : m.price_per_subchannel) require(beta >= 0.0, tag + "subchannel price must be >= 0");
    require(m.price_per_watt >= 0.0, tag + "power price must be >= 0");
    require(m.user_capacity >= 1, tag + "user capacity must be >= 1");
    channel_offset_.push_back(static_cast<int>(channel_uav_.size()));
    for (int b = 0; b < m.num_subchannels; ++b) channel_uav_.push_back(static_cast<int>(n));
  }

  const double side = radio_.area_side_m;
  for (std::size_t m = 0; m < sps_.size(); ++m) {
    sp_offset_.push_back(static_cast<int>(user_sp_.size()));
    for (std::size_t u = 0; u < sps_[m].users.size(); ++u) {
      const auto& usr = sps_[m].users[u];
      const std::string tag = "sp " + std::to_string(m) + " user " + std::to_string(u) + ": ";
      require(usr.min_rate_bps > 0.0, tag + "min rate must be > 0");
      require(usr.payment_per_mbps > 0.0, tag + "payment must be > 0");
      require(usr.position.x >= 0.0 && usr.position.x <= side && usr.position.y >= 0.0 && usr.position.y <= side,
              tag + "position outside the area");
      user_sp_.push_back(static_cast<int>(m));
      user_local_.push_back(static_cast<int>(u));
    }
  }
  require(!user_sp_.empty(), "scenario needs at least one user");
}

// Draw order (stable across versions):
//   stream 1, per MNO in order: beta (1 draw, or B_n draws when
//     per_subchannel_price), then theta (1 draw);
//   stream 2, per SP then per user in order: x, y, R^min, delta.
// Every range draw consumes exactly one uniform even when lo == hi.
Scenario generate_scenario(const ScenarioTemplate& t, std::uint64_t seed) {
  auto check_range = [](const Range& r, const char* name) {
    require(r.lo <= r.hi, std::string("invalid range for ") + name + ": lo > hi");
  };
  check_range(t.subchannel_price, "subchannel_price");
  check_range(t.power_price, "power_price");
  check_range(t.min_rate_mbps, "min_rate_mbps");
  check_range(t.payment_per_mbps, "payment_per_mbps");
  require(t.num_uavs >= 1, "template needs at least one UAV");
  require(t.num_subchannels >= 1, "template needs at least one subchannel");
  require(t.uav_positions.empty() || static_cast<int>(t.uav_positions.size()) == t.num_uavs,
          "uav_positions must be empty or have num_uavs entries");
  require(!t.users_per_sp.empty(), "template needs at least one SP");
  for (int count : t.users_per_sp) require(count >= 0, "users_per_sp entries must be >= 0");

  Rng price_rng = Rng::derive(seed, 1);
  Rng user_rng = Rng::derive(seed, 2);
  const double side = t.area_side_m;

  std::vector<MnoConfig> mnos;
  for (int n = 0; n < t.num_uavs; ++n) {
    MnoConfig m;
    const Vec2 xy = t.uav_positions.empty()
                        ? Vec2{(n + 0.5) * side / t.num_uavs, 0.5 * side}
                        : t.uav_positions[static_cast<std::size_t>(n)];
    m.uav_position = {xy.x, xy.y, t.altitude_m};
    m.num_subchannels = t.num_subchannels;
    m.max_power_w = dbm_to_watt(t.max_power_dbm);
    if (t.per_subchannel_price) {
      for (int b = 0; b < t.num_subchannels; ++b)
        m.price_per_subchannel.push_back(price_rng.uniform(t.subchannel_price.lo, t.subchannel_price.hi));
    } else {
      m.price_per_subchannel.assign(static_cast<std::size_t>(t.num_subchannels),
                                    price_rng.uniform(t.subchannel_price.lo, t.subchannel_price.hi));
    }
    m.price_per_watt = price_rng.uniform(t.power_price.lo, t.power_price.hi);
    m.user_capacity = t.user_capacity > 0 ? t.user_capacity : t.num_subchannels;
    mnos.push_back(std::move(m));
  }

  std::vector<SpConfig> sps;
  for (int count : t.users_per_sp) {
    SpConfig sp;
    for (int u = 0; u < count; ++u) {
      UserConfig usr;
      usr.position.x = user_rng.uniform(0.0, side);
      usr.position.y = user_rng.uniform(0.0, side);
      usr.min_rate_bps = user_rng.uniform(t.min_rate_mbps.lo, t.min_rate_mbps.hi) * kBitsPerMbps;
      usr.payment_per_mbps = user_rng.uniform(t.payment_per_mbps.lo, t.payment_per_mbps.hi);
      sp.users.push_back(usr);
    }
    sps.push_back(std::move(sp));
  }

  RadioParams radio;
  radio.subchannel_bandwidth_hz = t.subchannel_bandwidth_hz;
  radio.reference_gain = db_to_linear(t.reference_gain_db);
  radio.path_loss_exponent = t.path_loss_exponent;
  radio.noise_density_dbm_per_hz = t.noise_density_dbm_per_hz;
  radio.area_side_m = side;
  radio.rician_k_factor = t.rician_k_factor;
  return Scenario(std::move(mnos), std::move(sps), radio, seed);
}

// ---------------------------------------------------------------- JSON

namespace {

const char* kScenarioFormat = "uavshare.scenario.v1";
const char* kTemplateFormat = "uavshare.template.v1";

template <typename T>
T get(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("missing key: ") + key);
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for ") + key + ": " + e.what());
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? get<T>(j, key) : fallback;
}

json range_json(const Range& r) { return json::array({r.lo, r.hi}); }

Range range_from(const json& j, const char* key, Range fallback) {
  if (!j.contains(key)) return fallback;
  const auto v = get<std::vector<double>>(j, key);
  if (v.size() != 2) throw ConfigError(std::string(key) + " must be [lo, hi]");
  return {v[0], v[1]};
}

}  // namespace

json to_json(const Scenario& s) {
  json j;
  j["format"] = kScenarioFormat;
  j["seed"] = s.seed();
  j["units"] = {{"position", "m"},          {"power", "W"},
                {"bandwidth", "Hz"},        {"rate", "bit/s"},
                {"noise_density", "dBm/Hz"}, {"reference_gain", "linear"},
                {"price_per_subchannel", "money"}, {"price_per_watt", "money/W"},
                {"payment", "money/Mbps"}};
  const auto& r = s.radio();
  j["radio"] = {{"subchannel_bandwidth_hz", r.subchannel_bandwidth_hz},
                {"reference_gain", r.reference_gain},
                {"path_loss_exponent", r.path_loss_exponent},
                {"noise_density_dbm_per_hz", r.noise_density_dbm_per_hz},
                {"area_side_m", r.area_side_m}};
  j["radio"]["rician_k_factor"] = r.rician_k_factor ? json(*r.rician_k_factor) : json(nullptr);
  j["mnos"] = json::array();
  for (const auto& m : s.mnos()) {
    j["mnos"].push_back({{"uav_position_m", {m.uav_position.x, m.uav_position.y, m.uav_position.z}},
                         {"num_subchannels", m.num_subchannels},
                         {"max_power_w", m.max_power_w},
                         {"price_per_subchannel", m.price_per_subchannel},
                         {"price_per_watt", m.price_per_watt},
                         {"user_capacity", m.user_capacity}});
  }
  j["sps"] = json::array();
  for (const auto& sp : s.sps()) {
    json users = json::array();
    for (const auto& u : sp.users)
      users.push_back({{"position_m", {u.position.x, u.position.y}},
                       {"min_rate_bps", u.min_rate_bps},
                       {"payment_per_mbps", u.payment_per_mbps}});
    j["sps"].push_back({{"users", users}});
  }
  return j;
}

Scenario scenario_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("scenario must be a JSON object");
  if (j.contains("format") && j.at("format") != kScenarioFormat)
    throw ConfigError("unsupported scenario format: " + j.at("format").dump());

  const json& jr = j.contains("radio") ? j.at("radio") : json::object();
  RadioParams radio;
  radio.subchannel_bandwidth_hz = get_or(jr, "subchannel_bandwidth_hz", radio.subchannel_bandwidth_hz);
  radio.reference_gain = get_or(jr, "reference_gain", radio.reference_gain);
  radio.path_loss_exponent = get_or(jr, "path_loss_exponent", radio.path_loss_exponent);
  radio.noise_density_dbm_per_hz = get_or(jr, "noise_density_dbm_per_hz", radio.noise_density_dbm_per_hz);
  radio.area_side_m = get_or(jr, "area_side_m", radio.area_side_m);
  if (jr.contains("rician_k_factor") && !jr.at("rician_k_factor").is_null())
    radio.rician_k_factor = get<double>(jr, "rician_k_factor");

  std::vector<MnoConfig> mnos;
  for (const auto& jm : get<json>(j, "mnos")) {
    MnoConfig m;
    const auto pos = get<std::vector<double>>(jm, "uav_position_m");
    if (pos.size() != 3) throw ConfigError("uav_position_m must be [x, y, h]");
    m.uav_position = {pos[0], pos[1], pos[2]};
    m.num_subchannels = get<int>(jm, "num_subchannels");
    m.max_power_w = get<double>(jm, "max_power_w");
    m.price_per_subchannel = get<std::vector<double>>(jm, "price_per_subchannel");
    m.price_per_watt = get<double>(jm, "price_per_watt");
    m.user_capacity = get_or(jm, "user_capacity", m.num_subchannels);
    mnos.push_back(std::move(m));
  }

  std::vector<SpConfig> sps;
  for (const auto& jsp : get<json>(j, "sps")) {
    SpConfig sp;
    for (const auto& ju : get<json>(jsp, "users")) {
      UserConfig u;
      const auto pos = get<std::vector<double>>(ju, "position_m");
      if (pos.size() != 2) throw ConfigError("position_m must be [x, y]");
      u.position = {pos[0], pos[1]};
      u.min_rate_bps = get<double>(ju, "min_rate_bps");
      u.payment_per_mbps = get<double>(ju, "payment_per_mbps");
      sp.users.push_back(u);
    }
    sps.push_back(std::move(sp));
  }
  return Scenario(std::move(mnos), std::move(sps), radio, get_or<std::uint64_t>(j, "seed", 0));
}

json to_json(const ScenarioTemplate& t) {
  json j;
  j["format"] = kTemplateFormat;
  j["units"] = {{"altitude_m", "m"},           {"max_power_dbm", "dBm"},
                {"min_rate_mbps", "Mbit/s"},   {"reference_gain_db", "dB"},
                {"subchannel_bandwidth_hz", "Hz"}, {"noise_density_dbm_per_hz", "dBm/Hz"},
                {"payment_per_mbps", "money/Mbps"}, {"power_price", "money/W"}};
  j["num_uavs"] = t.num_uavs;
  j["uav_positions_m"] = json::array();
  for (const auto& p : t.uav_positions) j["uav_positions_m"].push_back({p.x, p.y});
  j["altitude_m"] = t.altitude_m;
  j["num_subchannels"] = t.num_subchannels;
  j["max_power_dbm"] = t.max_power_dbm;
  j["user_capacity"] = t.user_capacity;
  j["users_per_sp"] = t.users_per_sp;
  j["subchannel_price"] = range_json(t.subchannel_price);
  j["power_price"] = range_json(t.power_price);
  j["min_rate_mbps"] = range_json(t.min_rate_mbps);
  j["payment_per_mbps"] = range_json(t.payment_per_mbps);
  j["per_subchannel_price"] = t.per_subchannel_price;
  j["subchannel_bandwidth_hz"] = t.subchannel_bandwidth_hz;
  j["reference_gain_db"] = t.reference_gain_db;
  j["path_loss_exponent"] = t.path_loss_exponent;
  j["noise_density_dbm_per_hz"] = t.noise_density_dbm_per_hz;
  j["area_side_m"] = t.area_side_m;
  j["rician_k_factor"] = t.rician_k_factor ? json(*t.rician_k_factor) : json(nullptr);
  return j;
}

ScenarioTemplate template_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("template must be a JSON object");
  ScenarioTemplate t;
  t.num_uavs = get_or(j, "num_uavs", t.num_uavs);
  if (j.contains("uav_positions_m")) {
    for (const auto& p : j.at("uav_positions_m")) {
      const auto v = p.get<std::vector<double>>();
      if (v.size() != 2) throw ConfigError("uav_positions_m entries must be [x, y]");
      t.uav_positions.push_back({v[0], v[1]});
    }
  }
  t.altitude_m = get_or(j, "altitude_m", t.altitude_m);
  t.num_subchannels = get_or(j, "num_subchannels", t.num_subchannels);
  t.max_power_dbm = get_or(j, "max_power_dbm", t.max_power_dbm);
  t.user_capacity = get_or(j, "user_capacity", t.user_capacity);
  t.users_per_sp = get_or(j, "users_per_sp", t.users_per_sp);
  t.subchannel_price = range_from(j, "subchannel_price", t.subchannel_price);
  t.power_price = range_from(j, "power_price", t.power_price);
  t.min_rate_mbps = range_from(j, "min_rate_mbps", t.min_rate_mbps);
  t.payment_per_mbps = range_from(j, "payment_per_mbps", t.payment_per_mbps);
  t.per_subchannel_price = get_or(j, "per_subchannel_price", t.per_subchannel_price);
  t.subchannel_bandwidth_hz = get_or(j, "subchannel_bandwidth_hz", t.subchannel_bandwidth_hz);
  t.reference_gain_db = get_or(j, "reference_gain_db", t.reference_gain_db);
  t.path_loss_exponent = get_or(j, "path_loss_exponent", t.path_loss_exponent);
  t.noise_density_dbm_per_hz = get_or(j, "noise_density_dbm_per_hz", t.noise_density_dbm_per_hz);
  t.area_side_m = get_or(j, "area_side_m", t.area_side_m);
  if (j.contains("rician_k_factor") && !j.at("rician_k_factor").is_null())
    t.rician_k_factor = get<double>(j, "rician_k_factor");
  return t;
}

std::uint64_t scenario_digest(const Scenario& s) {
  const std::string text = to_json(s).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace uavshare
