#pragma once

// Domain types, unit conversions and seeded scenario generation.
//
// Internal units everywhere: watts, Hz, bits/s, meters, linear gains.
// dBm/dB/Mbps values appear only in templates and JSON, and are converted
// once on ingestion.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace uavshare {

/// Raised for malformed scenarios, templates and configs.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kBitsPerMbps = 1e6;

double dbm_to_watt(double level_dbm);
double db_to_linear(double level_db);
/// Noise power over `bandwidth_hz` for a flat density given in dBm/Hz.
double noise_power(double density_dbm_per_hz, double bandwidth_hz);

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

struct MnoConfig {
  Vec3 uav_position;                          // z is the hovering altitude
  int num_subchannels = 0;                    // B_n
  double max_power_w = 0.0;                   // P_n^max
  std::vector<double> price_per_subchannel;   // beta_n^b, one per subchannel
  double price_per_watt = 0.0;                // theta_n
  int user_capacity = 0;                      // Q^n
};

struct UserConfig {
  Vec2 position;
  double min_rate_bps = 0.0;       // R^min
  double payment_per_mbps = 0.0;   // delta_m^u
};

struct SpConfig {
  std::vector<UserConfig> users;
};

struct RadioParams {
  double subchannel_bandwidth_hz = 150e3;
  double reference_gain = 0.1;          // g0 at d0 = 1 m
  double path_loss_exponent = 2.0;
  double noise_density_dbm_per_hz = -174.0;
  double area_side_m = 400.0;
  /// Rician K-factor for the optional small-scale fading sample; empty = off.
  std::optional<double> rician_k_factor;

  double noise_power_w() const { return noise_power(noise_density_dbm_per_hz, subchannel_bandwidth_hz); }
};

/// A full network instance. Immutable after construction; the constructor
/// validates every invariant and builds the flat user/channel indexing used
/// by the solvers:
///   user k   = global user id, SPs laid out consecutively;
///   channel c = global subchannel id, UAVs laid out consecutively.
class Scenario {
 public:
  Scenario(std::vector<MnoConfig> mnos, std::vector<SpConfig> sps, RadioParams radio, std::uint64_t seed);

  const std::vector<MnoConfig>& mnos() const { return mnos_; }
  const std::vector<SpConfig>& sps() const { return sps_; }
  const RadioParams& radio() const { return radio_; }
  std::uint64_t seed() const { return seed_; }

  int num_uavs() const { return static_cast<int>(mnos_.size()); }
  int num_sps() const { return static_cast<int>(sps_.size()); }
  int num_users() const { return static_cast<int>(user_sp_.size()); }
  int num_channels() const { return static_cast<int>(channel_uav_.size()); }

  const UserConfig& user(int k) const { return sps_[user_sp_[k]].users[user_local_[k]]; }
  int sp_of_user(int k) const { return user_sp_[k]; }
  int local_index(int k) const { return user_local_[k]; }
  int global_user(int sp, int local) const { return sp_offset_[sp] + local; }

  int uav_of_channel(int c) const { return channel_uav_[c]; }
  int first_channel(int n) const { return channel_offset_[n]; }
  int subchannel_count(int n) const { return mnos_[n].num_subchannels; }
  /// beta for global channel c.
  double channel_price(int c) const {
    const int n = channel_uav_[c];
    return mnos_[n].price_per_subchannel[c - channel_offset_[n]];
  }

 private:
  std::vector<MnoConfig> mnos_;
  std::vector<SpConfig> sps_;
  RadioParams radio_;
  std::uint64_t seed_;

  std::vector<int> user_sp_, user_local_, sp_offset_;
  std::vector<int> channel_uav_, channel_offset_;
};

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

/// Recipe for generate_scenario. Defaults are the desk-scale reference
/// network: 3 UAVs at 100 m, SPs of 20/10/5 users over a 400 m square,
/// 20 x 150 kHz subchannels, 35 dBm, g0 = -10 dB.
struct ScenarioTemplate {
  int num_uavs = 3;
  /// Horizontal UAV positions. Empty = centroids of num_uavs vertical strips.
  std::vector<Vec2> uav_positions;
  double altitude_m = 100.0;
  int num_subchannels = 20;
  double max_power_dbm = 35.0;
  /// Q^n; 0 means "same as num_subchannels".
  int user_capacity = 0;
  std::vector<int> users_per_sp{20, 10, 5};

  Range subchannel_price{2.0, 3.0};       // beta
  Range power_price{4.0, 5.0};            // theta, per watt
  Range min_rate_mbps{20.0, 30.0};        // R^min
  Range payment_per_mbps{0.3, 0.5};       // delta
  /// Draw beta per subchannel instead of once per MNO.
  bool per_subchannel_price = false;

  double subchannel_bandwidth_hz = 150e3;
  double reference_gain_db = -10.0;
  double path_loss_exponent = 2.0;
  double noise_density_dbm_per_hz = -174.0;
  double area_side_m = 400.0;
  std::optional<double> rician_k_factor;
};

/// Deterministic in (tmpl, seed). Draw order is fixed and documented in
/// model.cpp so that templates differing only in a range endpoint consume
/// the same random stream.
Scenario generate_scenario(const ScenarioTemplate& tmpl, std::uint64_t seed);

// JSON (lower_snake_case keys, "units" block). Throws ConfigError.
nlohmann::json to_json(const Scenario& s);
Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ScenarioTemplate& t);
ScenarioTemplate template_from_json(const nlohmann::json& j);

/// FNV-1a over the canonical JSON dump.
std::uint64_t scenario_digest(const Scenario& s);

}  // namespace uavshare
