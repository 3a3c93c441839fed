#pragma once

// Free-space LoS propagation and Shannon rate.

#include <vector>

#include "uavshare/model.hpp"

namespace uavshare {

/// 3-D distance from a ground user to a hovering UAV.
double distance(const Vec2& user, const Vec3& uav);
/// g0 / d^alpha. Throws std::domain_error for d below the 1 m reference.
double channel_gain(double d, double g0, double alpha);
double snr(double power_w, double gain, double noise_w);
/// omega * log2(1 + gamma), bits/s.
double rate(double bandwidth_hz, double gamma);

/// Per (user, UAV) gain and distance. The free-space model has no
/// per-subchannel term, so one entry serves every subchannel of a UAV.
class LinkGainTable {
 public:
  explicit LinkGainTable(const Scenario& s);

  double gain(int user, int uav) const { return gain_[idx(user, uav)]; }
  double distance(int user, int uav) const { return dist_[idx(user, uav)]; }
  int num_users() const { return users_; }
  int num_uavs() const { return uavs_; }

 private:
  std::size_t idx(int user, int uav) const { return static_cast<std::size_t>(user) * uavs_ + uav; }
  int users_, uavs_;
  std::vector<double> gain_, dist_;
};

/// Scenario plus everything derived from it that the solvers reuse:
/// link gains and the per-subchannel noise power.
struct Network {
  explicit Network(Scenario s);

  Scenario scenario;
  LinkGainTable gains;
  double noise_w;

  /// Rate of user k on any subchannel of UAV n at power p.
  double link_rate(int k, int n, double p) const {
    return rate(scenario.radio().subchannel_bandwidth_hz, snr(p, gains.gain(k, n), noise_w));
  }
};

}  // namespace uavshare
