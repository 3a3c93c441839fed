#pragma once

#include <vector>

#include "uavshare/model.hpp"

namespace fixture {

using namespace uavshare;

inline MnoConfig mno(Vec3 pos, int subchannels, double max_power_w, double beta, double theta, int capacity = 0) {
  MnoConfig m;
  m.uav_position = pos;
  m.num_subchannels = subchannels;
  m.max_power_w = max_power_w;
  m.price_per_subchannel.assign(static_cast<std::size_t>(subchannels), beta);
  m.price_per_watt = theta;
  m.user_capacity = capacity > 0 ? capacity : subchannels;
  return m;
}

inline UserConfig user(Vec2 pos, double min_rate_mbps, double delta) {
  return {pos, min_rate_mbps * 1e6, delta};
}

inline Scenario scenario(std::vector<MnoConfig> mnos, std::vector<std::vector<UserConfig>> sps,
                         RadioParams radio = {}) {
  std::vector<SpConfig> out;
  for (auto& users : sps) out.push_back({std::move(users)});
  return Scenario(std::move(mnos), std::move(out), radio, 0);
}

}  // namespace fixture
