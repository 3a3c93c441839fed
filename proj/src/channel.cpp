#include "uavshare/channel.hpp"

#include <cmath>
#include <stdexcept>

#include "uavshare/rng.hpp"

namespace uavshare {

double distance(const Vec2& user, const Vec3& uav) {
  const double dx = user.x - uav.x;
  const double dy = user.y - uav.y;
  return std::sqrt(uav.z * uav.z + dx * dx + dy * dy);
}

double channel_gain(double d, double g0, double alpha) {
  if (d < 1.0) throw std::domain_error("distance below the 1 m reference is outside the path-loss model");
  return g0 / std::pow(d, alpha);
}

double snr(double power_w, double gain, double noise_w) { return power_w * gain / noise_w; }

double rate(double bandwidth_hz, double gamma) { return bandwidth_hz * std::log2(1.0 + gamma); }

LinkGainTable::LinkGainTable(const Scenario& s)
    : users_(s.num_users()),
      uavs_(s.num_uavs()),
      gain_(static_cast<std::size_t>(users_) * uavs_),
      dist_(static_cast<std::size_t>(users_) * uavs_) {
  const auto& radio = s.radio();
  // Optional Rician power gain |h|^2 with unit mean; one sample per link.
  Rng fading = Rng::derive(s.seed(), 3);
  for (int k = 0; k < users_; ++k) {
    for (int n = 0; n < uavs_; ++n) {
      const double d = uavshare::distance(s.user(k).position, s.mnos()[n].uav_position);
      double g = channel_gain(d, radio.reference_gain, radio.path_loss_exponent);
      if (radio.rician_k_factor) {
        const double kf = *radio.rician_k_factor;
        const double los = std::sqrt(kf / (kf + 1.0));
        const double sc = std::sqrt(1.0 / (2.0 * (kf + 1.0)));
        const double re = los + sc * fading.normal();
        const double im = sc * fading.normal();
        g *= re * re + im * im;
      }
      gain_[idx(k, n)] = g;
      dist_[idx(k, n)] = d;
    }
  }
}

Network::Network(Scenario s) : scenario(std::move(s)), gains(scenario), noise_w(scenario.radio().noise_power_w()) {}

}  // namespace uavshare
