#include "uavshare/economics.hpp"

namespace uavshare {

int AssociationMatrix::uav_of(int k) const {
  for (int n = 0; n < cols(); ++n)
    if ((*this)(k, n)) return n;
  return -1;
}

std::vector<int> AssociationMatrix::users_of(int n) const {
  std::vector<int> out;
  for (int k = 0; k < rows(); ++k)
    if ((*this)(k, n)) out.push_back(k);
  return out;
}

int AssignmentMatrix::holder(int c) const {
  for (int k = 0; k < rows(); ++k)
    if ((*this)(k, c)) return k;
  return -1;
}

int AssignmentMatrix::channels_of(int k) const {
  int count = 0;
  for (int c = 0; c < cols(); ++c) count += (*this)(k, c);
  return count;
}

double PowerMatrix::uav_total(const Scenario& s, int n) const {
  double total = 0.0;
  const int first = s.first_channel(n);
  for (int k = 0; k < rows(); ++k)
    for (int c = first; c < first + s.subchannel_count(n); ++c) total += (*this)(k, c);
  return total;
}

void enforce_power_support(const AssignmentMatrix& x, PowerMatrix& p) {
  for (int k = 0; k < p.rows(); ++k)
    for (int c = 0; c < p.cols(); ++c)
      if (!x(k, c)) p(k, c) = 0.0;
}

double user_rate(int k, const AssociationMatrix& a, const AssignmentMatrix& x, const PowerMatrix& p,
                 const Network& net) {
  const auto& s = net.scenario;
  double total = 0.0;
  for (int c = 0; c < s.num_channels(); ++c) {
    const int n = s.uav_of_channel(c);
    if (a(k, n) && x(k, c)) total += net.link_rate(k, n, p(k, c));
  }
  return total;
}

double revenue(int m, const AssociationMatrix& a, const AssignmentMatrix& x, const PowerMatrix& p,
               const Network& net) {
  const auto& s = net.scenario;
  double total = 0.0;
  for (int u = 0; u < static_cast<int>(s.sps()[m].users.size()); ++u) {
    const int k = s.global_user(m, u);
    total += s.user(k).payment_per_mbps * user_rate(k, a, x, p, net) / kBitsPerMbps;
  }
  return total;
}

double cost(int m, const AssociationMatrix& a, const AssignmentMatrix& x, const PowerMatrix& p,
            const Network& net) {
  const auto& s = net.scenario;
  double channels = 0.0, power = 0.0;
  for (int u = 0; u < static_cast<int>(s.sps()[m].users.size()); ++u) {
    const int k = s.global_user(m, u);
    for (int c = 0; c < s.num_channels(); ++c) {
      const int n = s.uav_of_channel(c);
      if (!a(k, n)) continue;
      if (x(k, c)) channels += s.channel_price(c);
      power += s.mnos()[n].price_per_watt * p(k, c);
    }
  }
  return channels + power;
}

UtilityBreakdown total_utility(const AssociationMatrix& a, const AssignmentMatrix& x, const PowerMatrix& p,
                               const Network& net) {
  const auto& s = net.scenario;
  UtilityBreakdown out;
  out.per_sp.resize(static_cast<std::size_t>(s.num_sps()));
  out.user_rate_bps.assign(static_cast<std::size_t>(s.num_users()), 0.0);
  out.qos_met.assign(static_cast<std::size_t>(s.num_users()), false);

  for (int k = 0; k < s.num_users(); ++k) {
    const auto& usr = s.user(k);
    auto& sp = out.per_sp[static_cast<std::size_t>(s.sp_of_user(k))];
    double r = 0.0;
    for (int c = 0; c < s.num_channels(); ++c) {
      const int n = s.uav_of_channel(c);
      if (!a(k, n)) continue;
      if (x(k, c)) {
        r += net.link_rate(k, n, p(k, c));
        sp.cost += s.channel_price(c);
      }
      sp.cost += s.mnos()[n].price_per_watt * p(k, c);
    }
    sp.revenue += usr.payment_per_mbps * r / kBitsPerMbps;
    out.user_rate_bps[static_cast<std::size_t>(k)] = r;
    out.qos_met[static_cast<std::size_t>(k)] = r >= usr.min_rate_bps;
  }
  for (auto& sp : out.per_sp) {
    sp.utility = sp.revenue - sp.cost;
    out.total_revenue += sp.revenue;
    out.total_cost += sp.cost;
    out.total += sp.utility;
  }
  return out;
}

}  // namespace uavshare
