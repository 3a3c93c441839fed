#include "uavshare/association.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace uavshare {

namespace {

std::vector<int> ranked(const std::vector<double>& scores, const std::vector<bool>* keep) {
  std::vector<int> ids;
  for (int i = 0; i < static_cast<int>(scores.size()); ++i)
    if (!keep || (*keep)[static_cast<std::size_t>(i)]) ids.push_back(i);
  std::stable_sort(ids.begin(), ids.end(), [&](int a, int b) {
    const double sa = scores[static_cast<std::size_t>(a)], sb = scores[static_cast<std::size_t>(b)];
    if (sa != sb) return sa > sb;
    return a < b;
  });
  return ids;
}

std::vector<std::vector<int>> rank_table(const std::vector<std::vector<int>>& lists, int other_side) {
  std::vector<std::vector<int>> table(lists.size(), std::vector<int>(static_cast<std::size_t>(other_side), -1));
  for (std::size_t i = 0; i < lists.size(); ++i)
    for (std::size_t pos = 0; pos < lists[i].size(); ++pos)
      table[i][static_cast<std::size_t>(lists[i][pos])] = static_cast<int>(pos);
  return table;
}

}  // namespace

std::vector<std::vector<int>> PreferenceProfile::user_rank_table() const { return rank_table(user_prefs, num_uavs()); }

std::vector<std::vector<int>> PreferenceProfile::uav_rank_table() const { return rank_table(uav_prefs, num_users()); }

PreferenceProfile PreferenceProfile::from_scores(std::vector<std::vector<double>> user_scores,
                                                 std::vector<std::vector<double>> uav_scores,
                                                 const std::vector<std::vector<bool>>& acceptable) {
  PreferenceProfile p;
  for (std::size_t k = 0; k < user_scores.size(); ++k) {
    p.user_prefs.push_back(ranked(user_scores[k], &acceptable[k]));
    if (p.user_prefs.back().empty()) p.unservable.push_back(static_cast<int>(k));
    for (std::size_t n = 0; n < user_scores[k].size(); ++n)
      if (!acceptable[k][n]) user_scores[k][n] = std::numeric_limits<double>::quiet_NaN();
  }
  for (const auto& row : uav_scores) p.uav_prefs.push_back(ranked(row, nullptr));
  p.user_scores = std::move(user_scores);
  p.uav_scores = std::move(uav_scores);
  return p;
}

double equal_power_rate(int k, int n, const Network& net) {
  const auto& mno = net.scenario.mnos()[static_cast<std::size_t>(n)];
  return net.link_rate(k, n, mno.max_power_w / mno.num_subchannels);
}

PreferenceProfile build_preferences(const Network& net) {
  const auto& s = net.scenario;
  const int users = s.num_users(), uavs = s.num_uavs();
  std::vector<std::vector<double>> user_scores(static_cast<std::size_t>(users), std::vector<double>(static_cast<std::size_t>(uavs)));
  std::vector<std::vector<double>> uav_scores(static_cast<std::size_t>(uavs), std::vector<double>(static_cast<std::size_t>(users)));
  std::vector<std::vector<bool>> acceptable(static_cast<std::size_t>(users), std::vector<bool>(static_cast<std::size_t>(uavs)));

  for (int k = 0; k < users; ++k) {
    const auto& usr = s.user(k);
    for (int n = 0; n < uavs; ++n) {
      const auto& mno = s.mnos()[static_cast<std::size_t>(n)];
      const double r = equal_power_rate(k, n, net);
      const double p = mno.max_power_w / mno.num_subchannels;
      const double beta = std::accumulate(mno.price_per_subchannel.begin(), mno.price_per_subchannel.end(), 0.0) /
                          mno.num_subchannels;
      user_scores[static_cast<std::size_t>(k)][static_cast<std::size_t>(n)] =
          usr.payment_per_mbps * r / kBitsPerMbps - beta - mno.price_per_watt * p;
      uav_scores[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)] = r;
      acceptable[static_cast<std::size_t>(k)][static_cast<std::size_t>(n)] = mno.num_subchannels * r >= usr.min_rate_bps;
    }
  }
  return PreferenceProfile::from_scores(std::move(user_scores), std::move(uav_scores), acceptable);
}

DaResult deferred_acceptance(const PreferenceProfile& profile, const std::vector<int>& capacities) {
  const int users = profile.num_users(), uavs = profile.num_uavs();
  if (static_cast<int>(capacities.size()) != uavs) throw std::invalid_argument("one capacity per UAV required");
  const auto uav_rank = profile.uav_rank_table();

  DaResult out;
  out.matching.uav_of_user.assign(static_cast<std::size_t>(users), -1);
  out.matching.users_of_uav.assign(static_cast<std::size_t>(uavs), {});
  std::vector<std::size_t> next(static_cast<std::size_t>(users), 0);
  std::deque<int> free_users;
  for (int k = 0; k < users; ++k) free_users.push_back(k);

  auto rank = [&](int n, int k) {
    const int r = uav_rank[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)];
    return r < 0 ? std::numeric_limits<int>::max() : r;
  };

  while (!free_users.empty()) {
    const int k = free_users.front();
    free_users.pop_front();
    const auto& prefs = profile.user_prefs[static_cast<std::size_t>(k)];
    auto& cursor = next[static_cast<std::size_t>(k)];
    if (cursor >= prefs.size()) continue;  // list exhausted: stays unmatched
    const int n = prefs[cursor++];
    ++out.proposals;

    auto& held = out.matching.users_of_uav[static_cast<std::size_t>(n)];
    const int cap = capacities[static_cast<std::size_t>(n)];
    if (cap <= 0 || uav_rank[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)] < 0) {
      free_users.push_front(k);
      continue;
    }
    if (static_cast<int>(held.size()) < cap) {
      held.push_back(k);
      out.matching.uav_of_user[static_cast<std::size_t>(k)] = n;
      continue;
    }
    auto worst = std::max_element(held.begin(), held.end(), [&](int a, int b) { return rank(n, a) < rank(n, b); });
    if (rank(n, k) < rank(n, *worst)) {
      const int dropped = *worst;
      *worst = k;
      out.matching.uav_of_user[static_cast<std::size_t>(k)] = n;
      out.matching.uav_of_user[static_cast<std::size_t>(dropped)] = -1;
      free_users.push_front(dropped);
    } else {
      free_users.push_front(k);
    }
  }
  for (auto& held : out.matching.users_of_uav) {
    std::sort(held.begin(), held.end());
  }
  return out;
}

StabilityCheck is_stable(const Matching& m, const PreferenceProfile& profile, const std::vector<int>& capacities) {
  const int users = profile.num_users(), uavs = profile.num_uavs();
  if (static_cast<int>(m.uav_of_user.size()) != users || static_cast<int>(m.users_of_uav.size()) != uavs ||
      static_cast<int>(capacities.size()) != uavs)
    throw std::invalid_argument("matching does not fit the profile");
  for (int n = 0; n < uavs; ++n) {
    const auto& held = m.users_of_uav[static_cast<std::size_t>(n)];
    if (static_cast<int>(held.size()) > capacities[static_cast<std::size_t>(n)])
      throw std::invalid_argument("UAV over capacity");
    for (int k : held)
      if (k < 0 || k >= users || m.uav_of_user[static_cast<std::size_t>(k)] != n)
        throw std::invalid_argument("matching sides disagree");
  }
  for (int k = 0; k < users; ++k) {
    const int n = m.uav_of_user[static_cast<std::size_t>(k)];
    if (n < -1 || n >= uavs) throw std::invalid_argument("user matched to unknown UAV");
    if (n >= 0) {
      const auto& held = m.users_of_uav[static_cast<std::size_t>(n)];
      if (std::find(held.begin(), held.end(), k) == held.end()) throw std::invalid_argument("matching sides disagree");
    }
  }

  const auto user_rank = profile.user_rank_table();
  const auto uav_rank = profile.uav_rank_table();
  for (int k = 0; k < users; ++k) {
    const int current = m.uav_of_user[static_cast<std::size_t>(k)];
    const int current_rank = current < 0 ? std::numeric_limits<int>::max()
                                         : user_rank[static_cast<std::size_t>(k)][static_cast<std::size_t>(current)];
    for (int n : profile.user_prefs[static_cast<std::size_t>(k)]) {
      if (user_rank[static_cast<std::size_t>(k)][static_cast<std::size_t>(n)] >= current_rank) break;
      const auto& held = m.users_of_uav[static_cast<std::size_t>(n)];
      const int rk = uav_rank[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)];
      if (rk < 0) continue;
      bool wants = static_cast<int>(held.size()) < capacities[static_cast<std::size_t>(n)];
      for (int other : held)
        if (uav_rank[static_cast<std::size_t>(n)][static_cast<std::size_t>(other)] > rk) wants = true;
      if (wants) return {false, std::make_pair(k, n)};
    }
  }
  return {};
}

AssociationMatrix matching_to_association(const Matching& m, const Scenario& s) {
  AssociationMatrix a(s);
  for (int k = 0; k < s.num_users(); ++k) {
    const int n = m.uav_of_user[static_cast<std::size_t>(k)];
    if (n >= 0) a(k, n) = 1;
  }
  return a;
}

std::vector<int> uav_capacities(const Scenario& s) {
  std::vector<int> q;
  for (const auto& m : s.mnos()) q.push_back(m.user_capacity);
  return q;
}

}  // namespace uavshare
