#pragma once

// User-UAV association as a one-to-many matching game solved by
// user-proposing deferred acceptance.

#include <optional>
#include <utility>
#include <vector>

#include "uavshare/economics.hpp"

namespace uavshare {

/// Ranked lists for both sides. user_prefs[k] lists acceptable UAVs best
/// first; uav_prefs[n] lists users best first. Scores are kept for
/// reporting; the matching only looks at the order.
struct PreferenceProfile {
  std::vector<std::vector<int>> user_prefs;
  std::vector<std::vector<int>> uav_prefs;
  std::vector<std::vector<double>> user_scores;  // [k][n], NaN when filtered out
  std::vector<std::vector<double>> uav_scores;   // [n][k]
  std::vector<int> unservable;                   // users with an empty list

  int num_users() const { return static_cast<int>(user_prefs.size()); }
  int num_uavs() const { return static_cast<int>(uav_prefs.size()); }

  /// Rank tables: position of n in user k's list (or -1), and of k in n's.
  std::vector<std::vector<int>> user_rank_table() const;
  std::vector<std::vector<int>> uav_rank_table() const;

  /// Build lists from score tables, strict order after tie-breaking by
  /// lower index. `acceptable[k][n]` filters user lists.
  static PreferenceProfile from_scores(std::vector<std::vector<double>> user_scores,
                                       std::vector<std::vector<double>> uav_scores,
                                       const std::vector<std::vector<bool>>& acceptable);
};

struct Matching {
  std::vector<int> uav_of_user;              // -1 = unmatched
  std::vector<std::vector<int>> users_of_uav;
};

struct DaResult {
  Matching matching;
  int proposals = 0;
};

struct StabilityCheck {
  bool stable = true;
  std::optional<std::pair<int, int>> blocking_pair;  // (user, uav)
};

/// Rate on one subchannel of UAV n with the UAV's power split equally
/// across its B_n subchannels.
double equal_power_rate(int k, int n, const Network& net);

/// User score: revenue of one equal-power subchannel minus its price and
/// power cost. UAV score: equal-power rate. A UAV enters a user's list
/// only if its B_n equal-power subchannels together reach R^min.
PreferenceProfile build_preferences(const Network& net);

DaResult deferred_acceptance(const PreferenceProfile& profile, const std::vector<int>& capacities);

/// Throws std::invalid_argument if `m` is not a valid matching.
StabilityCheck is_stable(const Matching& m, const PreferenceProfile& profile, const std::vector<int>& capacities);

AssociationMatrix matching_to_association(const Matching& m, const Scenario& s);

std::vector<int> uav_capacities(const Scenario& s);

}  // namespace uavshare
