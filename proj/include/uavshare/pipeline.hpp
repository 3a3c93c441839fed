#pragma once

// Outer orchestration: association once, then alternate subchannel
// assignment (WOA at fixed power) and power allocation (Lagrangian at fixed
// assignment) until the total utility settles.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "uavshare/association.hpp"
#include "uavshare/power.hpp"
#include "uavshare/woa.hpp"

namespace uavshare {

struct SolveParams {
  WoaParams woa;
  PowerParams power;
  double outer_tolerance = 1e-3;
  int max_outer = 50;
  std::uint64_t seed = 1;
};

struct OuterIterate {
  int t = 0;  // 0 is the starting point
  AssignmentMatrix x;
  PowerMatrix p;
  UtilityBreakdown utility;
  double objective = 0.0;  // utility minus the QoS penalty
  int qos_violations = 0;
  bool resource_feasible = true;  // everything except QoS
};

struct Violation {
  std::string constraint;    // "13b" .. "13i", or "x_without_a"
  std::vector<int> indices;  // user and/or UAV / channel ids
  double magnitude = 0.0;    // shortfall (bits/s), excess (W or count)
};

/// Constraint check for (A, X, P). QoS shortfalls are listed only when
/// `include_qos` is set; everything else is always checked.
std::vector<Violation> check_feasibility(const AssociationMatrix& a, const AssignmentMatrix& x, const PowerMatrix& p,
                                         const Network& net, bool include_qos = true);

struct SolveReport {
  std::uint64_t scenario_digest = 0;
  AssociationMatrix association;
  Matching matching;
  int proposals = 0;
  std::vector<int> unservable;

  /// Accepted iterates, starting with t = 0. A candidate replaces the
  /// incumbent if it is resource-feasible and the incumbent is not, or on
  /// higher total utility, or on equal utility and higher objective.
  std::vector<OuterIterate> iterates;
  /// Raw stage outputs before elitism, same indexing from t = 1.
  std::vector<double> raw_utility;
  std::vector<std::vector<WoaTraceRow>> woa_traces;
  std::vector<std::vector<PowerTraceRow>> power_traces;

  AssignmentMatrix x;
  PowerMatrix p;
  UtilityBreakdown utility;
  bool converged = false;
  int iterations = 0;
  double wall_seconds = 0.0;
  std::vector<Violation> resource_violations;
  std::vector<Violation> qos_violations;
};

SolveReport solve(const Network& net, const SolveParams& params = {});

/// Association stage on its own.
DaResult associate(const Network& net);

nlohmann::json to_json(const Violation& v);
/// `snapshots` adds X and P for every accepted iterate.
nlohmann::json to_json(const SolveReport& r, bool snapshots = false);

}  // namespace uavshare
