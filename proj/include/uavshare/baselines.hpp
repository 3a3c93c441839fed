#pragma once

// Comparison schemes. All of them reuse the deferred-acceptance association
// and differ only in how subchannels and power are chosen:
//
//   RCOP  random subchannels,        Lagrangian power
//   ECOP  round-robin subchannels,   Lagrangian power
//   RPOC  WOA subchannels,           random power split
//   EPOC  WOA subchannels,           equal power split
//   ES    round-robin subchannels,   equal power split (no optimization)

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "uavshare/power.hpp"
#include "uavshare/woa.hpp"

namespace uavshare {

enum class BaselineKind { RCOP, ECOP, RPOC, EPOC, ES };

std::string_view baseline_name(BaselineKind kind);
std::optional<BaselineKind> parse_baseline(std::string_view name);

struct Allocation {
  AssignmentMatrix x;
  PowerMatrix p;
};

struct BaselineParams {
  WoaParams woa;
  PowerParams power;
};

/// Every subchannel of each UAV goes to a uniformly drawn associated user.
AssignmentMatrix random_assignment(const Network& net, const AssociationMatrix& a, std::uint64_t seed);
/// Subchannel b of UAV n goes to its (b mod k_n)-th associated user.
AssignmentMatrix equal_assignment(const Network& net, const AssociationMatrix& a);
/// P_n^max split over the UAV's subchannels with normalized uniform
/// (flat Dirichlet) weights.
std::vector<double> random_power_profile(const Network& net, std::uint64_t seed);
std::vector<double> equal_power_profile(const Network& net);

Allocation run_baseline(BaselineKind kind, const Network& net, const AssociationMatrix& a, std::uint64_t seed,
                        const BaselineParams& params = {});

/// Extension point for further comparison schemes (e.g. Kelly-mechanism
/// variants). Builtins are pre-registered; "gkm" and "km" are reserved and
/// report that no implementation is available.
using AllocationStrategy =
    std::function<Allocation(const Network&, const AssociationMatrix&, std::uint64_t seed, const BaselineParams&)>;

class BaselineRegistry {
 public:
  BaselineRegistry();
  void add(std::string name, AllocationStrategy strategy);
  bool contains(const std::string& name) const;
  /// Throws std::invalid_argument for unknown or reserved names.
  const AllocationStrategy& get(const std::string& name) const;

 private:
  std::map<std::string, AllocationStrategy> strategies_;
};

}  // namespace uavshare
