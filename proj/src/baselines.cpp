#include "uavshare/baselines.hpp"

#include <cmath>
#include <stdexcept>

#include "uavshare/rng.hpp"

namespace uavshare {

std::string_view baseline_name(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::RCOP: return "rcop";
    case BaselineKind::ECOP: return "ecop";
    case BaselineKind::RPOC: return "rpoc";
    case BaselineKind::EPOC: return "epoc";
    case BaselineKind::ES: return "es";
  }
  return "?";
}

std::optional<BaselineKind> parse_baseline(std::string_view name) {
  for (auto kind : {BaselineKind::RCOP, BaselineKind::ECOP, BaselineKind::RPOC, BaselineKind::EPOC, BaselineKind::ES})
    if (baseline_name(kind) == name) return kind;
  return std::nullopt;
}

AssignmentMatrix random_assignment(const Network& net, const AssociationMatrix& a, std::uint64_t seed) {
  const auto& s = net.scenario;
  Rng rng = Rng::derive(seed, 0x52434F50);  // "RCOP"
  AssignmentMatrix x(s);
  for (int n = 0; n < s.num_uavs(); ++n) {
    const auto users = a.users_of(n);
    if (users.empty()) continue;
    for (int c = s.first_channel(n); c < s.first_channel(n) + s.subchannel_count(n); ++c)
      x(users[rng.index(users.size())], c) = 1;
  }
  return x;
}

AssignmentMatrix equal_assignment(const Network& net, const AssociationMatrix& a) {
  const auto& s = net.scenario;
  AssignmentMatrix x(s);
  for (int n = 0; n < s.num_uavs(); ++n) {
    const auto users = a.users_of(n);
    if (users.empty()) continue;
    for (int b = 0; b < s.subchannel_count(n); ++b)
      x(users[static_cast<std::size_t>(b) % users.size()], s.first_channel(n) + b) = 1;
  }
  return x;
}

std::vector<double> random_power_profile(const Network& net, std::uint64_t seed) {
  const auto& s = net.scenario;
  Rng rng = Rng::derive(seed, 0x52504F43);  // "RPOC"
  std::vector<double> profile(static_cast<std::size_t>(s.num_channels()));
  for (int n = 0; n < s.num_uavs(); ++n) {
    const int first = s.first_channel(n), count = s.subchannel_count(n);
    double total = 0.0;
    for (int c = first; c < first + count; ++c) {
      double u = rng.uniform();
      while (u <= 0.0) u = rng.uniform();
      profile[static_cast<std::size_t>(c)] = -std::log(u);
      total += profile[static_cast<std::size_t>(c)];
    }
    const double cap = s.mnos()[static_cast<std::size_t>(n)].max_power_w;
    for (int c = first; c < first + count; ++c) profile[static_cast<std::size_t>(c)] *= cap / total;
  }
  return profile;
}

std::vector<double> equal_power_profile(const Network& net) {
  const auto& s = net.scenario;
  std::vector<double> profile(static_cast<std::size_t>(s.num_channels()));
  for (int c = 0; c < s.num_channels(); ++c) {
    const auto& mno = s.mnos()[static_cast<std::size_t>(s.uav_of_channel(c))];
    profile[static_cast<std::size_t>(c)] = mno.max_power_w / mno.num_subchannels;
  }
  return profile;
}

Allocation run_baseline(BaselineKind kind, const Network& net, const AssociationMatrix& a, std::uint64_t seed,
                        const BaselineParams& params) {
  const auto& s = net.scenario;
  Allocation out;
  auto with_woa = [&](const std::vector<double>& profile) {
    WoaParams woa = params.woa;
    woa.seed = Rng::derive(seed, 0x574F41).next();
    const AssignmentMatrix warm = equal_assignment(net, a);
    out.x = woa_solve(net, a, profile, woa, &warm).assignment;
    out.p = apply_channel_power(out.x, profile, s);
  };
  switch (kind) {
    case BaselineKind::RCOP:
      out.x = random_assignment(net, a, seed);
      out.p = solve_power(net, a, out.x, params.power).power;
      break;
    case BaselineKind::ECOP:
      out.x = equal_assignment(net, a);
      out.p = solve_power(net, a, out.x, params.power).power;
      break;
    case BaselineKind::RPOC:
      with_woa(random_power_profile(net, seed));
      break;
    case BaselineKind::EPOC:
      with_woa(equal_power_profile(net));
      break;
    case BaselineKind::ES:
      out.x = equal_assignment(net, a);
      out.p = apply_channel_power(out.x, equal_power_profile(net), s);
      break;
  }
  enforce_power_support(out.x, out.p);
  return out;
}

namespace {
const char* kReserved[] = {"gkm", "km"};
}

BaselineRegistry::BaselineRegistry() {
  for (auto kind : {BaselineKind::RCOP, BaselineKind::ECOP, BaselineKind::RPOC, BaselineKind::EPOC, BaselineKind::ES}) {
    add(std::string(baseline_name(kind)),
        [kind](const Network& net, const AssociationMatrix& a, std::uint64_t seed, const BaselineParams& params) {
          return run_baseline(kind, net, a, seed, params);
        });
  }
}

void BaselineRegistry::add(std::string name, AllocationStrategy strategy) { strategies_[std::move(name)] = std::move(strategy); }

bool BaselineRegistry::contains(const std::string& name) const { return strategies_.count(name) > 0; }

const AllocationStrategy& BaselineRegistry::get(const std::string& name) const {
  const auto it = strategies_.find(name);
  if (it != strategies_.end()) return it->second;
  for (const char* r : kReserved)
    if (name == r)
      throw std::invalid_argument("method '" + name +
                                  "' has no implementation in this build; register one with BaselineRegistry::add");
  throw std::invalid_argument("unknown method '" + name + "'");
}

}  // namespace uavshare
