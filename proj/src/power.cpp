#include "uavshare/power.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "uavshare/rng.hpp"

namespace uavshare {

namespace {

double max_power(const Scenario& s, int c) { return s.mnos()[static_cast<std::size_t>(s.uav_of_channel(c))].max_power_w; }

double theta(const Scenario& s, int c) { return s.mnos()[static_cast<std::size_t>(s.uav_of_channel(c))].price_per_watt; }

// Rate of user k on channel c at power p, Mbps.
double rate_mbps(const Network& net, int k, int c, double p) {
  return net.link_rate(k, net.scenario.uav_of_channel(c), p) / kBitsPerMbps;
}

// d(rate in Mbps)/dp.
double rate_slope(const Network& net, int k, int c, double p) {
  const double g = net.gains.gain(k, net.scenario.uav_of_channel(c));
  return net.scenario.radio().subchannel_bandwidth_hz * g / (std::numbers::ln2 * (net.noise_w + p * g)) / kBitsPerMbps;
}

}  // namespace

DualState DualState::initial(const Scenario& s, const AssociationMatrix& a, const AssignmentMatrix& x, double value,
                             double z) {
  DualState d;
  d.lambda.assign(static_cast<std::size_t>(s.num_users()), 0.0);
  for (int k = 0; k < s.num_users(); ++k)
    if (a.uav_of(k) >= 0) d.lambda[static_cast<std::size_t>(k)] = value;
  d.mu.assign(static_cast<std::size_t>(s.num_uavs()), value);
  d.nu = Grid<double>(s.num_users(), s.num_channels());
  for (int k = 0; k < s.num_users(); ++k)
    for (int c = 0; c < s.num_channels(); ++c)
      if (x(k, c)) d.nu(k, c) = value;
  d.z = z;
  return d;
}

double DualState::norm() const {
  double sq = 0.0;
  for (double v : lambda) sq += v * v;
  for (double v : mu) sq += v * v;
  for (double v : nu.data()) sq += v * v;
  return std::sqrt(sq);
}

double step_size(double z, int t) {
  if (t < 1) throw std::invalid_argument("step size needs t >= 1");
  return z / std::sqrt(static_cast<double>(t));
}

double lagrangian_value(const Network& net, const AssociationMatrix& a, const AssignmentMatrix& x,
                        const PowerMatrix& p, const DualState& d) {
  const auto& s = net.scenario;
  const auto u = total_utility(a, x, p, net);
  double value = u.total;
  for (int k = 0; k < s.num_users(); ++k) {
    const double lam = d.lambda[static_cast<std::size_t>(k)];
    if (lam != 0.0)
      value += lam * (u.user_rate_bps[static_cast<std::size_t>(k)] - s.user(k).min_rate_bps) / kBitsPerMbps;
    for (int c = 0; c < s.num_channels(); ++c) value += d.nu(k, c) * (max_power(s, c) - p(k, c));
  }
  for (int n = 0; n < s.num_uavs(); ++n) {
    double used = 0.0;
    for (int k = 0; k < s.num_users(); ++k)
      for (int c = s.first_channel(n); c < s.first_channel(n) + s.subchannel_count(n); ++c)
        if (x(k, c)) used += p(k, c);
    value += d.mu[static_cast<std::size_t>(n)] * (s.mnos()[static_cast<std::size_t>(n)].max_power_w - used);
  }
  return value;
}

double lagrangian_derivative(const Network& net, const AssignmentMatrix& x, const DualState& d, int k, int c,
                             double p_kc) {
  const auto& s = net.scenario;
  const double xv = x(k, c);
  const double weight = s.user(k).payment_per_mbps + d.lambda[static_cast<std::size_t>(k)];
  return weight * xv * rate_slope(net, k, c, p_kc) - theta(s, c) -
         d.mu[static_cast<std::size_t>(s.uav_of_channel(c))] * xv - d.nu(k, c);
}

double closed_form_power(const Network& net, const AssignmentMatrix& x, const DualState& d, int k, int c,
                         bool verbatim) {
  const auto& s = net.scenario;
  if (!x(k, c)) return 0.0;
  const int n = s.uav_of_channel(c);
  const double denom = theta(s, c) + d.mu[static_cast<std::size_t>(n)] + d.nu(k, c);
  if (!(denom > 0.0)) throw std::domain_error("closed-form power: non-positive denominator");
  const double weight = s.user(k).payment_per_mbps + d.lambda[static_cast<std::size_t>(k)];
  const double omega_mbps = s.radio().subchannel_bandwidth_hz / kBitsPerMbps;
  const double level = verbatim ? omega_mbps * weight / denom : omega_mbps * weight / (std::numbers::ln2 * denom);
  return std::max(0.0, level - net.noise_w / net.gains.gain(k, n));
}

DualState update_duals(const DualState& d, const Network& net, const AssociationMatrix& a,
                       const AssignmentMatrix& x, const PowerMatrix& p) {
  const auto& s = net.scenario;
  const double step = step_size(d.z, d.t);
  DualState next = d;
  for (int k = 0; k < s.num_users(); ++k) {
    if (a.uav_of(k) < 0) continue;
    double r = 0.0;
    for (int c = 0; c < s.num_channels(); ++c)
      if (x(k, c)) r += rate_mbps(net, k, c, p(k, c));
    const double slack = r - s.user(k).min_rate_bps / kBitsPerMbps;
    auto& lam = next.lambda[static_cast<std::size_t>(k)];
    lam = std::max(0.0, lam - step * slack);
  }
  for (int n = 0; n < s.num_uavs(); ++n) {
    double used = 0.0;
    for (int k = 0; k < s.num_users(); ++k)
      for (int c = s.first_channel(n); c < s.first_channel(n) + s.subchannel_count(n); ++c)
        if (x(k, c)) used += p(k, c);
    auto& mu = next.mu[static_cast<std::size_t>(n)];
    mu = std::max(0.0, mu - step * (s.mnos()[static_cast<std::size_t>(n)].max_power_w - used));
  }
  for (int k = 0; k < s.num_users(); ++k)
    for (int c = 0; c < s.num_channels(); ++c)
      if (x(k, c)) next.nu(k, c) = std::max(0.0, d.nu(k, c) - step * (max_power(s, c) - p(k, c)));
  return next;
}

namespace {

PowerMatrix primal_response(const Network& net, const AssignmentMatrix& x, const DualState& d, bool verbatim) {
  const auto& s = net.scenario;
  PowerMatrix p(s);
  for (int k = 0; k < s.num_users(); ++k)
    for (int c = 0; c < s.num_channels(); ++c)
      if (x(k, c)) p(k, c) = std::min(closed_form_power(net, x, d, k, c, verbatim), max_power(s, c));
  return p;
}

}  // namespace

double dual_function(const Network& net, const AssociationMatrix& a, const AssignmentMatrix& x, const DualState& d) {
  return lagrangian_value(net, a, x, primal_response(net, x, d, false), d);
}

PowerMatrix equal_split_power(const Network& net, const AssignmentMatrix& x) {
  const auto& s = net.scenario;
  PowerMatrix p(s);
  for (int k = 0; k < s.num_users(); ++k)
    for (int c = 0; c < s.num_channels(); ++c)
      if (x(k, c)) {
        const auto& mno = s.mnos()[static_cast<std::size_t>(s.uav_of_channel(c))];
        p(k, c) = mno.max_power_w / mno.num_subchannels;
      }
  return p;
}

void project_power(const Network& net, const AssignmentMatrix& x, PowerMatrix& p) {
  const auto& s = net.scenario;
  enforce_power_support(x, p);
  for (int n = 0; n < s.num_uavs(); ++n) {
    const double cap = s.mnos()[static_cast<std::size_t>(n)].max_power_w;
    const int first = s.first_channel(n), last = first + s.subchannel_count(n);
    double used = 0.0;
    for (int k = 0; k < s.num_users(); ++k)
      for (int c = first; c < last; ++c) {
        p(k, c) = std::clamp(p(k, c), 0.0, cap);
        used += p(k, c);
      }
    if (used > cap) {
      const double scale = cap / used;
      for (int k = 0; k < s.num_users(); ++k)
        for (int c = first; c < last; ++c) p(k, c) *= scale;
    }
  }
}

namespace {

// Assigned (user, channel) pairs with everything the inner loop needs.
struct Entry {
  int k, c, n;
  double gain, cap, theta, beta, delta;
};

struct EntryView {
  EntryView(const Network& net, const AssociationMatrix& a, const AssignmentMatrix& x) {
    const auto& s = net.scenario;
    for (int k = 0; k < s.num_users(); ++k)
      for (int c = 0; c < s.num_channels(); ++c) {
        const int n = s.uav_of_channel(c);
        if (!x(k, c) || !a(k, n)) continue;
        const auto& mno = s.mnos()[static_cast<std::size_t>(n)];
        entries.push_back({k, c, n, net.gains.gain(k, n), mno.max_power_w, mno.price_per_watt, s.channel_price(c),
                           s.user(k).payment_per_mbps});
      }
    for (int k = 0; k < s.num_users(); ++k)
      if (a.uav_of(k) >= 0) served.push_back(k);
  }
  std::vector<Entry> entries;
  std::vector<int> served;
};

}  // namespace

PowerResult solve_power(const Network& net, const AssociationMatrix& a, const AssignmentMatrix& x,
                        const PowerParams& params) {
  const auto& s = net.scenario;
  const EntryView view(net, a, x);
  const auto& entries = view.entries;
  const double omega_mbps = s.radio().subchannel_bandwidth_hz / kBitsPerMbps;
  const double ln2 = std::numbers::ln2;

  PowerResult out;
  out.duals = DualState::initial(s, a, x, params.initial_dual, params.step_constant);
  auto& d = out.duals;

  std::vector<double> p(entries.size()), next(entries.size()), rate(static_cast<std::size_t>(s.num_users()));
  for (std::size_t i = 0; i < entries.size(); ++i)
    p[i] = entries[i].cap / s.subchannel_count(entries[i].n);

  auto entry_rate = [&](const Entry& e, double pw) { return omega_mbps * std::log2(1.0 + pw * e.gain / net.noise_w); };
  // Utility of a power vector over the entries, plus QoS feasibility.
  auto evaluate = [&](const std::vector<double>& pw, bool* qos_ok) {
    std::fill(rate.begin(), rate.end(), 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const auto& e = entries[i];
      const double r = entry_rate(e, pw[i]);
      rate[static_cast<std::size_t>(e.k)] += r;
      total += e.delta * r - e.beta - e.theta * pw[i];
    }
    if (qos_ok) {
      *qos_ok = true;
      for (int k : view.served)
        if (rate[static_cast<std::size_t>(k)] * kBitsPerMbps < s.user(k).min_rate_bps) *qos_ok = false;
    }
    return total;
  };
  auto project = [&](std::vector<double>& pw) {
    std::vector<double> used(static_cast<std::size_t>(s.num_uavs()), 0.0);
    for (std::size_t i = 0; i < entries.size(); ++i) {
      pw[i] = std::clamp(pw[i], 0.0, entries[i].cap);
      used[static_cast<std::size_t>(entries[i].n)] += pw[i];
    }
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const double u = used[static_cast<std::size_t>(entries[i].n)];
      if (u > entries[i].cap) pw[i] *= entries[i].cap / u;
    }
  };

  std::vector<double> best, projected, used(static_cast<std::size_t>(s.num_uavs()));
  double best_objective = -INFINITY;
  for (int t = 1; t <= params.max_iterations; ++t) {
    d.t = t;
    const double step = step_size(d.z, t);

    // Dual step at the current primal point.
    std::fill(rate.begin(), rate.end(), 0.0);
    std::fill(used.begin(), used.end(), 0.0);
    for (std::size_t i = 0; i < entries.size(); ++i) {
      rate[static_cast<std::size_t>(entries[i].k)] += entry_rate(entries[i], p[i]);
      used[static_cast<std::size_t>(entries[i].n)] += p[i];
    }
    for (int k : view.served) {
      auto& lam = d.lambda[static_cast<std::size_t>(k)];
      lam = std::max(0.0, lam - step * (rate[static_cast<std::size_t>(k)] - s.user(k).min_rate_bps / kBitsPerMbps));
    }
    for (int n = 0; n < s.num_uavs(); ++n) {
      auto& mu = d.mu[static_cast<std::size_t>(n)];
      mu = std::max(0.0, mu - step * (s.mnos()[static_cast<std::size_t>(n)].max_power_w - used[static_cast<std::size_t>(n)]));
    }
    for (std::size_t i = 0; i < entries.size(); ++i) {
      auto& nu = d.nu(entries[i].k, entries[i].c);
      nu = std::max(0.0, nu - step * (entries[i].cap - p[i]));
    }

    // Closed-form primal response, clamped to the per-channel cap.
    double change = 0.0;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const auto& e = entries[i];
      const double denom = e.theta + d.mu[static_cast<std::size_t>(e.n)] + d.nu(e.k, e.c);
      if (!(denom > 0.0)) throw std::domain_error("closed-form power: non-positive denominator");
      const double weight = e.delta + d.lambda[static_cast<std::size_t>(e.k)];
      const double level = params.verbatim ? omega_mbps * weight / denom : omega_mbps * weight / (ln2 * denom);
      next[i] = std::min(std::max(0.0, level - net.noise_w / e.gain), e.cap);
      change = std::max(change, std::abs(next[i] - p[i]));
    }
    p.swap(next);
    out.iterations = t;

    projected = p;
    project(projected);
    bool qos_ok = false;
    const double objective = evaluate(projected, &qos_ok);
    if (qos_ok && objective > best_objective) {
      best_objective = objective;
      best = projected;
    }
    out.trace.push_back({t, d.norm(), change, evaluate(p, nullptr)});
    // A small step alone is not enough while QoS is still short.
    if (change <= params.tolerance && qos_ok) {
      out.converged = true;
      break;
    }
  }

  project(p);
  if (!out.converged) {
    // Primal recovery: the subgradient approaches a binding QoS level from
    // below, so iterates can stay infeasible. Set each user's lambda to the
    // root of its QoS slack at the final mu, nu and re-solve the primal.
    auto respond = [&](std::size_t i, double lam) {
      const auto& e = entries[i];
      const double denom = e.theta + d.mu[static_cast<std::size_t>(e.n)] + d.nu(e.k, e.c);
      const double level = params.verbatim ? omega_mbps * (e.delta + lam) / denom
                                           : omega_mbps * (e.delta + lam) / (ln2 * denom);
      return std::min(std::max(0.0, level - net.noise_w / e.gain), e.cap);
    };
    std::vector<double> recovered(entries.size());
    const std::vector<double> saved_lambda = d.lambda;
    for (int k : view.served) {
      std::vector<std::size_t> mine;
      for (std::size_t i = 0; i < entries.size(); ++i)
        if (entries[i].k == k) mine.push_back(i);
      auto slack = [&](double lam) {
        double r = 0.0;
        for (auto i : mine) r += entry_rate(entries[i], respond(i, lam));
        return r - s.user(k).min_rate_bps / kBitsPerMbps;
      };
      double& lam = d.lambda[static_cast<std::size_t>(k)];
      if (slack(0.0) >= 0.0) {
        lam = 0.0;
      } else {
        double lo = 0.0, hi = std::max(1.0, lam);
        while (slack(hi) < 0.0 && hi < 1e12) hi *= 2.0;
        if (slack(hi) >= 0.0) {
          for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            (slack(mid) < 0.0 ? lo : hi) = mid;
          }
          lam = hi;
        }
      }
      for (auto i : mine) recovered[i] = respond(i, lam);
    }
    project(recovered);
    bool qos_ok = false;
    const double objective = evaluate(recovered, &qos_ok);
    if (qos_ok && objective > best_objective) {
      best_objective = objective;
      best = recovered;
    } else {
      d.lambda = saved_lambda;
    }
  }
  const auto& chosen = (out.converged || best.empty()) ? p : best;
  out.power = PowerMatrix(s);
  for (std::size_t i = 0; i < entries.size(); ++i) out.power(entries[i].k, entries[i].c) = chosen[i];
  out.objective = total_utility(a, x, out.power, net).total;
  out.dual_value = dual_function(net, a, x, out.duals);
  return out;
}

double utility_derivative(const Network& net, const AssignmentMatrix& x, int k, int c, double p_kc) {
  const auto& s = net.scenario;
  return s.user(k).payment_per_mbps * x(k, c) * rate_slope(net, k, c, p_kc) - theta(s, c);
}

double utility_second_derivative(const Network& net, const AssignmentMatrix& x, int k, int c, double p_kc) {
  const auto& s = net.scenario;
  const double g = net.gains.gain(k, s.uav_of_channel(c));
  const double denom = net.noise_w + p_kc * g;
  return -s.user(k).payment_per_mbps * x(k, c) * s.radio().subchannel_bandwidth_hz / kBitsPerMbps * g * g /
         (std::numbers::ln2 * denom * denom);
}

ConcavityReport verify_concavity(const Network& net, const AssociationMatrix& a, const AssignmentMatrix& x,
                                 int samples, std::uint64_t seed) {
  const auto& s = net.scenario;
  std::vector<std::pair<int, int>> entries;
  for (int k = 0; k < s.num_users(); ++k)
    for (int c = 0; c < s.num_channels(); ++c)
      if (x(k, c) && a(k, s.uav_of_channel(c))) entries.emplace_back(k, c);

  ConcavityReport rep;
  rep.max_second = -INFINITY;
  if (entries.empty()) return rep;
  Rng rng(seed);
  PowerMatrix p = equal_split_power(net, x);
  for (int i = 0; i < samples; ++i) {
    const auto [k, c] = entries[rng.index(entries.size())];
    const double cap = max_power(s, c);
    // log-uniform over [1e-3, 1] * P^max
    const double pk = cap * std::pow(10.0, rng.uniform(-3.0, 0.0));
    const double h = 1e-4 * pk;
    auto u_at = [&](double v) {
      p(k, c) = v;
      return total_utility(a, x, p, net).total;
    };
    const double saved = p(k, c);
    const double up = u_at(pk + h), mid = u_at(pk), down = u_at(pk - h);
    p(k, c) = saved;
    const double fd = (up - down) / (2.0 * h);
    const double an = utility_derivative(net, x, k, c, pk);
    rep.max_rel_error = std::max(rep.max_rel_error, std::abs(fd - an) / std::max(std::abs(an), theta(s, c)));

    const double second = utility_second_derivative(net, x, k, c, pk);
    const double h2 = 1e-2 * pk;
    p(k, c) = pk + h2;
    const double u_hi = total_utility(a, x, p, net).total;
    p(k, c) = pk - h2;
    const double u_lo = total_utility(a, x, p, net).total;
    p(k, c) = saved;
    const double fd2 = (u_hi - 2.0 * mid + u_lo) / (h2 * h2);
    if (!(second < 0.0) || !(fd2 < 0.0)) rep.second_negative = false;
    rep.max_second = std::max(rep.max_second, second);
    ++rep.samples;
  }
  return rep;
}

}  // namespace uavshare
