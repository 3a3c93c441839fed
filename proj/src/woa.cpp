#include "uavshare/woa.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "uavshare/rng.hpp"

namespace uavshare {

void WoaParams::validate() const {
  if (population < 2) throw std::invalid_argument("WOA population must be >= 2");
  if (max_iterations < 1) throw std::invalid_argument("WOA max_iterations must be >= 1");
  if (!(penalty > 0.0)) throw std::invalid_argument("WOA penalty factor must be > 0");
}

SlotLayout::SlotLayout(const Scenario& s, const AssociationMatrix& a) : candidates_(static_cast<std::size_t>(s.num_uavs())) {
  for (int c = 0; c < s.num_channels(); ++c) channel_uav_.push_back(s.uav_of_channel(c));
  for (int n = 0; n < s.num_uavs(); ++n) candidates_[static_cast<std::size_t>(n)] = a.users_of(n);
}

double SlotLayout::search_space_size() const {
  double size = 1.0;
  for (int c = 0; c < dimension(); ++c) size *= max_slot(c) + 1;
  return size;
}

AssignmentMatrix decode(const WhaleAgent& agent, const SlotLayout& layout, const Scenario& s) {
  AssignmentMatrix x(s);
  for (int c = 0; c < layout.dimension(); ++c) {
    const int k = layout.user_at(c, agent.slots[static_cast<std::size_t>(c)]);
    if (k >= 0) x(k, c) = 1;
  }
  return x;
}

WhaleAgent encode(const AssignmentMatrix& x, const SlotLayout& layout) {
  WhaleAgent agent{std::vector<int>(static_cast<std::size_t>(layout.dimension()), 0)};
  for (int c = 0; c < layout.dimension(); ++c) {
    const int k = x.holder(c);
    if (k < 0) continue;
    const auto& cand = layout.candidates(layout.uav_of_channel(c));
    if (cand.empty()) continue;
    const auto it = std::find(cand.begin(), cand.end(), k);
    agent.slots[static_cast<std::size_t>(c)] =
        it != cand.end() ? static_cast<int>(it - cand.begin()) + 1 : 1 + k % static_cast<int>(cand.size());
  }
  return agent;
}

WhaleAgent repair(WhaleAgent agent, const SlotLayout& layout) {
  for (int c = 0; c < layout.dimension(); ++c) {
    auto& v = agent.slots[static_cast<std::size_t>(c)];
    v = std::clamp(v, 0, layout.max_slot(c));
  }
  return agent;
}

WhaleAgent random_agent(const SlotLayout& layout, Rng& rng) {
  WhaleAgent agent{std::vector<int>(static_cast<std::size_t>(layout.dimension()))};
  for (int c = 0; c < layout.dimension(); ++c)
    agent.slots[static_cast<std::size_t>(c)] = static_cast<int>(rng.index(static_cast<std::size_t>(layout.max_slot(c)) + 1));
  return agent;
}

namespace {

int floor_to_int(double v) {
  constexpr double lim = 1e9;
  return static_cast<int>(std::floor(std::clamp(v, -lim, lim)));
}

WhaleAgent toward(const WhaleAgent& agent, const WhaleAgent& target, std::span<const double> a_coef,
                  std::span<const double> c_coef) {
  const std::size_t dim = agent.slots.size();
  if (target.slots.size() != dim || a_coef.size() != dim || c_coef.size() != dim)
    throw std::invalid_argument("WOA update: dimension mismatch");
  WhaleAgent out{std::vector<int>(dim)};
  for (std::size_t i = 0; i < dim; ++i) {
    const double d = std::abs(c_coef[i] * target.slots[i] - agent.slots[i]);
    out.slots[i] = floor_to_int(target.slots[i] - a_coef[i] * d);
  }
  return out;
}

}  // namespace

WhaleAgent encircle_update(const WhaleAgent& agent, const WhaleAgent& best, std::span<const double> a_coef,
                           std::span<const double> c_coef) {
  return toward(agent, best, a_coef, c_coef);
}

WhaleAgent random_search_update(const WhaleAgent& agent, const WhaleAgent& random, std::span<const double> a_coef,
                                std::span<const double> c_coef) {
  return toward(agent, random, a_coef, c_coef);
}

WhaleAgent bubble_net_update(const WhaleAgent& agent, const WhaleAgent& best, double spiral_b, double l) {
  const std::size_t dim = agent.slots.size();
  if (best.slots.size() != dim) throw std::invalid_argument("WOA update: dimension mismatch");
  const double factor = std::exp(spiral_b * l) * std::cos(2.0 * std::numbers::pi * l);
  WhaleAgent out{std::vector<int>(dim)};
  for (std::size_t i = 0; i < dim; ++i) {
    const double d = std::abs(static_cast<double>(best.slots[i] - agent.slots[i]));
    out.slots[i] = floor_to_int(d * factor + best.slots[i]);
  }
  return out;
}

double woa_coefficient_a(int t, int max_iterations) {
  if (max_iterations <= 1) return 2.0;
  return 2.0 - 2.0 * static_cast<double>(t - 1) / static_cast<double>(max_iterations - 1);
}

std::vector<double> channel_power_profile(const PowerMatrix& p, const Scenario& s) {
  std::vector<double> profile(static_cast<std::size_t>(s.num_channels()), 0.0);
  for (int k = 0; k < p.rows(); ++k)
    for (int c = 0; c < p.cols(); ++c) profile[static_cast<std::size_t>(c)] += p(k, c);
  for (int c = 0; c < s.num_channels(); ++c) {
    auto& v = profile[static_cast<std::size_t>(c)];
    if (v <= 0.0) {
      const auto& mno = s.mnos()[static_cast<std::size_t>(s.uav_of_channel(c))];
      v = mno.max_power_w / mno.num_subchannels;
    }
  }
  return profile;
}

PowerMatrix apply_channel_power(const AssignmentMatrix& x, std::span<const double> profile, const Scenario& s) {
  PowerMatrix p(s);
  for (int k = 0; k < x.rows(); ++k)
    for (int c = 0; c < x.cols(); ++c)
      if (x(k, c)) p(k, c) = profile[static_cast<std::size_t>(c)];
  return p;
}

double qos_penalty(const UtilityBreakdown& u, const AssociationMatrix& a, const Scenario& s, double xi) {
  double total = 0.0;
  for (int k = 0; k < s.num_users(); ++k) {
    if (a.uav_of(k) < 0) continue;
    const double f = (u.user_rate_bps[static_cast<std::size_t>(k)] - s.user(k).min_rate_bps) / kBitsPerMbps;
    if (f < 0.0) total += f * f;
  }
  return xi * total;
}

int qos_violations(const UtilityBreakdown& u, const AssociationMatrix& a, const Scenario& s) {
  int count = 0;
  for (int k = 0; k < s.num_users(); ++k)
    if (a.uav_of(k) >= 0 && !u.qos_met[static_cast<std::size_t>(k)]) ++count;
  return count;
}

double fitness(const AssignmentMatrix& x, const AssociationMatrix& a, const PowerMatrix& p, const Network& net,
               double xi) {
  const auto u = total_utility(a, x, p, net);
  return u.total - qos_penalty(u, a, net.scenario, xi);
}

FitnessKernel::FitnessKernel(const Network& net, const AssociationMatrix& a, const SlotLayout& layout,
                             std::span<const double> channel_power, double xi)
    : users_(net.scenario.num_users()), xi_(xi) {
  const auto& s = net.scenario;
  if (static_cast<int>(channel_power.size()) != layout.dimension())
    throw std::invalid_argument("channel power profile has the wrong length");
  for (int c = 0; c < layout.dimension(); ++c) {
    offset_.push_back(static_cast<int>(terms_.size()));
    const int n = layout.uav_of_channel(c);
    const double pw = channel_power[static_cast<std::size_t>(c)];
    terms_.push_back({-1, 0.0, 0.0});
    for (int slot = 1; slot <= layout.max_slot(c); ++slot) {
      const int k = layout.user_at(c, slot);
      const double r = net.link_rate(k, n, pw) / kBitsPerMbps;
      const double value = s.user(k).payment_per_mbps * r - s.channel_price(c) - s.mnos()[static_cast<std::size_t>(n)].price_per_watt * pw;
      terms_.push_back({k, r, value});
    }
  }
  for (int k = 0; k < users_; ++k) {
    min_rate_mbps_.push_back(s.user(k).min_rate_bps / kBitsPerMbps);
    if (a.uav_of(k) >= 0) served_.push_back(k);
  }
}

void FitnessKernel::user_rates(const WhaleAgent& agent, std::vector<double>& rates, double* value) const {
  rates.assign(static_cast<std::size_t>(users_), 0.0);
  double v = 0.0;
  for (std::size_t c = 0; c < agent.slots.size(); ++c) {
    const int slot = agent.slots[c];
    if (slot == 0) continue;
    const Term& t = term(static_cast<int>(c), slot);
    rates[static_cast<std::size_t>(t.user)] += t.rate_mbps;
    v += t.value;
  }
  if (value) *value = v;
}

double FitnessKernel::operator()(const WhaleAgent& agent) const {
  thread_local std::vector<double> rates;
  double value = 0.0;
  user_rates(agent, rates, &value);
  double shortfall = 0.0;
  for (int k : served_) {
    const double f = rates[static_cast<std::size_t>(k)] - min_rate_mbps_[static_cast<std::size_t>(k)];
    if (f < 0.0) shortfall += f * f;
  }
  return value - xi_ * shortfall;
}

int FitnessKernel::violations(const WhaleAgent& agent) const {
  std::vector<double> rates;
  user_rates(agent, rates, nullptr);
  int count = 0;
  for (int k : served_)
    if (rates[static_cast<std::size_t>(k)] < min_rate_mbps_[static_cast<std::size_t>(k)]) ++count;
  return count;
}

void evaluate_population(const FitnessKernel& kernel, std::span<const WhaleAgent> agents, std::span<double> out) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(agents.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = kernel(agents[static_cast<std::size_t>(i)]);
}

void evaluate_population_serial(const FitnessKernel& kernel, std::span<const WhaleAgent> agents,
                                std::span<double> out) {
  for (std::size_t i = 0; i < agents.size(); ++i) out[i] = kernel(agents[i]);
}

WoaResult woa_solve(const Network& net, const AssociationMatrix& a, std::span<const double> channel_power,
                    const WoaParams& params, const AssignmentMatrix* warm_start) {
  params.validate();
  const auto& s = net.scenario;
  const SlotLayout layout(s, a);
  const FitnessKernel kernel(net, a, layout, channel_power, params.penalty);
  Rng rng(params.seed);

  const auto dim = static_cast<std::size_t>(layout.dimension());
  const auto pop_size = static_cast<std::size_t>(params.population);
  std::vector<WhaleAgent> pop;
  pop.reserve(pop_size);
  if (warm_start) pop.push_back(repair(encode(*warm_start, layout), layout));
  while (pop.size() < pop_size) pop.push_back(random_agent(layout, rng));

  std::vector<double> fit(pop_size);
  evaluate_population(kernel, pop, fit);
  std::size_t best_idx = static_cast<std::size_t>(std::max_element(fit.begin(), fit.end()) - fit.begin());
  WoaResult result;
  result.best = pop[best_idx];
  result.best_fitness = fit[best_idx];
  result.trace.push_back({0, result.best_fitness, kernel.violations(result.best)});

  std::vector<double> a_coef(dim), c_coef(dim);
  for (int t = 1; t <= params.max_iterations; ++t) {
    const double a_t = woa_coefficient_a(t, params.max_iterations);
    for (std::size_t i = 0; i < pop_size; ++i) {
      double a_norm = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        a_coef[d] = 2.0 * a_t * rng.uniform() - a_t;
        c_coef[d] = 2.0 * rng.uniform();
        a_norm = std::max(a_norm, std::abs(a_coef[d]));
      }
      const double l = rng.uniform(-1.0, 1.0);
      const double p = rng.uniform();
      WhaleAgent moved;
      if (p < 0.5) {
        if (a_norm < 1.0) {
          moved = encircle_update(pop[i], result.best, a_coef, c_coef);
        } else {
          const std::size_t j = rng.index(pop_size);
          moved = random_search_update(pop[i], pop[j], a_coef, c_coef);
        }
      } else {
        moved = bubble_net_update(pop[i], result.best, params.spiral_b, l);
      }
      pop[i] = repair(std::move(moved), layout);
    }
    evaluate_population(kernel, pop, fit);
    best_idx = static_cast<std::size_t>(std::max_element(fit.begin(), fit.end()) - fit.begin());
    if (fit[best_idx] > result.best_fitness) {
      result.best = pop[best_idx];
      result.best_fitness = fit[best_idx];
    }
    result.trace.push_back({t, result.best_fitness, kernel.violations(result.best)});
  }
  result.assignment = decode(result.best, layout, s);
  return result;
}

WoaResult woa_solve(const Network& net, const AssociationMatrix& a, const PowerMatrix& p, const WoaParams& params,
                    const AssignmentMatrix* warm_start) {
  const auto profile = channel_power_profile(p, net.scenario);
  return woa_solve(net, a, profile, params, warm_start);
}

}  // namespace uavshare
