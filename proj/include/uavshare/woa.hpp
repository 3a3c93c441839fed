#pragma once

// Subchannel assignment at fixed power by a discrete whale optimization
// algorithm with a quadratic QoS penalty.
//
// Encoding: one integer per global subchannel c. Slot 0 leaves c
// unassigned; slot s in [1, k_n] gives c to the s-th user associated with
// c's UAV (ascending global id). One-user-per-subchannel and x => a hold
// for every decodable agent.

#include <cstdint>
#include <span>
#include <vector>

#include "uavshare/economics.hpp"

namespace uavshare {

struct WoaParams {
  int population = 30;       // K
  int max_iterations = 100;  // I_max
  double spiral_b = 1.0;     // logarithmic spiral shape constant
  double penalty = 1e3;      // xi, per Mbps^2 of QoS shortfall
  std::uint64_t seed = 1;

  void validate() const;
};

struct WhaleAgent {
  std::vector<int> slots;
  bool operator==(const WhaleAgent&) const = default;
};

class SlotLayout {
 public:
  SlotLayout(const Scenario& s, const AssociationMatrix& a);

  int dimension() const { return static_cast<int>(channel_uav_.size()); }
  int max_slot(int c) const { return static_cast<int>(candidates_[static_cast<std::size_t>(channel_uav_[static_cast<std::size_t>(c)])].size()); }
  int uav_of_channel(int c) const { return channel_uav_[static_cast<std::size_t>(c)]; }
  /// Global user for slot s on channel c, -1 for slot 0.
  int user_at(int c, int slot) const {
    return slot == 0 ? -1 : candidates_[static_cast<std::size_t>(uav_of_channel(c))][static_cast<std::size_t>(slot - 1)];
  }
  const std::vector<int>& candidates(int n) const { return candidates_[static_cast<std::size_t>(n)]; }
  /// Number of distinct decodable agents (product of (k_n + 1) over channels).
  double search_space_size() const;

 private:
  std::vector<int> channel_uav_;
  std::vector<std::vector<int>> candidates_;
};

AssignmentMatrix decode(const WhaleAgent& agent, const SlotLayout& layout, const Scenario& s);
/// Channels held by a user outside the UAV's candidate list are remapped to
/// slot 1 + (user mod k_n); with no candidates the channel is dropped.
WhaleAgent encode(const AssignmentMatrix& x, const SlotLayout& layout);
/// Clamp every entry into [0, k_n] of its channel's UAV.
WhaleAgent repair(WhaleAgent agent, const SlotLayout& layout);
WhaleAgent random_agent(const SlotLayout& layout, class Rng& rng);

// Position updates. Coefficient vectors have the agent's dimension; the
// results are floored but not yet repaired.
WhaleAgent encircle_update(const WhaleAgent& agent, const WhaleAgent& best, std::span<const double> a_coef,
                           std::span<const double> c_coef);
WhaleAgent bubble_net_update(const WhaleAgent& agent, const WhaleAgent& best, double spiral_b, double l);
WhaleAgent random_search_update(const WhaleAgent& agent, const WhaleAgent& random, std::span<const double> a_coef,
                                std::span<const double> c_coef);

/// a(t) for t = 1..I_max, linear from 2 down to 0.
double woa_coefficient_a(int t, int max_iterations);

/// Power held by each channel in `p`; channels with no power fall back to
/// the equal split P_n^max / B_n.
std::vector<double> channel_power_profile(const PowerMatrix& p, const Scenario& s);
PowerMatrix apply_channel_power(const AssignmentMatrix& x, std::span<const double> profile, const Scenario& s);

/// xi * sum over associated users of min(0, rate - R^min)^2, rates in Mbps.
double qos_penalty(const UtilityBreakdown& u, const AssociationMatrix& a, const Scenario& s, double xi);
int qos_violations(const UtilityBreakdown& u, const AssociationMatrix& a, const Scenario& s);

/// Total utility minus the QoS penalty.
double fitness(const AssignmentMatrix& x, const AssociationMatrix& a, const PowerMatrix& p, const Network& net,
               double xi);

/// Fitness on the slot encoding with per-(channel, slot) terms tabulated
/// once for a fixed channel power profile. Pure; safe to call concurrently.
class FitnessKernel {
 public:
  FitnessKernel(const Network& net, const AssociationMatrix& a, const SlotLayout& layout,
                std::span<const double> channel_power, double xi);

  double operator()(const WhaleAgent& agent) const;
  int violations(const WhaleAgent& agent) const;

 private:
  struct Term {
    int user;
    double rate_mbps;
    double value;  // revenue - channel price - power cost
  };
  const Term& term(int c, int slot) const { return terms_[static_cast<std::size_t>(offset_[static_cast<std::size_t>(c)] + slot)]; }
  void user_rates(const WhaleAgent& agent, std::vector<double>& rates, double* value) const;

  std::vector<int> offset_;
  std::vector<Term> terms_;
  std::vector<int> served_;            // associated users
  std::vector<double> min_rate_mbps_;  // per global user
  int users_;
  double xi_;
};

/// OpenMP over the population.
void evaluate_population(const FitnessKernel& kernel, std::span<const WhaleAgent> agents, std::span<double> out);
/// Serial reference for evaluate_population.
void evaluate_population_serial(const FitnessKernel& kernel, std::span<const WhaleAgent> agents,
                                std::span<double> out);

struct WoaTraceRow {
  int iteration = 0;
  double best_fitness = 0.0;
  int violations = 0;
};

struct WoaResult {
  AssignmentMatrix assignment;
  WhaleAgent best;
  double best_fitness = 0.0;
  std::vector<WoaTraceRow> trace;  // row 0 is the initial population
};

/// `warm_start`, when given, seeds the first whale (the current assignment).
WoaResult woa_solve(const Network& net, const AssociationMatrix& a, std::span<const double> channel_power,
                    const WoaParams& params, const AssignmentMatrix* warm_start = nullptr);
WoaResult woa_solve(const Network& net, const AssociationMatrix& a, const PowerMatrix& p, const WoaParams& params,
                    const AssignmentMatrix* warm_start = nullptr);

}  // namespace uavshare
