#pragma once

// Power allocation at a fixed subchannel assignment: Lagrangian relaxation
// with projected subgradient dual steps and a closed-form primal update.
//
// QoS slack terms are measured in Mbps and powers in watts, so lambda is in
// money/Mbps and mu, nu in money/W.

#include <cstdint>
#include <vector>

#include "uavshare/economics.hpp"

namespace uavshare {

struct PowerParams {
  double step_constant = 0.1;  // z in z / sqrt(t)
  double tolerance = 1e-6;     // W, max-norm power change
  int max_iterations = 2000;
  double initial_dual = 0.01;
  /// Reproduce the closed form without the 1/ln 2 factor.
  bool verbatim = false;
};

/// lambda per user (QoS), mu per UAV (sum power), nu per (user, channel)
/// (per-channel cap, only live on assigned pairs). All >= 0.
struct DualState {
  std::vector<double> lambda;
  std::vector<double> mu;
  Grid<double> nu;
  double z = 0.1;
  int t = 0;

  static DualState initial(const Scenario& s, const AssociationMatrix& a, const AssignmentMatrix& x, double value,
                           double z);
  double norm() const;
};

double step_size(double z, int t);

double lagrangian_value(const Network& net, const AssociationMatrix& a, const AssignmentMatrix& x,
                        const PowerMatrix& p, const DualState& d);
/// dL/dp(k, c) at power `p_kc`.
double lagrangian_derivative(const Network& net, const AssignmentMatrix& x, const DualState& d, int k, int c,
                             double p_kc);
/// [x w (delta + lambda) / (ln2 (theta + mu x + nu)) - sigma^2 / g]^+ with
/// rates in Mbps. Throws std::domain_error on a non-positive denominator.
double closed_form_power(const Network& net, const AssignmentMatrix& x, const DualState& d, int k, int c,
                         bool verbatim = false);

/// One projected subgradient step with step z / sqrt(d.t). Requires t >= 1.
DualState update_duals(const DualState& d, const Network& net, const AssociationMatrix& a,
                       const AssignmentMatrix& x, const PowerMatrix& p);

/// max over 0 <= p <= P^max of the Lagrangian (separable, concave per entry).
double dual_function(const Network& net, const AssociationMatrix& a, const AssignmentMatrix& x, const DualState& d);

struct PowerTraceRow {
  int t = 0;
  double dual_norm = 0.0;
  double power_change = 0.0;
  double objective = 0.0;
};

struct PowerResult {
  PowerMatrix power;
  DualState duals;
  bool converged = false;
  int iterations = 0;
  double objective = 0.0;   // total utility of `power`
  double dual_value = 0.0;  // dual_function at the final duals
  std::vector<PowerTraceRow> trace;
};

/// Equal split P_n^max / B_n on every assigned subchannel.
PowerMatrix equal_split_power(const Network& net, const AssignmentMatrix& x);

/// Scale each UAV's powers down proportionally when over budget, and clamp
/// entries into [0, P^max].
void project_power(const Network& net, const AssignmentMatrix& x, PowerMatrix& p);

PowerResult solve_power(const Network& net, const AssociationMatrix& a, const AssignmentMatrix& x,
                        const PowerParams& params = {});

/// dU/dp and d2U/dp2 of the total utility in one entry.
double utility_derivative(const Network& net, const AssignmentMatrix& x, int k, int c, double p_kc);
double utility_second_derivative(const Network& net, const AssignmentMatrix& x, int k, int c, double p_kc);

struct ConcavityReport {
  int samples = 0;
  double max_rel_error = 0.0;    // analytic vs central differences
  bool second_negative = true;   // analytic and numerical
  double max_second = 0.0;       // largest (least negative) analytic value
};

/// Compares the analytic first derivative against central differences of
/// total_utility at random (entry, power) samples, and checks the sign of
/// the second derivative. Relative error is normalised by max(|dU/dp|, theta).
ConcavityReport verify_concavity(const Network& net, const AssociationMatrix& a, const AssignmentMatrix& x,
                                 int samples, std::uint64_t seed);

}  // namespace uavshare
