#pragma once

// Decision matrices and the SP revenue / cost / utility evaluation.

#include <cstdint>
#include <vector>

#include "uavshare/channel.hpp"

namespace uavshare {

/// Dense row-major grid. Rows are global users.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int rows, int cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {}

  T& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  const T& operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  const std::vector<T>& data() const { return data_; }

  bool operator==(const Grid&) const = default;

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<T> data_;
};

/// a(k, n) in {0,1}: user k associated to UAV n.
struct AssociationMatrix : Grid<std::uint8_t> {
  AssociationMatrix() = default;
  explicit AssociationMatrix(const Scenario& s) : Grid(s.num_users(), s.num_uavs()) {}
  /// UAV of user k, or -1. Assumes at most one 1 per row.
  int uav_of(int k) const;
  std::vector<int> users_of(int n) const;
};

/// x(k, c) in {0,1}: user k holds global subchannel c.
struct AssignmentMatrix : Grid<std::uint8_t> {
  AssignmentMatrix() = default;
  explicit AssignmentMatrix(const Scenario& s) : Grid(s.num_users(), s.num_channels()) {}
  /// Holder of channel c, or -1 (first holder if several).
  int holder(int c) const;
  int channels_of(int k) const;
};

/// p(k, c) in watts.
struct PowerMatrix : Grid<double> {
  PowerMatrix() = default;
  explicit PowerMatrix(const Scenario& s) : Grid(s.num_users(), s.num_channels()) {}
  double uav_total(const Scenario& s, int n) const;
};

/// Zero every p(k, c) where x(k, c) = 0.
void enforce_power_support(const AssignmentMatrix& x, PowerMatrix& p);

struct SpUtility {
  double revenue = 0.0;
  double cost = 0.0;
  double utility = 0.0;
};

struct UtilityBreakdown {
  std::vector<SpUtility> per_sp;
  double total_revenue = 0.0;
  double total_cost = 0.0;
  double total = 0.0;
  std::vector<double> user_rate_bps;
  std::vector<bool> qos_met;
};

/// sum_n sum_b a * x * R, bits/s.
double user_rate(int k, const AssociationMatrix& a, const AssignmentMatrix& x, const PowerMatrix& p,
                 const Network& net);
/// sum over SP m's users of delta * a * x * R, with R in Mbps.
double revenue(int m, const AssociationMatrix& a, const AssignmentMatrix& x, const PowerMatrix& p,
               const Network& net);
/// Channel term sum beta * a * x plus power term sum theta * a * p. The
/// power term carries no x factor; with powers supported only on assigned
/// channels both forms agree.
double cost(int m, const AssociationMatrix& a, const AssignmentMatrix& x, const PowerMatrix& p,
            const Network& net);
UtilityBreakdown total_utility(const AssociationMatrix& a, const AssignmentMatrix& x, const PowerMatrix& p,
                               const Network& net);

}  // namespace uavshare
