#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "routecast/common.hpp"

namespace routecast {

// Coefficients of the state-dependent bilinear travel-time model
//
//   X(m) = mu - sum_i phi_i X(m-i)
//          + xi(m) + sum_i b_i xi(m-i)
//          + sum_r sum_z c_rz xi(m-r) X(m-z)
//          + w(m-1)
//
// with equal autoregressive and exploration window lengths
// (j = l = regression_no). xi is the exploration input, N(xi_mean, xi_std^2);
// w is process noise with std q_std; observations carry noise with std r_std.
struct BilinearParams {
  int regression_no = 2;
  std::vector<double> phi;  // phi[i-1] = phi_i, one per lag
  std::vector<double> b;    // b[i-1]   = b_i
  Eigen::MatrixXd c;        // c(r-1, z-1) = c_rz
  double xi_mean = 0.1;
  double xi_std = 0.1;
  double q_std = 0.35;
  double r_std = 0.15;
  double x_var0 = 1.0;  // initial variance of the X window slots

  int state_dim() const { return 2 * regression_no + 1; }
  void validate() const;

  // phi_i = 0.2 for all lags; b and c drawn from N(0.1, 0.1^2) using the
  // seed (b first, then c row by row).
  static BilinearParams make_default(int regression_no, std::uint64_t seed);
};

// Kalman filter over the stacked state
//
//   s(m) = ( 1, xi(m-l+1..m), X(m-j+1..m) )
//
// of dimension 2*regression_no + 1. The transition matrix rebuilt at every
// step carries the constant in row 0, shift registers for the two windows,
// and the model recursion in the last row:
//
//   ( mu (1 + sum_i phi_i), psi_l .. psi_1, -phi_j .. -phi_1 ),
//   psi_i = b_i + sum_z c_iz X(m-z)
//
// so the X window entering psi makes the system bilinear while each single
// step stays linear in s. The drift entry uses the intercept form so the
// recursion's fixed point sits at the running mean; see transition_matrix. The exploration input and the model's own
// propensity to move enter through V = e_l + e_{n-1}; process noise and the
// previous innovation feed the X slot through G = e_{n-1}. Observations are
// scalar reads of the X slot (H = G^T).
//
// mu tracks the running mean of the filtered X values and last_innovation
// carries y - X^-(m) into the next prediction, so a surprise propagates.
class BilinearFilter {
 public:
  explicit BilinearFilter(BilinearParams params);

  const BilinearParams& params() const { return params_; }
  const Eigen::VectorXd& state() const { return s_; }
  const Eigen::MatrixXd& covariance() const { return p_; }
  int dim() const { return params_.state_dim(); }

  std::uint64_t steps() const { return m_; }
  double running_mean() const { return mu_; }
  bool has_observations() const { return mu_count_ > 0; }
  double last_innovation() const { return last_innovation_; }
  bool last_update_degenerate() const { return degenerate_; }

  // Newest X estimate (the last state slot).
  double x_slot() const { return s_[dim() - 1]; }

  // Replaces the X window with externally supplied recent costs, oldest
  // first, newest in the last slot. Fewer than regression_no values leave
  // the older slots untouched and mark the window as partially filled;
  // estimate_edge then refuses to run the model.
  void load_x_window(std::span<const double> recent_x);
  int x_window_fill() const { return x_fill_; }

  // Cold-start bookkeeping: folds an observed cost into the running mean
  // without running the filter (the window cannot support a step yet).
  void observe_mean_only(double y_sec);

  Eigen::MatrixXd transition_matrix() const;

  struct Prior {
    Eigen::VectorXd s;
    Eigen::MatrixXd p;
  };

  // Time update. Pure. xi_draw overrides the deterministic xi_mean input
  // (used when exploration is driven stochastically).
  Prior predict(std::optional<double> xi_draw = std::nullopt) const;

  // Measurement update with observation y. Re-pins the constant slot,
  // clamps the X estimate to kMinTravelTimeSec, folds the estimate into mu
  // and stores the innovation. If the innovation variance degenerates to
  // zero the state is left at the prior and flagged.
  void update(const Prior& prior, double y_sec);

  // Edge-cost query used by planning and execution:
  //  - window not full: running mean if any observation was ever folded in,
  //    otherwise fallback_cost;
  //  - window full, no observation: predicted X slot (no state change);
  //  - window full, observation: predict + update, returns the new X slot.
  // Always >= kMinTravelTimeSec.
  double estimate_edge(std::optional<double> y_obs_sec, double fallback_cost,
                       std::optional<double> xi_draw = std::nullopt);

  // One debug line: m, mu, x_slot, trace(P).
  void write_snapshot(std::ostream& out) const;

 private:
  BilinearParams params_;
  Eigen::VectorXd s_;
  Eigen::MatrixXd p_;
  std::uint64_t m_ = 0;
  double mu_ = 0.0;
  std::uint64_t mu_count_ = 0;
  double last_innovation_ = 0.0;
  int x_fill_ = 0;
  bool degenerate_ = false;
};

}  // namespace routecast
