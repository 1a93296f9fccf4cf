#include "routecast/bilinear_kf.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "routecast/rng.hpp"
#include "routecast/text_io.hpp"

namespace routecast {

void BilinearParams::validate() const {
  if (regression_no < 1)
    throw std::invalid_argument("BilinearParams: regression_no must be >= 1");
  const auto r = static_cast<std::size_t>(regression_no);
  if (phi.size() != r)
    throw std::invalid_argument("BilinearParams: phi must have regression_no entries");
  if (b.size() != r)
    throw std::invalid_argument("BilinearParams: b must have regression_no entries");
  if (c.rows() != regression_no || c.cols() != regression_no)
    throw std::invalid_argument("BilinearParams: c must be regression_no square");
  if (!(xi_std >= 0.0) || !(q_std >= 0.0) || !(r_std >= 0.0) || !(x_var0 >= 0.0))
    throw std::invalid_argument("BilinearParams: spreads must be >= 0");
  for (double v : phi)
    if (!std::isfinite(v)) throw std::invalid_argument("BilinearParams: phi not finite");
  for (double v : b)
    if (!std::isfinite(v)) throw std::invalid_argument("BilinearParams: b not finite");
  if (!c.allFinite()) throw std::invalid_argument("BilinearParams: c not finite");
}

BilinearParams BilinearParams::make_default(int regression_no, std::uint64_t seed) {
  if (regression_no < 1)
    throw std::invalid_argument("BilinearParams: regression_no must be >= 1");
  BilinearParams p;
  p.regression_no = regression_no;
  p.phi.assign(regression_no, 0.2);
  Rng rng(mix_seed(seed, 0xB100C0EFull));
  p.b.resize(regression_no);
  for (double& v : p.b) v = rng.normal(0.1, 0.1);
  p.c.resize(regression_no, regression_no);
  for (int r = 0; r < regression_no; ++r)
    for (int z = 0; z < regression_no; ++z) p.c(r, z) = rng.normal(0.1, 0.1);
  p.validate();
  return p;
}

BilinearFilter::BilinearFilter(BilinearParams params) : params_(std::move(params)) {
  params_.validate();
  const int n = params_.state_dim();
  const int r = params_.regression_no;

  // Expected state before any data: constant 1, exploration at its mean,
  // no X history.
  s_ = Eigen::VectorXd::Zero(n);
  s_[0] = 1.0;
  for (int i = 1; i <= r; ++i) s_[i] = params_.xi_mean;

  p_ = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i <= r; ++i) p_(i, i) = params_.xi_std * params_.xi_std;
  for (int i = r + 1; i < n; ++i) p_(i, i) = params_.x_var0;
}

void BilinearFilter::load_x_window(std::span<const double> recent_x) {
  const int r = params_.regression_no;
  const int n = dim();
  const int take = std::min<int>(static_cast<int>(recent_x.size()), r);
  for (int t = 0; t < take; ++t)
    s_[n - 1 - t] = recent_x[recent_x.size() - 1 - static_cast<std::size_t>(t)];
  x_fill_ = take;
}

void BilinearFilter::observe_mean_only(double y_sec) {
  if (!std::isfinite(y_sec))
    throw std::invalid_argument("BilinearFilter: observation must be finite");
  ++mu_count_;
  mu_ += (y_sec - mu_) / static_cast<double>(mu_count_);
}

Eigen::MatrixXd BilinearFilter::transition_matrix() const {
  const int r = params_.regression_no;
  const int n = dim();
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(n, n);

  f(0, 0) = 1.0;
  for (int row = 1; row < r; ++row) f(row, row + 1) = 1.0;          // xi shift
  for (int row = r + 1; row < n - 1; ++row) f(row, row + 1) = 1.0;  // X shift

  // The drift entry carries the intercept form of the running mean: with
  // X(m) = drift - sum_i phi_i X(m-i) + ..., a fixed point at the mean needs
  // drift = mu (1 + sum_i phi_i). The plain mean would put the fixed point
  // at mu (1 - sum phi_i), which turns negative once sum phi_i > 1 and makes
  // the prediction collapse for deep regressions.
  double phi_sum = 0.0;
  for (int i = 0; i < r; ++i) phi_sum += params_.phi[i];
  f(n - 1, 0) = mu_ * (1.0 + phi_sum);
  for (int i = 1; i <= r; ++i) {
    // psi_i = b_i + sum_z c_iz X(m-z); X(m-z) sits in slot n-z. The
    // coefficient multiplies xi(m-i), which sits in slot r-i+1.
    double psi = params_.b[i - 1];
    for (int z = 1; z <= r; ++z) psi += params_.c(i - 1, z - 1) * s_[n - z];
    f(n - 1, r - i + 1) = psi;
  }
  for (int i = 1; i <= r; ++i) f(n - 1, n - i) = -params_.phi[i - 1];
  return f;
}

BilinearFilter::Prior BilinearFilter::predict(std::optional<double> xi_draw) const {
  const int r = params_.regression_no;
  const int n = dim();
  const double xi = xi_draw.value_or(params_.xi_mean);

  const Eigen::MatrixXd f = transition_matrix();

  Prior out;
  out.s = f * s_;
  out.s[r] += xi;      // new exploration input enters its window slot...
  out.s[n - 1] += xi;  // ...and the model's X recursion directly
  out.s[n - 1] += last_innovation_;

  out.p = f * p_ * f.transpose();
  out.p(n - 1, n - 1) += params_.q_std * params_.q_std;
  out.p = ((out.p + out.p.transpose()) * 0.5).eval();
  return out;
}

void BilinearFilter::update(const Prior& prior, double y_sec) {
  if (!std::isfinite(y_sec))
    throw std::invalid_argument("BilinearFilter: observation must be finite");
  const int n = dim();
  if (prior.s.size() != n || prior.p.rows() != n || prior.p.cols() != n)
    throw std::invalid_argument("BilinearFilter: prior has wrong dimension");

  const double innovation = y_sec - prior.s[n - 1];
  const double innovation_var = prior.p(n - 1, n - 1) + params_.r_std * params_.r_std;

  if (innovation_var <= 0.0) {
    s_ = prior.s;
    p_ = prior.p;
    degenerate_ = true;
    last_innovation_ = 0.0;
  } else {
    degenerate_ = false;
    const Eigen::VectorXd gain = prior.p.col(n - 1) / innovation_var;
    s_ = prior.s + gain * innovation;
    Eigen::MatrixXd ikh = Eigen::MatrixXd::Identity(n, n);
    ikh.col(n - 1) -= gain;
    p_ = ikh * prior.p;
    p_ = ((p_ + p_.transpose()) * 0.5).eval();
    last_innovation_ = innovation;
  }

  s_[0] = 1.0;
  if (s_[n - 1] < kMinTravelTimeSec) s_[n - 1] = kMinTravelTimeSec;

  ++m_;
  ++mu_count_;
  mu_ += (s_[n - 1] - mu_) / static_cast<double>(mu_count_);
  x_fill_ = std::min(x_fill_ + 1, params_.regression_no);
}

double BilinearFilter::estimate_edge(std::optional<double> y_obs_sec, double fallback_cost,
                                     std::optional<double> xi_draw) {
  if (x_fill_ < params_.regression_no) {
    const double v = has_observations() ? mu_ : fallback_cost;
    return std::max(v, kMinTravelTimeSec);
  }
  const Prior prior = predict(xi_draw);
  if (!y_obs_sec) return std::max(prior.s[dim() - 1], kMinTravelTimeSec);
  update(prior, *y_obs_sec);
  return x_slot();
}

void BilinearFilter::write_snapshot(std::ostream& out) const {
  out << m_ << ',' << format_double(mu_) << ',' << format_double(x_slot()) << ','
      << format_double(p_.trace()) << '\n';
}

}  // namespace routecast
