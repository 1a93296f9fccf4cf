#include "routecast/dynamic_estimator.hpp"

#include <algorithm>
#include <stdexcept>

namespace routecast {

DynamicEstimator::DynamicEstimator(const TopologyMap& map, BilinearParams params,
                                   double nominal_speed_mps, XiMode xi_mode,
                                   std::uint64_t seed)
    : map_(&map),
      params_(std::move(params)),
      nominal_speed_(nominal_speed_mps),
      xi_mode_(xi_mode),
      xi_rng_(mix_seed(seed, 0x0E59ull)) {
  params_.validate();
  bank_.reserve(map.edge_count());
  for (std::size_t e = 0; e < map.edge_count(); ++e) bank_.emplace_back(params_);
  latest_.assign(map.edge_count(), std::nullopt);
}

std::vector<double> DynamicEstimator::make_window(
    std::span<const double> tentative_chain) const {
  const auto r = static_cast<std::size_t>(params_.regression_no);
  std::vector<double> window;
  window.reserve(r);

  const std::size_t from_chain = std::min(tentative_chain.size(), r);
  const std::size_t from_history = std::min(history_.size(), r - from_chain);

  // Oldest first: executed history, then the tentative chain.
  for (std::size_t i = history_.size() - from_history; i < history_.size(); ++i)
    window.push_back(history_[i]);
  for (std::size_t i = tentative_chain.size() - from_chain; i < tentative_chain.size(); ++i)
    window.push_back(tentative_chain[i]);
  return window;
}

std::optional<double> DynamicEstimator::next_xi() {
  if (xi_mode_ == XiMode::deterministic) return std::nullopt;
  return xi_rng_.normal(params_.xi_mean, params_.xi_std);
}

double DynamicEstimator::query_cost(std::size_t edge,
                                    std::span<const double> tentative_chain) {
  if (edge >= bank_.size()) throw std::out_of_range("edge index out of range");

  const double fallback = euclidean_cost(*map_, edge, nominal_speed_);
  const std::vector<double> window = make_window(tentative_chain);

  // No estimate may undercut the physical lower bound length/speed: the
  // world only ever slows an edge down (roughness >= 1, battery factor >= 1,
  // wear >= 0). Without the floor, model predictions below the bound make
  // unexplored edges look cheaper than physics allows and the planner pays a
  // permanent exploration tax.
  const double floor = std::max(fallback, kMinTravelTimeSec);

  const auto& persistent = bank_[edge];
  if (window.size() < static_cast<std::size_t>(params_.regression_no)) {
    return persistent.has_observations() ? std::max(persistent.running_mean(), floor)
                                         : floor;
  }

  BilinearFilter probe = persistent;
  probe.load_x_window(window);
  return std::max(probe.estimate_edge(latest_[edge], fallback, next_xi()), floor);
}

double DynamicEstimator::current_estimate(std::size_t edge) {
  return query_cost(edge, {});
}

void DynamicEstimator::record_traversal(std::size_t edge, double observed_sec) {
  if (edge >= bank_.size()) throw std::out_of_range("edge index out of range");

  BilinearFilter& f = bank_[edge];
  const auto r = static_cast<std::size_t>(params_.regression_no);
  if (history_.size() >= r) {
    f.load_x_window(std::span<const double>(history_).last(r));
    const BilinearFilter::Prior prior = f.predict(next_xi());
    f.update(prior, observed_sec);
  } else {
    f.observe_mean_only(observed_sec);
  }
  latest_[edge] = observed_sec;
  history_.push_back(observed_sec);
}

const BilinearFilter& DynamicEstimator::filter(std::size_t edge) const {
  if (edge >= bank_.size()) throw std::out_of_range("edge index out of range");
  return bank_[edge];
}

std::optional<double> DynamicEstimator::latest_observation(std::size_t edge) const {
  if (edge >= latest_.size()) throw std::out_of_range("edge index out of range");
  return latest_[edge];
}

}  // namespace routecast
