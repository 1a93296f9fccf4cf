#include "routecast/scalar_kf.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "routecast/errors.hpp"
#include "routecast/text_io.hpp"

namespace routecast {

ScalarFilter::ScalarFilter(double x0_mean_sec, double p0, double process_var,
                           double observation_var)
    : x_(x0_mean_sec), p_(p0), q_(process_var), r_(observation_var) {
  if (!std::isfinite(x0_mean_sec))
    throw std::invalid_argument("ScalarFilter: x0 must be finite");
  if (!(p0 >= 0.0)) throw std::invalid_argument("ScalarFilter: p0 must be >= 0");
  if (!(process_var >= 0.0))
    throw std::invalid_argument("ScalarFilter: process variance must be >= 0");
  if (!(observation_var >= 0.0))
    throw std::invalid_argument("ScalarFilter: observation variance must be >= 0");
}

ScalarFilter::Prior ScalarFilter::predict() const { return {x_, p_ + q_}; }

void ScalarFilter::update(double y_sec) {
  if (!std::isfinite(y_sec))
    throw std::invalid_argument("ScalarFilter: observation must be finite");

  const Prior prior = predict();
  const double innovation_var = prior.p + r_;
  if (innovation_var <= 0.0) {
    // Exact filter with no uncertainty anywhere: nothing to correct.
    x_ = prior.x;
    p_ = prior.p;
    degenerate_ = true;
    ++k_;
    return;
  }
  degenerate_ = false;

  const double gain = prior.p / innovation_var;
  x_ = prior.x + gain * (y_sec - prior.x);
  p_ = prior.p - prior.p * prior.p / innovation_var;
  if (p_ < 0.0) p_ = 0.0;  // round-off guard; algebraically p' >= 0
  if (x_ < kMinTravelTimeSec) x_ = kMinTravelTimeSec;
  ++k_;
}

ScalarFilterBank::ScalarFilterBank(const TopologyMap& map, double p0, double process_var,
                                   double observation_var, double nominal_speed_mps) {
  filters_.reserve(map.edge_count());
  for (std::size_t e = 0; e < map.edge_count(); ++e)
    filters_.emplace_back(euclidean_cost(map, e, nominal_speed_mps), p0, process_var,
                          observation_var);
}

ScalarFilter& ScalarFilterBank::filter(std::size_t edge) {
  if (edge >= filters_.size()) throw std::out_of_range("edge index out of range");
  return filters_[edge];
}

const ScalarFilter& ScalarFilterBank::filter(std::size_t edge) const {
  if (edge >= filters_.size()) throw std::out_of_range("edge index out of range");
  return filters_[edge];
}

void ScalarFilterBank::save_snapshot(std::ostream& out) const {
  out << "edge,k,x_hat,p\n";
  for (std::size_t e = 0; e < filters_.size(); ++e)
    out << e << ',' << filters_[e].count() << ',' << format_double(filters_[e].estimate())
        << ',' << format_double(filters_[e].variance()) << '\n';
}

void ScalarFilterBank::save_snapshot(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write snapshot file '" + path.string() + "'");
  save_snapshot(out);
}

}  // namespace routecast
