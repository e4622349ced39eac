#include "cablelift/profile.hpp"

#include <algorithm>
#include <limits>

#include "cablelift/errors.hpp"

namespace cablelift {

PiecewiseLinear::PiecewiseLinear(std::vector<std::pair<double, double>> knots)
    : knots_(std::move(knots)) {
  if (knots_.empty()) throw ConfigError("profile: at least one knot required");
  for (std::size_t i = 1; i < knots_.size(); ++i) {
    if (!(knots_[i].first > knots_[i - 1].first)) {
      throw ConfigError("profile: knot times must be strictly increasing");
    }
  }
}

double PiecewiseLinear::operator()(double t) const {
  if (knots_.empty()) throw ConfigError("profile: evaluated without knots");
  if (t <= knots_.front().first) return knots_.front().second;
  if (t >= knots_.back().first) return knots_.back().second;
  auto hi = std::upper_bound(knots_.begin(), knots_.end(), t,
                             [](double v, const auto& k) { return v < k.first; });
  auto lo = hi - 1;
  const double s = (t - lo->first) / (hi->first - lo->first);
  return lo->second + s * (hi->second - lo->second);
}

double PiecewiseLinear::min_value() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& k : knots_) m = std::min(m, k.second);
  return m;
}

}  // namespace cablelift
