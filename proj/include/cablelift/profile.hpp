#pragma once

#include <utility>
#include <vector>

namespace cablelift {

/// Piecewise-linear function of time, held constant outside its table.
class PiecewiseLinear {
 public:
  PiecewiseLinear() = default;
  explicit PiecewiseLinear(double constant) : knots_{{0.0, constant}} {}
  /// Knots must have strictly increasing times.
  explicit PiecewiseLinear(std::vector<std::pair<double, double>> knots);

  double operator()(double t) const;
  bool empty() const { return knots_.empty(); }
  double min_value() const;
  const std::vector<std::pair<double, double>>& knots() const { return knots_; }

 private:
  std::vector<std::pair<double, double>> knots_;
};

}  // namespace cablelift
