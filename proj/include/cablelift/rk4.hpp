#pragma once

#include "cablelift/errors.hpp"

namespace cablelift {

/// One classical Runge-Kutta step of x' = f(x). Inputs are held constant over
/// the step by capturing them in `f`. Vec must be an Eigen vector type.
template <typename Vec, typename Derivative>
Vec rk4_step(Derivative&& f, const Vec& x, double dt) {
  if (!(dt > 0.0)) throw DomainError("rk4_step: dt must be positive");
  const Vec k1 = f(x);
  const Vec k2 = f(Vec(x + 0.5 * dt * k1));
  const Vec k3 = f(Vec(x + 0.5 * dt * k2));
  const Vec k4 = f(Vec(x + dt * k3));
  Vec out = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!out.allFinite()) throw NonFiniteState("rk4_step: non-finite state after step");
  return out;
}

}  // namespace cablelift
