#pragma once

#include <random>

#include "cablelift/so3.hpp"

namespace testing_util {

using cablelift::Vec3;

inline std::mt19937_64& rng() {
  static std::mt19937_64 gen(20240917);
  return gen;
}

inline double uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng());
}

inline Vec3 random_vec(double scale = 1.0) {
  return Vec3(uniform(-scale, scale), uniform(-scale, scale), uniform(-scale, scale));
}

inline Vec3 random_unit() {
  Vec3 v;
  do v = random_vec(); while (v.norm() < 1e-3);
  return v.normalized();
}

inline cablelift::UnitQuaternion random_quat() {
  return cablelift::quat_exp(random_unit() * uniform(0.0, 3.0));
}

}  // namespace testing_util
