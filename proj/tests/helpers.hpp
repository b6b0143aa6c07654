#pragma once

#include <cmath>

#include "qembed/lattice.hpp"
#include "qembed/models.hpp"

namespace qt {

using namespace qe;

inline Vec v1(double a) { return Vec::Constant(1, a); }
inline Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}
inline Mat rot(double t) {
  Mat R(2, 2);
  R << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
  return R;
}
inline std::shared_ptr<QuotientSpace> circle(double c = 1.0) { return make_flat_torus(Mat::Constant(1, 1, c)); }
inline std::shared_ptr<QuotientSpace> torus(double a = 1.0, double b = 1.0) {
  Mat B = Mat::Zero(2, 2);
  B(0, 0) = a;
  B(1, 1) = b;
  return make_flat_torus(B);
}

// brute force over every element moving q by at most R
inline double brute_distance(const QuotientSpace& sp, const Vec& p, const Vec& q, double R) {
  double best = kInf;
  for (const auto& g : sp.enumerate_ball(q, R).elements) best = std::min(best, sp.ambient().distance(p, g.act(q)));
  return best;
}

}  // namespace qt
