#pragma once

#include "rop/core.hpp"

#include <cmath>
#include <functional>
#include <limits>

namespace testing {

using rop::Index;
using rop::Matrix;
using rop::Vector;

inline double rel_diff(const Matrix& a, const Matrix& b) {
  const double scale = std::max(1.0, b.norm());
  return (a - b).norm() / scale;
}

// Nuclear norm of [[a, b], [c, d]] without an SVD: the singular values are
// (|u| +- |v|) / 2 with u = (a + d, b - c), v = (a - d, b + c).
inline double nuclear_2x2(const Matrix& m) {
  const double u = std::hypot(m(0, 0) + m(1, 1), m(0, 1) - m(1, 0));
  const double v = std::hypot(m(0, 0) - m(1, 1), m(0, 1) + m(1, 0));
  return std::max(u, v);
}

// l1-ball projection by bisection on the soft threshold.
inline Vector l1_projection_bisect(const Vector& v, double radius) {
  if (v.lpNorm<1>() <= radius) return v;
  double lo = 0.0, hi = v.cwiseAbs().maxCoeff();
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double mass = (v.cwiseAbs().array() - mid).max(0.0).sum();
    (mass > radius ? lo : hi) = mid;
  }
  const double theta = 0.5 * (lo + hi);
  return v.cwiseSign().cwiseProduct((v.cwiseAbs().array() - theta).max(0.0).matrix());
}

// Central-cut ellipsoid method for a convex function on R^d. Returns the best
// point seen.
struct EllipsoidResult {
  Vector x;
  double value = std::numeric_limits<double>::infinity();
};

inline EllipsoidResult ellipsoid_minimize(const std::function<double(const Vector&)>& f,
                                          const std::function<Vector(const Vector&)>& subgrad,
                                          Vector center, double radius, int iters) {
  const Index d = center.size();
  const double dd = static_cast<double>(d);
  Matrix shape = Matrix::Identity(d, d) * radius * radius;
  EllipsoidResult best{center, f(center)};
  for (int k = 0; k < iters; ++k) {
    const double fx = f(center);
    if (fx < best.value) best = {center, fx};
    const Vector g = subgrad(center);
    const double gpg = g.dot(shape * g);
    if (gpg <= 1e-300) break;
    const Vector step = shape * g / std::sqrt(gpg);
    center -= step / (dd + 1.0);
    shape = dd * dd / (dd * dd - 1.0) * (shape - 2.0 / (dd + 1.0) * step * step.transpose());
    shape = 0.5 * (shape + shape.transpose());
  }
  return best;
}

}  // namespace testing
