#include "rop/prox.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

namespace rop {

namespace {

void require_radius(double radius, const char* op) {
  if (!(radius >= 0.0) || !std::isfinite(radius)) {
    throw std::invalid_argument(std::string(op) + ": radius must be finite and >= 0");
  }
}

}  // namespace

BallSpec BallSpec::l1(double radius) {
  require_radius(radius, "BallSpec::l1");
  return {Kind::L1, radius};
}

BallSpec BallSpec::l2(double radius) {
  require_radius(radius, "BallSpec::l2");
  return {Kind::L2, radius};
}

BallSpec BallSpec::spectral(double radius) {
  require_radius(radius, "BallSpec::spectral");
  return {Kind::Spectral, radius};
}

Matrix svt(const Matrix& m, double tau) {
  if (!(tau >= 0.0)) throw std::invalid_argument("svt: tau must be >= 0");
  if (tau == 0.0) return m;
  const SvdResult d = svd(m);
  Index keep = 0;
  while (keep < d.values.size() && d.values(keep) > tau) ++keep;
  if (keep == 0) return Matrix::Zero(m.rows(), m.cols());
  const Vector shrunk = d.values.head(keep).array() - tau;
  return d.left.leftCols(keep) * shrunk.asDiagonal() * d.right.leftCols(keep).transpose();
}

Vector project_l1_ball(const Vector& v, double radius) {
  require_radius(radius, "project_l1_ball");
  if (v.lpNorm<1>() <= radius) return v;
  if (radius == 0.0) return Vector::Zero(v.size());
  // Threshold theta solves sum_i max(|v_i| - theta, 0) = radius.
  std::vector<double> mag(v.size());
  for (Index i = 0; i < v.size(); ++i) mag[i] = std::abs(v(i));
  std::sort(mag.begin(), mag.end(), std::greater<>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (std::size_t k = 0; k < mag.size(); ++k) {
    cumsum += mag[k];
    const double candidate = (cumsum - radius) / static_cast<double>(k + 1);
    if (mag[k] > candidate) theta = candidate;
    else break;
  }
  Vector out(v.size());
  for (Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v(i)) - theta;
    out(i) = a > 0.0 ? std::copysign(a, v(i)) : 0.0;
  }
  return out;
}

Vector project_l2_ball(const Vector& v, double radius) {
  require_radius(radius, "project_l2_ball");
  const double nv = v.norm();
  if (nv <= radius) return v;
  return v * (radius / nv);
}

Vector project(const BallSpec& ball, const Vector& v) {
  switch (ball.kind) {
    case BallSpec::Kind::L1: return project_l1_ball(v, ball.radius);
    case BallSpec::Kind::L2: return project_l2_ball(v, ball.radius);
    case BallSpec::Kind::Spectral: break;
  }
  throw std::invalid_argument("project: spectral ball applies to matrices");
}

Matrix project_spectral_ball(const Matrix& m, double radius) {
  require_radius(radius, "project_spectral_ball");
  if (m.size() == 0) return m;
  const SvdResult d = svd(m);
  if (d.values(0) <= radius) return m;
  // M - U (s - radius)_+ V^T touches only the clipped directions.
  Index over = 0;
  while (over < d.values.size() && d.values(over) > radius) ++over;
  const Vector excess = d.values.head(over).array() - radius;
  return m - d.left.leftCols(over) * excess.asDiagonal() * d.right.leftCols(over).transpose();
}

NormEstimate operator_norm(const ForwardFn& apply, const AdjointFn& adjoint, Index rows,
                           Index cols, double tol, int max_iters, Rng& rng) {
  if (max_iters < 1) throw std::invalid_argument("operator_norm: max_iters must be >= 1");
  Matrix x = rng.normal_matrix(rows, cols);
  x /= x.norm();
  NormEstimate est;
  double previous = 0.0;
  for (int it = 1; it <= max_iters; ++it) {
    Matrix w = adjoint(apply(x));
    const double lambda = w.norm();  // ||A^*A x|| with ||x|| = 1
    est.iterations = it;
    if (lambda == 0.0) {
      est.value = 0.0;
      est.converged = true;
      return est;
    }
    est.value = std::sqrt(lambda);
    if (it > 1 && std::abs(lambda - previous) <= tol * lambda) {
      est.converged = true;
      return est;
    }
    previous = lambda;
    x = w / lambda;
  }
  return est;
}

}  // namespace rop
