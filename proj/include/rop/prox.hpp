#pragma once

#include "rop/core.hpp"

#include <functional>

namespace rop {

/// Radius of an l1 ball on vectors or a spectral-norm ball on matrices.
struct BallSpec {
  enum class Kind { L1, L2, Spectral };
  Kind kind = Kind::L1;
  double radius = 0.0;

  static BallSpec l1(double radius);
  static BallSpec l2(double radius);
  static BallSpec spectral(double radius);
};

/// Singular value soft-thresholding: argmin_Z tau ||Z||_* + 1/2 ||Z - M||_F^2.
Matrix svt(const Matrix& m, double tau);

/// Euclidean projection onto {u : ||u||_1 <= radius}, sort-then-threshold.
Vector project_l1_ball(const Vector& v, double radius);
/// Euclidean projection onto {u : ||u||_2 <= radius}.
Vector project_l2_ball(const Vector& v, double radius);
Vector project(const BallSpec& ball, const Vector& v);

/// Frobenius-nearest matrix with spectral norm <= radius (singular value clipping).
Matrix project_spectral_ball(const Matrix& m, double radius);

struct NormEstimate {
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

using ForwardFn = std::function<Vector(const Matrix&)>;
using AdjointFn = std::function<Matrix(const Vector&)>;

/// Largest singular value of a linear map R^{rows x cols} -> R^n by power
/// iteration on adjoint(apply(.)). Stops when the relative change of the
/// estimate drops below tol; otherwise returns the last estimate with
/// converged = false.
NormEstimate operator_norm(const ForwardFn& apply, const AdjointFn& adjoint, Index rows,
                           Index cols, double tol, int max_iters, Rng& rng);

}  // namespace rop
