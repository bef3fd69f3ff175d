#pragma once

#include "rop/measure.hpp"

#include <limits>

namespace rop {

/// Sampled extremes of a normalized measurement statistic. A Monte Carlo
/// surrogate for the restricted constants, never a certificate.
struct RatioEstimate {
  double lower = 0.0;
  double upper = 0.0;
  int trials = 0;
  Index r = 0;

  double ratio() const { return lower > 0.0 ? upper / lower : std::numeric_limits<double>::infinity(); }
};

/// ||X(A)||_1 / (n ||A||_F); exactly homogeneous of degree 0 in A.
double rub_statistic(const Ensemble& ens, const Matrix& a);
/// ||X(A)||_2 / (sqrt(n) ||A||_F).
double rip_statistic(const Ensemble& ens, const Matrix& a);

/// Unit-Frobenius rank-r test matrix with Haar singular vectors and equal singular values.
Matrix haar_equal_spectrum(Index p1, Index p2, Index r, Rng& rng);

/// RUB surrogate over `trials` draws from each of two samplers (Haar equal
/// spectrum and factor product), keeping the wider of the two ranges.
RatioEstimate rub_ratio(const Ensemble& ens, Index r, int trials, Rng& rng);

enum class RipSampler { Mixed, Random, Aligned };

/// RIP-type surrogate on unit rank-one matrices: random u v^T, matrices aligned
/// with a measurement (beta_i gamma_i^T, or the top singular pair of X_i), or both.
RatioEstimate rip_ratio(const Ensemble& ens, int trials, Rng& rng,
                        RipSampler sampler = RipSampler::Mixed);

/// ||est - truth||_F / ||truth||_F <= threshold, or ||est||_F <= threshold when truth = 0.
bool success(const Matrix& est, const Matrix& truth, double threshold = 1e-4);
double relative_error(const Matrix& est, const Matrix& truth);

/// r (p1 + p2 - r).
Index dof(Index p1, Index p2, Index r);

}  // namespace rop
