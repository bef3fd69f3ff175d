#include "rop/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rop {

namespace {

void require_trials(int trials) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
};

Matrix aligned_rank_one(const Ensemble& ens, Index i) {
  switch (ens.kind()) {
    case EnsembleKind::Rop: return ens.betas().row(i).transpose() * ens.gammas().row(i);
    case EnsembleKind::Srop: return ens.betas().row(i).transpose() * ens.betas().row(i);
    case EnsembleKind::GaussianEnsemble: {
      const SvdResult d = svd(ens.measurement(i));
      return d.left.col(0) * d.right.col(0).transpose();
    }
  }
  return {};
}

}  // namespace

double rub_statistic(const Ensemble& ens, const Matrix& a) {
  const double f = a.norm();
  if (f == 0.0) throw std::invalid_argument("rub_statistic: zero matrix");
  return ens.forward(a).lpNorm<1>() / (static_cast<double>(ens.size()) * f);
}

double rip_statistic(const Ensemble& ens, const Matrix& a) {
  const double f = a.norm();
  if (f == 0.0) throw std::invalid_argument("rip_statistic: zero matrix");
  return ens.forward(a).norm() / (std::sqrt(static_cast<double>(ens.size())) * f);
}

Matrix haar_equal_spectrum(Index p1, Index p2, Index r, Rng& rng) {
  if (r < 1 || r > std::min(p1, p2)) throw std::invalid_argument("rank out of range");
  const Matrix u = haar_orthonormal(p1, r, rng);
  const Matrix v = haar_orthonormal(p2, r, rng);
  return u * v.transpose() / std::sqrt(static_cast<double>(r));
}

RatioEstimate rub_ratio(const Ensemble& ens, Index r, int trials, Rng& rng) {
  require_trials(trials);
  if (r < 1 || r > std::min(ens.rows(), ens.cols())) {
    throw std::invalid_argument("rub_ratio: rank out of range");
  }
  Range range;
  for (int t = 0; t < trials; ++t) {
    range.add(rub_statistic(ens, haar_equal_spectrum(ens.rows(), ens.cols(), r, rng)));
  }
  for (int t = 0; t < trials; ++t) {
    Matrix a = random_low_rank(ens.rows(), ens.cols(), r, LowRankMode::FactorProduct, rng);
    range.add(rub_statistic(ens, a / a.norm()));
  }
  return {range.lo, range.hi, trials, r};
}

RatioEstimate rip_ratio(const Ensemble& ens, int trials, Rng& rng, RipSampler sampler) {
  require_trials(trials);
  Range range;
  if (sampler != RipSampler::Aligned) {
    for (int t = 0; t < trials; ++t) {
      const Vector u = rng.normal_vector(ens.rows());
      const Vector v = rng.normal_vector(ens.cols());
      range.add(rip_statistic(ens, u * v.transpose()));
    }
  }
  if (sampler != RipSampler::Random) {
    for (int t = 0; t < trials; ++t) {
      const Index i = static_cast<Index>(rng.below(static_cast<std::uint64_t>(ens.size())));
      range.add(rip_statistic(ens, aligned_rank_one(ens, i)));
    }
  }
  return {range.lo, range.hi, trials, 1};
}

double relative_error(const Matrix& est, const Matrix& truth) {
  if (est.rows() != truth.rows() || est.cols() != truth.cols()) {
    throw std::invalid_argument("relative_error: dimension mismatch");
  }
  const double t = truth.norm();
  const double d = (est - truth).norm();
  return t > 0.0 ? d / t : d;
}

bool success(const Matrix& est, const Matrix& truth, double threshold) {
  return relative_error(est, truth) <= threshold;
}

Index dof(Index p1, Index p2, Index r) {
  if (p1 < 0 || p2 < 0 || r < 0 || r > std::min(p1, p2)) {
    throw std::invalid_argument("dof: rank out of range");
  }
  return r * (p1 + p2 - r);
}

}  // namespace rop
