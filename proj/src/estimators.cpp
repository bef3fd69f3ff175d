#include "rop/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rop {

namespace {

void require_scale(double v, const char* what) {
  if (!std::isfinite(v) || v < 0.0) {
    throw std::invalid_argument(std::string(what) + " must be finite and >= 0");
  }
}

double log_n(Index n) { return std::log(static_cast<double>(n)); }

void reject_degenerate(const Ensemble& ens, bool trace_offdiag_intent) {
  if (ens.kind() == EnsembleKind::Srop && ens.distribution() == Distribution::Rademacher &&
      !trace_offdiag_intent) {
    throw std::invalid_argument(
        "Rademacher SROP only identifies trace(A) and the off-diagonal entries; "
        "pass trace_offdiag_intent to proceed");
  }
}

RecoveryEstimate solve_symmetric(const Ensemble& ens, const Vector& y,
                                 const ConstraintSpec& constraint, const SolverConfig& cfg) {
  if (constraint.has_spectral_block()) {
    return solve(ens, y, constraint, cfg, true, pairwise_difference(ens, y));
  }
  return solve(ens, y, constraint, cfg, true);
}

// log E X^{2k} for the supported laws.
double log_even_moment(Distribution dist, int k) {
  switch (dist) {
    case Distribution::Gaussian: {
      double s = 0.0;  // log (2k-1)!!
      for (int j = 1; j <= k; ++j) s += std::log(2.0 * j - 1.0);
      return s;
    }
    case Distribution::Rademacher: return 0.0;
    case Distribution::UniformSym: return k * std::log(3.0) - std::log(2.0 * k + 1.0);
  }
  return 0.0;
}

}  // namespace

NoiseModel NoiseModel::gaussian(double sigma) {
  NoiseModel m{Kind::Gaussian, sigma};
  m.validate();
  return m;
}

NoiseModel NoiseModel::subgaussian(double tau) {
  NoiseModel m{Kind::SubGaussian, tau};
  m.validate();
  return m;
}

NoiseModel NoiseModel::uniform_scaled(double sigma) {
  NoiseModel m{Kind::UniformScaled, sigma};
  m.validate();
  return m;
}

void NoiseModel::validate() const { require_scale(scale, "noise scale"); }

Vector NoiseModel::sample(Index n, Rng& rng) const {
  validate();
  Vector z(n);
  for (Index i = 0; i < n; ++i) {
    z(i) = kind == Kind::UniformScaled ? scale * rng.uniform(-1.0, 1.0) : scale * rng.normal();
  }
  return z;
}

std::string to_string(NoiseModel::Kind kind) {
  switch (kind) {
    case NoiseModel::Kind::Gaussian: return "gaussian";
    case NoiseModel::Kind::SubGaussian: return "subgaussian";
    case NoiseModel::Kind::UniformScaled: return "uniform";
  }
  return "?";
}

NoiseModel::Kind parse_noise_kind(std::string_view name) {
  if (name == "gaussian") return NoiseModel::Kind::Gaussian;
  if (name == "subgaussian") return NoiseModel::Kind::SubGaussian;
  if (name == "uniform") return NoiseModel::Kind::UniformScaled;
  throw std::invalid_argument("unknown noise model '" + std::string(name) + "'");
}

double rop_eta(Index n, Index p1, Index p2, double sigma) {
  const double s = static_cast<double>(p1 + p2);
  return sigma * (12.0 * std::sqrt(log_n(n)) * s + 6.0 * std::sqrt(2.0 * n * s));
}

double srop_eta(Index n, Index p, double sigma) {
  const double pd = static_cast<double>(p);
  return 24.0 * sigma * (std::sqrt(pd * n) + 2.0 * pd * std::sqrt(2.0 * log_n(n)));
}

double subgaussian_eta(Index n, Index p1, Index p2, double tau, double alpha) {
  const double s = static_cast<double>(p1 + p2);
  return 6.0 * alpha * alpha * tau * (std::sqrt(6.0 * n * s) + 2.0 * std::sqrt(log_n(n)) * s);
}

double comparison_eta(Index n, Index p1, Index p2, double sigma) {
  const double s = static_cast<double>(p1 + p2);
  return sigma * (std::sqrt(log_n(n)) * s + std::sqrt(n * s));
}

double srop_comparison_eta(Index n, Index p, double sigma) {
  const double pd = static_cast<double>(p);
  return sigma * (std::sqrt(log_n(n)) * pd + std::sqrt(n * pd)) / 3.0;
}

RecoveryEstimate rop_estimate(const Ensemble& ens, const Vector& y, double sigma,
                              const SolverConfig& cfg) {
  if (ens.kind() != EnsembleKind::Rop) throw std::invalid_argument("rop_estimate: needs ROP");
  require_scale(sigma, "sigma");
  if (sigma == 0.0) return solve(ens, y, ConstraintSpec::equality(), cfg);
  const ConstraintSpec c =
      ConstraintSpec::intersection(sigma, rop_eta(ens.size(), ens.rows(), ens.cols(), sigma));
  return solve(ens, y, c, cfg);
}

RecoveryEstimate srop_estimate(const Ensemble& ens, const Vector& y, double sigma,
                               const SolverConfig& cfg, bool trace_offdiag_intent) {
  if (ens.kind() != EnsembleKind::Srop) throw std::invalid_argument("srop_estimate: needs SROP");
  require_scale(sigma, "sigma");
  reject_degenerate(ens, trace_offdiag_intent);
  if (sigma == 0.0) return solve_symmetric(ens, y, ConstraintSpec::equality(), cfg);
  return solve_symmetric(
      ens, y, ConstraintSpec::intersection(sigma, srop_eta(ens.size(), ens.rows(), sigma)), cfg);
}

double alpha_p(Distribution dist) {
  double best = 0.0;
  for (int k = 1; k <= 50; ++k) {
    const double ratio = log_even_moment(dist, k) - log_even_moment(Distribution::Gaussian, k);
    best = std::max(best, std::exp(ratio / (2.0 * k)));
  }
  return best;
}

RecoveryEstimate subgaussian_estimate(const Ensemble& ens, const Vector& y, double tau,
                                      Distribution dist, const SolverConfig& cfg,
                                      bool trace_offdiag_intent) {
  require_scale(tau, "tau");
  if (ens.kind() == EnsembleKind::GaussianEnsemble) {
    throw std::invalid_argument("subgaussian_estimate: needs ROP or SROP");
  }
  reject_degenerate(ens, trace_offdiag_intent);
  const bool sym = ens.kind() == EnsembleKind::Srop;
  if (tau == 0.0) {
    return sym ? solve_symmetric(ens, y, ConstraintSpec::equality(), cfg)
               : solve(ens, y, ConstraintSpec::equality(), cfg);
  }
  const ConstraintSpec c = ConstraintSpec::intersection(
      6.0 * tau, subgaussian_eta(ens.size(), ens.rows(), ens.cols(), tau, alpha_p(dist)));
  return sym ? solve_symmetric(ens, y, c, cfg) : solve(ens, y, c, cfg);
}

void CovObservation::validate() const {
  if (xis.size() != betas.rows()) throw std::invalid_argument("cov: xis and betas disagree on n");
  if (xis.size() < 2) throw std::invalid_argument("cov: need at least two observations");
  if (betas.cols() < 1) throw std::invalid_argument("cov: p must be >= 1");
  require_finite(xis, "cov: xis");
  require_finite(betas, "cov: betas");
}

void CovConstants::validate() const {
  if (!(c1 > std::sqrt(2.0))) throw std::invalid_argument("cov: c1 must exceed sqrt(2)");
  if (!(c2 > 1.0)) throw std::invalid_argument("cov: c2 must exceed 1");
  if (!(c3 > 1.0)) throw std::invalid_argument("cov: c3 must exceed 1");
}

Vector cov_responses(const CovObservation& obs) {
  obs.validate();
  return obs.xis.array().square() - obs.betas.rowwise().squaredNorm().array();
}

CovTuning cov_tuning(const CovObservation& obs, const CovConstants& constants) {
  obs.validate();
  constants.validate();
  const Index n = obs.xis.size();
  const double p = static_cast<double>(obs.betas.cols());
  const auto sq = obs.xis.array().square();
  CovTuning t;
  t.eta1 = constants.c1 * sq.sum();
  t.eta2 = 24.0 * constants.c2 * std::sqrt(p * sq.square().sum()) +
           48.0 * constants.c3 * p * log_n(n) * sq.maxCoeff();
  return t;
}

RecoveryEstimate cov_estimate(const CovObservation& obs, const CovOptions& opts,
                              const SolverConfig& cfg) {
  const CovTuning t = cov_tuning(obs, opts.constants);
  const Vector y = cov_responses(obs);
  const Ensemble ens = Ensemble::srop(obs.betas, Distribution::Gaussian);
  ConstraintSpec c = ConstraintSpec::intersection(t.eta1 / static_cast<double>(y.size()), t.eta2);
  c.residual_norm = opts.reading;
  RecoveryEstimate est = solve_symmetric(ens, y, c, cfg);
  if (opts.psd_project) {
    est.matrix = project_psd(est.matrix);
    est.nuclear_norm = nuclear_norm(est.matrix);
  }
  return est;
}

CovObservation sample_cov_observation(const Matrix& sigma0, Index n, Rng& rng) {
  if (sigma0.rows() != sigma0.cols()) throw std::invalid_argument("cov: spike must be square");
  if (n < 2) throw std::invalid_argument("cov: n must be >= 2");
  const Index p = sigma0.rows();
  Matrix cov = Matrix::Identity(p, p) + 0.5 * (sigma0 + sigma0.transpose());
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("cov: I + spike is not PD");
  const Matrix lower = llt.matrixL();
  CovObservation obs;
  const Matrix x = rng.normal_matrix(n, p) * lower.transpose();
  obs.betas = rng.normal_matrix(n, p);
  obs.xis = (obs.betas.array() * x.array()).rowwise().sum();
  return obs;
}

Matrix project_psd(const Matrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("project_psd: matrix must be square");
  const Matrix s = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(s);
  const Vector clipped = eig.eigenvalues().cwiseMax(0.0);
  Matrix out = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

}  // namespace rop
