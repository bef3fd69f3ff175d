#pragma once

#include "rop/solver.hpp"

#include <string>
#include <string_view>

namespace rop {

struct NoiseModel {
  enum class Kind { Gaussian, SubGaussian, UniformScaled };

  Kind kind = Kind::Gaussian;
  /// sigma for Gaussian and UniformScaled (z = sigma U[-1, 1]), tau for SubGaussian.
  double scale = 0.0;

  static NoiseModel gaussian(double sigma);
  /// Sampled as tau N(0, 1), the canonical law with sub-Gaussian parameter tau.
  static NoiseModel subgaussian(double tau);
  static NoiseModel uniform_scaled(double sigma);

  void validate() const;
  Vector sample(Index n, Rng& rng) const;
};

std::string to_string(NoiseModel::Kind kind);
NoiseModel::Kind parse_noise_kind(std::string_view name);

// Tuning radii. Each returns the spectral-constraint radius eta.
double rop_eta(Index n, Index p1, Index p2, double sigma);
double srop_eta(Index n, Index p, double sigma);
double subgaussian_eta(Index n, Index p1, Index p2, double tau, double alpha);
/// Shared radius of the ROP comparison study (intersection, l1-only, DS-only).
double comparison_eta(Index n, Index p1, Index p2, double sigma);
/// Spectral radius of the SROP comparison study; its l1 radius is sigma / 2.
double srop_comparison_eta(Index n, Index p, double sigma);

/// Gaussian-noise ROP estimator. sigma = 0 solves the equality program.
RecoveryEstimate rop_estimate(const Ensemble& ens, const Vector& y, double sigma,
                              const SolverConfig& cfg);

/// SROP estimator on the symmetric program with the pairwise-differenced
/// spectral constraint. Rademacher designs are rejected unless the caller only
/// wants trace and off-diagonal entries (`trace_offdiag_intent`).
RecoveryEstimate srop_estimate(const Ensemble& ens, const Vector& y, double sigma,
                               const SolverConfig& cfg, bool trace_offdiag_intent = false);

/// sup_k (E X^{2k} / (2k-1)!!)^{1/(2k)}, over k = 1..50 where no closed form is used.
double alpha_p(Distribution dist);

/// Sub-Gaussian estimator: lambda = 6 tau and the sub-Gaussian eta. SROP
/// ensembles are solved symmetrically with the differenced spectral map.
RecoveryEstimate subgaussian_estimate(const Ensemble& ens, const Vector& y, double tau,
                                      Distribution dist, const SolverConfig& cfg,
                                      bool trace_offdiag_intent = false);

// Spiked covariance from one-dimensional projections xi_i = <beta_i, X_i>.

struct CovObservation {
  Vector xis;    // n
  Matrix betas;  // n x p, row i is beta_i

  void validate() const;
};

struct CovConstants {
  double c1 = 1.5;
  double c2 = 1.1;
  double c3 = 1.1;

  void validate() const;
};

struct CovOptions {
  CovConstants constants;
  /// Reading of the first constraint: ||y - X(M)||_1 <= eta1 (default) or ||.||_2 <= eta1.
  ConstraintSpec::ResidualNorm reading = ConstraintSpec::ResidualNorm::L1;
  /// Clip negative eigenvalues of the estimate after solving.
  bool psd_project = false;
};

struct CovTuning {
  double eta1 = 0.0;
  double eta2 = 0.0;
};

/// y_i = xi_i^2 - beta_i^T beta_i.
Vector cov_responses(const CovObservation& obs);
CovTuning cov_tuning(const CovObservation& obs, const CovConstants& constants);

RecoveryEstimate cov_estimate(const CovObservation& obs, const CovOptions& opts,
                              const SolverConfig& cfg);

/// Draws X_i ~ N(0, I + sigma0) and beta_i ~ N(0, I), returns the projections.
CovObservation sample_cov_observation(const Matrix& sigma0, Index n, Rng& rng);

/// Nearest positive semidefinite matrix to the symmetric part of m.
Matrix project_psd(const Matrix& m);

}  // namespace rop
