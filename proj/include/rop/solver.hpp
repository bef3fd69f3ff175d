#pragma once

#include "rop/measure.hpp"

#include <optional>
#include <string>
#include <vector>

namespace rop {

/// Feasible set of the program min ||M||_* subject to the constraints below.
///
/// The residual constraint reads ||y - X(M)||_q / n <= lambda (q = 1 by default,
/// q = 2 as an alternative reading). The spectral constraint reads
/// ||A^*(y' - A(M))|| <= eta, where A is X itself, or the pairwise-differenced
/// map with its differenced observations for symmetric SROP problems.
struct ConstraintSpec {
  enum class Kind { Equality, L1Only, SpectralOnly, Intersection };
  enum class ResidualNorm { L1, L2 };

  Kind kind = Kind::Equality;
  double lambda = 0.0;
  double eta = 0.0;
  ResidualNorm residual_norm = ResidualNorm::L1;

  static ConstraintSpec equality();
  static ConstraintSpec l1_only(double lambda);
  static ConstraintSpec spectral_only(double eta);
  static ConstraintSpec intersection(double lambda, double eta);

  bool has_residual_block() const { return kind != Kind::SpectralOnly; }
  bool has_spectral_block() const {
    return kind == Kind::SpectralOnly || kind == Kind::Intersection;
  }
  void validate() const;
};

std::string to_string(ConstraintSpec::Kind kind);

struct SolverConfig {
  int max_iters = 20000;
  double primal_tol = 1e-6;
  /// Absolute feasibility tolerance; <= 0 selects 1e-6 (1 + ||y||_2).
  double feas_tol = 0.0;
  /// Multiplier on the initial penalty parameter.
  double step_ratio = 1.0;
  double over_relaxation = 1.6;
  /// Optional starting point (empty means M = 0).
  Matrix warm_start;

  void validate() const;
};

/// Per-constraint violation of the returned matrix, in units of y:
///   residual: max(0, ||y - X(M)||_q / n - lambda), or ||y - X(M)||_2 for Equality;
///   spectral: max(0, ||A^*(y' - A(M))|| - eta) / ||A||.
struct FeasibilityGaps {
  double residual = 0.0;
  double spectral = 0.0;

  double max() const { return residual > spectral ? residual : spectral; }
};

struct RecoveryEstimate {
  Matrix matrix;
  int iterations = 0;
  FeasibilityGaps gaps;
  double feas_tol = 0.0;
  double nuclear_norm = 0.0;
  bool converged = false;
  /// Combined primal + dual residual, one entry per convergence check. The dual
  /// part is measured at the initial penalty parameter.
  std::vector<double> residual_history;
};

/// Constrained nuclear-norm minimization by over-relaxed ADMM:
/// singular value thresholding for the nuclear norm, ball projections for
/// each constraint block, exact normal-equation solves for the coupling.
/// An equality program whose map has full column rank is solved directly.
RecoveryEstimate solve(const Ensemble& ens, const Vector& y, const ConstraintSpec& constraint,
                       const SolverConfig& cfg, bool symmetric = false,
                       const std::optional<Differenced>& aux = std::nullopt);

RecoveryEstimate solve_l1_only(const Ensemble& ens, const Vector& y, double lambda,
                               const SolverConfig& cfg);
RecoveryEstimate solve_ds_only(const Ensemble& ens, const Vector& y, double eta,
                               const SolverConfig& cfg);

/// Violations of `m` for the program, as reported in RecoveryEstimate::gaps.
FeasibilityGaps feasibility_gaps(const Ensemble& ens, const Vector& y,
                                 const ConstraintSpec& constraint, const Matrix& m,
                                 const std::optional<Differenced>& aux = std::nullopt);

}  // namespace rop
