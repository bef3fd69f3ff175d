#pragma once

#include "rop/solver.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rop {

enum class CvMode { Rop, Srop };

std::string to_string(CvMode mode);
CvMode parse_cv_mode(std::string_view name);

struct CvPlan {
  int folds = 5;   // K
  int splits = 1;  // I
  /// Candidate t values, strictly positive and ascending. Empty selects default_grid(y).
  std::vector<double> grid;
  CvMode mode = CvMode::Rop;
  std::uint64_t seed = 0;

  void validate() const;
};

/// 16 log-spaced points spanning [1e-4, 1] * ||y||_1 / n.
std::vector<double> default_grid(const Vector& y, int points = 16);

/// (lambda, eta) as functions of t. n is the number of measurements being fit.
std::pair<double, double> cv_params(CvMode mode, Index n, Index p1, Index p2, double t);

struct CvSplit {
  std::vector<Index> train;  // ascending
  std::vector<Index> test;   // ascending
};

/// One random hold-out of size floor or ceil of n / folds per split.
std::vector<CvSplit> cv_partitions(Index n, int folds, int splits, std::uint64_t seed);

struct CvResult {
  double t_star = 0.0;
  /// (t, summed held-out squared residual) for every grid point.
  std::vector<std::pair<double, double>> risk_curve;
  /// Grid points with an unconverged inner fit; never selected.
  std::vector<bool> flagged;
  double lambda = 0.0;
  double eta = 0.0;
  RecoveryEstimate final_estimate;
};

/// Fits on each training group for every t, scores held-out squared
/// residuals, picks the minimizer (ties toward smaller t) and refits on all data.
CvResult cv_select(const Ensemble& ens, const Vector& y, const CvPlan& plan,
                   const SolverConfig& cfg);

/// The estimate the CV fit uses at a given t, on whatever data it is handed.
RecoveryEstimate fit_at(CvMode mode, const Ensemble& ens, const Vector& y, double t,
                        const SolverConfig& cfg);

}  // namespace rop
