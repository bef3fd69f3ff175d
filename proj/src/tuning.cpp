#include "rop/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace rop {

std::string to_string(CvMode mode) { return mode == CvMode::Rop ? "rop" : "srop"; }

CvMode parse_cv_mode(std::string_view name) {
  if (name == "rop") return CvMode::Rop;
  if (name == "srop") return CvMode::Srop;
  throw std::invalid_argument("unknown cv mode '" + std::string(name) + "'");
}

void CvPlan::validate() const {
  if (folds < 2) throw std::invalid_argument("cv: folds must be >= 2");
  if (splits < 1) throw std::invalid_argument("cv: splits must be >= 1");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0) || !std::isfinite(grid[i])) {
      throw std::invalid_argument("cv: grid values must be positive");
    }
    if (i > 0 && !(grid[i] > grid[i - 1])) {
      throw std::invalid_argument("cv: grid must be strictly ascending");
    }
  }
}

std::vector<double> default_grid(const Vector& y, int points) {
  if (points < 1) throw std::invalid_argument("default_grid: points must be >= 1");
  if (y.size() == 0) throw std::invalid_argument("default_grid: empty y");
  double base = y.lpNorm<1>() / static_cast<double>(y.size());
  if (!(base > 0.0)) base = 1.0;
  std::vector<double> g(points);
  for (int i = 0; i < points; ++i) {
    const double e = points == 1 ? 0.0 : -4.0 + 4.0 * i / (points - 1);
    g[i] = base * std::pow(10.0, e);
  }
  return g;
}

std::pair<double, double> cv_params(CvMode mode, Index n, Index p1, Index p2, double t) {
  const double ln = std::sqrt(std::log(static_cast<double>(n)));
  if (mode == CvMode::Rop) {
    const double s = static_cast<double>(p1 + p2);
    return {t, t * (ln * s + std::sqrt(n * s))};
  }
  const double p = static_cast<double>(p1);
  return {t, t * (ln * p + std::sqrt(n * p))};
}

std::vector<CvSplit> cv_partitions(Index n, int folds, int splits, std::uint64_t seed) {
  if (folds < 2 || splits < 1) throw std::invalid_argument("cv_partitions: bad plan");
  if (n < 2 * folds) throw std::invalid_argument("cv_partitions: need n >= 2K");
  const Rng root(seed);
  const Index held = n / folds;
  std::vector<CvSplit> out;
  for (int i = 0; i < splits; ++i) {
    Rng rng = root.split(static_cast<std::uint64_t>(i));
    std::vector<Index> perm(n);
    std::iota(perm.begin(), perm.end(), Index{0});
    // Fisher-Yates with the library's unbiased bounded draw.
    for (Index k = n - 1; k > 0; --k) {
      std::swap(perm[k], perm[rng.below(static_cast<std::uint64_t>(k + 1))]);
    }
    CvSplit s;
    s.test.assign(perm.begin(), perm.begin() + held);
    s.train.assign(perm.begin() + held, perm.end());
    std::sort(s.test.begin(), s.test.end());
    std::sort(s.train.begin(), s.train.end());
    out.push_back(std::move(s));
  }
  return out;
}

RecoveryEstimate fit_at(CvMode mode, const Ensemble& ens, const Vector& y, double t,
                        const SolverConfig& cfg) {
  const auto [lambda, eta] = cv_params(mode, ens.size(), ens.rows(), ens.cols(), t);
  const ConstraintSpec c = ConstraintSpec::intersection(lambda, eta);
  if (mode == CvMode::Srop) {
    if (ens.kind() != EnsembleKind::Srop) throw std::invalid_argument("cv: SROP mode needs SROP");
    return solve(ens, y, c, cfg, true, pairwise_difference(ens, y));
  }
  return solve(ens, y, c, cfg);
}

CvResult cv_select(const Ensemble& ens, const Vector& y, const CvPlan& plan,
                   const SolverConfig& cfg) {
  plan.validate();
  if (y.size() != ens.size()) throw std::invalid_argument("cv: y has wrong length");
  const std::vector<double> grid = plan.grid.empty() ? default_grid(y) : plan.grid;
  const auto parts = cv_partitions(ens.size(), plan.folds, plan.splits, plan.seed);

  CvResult res;
  res.flagged.assign(grid.size(), false);
  std::vector<double> risk(grid.size(), 0.0);
  for (const CvSplit& part : parts) {
    const Ensemble train = ens.subset(part.train);
    const Ensemble test = ens.subset(part.test);
    Vector ytrain(part.train.size()), ytest(part.test.size());
    for (std::size_t k = 0; k < part.train.size(); ++k) ytrain(k) = y(part.train[k]);
    for (std::size_t k = 0; k < part.test.size(); ++k) ytest(k) = y(part.test[k]);
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const RecoveryEstimate fit = fit_at(plan.mode, train, ytrain, grid[j], cfg);
      if (!fit.converged) res.flagged[j] = true;
      risk[j] += (ytest - test.forward(fit.matrix)).squaredNorm();
    }
  }

  int best = -1;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    res.risk_curve.emplace_back(grid[j], risk[j]);
    if (res.flagged[j]) continue;
    if (best < 0 || risk[j] < risk[best]) best = static_cast<int>(j);
  }
  if (best < 0) throw std::runtime_error("cv: every grid point had an unconverged fit");
  res.t_star = grid[best];
  std::tie(res.lambda, res.eta) = cv_params(plan.mode, ens.size(), ens.rows(), ens.cols(), res.t_star);
  res.final_estimate = fit_at(plan.mode, ens, y, res.t_star, cfg);
  return res;
}

}  // namespace rop
