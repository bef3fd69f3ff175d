#include "rop/harness/experiments.hpp"

#include "rop/harness/config.hpp"
#include "rop/harness/pgm.hpp"
#include "rop/harness/pool.hpp"
#include "rop/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace rop::harness {

namespace {

using Clock = std::chrono::steady_clock;

// Stream reserved for per-trial truths shared across grid points.
constexpr std::uint64_t kTruthStream = 0x7275746855ULL;

double elapsed_ms(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

void require_common(int trials, const SolverConfig& solver) {
  require(trials >= 1, "trials must be >= 1");
  solver.validate();
}

template <class T>
void require_positive(const std::vector<T>& grid, const std::string& what) {
  require(!grid.empty(), what + " must be nonempty");
  for (const T& v : grid) require(v > 0, what + " values must be positive");
}

ExperimentRecord make_record(const std::string& experiment, int trial, const Rng& rng, Index p1,
                             Index p2, Index r, Index n) {
  ExperimentRecord rec;
  rec.experiment = experiment;
  rec.trial = trial;
  rec.seed = rng.seed();
  rec.rng = rng.algorithm();
  rec.p1 = p1;
  rec.p2 = p2;
  rec.r = r;
  rec.n = n;
  rec.ensemble = "rop";
  rec.distribution = "gaussian";
  rec.noise = "none";
  return rec;
}

void fill(ExperimentRecord& rec, const RecoveryEstimate& est, const Matrix& truth) {
  rec.squared_frobenius_loss = (est.matrix - truth).squaredNorm();
  rec.relative_error = relative_error(est.matrix, truth);
  rec.converged = est.converged;
  rec.iterations = est.iterations;
  // An unconverged solve never counts as a recovery.
  rec.success = est.converged && rec.relative_error <= kSuccessThreshold;
}

// Runs cell(point, trial) for every pair and flattens rows in (point, trial) order.
ExperimentResult run_grid(std::string name, std::size_t points, int trials, unsigned threads,
                          const std::function<std::vector<ExperimentRecord>(std::size_t, int)>& cell) {
  std::vector<std::vector<ExperimentRecord>> slots(points * static_cast<std::size_t>(trials));
  parallel_for(slots.size(), threads, [&](std::size_t k) {
    slots[k] = cell(k / static_cast<std::size_t>(trials), static_cast<int>(k % trials));
  });
  ExperimentResult res;
  res.name = std::move(name);
  for (auto& s : slots)
    for (auto& r : s) res.rows.push_back(std::move(r));
  return res;
}

Matrix symmetric_low_rank(Index p, Index r, Rng& rng) {
  const Matrix x = rng.normal_matrix(r, p);
  return x.transpose() * x;
}

}  // namespace

std::string to_string(Scale s) { return s == Scale::Desk ? "desk" : "paper"; }

Scale parse_scale(std::string_view name) {
  if (name == "desk") return Scale::Desk;
  if (name == "paper") return Scale::Paper;
  throw std::invalid_argument("unknown scale '" + std::string(name) + "'");
}

// ---- defaults and validation -------------------------------------------------

PhaseSpec PhaseSpec::defaults(Scale scale) {
  PhaseSpec s;
  if (scale == Scale::Paper) {
    s.p1 = s.p2 = 100;
    s.r = 5;
    s.c_grid = {3.0, 3.5, 4.0, 4.5, 5.0, 5.5, 6.0};
    s.trials = 50;
  }
  return s;
}

void PhaseSpec::validate() const {
  require(p1 >= 1 && p2 >= 1, "phase: dimensions must be >= 1");
  require(r >= 1 && r <= std::min(p1, p2), "phase: rank out of range");
  require_positive(c_grid, "phase: c_grid");
  require(!kinds.empty(), "phase: kinds must be nonempty");
  for (EnsembleKind k : kinds) {
    require(k != EnsembleKind::Srop || p1 == p2, "phase: SROP needs p1 = p2");
  }
  require_common(trials, solver);
}

RobustSpec RobustSpec::defaults(Scale scale) {
  RobustSpec s;
  if (scale == Scale::Paper) {
    s.p = 100;
    s.n = 2000;
  }
  return s;
}

void RobustSpec::validate() const {
  require(p >= 1 && n >= 1, "robust: p and n must be >= 1");
  require_positive(ranks, "robust: ranks");
  for (Index r : ranks) require(r <= p, "robust: rank exceeds p");
  require_common(trials, solver);
}

RateSpec RateSpec::defaults(Scale scale) {
  RateSpec s;
  if (scale == Scale::Paper) {
    s.p = 100;
    s.r = 5;
    s.n_grid = {4000, 8000};
  }
  return s;
}

void RateSpec::validate() const {
  require(p >= 1 && r >= 1 && r <= p, "rate: bad dimensions");
  require(std::isfinite(sigma) && sigma >= 0.0, "rate: sigma must be >= 0");
  require_positive(n_grid, "rate: n_grid");
  require_common(trials, solver);
}

CompareSpec CompareSpec::defaults(Scale scale, CompareMode mode) {
  CompareSpec s;
  s.mode = mode;
  if (mode == CompareMode::Srop) {
    s.p = 20;
    s.r = 2;
    s.n_grid = {100, 200, 400, 800};
  }
  if (scale == Scale::Paper) {
    if (mode == CompareMode::Rop) {
      s.p = 50;
      s.r = 4;
      s.n_grid = {850, 1000, 1200, 2000, 5000, 10000, 15000};
    } else {
      s.p = 40;
      s.r = 5;
      s.n_grid = {50, 100, 200, 300, 400, 500, 600, 700, 800};
    }
    s.trials = 20;
  }
  return s;
}

void CompareSpec::validate() const {
  require(p >= 1 && r >= 1 && r <= p, "compare: bad dimensions");
  require(std::isfinite(sigma) && sigma > 0.0, "compare: sigma must be > 0");
  require_positive(n_grid, "compare: n_grid");
  if (mode == CompareMode::Srop) {
    for (Index n : n_grid) require(n >= 2, "compare: SROP needs n >= 2");
  }
  require_common(trials, solver);
}

LowerSpec LowerSpec::defaults(Scale scale) {
  LowerSpec s;
  if (scale == Scale::Paper) {
    s.p = 100;
    s.r = 5;
    s.n_grid = {250, 500, 750, 975, 1250, 1500, 2000, 2500, 3000, 5000};
  }
  return s;
}

void LowerSpec::validate() const {
  require(p >= 1 && r >= 1 && r <= p, "lower: bad dimensions");
  require_positive(n_grid, "lower: n_grid");
  require_common(trials, solver);
}

CovSpec CovSpec::defaults(Scale scale) {
  CovSpec s;
  if (scale == Scale::Paper) {
    s.p = 50;
    s.r = 2;
    s.n_grid = {1000, 2000, 4000, 8000};
  }
  return s;
}

void CovSpec::validate() const {
  require(p >= 1 && r >= 0 && r <= p, "cov: bad dimensions");
  require(std::isfinite(spike) && spike >= 0.0, "cov: spike must be >= 0");
  require_positive(n_grid, "cov: n_grid");
  for (Index n : n_grid) require(n >= 2, "cov: n must be >= 2");
  options.constants.validate();
  require_common(trials, solver);
}

CvSpec CvSpec::defaults(Scale scale, CvMode mode) {
  CvSpec s;
  s.mode = mode;
  if (mode == CvMode::Srop) {
    s.p = 20;
    s.r = 2;
    s.n_grid = {400};
  }
  if (scale == Scale::Paper) {
    if (mode == CvMode::Rop) {
      s.n_grid = {750, 900, 1050, 1200, 1400};
    } else {
      s.p = 40;
      s.r = 5;
      s.n_grid = {200, 400, 600, 800};
    }
    s.trials = 20;
  }
  return s;
}

void CvSpec::validate() const {
  require(p >= 1 && r >= 1 && r <= p, "cv: bad dimensions");
  require(std::isfinite(sigma) && sigma > 0.0, "cv: sigma must be > 0");
  require_positive(n_grid, "cv: n_grid");
  require(folds >= 2 && splits >= 1 && grid_points >= 1, "cv: bad plan");
  for (Index n : n_grid) require(n >= 2 * folds, "cv: n must be >= 2 folds");
  require_common(trials, solver);
}

ImageTask ImageTask::defaults(Scale) { return ImageTask{}; }

void ImageTask::validate() const {
  require_positive(measurements, "image: measurements");
  require(!rank_budget || *rank_budget >= 0, "image: rank budget must be >= 0");
  require_common(trials, solver);
}

// ---- experiments ---------------------------------------------------------------

ExperimentResult run_phase_transition(const PhaseSpec& spec) {
  spec.validate();
  const Rng root(spec.seed);
  const std::size_t per_kind = spec.c_grid.size();
  auto res = run_grid("phase", spec.kinds.size() * per_kind, spec.trials, spec.threads,
                      [&](std::size_t point, int trial) {
    const EnsembleKind kind = spec.kinds[point / per_kind];
    const double c = spec.c_grid[point % per_kind];
    const Index n = std::max<Index>(1, std::llround(c * spec.r * std::max(spec.p1, spec.p2)));
    Rng rng = root.split(point).split(static_cast<std::uint64_t>(trial));
    const auto t0 = Clock::now();
    Matrix truth = kind == EnsembleKind::Srop
                       ? symmetric_low_rank(spec.p1, spec.r, rng)
                       : random_low_rank(spec.p1, spec.p2, spec.r, LowRankMode::FactorProduct, rng);
    const Ensemble ens = Ensemble::sample(kind, spec.p1, spec.p2, n, spec.dist, rng);
    const Vector y = ens.forward(truth);
    const RecoveryEstimate est = solve(ens, y, ConstraintSpec::equality(), spec.solver,
                                       kind == EnsembleKind::Srop);
    ExperimentRecord rec = make_record("phase", trial, root.split(point).split(trial), spec.p1,
                                       spec.p2, spec.r, n);
    rec.ensemble = to_string(kind);
    rec.distribution = to_string(spec.dist);
    rec.estimator = "equality";
    rec.x = c;
    fill(rec, est, truth);
    rec.wall_ms = elapsed_ms(t0);
    return std::vector<ExperimentRecord>{rec};
  });
  res.x_name = "C (n = C r max(p1, p2))";
  res.aux_name = "unused";
  res.config = to_json(spec);
  return res;
}

ExperimentResult run_robustness(const RobustSpec& spec) {
  spec.validate();
  const Rng root(spec.seed);
  auto res = run_grid("robust", spec.ranks.size(), spec.trials, spec.threads,
                      [&](std::size_t point, int trial) {
    const Index r = spec.ranks[point];
    const Rng stream = root.split(point).split(static_cast<std::uint64_t>(trial));
    Rng rng = stream;
    const auto t0 = Clock::now();
    const Matrix truth = random_low_rank(spec.p, spec.p, r, LowRankMode::DecayingSpectrum, rng);
    const Ensemble ens = Ensemble::sample(EnsembleKind::Rop, spec.p, spec.p, spec.n,
                                          Distribution::Gaussian, rng);
    const RecoveryEstimate est =
        solve(ens, ens.forward(truth), ConstraintSpec::equality(), spec.solver);
    ExperimentRecord rec = make_record("robust", trial, stream, spec.p, spec.p, r, spec.n);
    rec.estimator = "equality";
    rec.x = static_cast<double>(r);
    fill(rec, est, truth);
    rec.wall_ms = elapsed_ms(t0);
    return std::vector<ExperimentRecord>{rec};
  });
  res.x_name = "rank r of the decaying-spectrum truth";
  res.aux_name = "unused";
  res.config = to_json(spec);
  res.notes["envelope"] =
      "theoretical envelope ||A_-max(r0)||_*^2 / r0 with r0 the largest rank recovered in every trial";
  return res;
}

Index recoverable_rank(const ExperimentResult& robust) {
  std::map<Index, bool> all_ok;
  for (const auto& row : robust.rows) {
    auto [it, fresh] = all_ok.try_emplace(row.r, true);
    it->second = it->second && row.success;
  }
  Index r0 = 0;
  for (const auto& [r, ok] : all_ok) {
    if (!ok || r != r0 + 1) break;
    r0 = r;
  }
  return r0;
}

ExperimentResult run_rate_scaling(const RateSpec& spec) {
  spec.validate();
  const Rng root(spec.seed);
  auto res = run_grid("rate", spec.n_grid.size(), spec.trials, spec.threads,
                      [&](std::size_t point, int trial) {
    const Index n = spec.n_grid[point];
    Rng truth_rng = root.split(kTruthStream).split(static_cast<std::uint64_t>(trial));
    const Matrix truth =
        random_low_rank(spec.p, spec.p, spec.r, LowRankMode::FactorProduct, truth_rng);
    const Rng stream = root.split(point).split(static_cast<std::uint64_t>(trial));
    Rng rng = stream;
    const auto t0 = Clock::now();
    const Ensemble ens =
        Ensemble::sample(EnsembleKind::Rop, spec.p, spec.p, n, Distribution::Gaussian, rng);
    const Vector y = ens.forward(truth) + NoiseModel::gaussian(spec.sigma).sample(n, rng);
    const RecoveryEstimate est = rop_estimate(ens, y, spec.sigma, spec.solver);
    ExperimentRecord rec = make_record("rate", trial, stream, spec.p, spec.p, spec.r, n);
    rec.noise = "gaussian";
    rec.noise_scale = spec.sigma;
    rec.estimator = "rop";
    rec.x = static_cast<double>(n);
    fill(rec, est, truth);
    rec.wall_ms = elapsed_ms(t0);
    return std::vector<ExperimentRecord>{rec};
  });
  res.x_name = "n";
  res.aux_name = "unused";
  res.config = to_json(spec);
  return res;
}

ExperimentResult run_comparison(const CompareSpec& spec) {
  spec.validate();
  const Rng root(spec.seed);
  const bool srop = spec.mode == CompareMode::Srop;
  const std::string exp_name = srop ? "compare_srop" : "compare";
  auto res = run_grid(exp_name, spec.n_grid.size(), spec.trials,
                      spec.threads, [&](std::size_t point, int trial) {
    const Index n = spec.n_grid[point];
    const Rng stream = root.split(point).split(static_cast<std::uint64_t>(trial));
    Rng rng = stream;
    const Matrix truth = srop ? symmetric_low_rank(spec.p, spec.r, rng)
                              : random_low_rank(spec.p, spec.p, spec.r,
                                                LowRankMode::FactorProduct, rng);
    const Ensemble ens = Ensemble::sample(srop ? EnsembleKind::Srop : EnsembleKind::Rop, spec.p,
                                          spec.p, n, Distribution::Gaussian, rng);
    const NoiseModel noise =
        srop ? NoiseModel::uniform_scaled(spec.sigma) : NoiseModel::gaussian(spec.sigma);
    const Vector y = ens.forward(truth) + noise.sample(n, rng);

    std::vector<std::pair<std::string, ConstraintSpec>> programs;
    if (srop) {
      const double lambda = spec.sigma / 2.0;
      programs = {{"intersection", ConstraintSpec::intersection(
                                       lambda, srop_comparison_eta(n, spec.p, spec.sigma))},
                  {"l1", ConstraintSpec::l1_only(lambda)}};
    } else {
      const double eta = comparison_eta(n, spec.p, spec.p, spec.sigma);
      programs = {{"intersection", ConstraintSpec::intersection(spec.sigma, eta)},
                  {"l1", ConstraintSpec::l1_only(spec.sigma)},
                  {"ds", ConstraintSpec::spectral_only(eta)}};
    }
    std::optional<Differenced> aux;
    if (srop) aux = pairwise_difference(ens, y);
    std::vector<ExperimentRecord> rows;
    for (const auto& [name, constraint] : programs) {
      const auto t0 = Clock::now();
      const RecoveryEstimate est = srop ? solve(ens, y, constraint, spec.solver, true, aux)
                                        : solve(ens, y, constraint, spec.solver);
      ExperimentRecord rec =
          make_record(exp_name, trial, stream, spec.p, spec.p, spec.r, n);
      rec.ensemble = srop ? "srop" : "rop";
      rec.noise = to_string(noise.kind);
      rec.noise_scale = spec.sigma;
      rec.estimator = name;
      rec.x = static_cast<double>(n);
      fill(rec, est, truth);
      rec.wall_ms = elapsed_ms(t0);
      rows.push_back(std::move(rec));
    }
    return rows;
  });
  res.x_name = "n";
  res.aux_name = "unused";
  res.config = to_json(spec);
  res.config["mode"] = to_string(spec.mode);
  if (srop) {
    res.notes["n_range"] = {
        {"text", {50, 600}},
        {"caption", {50, 800}},
        {"default", "caption range 50 to 800"},
        {"discrepancy", "the prose gives 50 to 600 while the figure caption gives 50 to 800"}};
  }
  return res;
}

ExperimentResult run_lower_bound_probe(const LowerSpec& spec) {
  spec.validate();
  const Rng root(spec.seed);
  auto res = run_grid("lower", spec.n_grid.size(), spec.trials, spec.threads,
                      [&](std::size_t point, int trial) {
    const Index n = spec.n_grid[point];
    const Rng stream = root.split(point).split(static_cast<std::uint64_t>(trial));
    Rng rng = stream;
    const auto t0 = Clock::now();
    const Matrix truth =
        random_low_rank(spec.p, spec.p, spec.r, LowRankMode::FactorProduct, rng);
    const Ensemble ens =
        Ensemble::sample(EnsembleKind::Rop, spec.p, spec.p, n, Distribution::Gaussian, rng);
    const RecoveryEstimate est =
        solve(ens, ens.forward(truth), ConstraintSpec::equality(), spec.solver);
    ExperimentRecord rec = make_record("lower", trial, stream, spec.p, spec.p, spec.r, n);
    rec.estimator = "equality";
    rec.x = static_cast<double>(n);
    rec.aux = static_cast<double>(dof(spec.p, spec.p, spec.r));
    fill(rec, est, truth);
    rec.wall_ms = elapsed_ms(t0);
    return std::vector<ExperimentRecord>{rec};
  });
  res.x_name = "n";
  res.aux_name = "degrees of freedom r (p1 + p2 - r)";
  res.config = to_json(spec);
  res.notes["identifiability_line"] = spec.r * spec.p;
  res.notes["dof"] = dof(spec.p, spec.p, spec.r);
  return res;
}

ExperimentResult run_covariance(const CovSpec& spec) {
  spec.validate();
  const Rng root(spec.seed);
  auto res = run_grid("cov", spec.n_grid.size(), spec.trials, spec.threads,
                      [&](std::size_t point, int trial) {
    const Index n = spec.n_grid[point];
    const Rng stream = root.split(point).split(static_cast<std::uint64_t>(trial));
    Rng rng = stream;
    const auto t0 = Clock::now();
    Matrix spike = Matrix::Zero(spec.p, spec.p);
    if (spec.r > 0) {
      const Matrix u = haar_orthonormal(spec.p, spec.r, rng);
      spike = spec.spike * u * u.transpose();
    }
    const CovObservation obs = sample_cov_observation(spike, n, rng);
    const RecoveryEstimate est = cov_estimate(obs, spec.options, spec.solver);
    ExperimentRecord rec = make_record("cov", trial, stream, spec.p, spec.p, spec.r, n);
    rec.ensemble = "srop";
    rec.noise = "covariance";
    rec.noise_scale = spec.spike;
    rec.estimator = "cov";
    rec.x = static_cast<double>(n);
    // Singular values above 10% of the largest.
    const Vector s = singular_values(est.matrix);
    Index rank = 0;
    if (s.size() > 0 && s(0) > 0.0) rank = (s.array() > 0.1 * s(0)).count();
    rec.aux = static_cast<double>(rank);
    fill(rec, est, spike);
    rec.wall_ms = elapsed_ms(t0);
    return std::vector<ExperimentRecord>{rec};
  });
  res.x_name = "n";
  res.aux_name = "recovered rank (singular values above 10% of the largest)";
  res.config = to_json(spec);
  return res;
}

ExperimentResult run_cv(const CvSpec& spec) {
  spec.validate();
  const Rng root(spec.seed);
  const bool srop = spec.mode == CvMode::Srop;
  auto res = run_grid("cv", spec.n_grid.size(), spec.trials, spec.threads,
                      [&](std::size_t point, int trial) {
    const Index n = spec.n_grid[point];
    const Rng stream = root.split(point).split(static_cast<std::uint64_t>(trial));
    Rng rng = stream;
    const Matrix truth = srop ? symmetric_low_rank(spec.p, spec.r, rng)
                              : random_low_rank(spec.p, spec.p, spec.r,
                                                LowRankMode::FactorProduct, rng);
    const Ensemble ens = Ensemble::sample(srop ? EnsembleKind::Srop : EnsembleKind::Rop, spec.p,
                                          spec.p, n, Distribution::Gaussian, rng);
    const NoiseModel noise =
        srop ? NoiseModel::uniform_scaled(spec.sigma) : NoiseModel::gaussian(spec.sigma);
    const Vector y = ens.forward(truth) + noise.sample(n, rng);

    std::vector<ExperimentRecord> rows;
    auto record = [&](const std::string& name, const RecoveryEstimate& est, double t,
                      Clock::time_point t0) {
      ExperimentRecord rec = make_record("cv", trial, stream, spec.p, spec.p, spec.r, n);
      rec.ensemble = srop ? "srop" : "rop";
      rec.noise = to_string(noise.kind);
      rec.noise_scale = spec.sigma;
      rec.estimator = name;
      rec.x = static_cast<double>(n);
      rec.aux = t;
      fill(rec, est, truth);
      rec.wall_ms = elapsed_ms(t0);
      rows.push_back(std::move(rec));
    };
    auto t0 = Clock::now();
    record("theory", fit_at(spec.mode, ens, y, spec.sigma, spec.solver), spec.sigma, t0);
    t0 = Clock::now();
    CvPlan plan;
    plan.folds = spec.folds;
    plan.splits = spec.splits;
    plan.mode = spec.mode;
    plan.grid = default_grid(y, spec.grid_points);
    plan.seed = stream.split(1).seed();
    const CvResult cv = cv_select(ens, y, plan, spec.solver);
    record("cv", cv.final_estimate, cv.t_star, t0);
    return rows;
  });
  res.x_name = "n";
  res.aux_name = "t used for (lambda(t), eta(t)); sigma for the theoretical choice";
  res.config = to_json(spec);
  return res;
}

Matrix synthetic_image() {
  constexpr Index kRows = 50, kCols = 80, kRank = 6;
  Matrix left(kRows, kRank), right(kRank, kCols);
  for (Index k = 0; k < kRank; ++k) {
    const double f = static_cast<double>(k + 1);
    for (Index i = 0; i < kRows; ++i)
      left(i, k) = 0.5 + 0.5 * std::sin(2.0 * M_PI * f * (i + 1) / kRows + f);
    for (Index j = 0; j < kCols; ++j)
      right(k, j) = 0.5 + 0.5 * std::cos(M_PI * f * (j + 1) / kCols + 0.5 * f);
  }
  Matrix img = left * right;
  return img * (255.0 / img.maxCoeff());
}

ImageResult run_image(const ImageTask& task) {
  task.validate();
  ImageResult out;
  out.original = task.input.empty() ? synthetic_image() : read_pgm(task.input);
  const Index p1 = out.original.rows();
  const Index p2 = out.original.cols();
  out.target = out.original;
  if (task.rank_budget) {
    if (*task.rank_budget > std::min(p1, p2)) {
      throw std::invalid_argument("image: rank budget exceeds the image dimensions");
    }
    out.target = truncate_rank(out.original, *task.rank_budget).head;
  }
  const Rng root(task.seed);
  std::vector<Matrix> first(task.measurements.size());
  out.result = run_grid("image", task.measurements.size(), task.trials, task.threads,
                        [&](std::size_t point, int trial) {
    const Index n = task.measurements[point];
    const Rng stream = root.split(point).split(static_cast<std::uint64_t>(trial));
    Rng rng = stream;
    const auto t0 = Clock::now();
    const Ensemble ens =
        Ensemble::sample(EnsembleKind::Rop, p1, p2, n, Distribution::Gaussian, rng);
    const RecoveryEstimate est =
        solve(ens, ens.forward(out.target), ConstraintSpec::equality(), task.solver);
    ExperimentRecord rec = make_record("image", trial, stream, p1, p2,
                                       numerical_rank(out.target, 1e-9), n);
    rec.estimator = "equality";
    rec.x = static_cast<double>(n);
    rec.aux = relative_error(est.matrix, out.original);
    fill(rec, est, out.target);
    rec.wall_ms = elapsed_ms(t0);
    if (trial == 0) first[point] = est.matrix;
    return std::vector<ExperimentRecord>{rec};
  });
  out.reconstructions = std::move(first);
  out.result.x_name = "number of measurements";
  out.result.aux_name = "relative error against the image before rank truncation";
  out.result.config = to_json(task);
  out.result.notes["relative_error"] = "against the measured (possibly rank-truncated) image";
  return out;
}

nlohmann::json manifest(const ExperimentResult& res) {
  nlohmann::json m;
  m["experiment"] = res.name;
  m["schema_version"] = kCsvSchemaVersion;
  m["columns"] = record_columns();
  m["records_file"] = res.name + ".csv";
  m["summary_file"] = res.name + "_summary.csv";
  m["x"] = res.x_name;
  m["aux"] = res.aux_name;
  m["rng"] = std::string(Rng::kAlgorithm);
  m["success_threshold"] = kSuccessThreshold;
  m["config"] = res.config;
  m["notes"] = res.notes;
  m["nondeterministic_columns"] = {"wall_ms"};
  return m;
}

std::string plot_script(const ExperimentResult& res) {
  std::ostringstream s;
  s << "#!/usr/bin/env python3\n"
    << "# Plots every numeric summary column against x, one line per (ensemble, estimator).\n"
    << "import csv, sys\n"
    << "import matplotlib\n"
    << "matplotlib.use(\"Agg\")\n"
    << "import matplotlib.pyplot as plt\n\n"
    << "path = sys.argv[1] if len(sys.argv) > 1 else \"" << res.name << "_summary.csv\"\n"
    << "rows = list(csv.DictReader(open(path)))\n"
    << "series = {}\n"
    << "for row in rows:\n"
    << "    series.setdefault((row[\"ensemble\"], row[\"estimator\"]), []).append(row)\n"
    << "for column in [\"success_rate\", \"mean_loss\", \"mean_relative_error\", \"mean_aux\"]:\n"
    << "    fig, ax = plt.subplots()\n"
    << "    for (ensemble, estimator), pts in sorted(series.items()):\n"
    << "        pts.sort(key=lambda r: float(r[\"x\"]))\n"
    << "        ax.plot([float(r[\"x\"]) for r in pts], [float(r[column]) for r in pts],\n"
    << "                marker=\"o\", label=ensemble + \" \" + estimator)\n"
    << "    ax.set_xlabel(\"" << res.x_name << "\")\n"
    << "    ax.set_ylabel(column)\n"
    << "    if column == \"mean_loss\":\n"
    << "        ax.set_yscale(\"log\")\n"
    << "    ax.legend()\n"
    << "    fig.savefig(\"" << res.name << "_\" + column + \".png\", dpi=120)\n";
  return s.str();
}

std::vector<std::filesystem::path> write_outputs(const ExperimentResult& res,
                                                 const std::filesystem::path& dir,
                                                 bool with_plot) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  auto open = [&](const std::string& file) {
    written.push_back(dir / file);
    std::ofstream out(written.back(), std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + written.back().string());
    return out;
  };
  {
    auto out = open(res.name + ".csv");
    write_records(out, res.rows);
  }
  {
    auto out = open(res.name + "_summary.csv");
    write_summary(out, summarize(res.rows));
  }
  {
    auto out = open(res.name + "_manifest.json");
    out << manifest(res).dump(2) << '\n';
  }
  if (with_plot) {
    auto out = open(res.name + "_plot.py");
    out << plot_script(res);
  }
  return written;
}

}  // namespace rop::harness
