#pragma once

#include "rop/estimators.hpp"
#include "rop/harness/records.hpp"
#include "rop/tuning.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace rop::harness {

enum class Scale { Desk, Paper };

std::string to_string(Scale s);
Scale parse_scale(std::string_view name);

/// Success threshold on the relative Frobenius error.
inline constexpr double kSuccessThreshold = 1e-4;

// Every spec carries seed, trials, threads (0 = hardware concurrency) and the
// solver settings. `defaults(scale)` gives the desk or full-size settings.

struct PhaseSpec {
  Index p1 = 30, p2 = 30, r = 2;
  std::vector<double> c_grid{3.0, 4.0, 4.5, 5.0, 6.0};
  std::vector<EnsembleKind> kinds{EnsembleKind::Rop, EnsembleKind::GaussianEnsemble};
  Distribution dist = Distribution::Gaussian;
  int trials = 25;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  SolverConfig solver;

  static PhaseSpec defaults(Scale scale);
  void validate() const;
};

struct RobustSpec {
  Index p = 40, n = 800;
  std::vector<Index> ranks{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  int trials = 20;
  std::uint64_t seed = 2;
  unsigned threads = 0;
  SolverConfig solver;

  static RobustSpec defaults(Scale scale);
  void validate() const;
};

/// Noisy rate check for the Gaussian-noise ROP estimator: one truth per trial,
/// measured at every n of the grid.
struct RateSpec {
  Index p = 20, r = 2;
  double sigma = 0.01;
  std::vector<Index> n_grid{800, 1600};
  int trials = 50;
  std::uint64_t seed = 3;
  unsigned threads = 0;
  SolverConfig solver;

  static RateSpec defaults(Scale scale);
  void validate() const;
};

enum class CompareMode { Rop, Srop };

/// Intersection vs l1-only vs DS-only (ROP), or intersection vs l1-only under
/// SROP with uniform noise sigma U[-1, 1].
struct CompareSpec {
  CompareMode mode = CompareMode::Rop;
  Index p = 30, r = 3;
  double sigma = 0.01;
  std::vector<Index> n_grid{400, 540, 900, 1800, 3600};
  int trials = 10;
  std::uint64_t seed = 4;
  unsigned threads = 0;
  SolverConfig solver;

  static CompareSpec defaults(Scale scale, CompareMode mode = CompareMode::Rop);
  void validate() const;
};

struct LowerSpec {
  Index p = 20, r = 3;
  std::vector<Index> n_grid{40, 60, 80, 100, 110, 120, 180, 240, 360, 600};
  int trials = 50;
  std::uint64_t seed = 5;
  unsigned threads = 0;
  SolverConfig solver;

  static LowerSpec defaults(Scale scale);
  void validate() const;
};

struct CovSpec {
  Index p = 20, r = 1;
  double spike = 5.0;
  std::vector<Index> n_grid{200, 400, 800};
  int trials = 20;
  CovOptions options;
  std::uint64_t seed = 6;
  unsigned threads = 0;
  SolverConfig solver;

  static CovSpec defaults(Scale scale);
  void validate() const;
};

/// CV-tuned vs theoretical (t = sigma) tuning on the same data.
struct CvSpec {
  CvMode mode = CvMode::Rop;
  Index p = 30, r = 4;
  double sigma = 0.01;
  std::vector<Index> n_grid{1000};
  int trials = 8;
  int folds = 5;
  int splits = 1;
  int grid_points = 16;
  std::uint64_t seed = 7;
  unsigned threads = 0;
  SolverConfig solver;

  static CvSpec defaults(Scale scale, CvMode mode = CvMode::Rop);
  void validate() const;
};

struct ImageTask {
  /// Empty path selects the synthetic rank-6 50 x 80 test image.
  std::filesystem::path input;
  std::optional<Index> rank_budget;
  std::vector<Index> measurements{900, 1000, 1080};
  int trials = 1;
  std::uint64_t seed = 8;
  unsigned threads = 0;
  SolverConfig solver;

  static ImageTask defaults(Scale scale);
  void validate() const;
};

struct ExperimentResult {
  std::string name;
  std::vector<ExperimentRecord> rows;
  /// Meaning of the `x` and `aux` record columns.
  std::string x_name;
  std::string aux_name;
  nlohmann::json config;
  nlohmann::json notes = nlohmann::json::object();
};

ExperimentResult run_phase_transition(const PhaseSpec& spec);
ExperimentResult run_robustness(const RobustSpec& spec);
ExperimentResult run_rate_scaling(const RateSpec& spec);
ExperimentResult run_comparison(const CompareSpec& spec);
ExperimentResult run_lower_bound_probe(const LowerSpec& spec);
ExperimentResult run_covariance(const CovSpec& spec);
ExperimentResult run_cv(const CvSpec& spec);

struct ImageResult {
  ExperimentResult result;
  Matrix original;
  Matrix target;  // after optional rank truncation
  /// Reconstruction of the first trial at each measurement count.
  std::vector<Matrix> reconstructions;
};

/// Exactly rank-6 50 x 80 image with intensities in [0, 255].
Matrix synthetic_image();
ImageResult run_image(const ImageTask& task);

/// Largest rank r0 such that every trial at every rank <= r0 succeeded (0 if none).
Index recoverable_rank(const ExperimentResult& robust);

/// Writes <name>.csv, <name>_summary.csv and <name>_manifest.json under `dir`,
/// plus <name>_plot.py when `plot_script` is set. Returns the written paths.
std::vector<std::filesystem::path> write_outputs(const ExperimentResult& res,
                                                 const std::filesystem::path& dir,
                                                 bool plot_script);

/// Generic plotting script that reads the summary CSV and plots its columns.
std::string plot_script(const ExperimentResult& res);

nlohmann::json manifest(const ExperimentResult& res);

}  // namespace rop::harness
