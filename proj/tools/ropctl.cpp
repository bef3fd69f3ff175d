#include "rop/estimators.hpp"
#include "rop/harness/config.hpp"
#include "rop/harness/experiments.hpp"
#include "rop/harness/pgm.hpp"
#include "rop/verify.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace rop;
using namespace rop::harness;

namespace {

struct Common {
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<unsigned> threads;
  fs::path out = "out";
  fs::path config;
  std::string scale = "desk";
  bool plot = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "master seed");
  cmd->add_option("--trials", c.trials, "trials per grid point")->check(CLI::PositiveNumber);
  cmd->add_option("--threads", c.threads, "worker threads (0 = all cores)");
  cmd->add_option("--out", c.out, "output directory");
  cmd->add_option("--config", c.config, "JSON config overriding the defaults")->check(CLI::ExistingFile);
  cmd->add_option("--scale", c.scale, "desk or paper")->check(CLI::IsMember({"desk", "paper"}));
  cmd->add_flag("--plot-script", c.plot, "also write a plotting script for the summary");
}

template <class Spec>
Spec configure(Spec spec, const Common& c) {
  if (!c.config.empty()) spec = parse(load_json(c.config), spec);
  if (c.seed) spec.seed = *c.seed;
  if (c.trials) spec.trials = *c.trials;
  if (c.threads) spec.threads = *c.threads;
  spec.validate();
  return spec;
}

void emit(const ExperimentResult& res, const Common& c) {
  for (const auto& path : write_outputs(res, c.out, c.plot)) std::cout << path.string() << '\n';
}

Vector read_vector(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<double> values;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    values.push_back(std::stod(line));
  }
  return Eigen::Map<Vector>(values.data(), static_cast<Index>(values.size()));
}

void write_vector(const fs::path& path, const Vector& v) {
  std::ofstream out(path);
  for (Index i = 0; i < v.size(); ++i) out << format_double(v(i)) << '\n';
}

void write_matrix(const fs::path& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << format_double(m(i, j));
    out << '\n';
  }
}

struct SampleArgs {
  std::string kind = "rop", dist = "gaussian";
  Index p1 = 20, p2 = 20, r = 2, n = 400;
  double sigma = 0.0;
  std::uint64_t seed = 1;
  fs::path out = "out";
};

int run_sample(const SampleArgs& a) {
  const EnsembleKind kind = parse_ensemble_kind(a.kind);
  Rng rng(a.seed);
  Rng truth_rng = rng.split(0), design_rng = rng.split(1), noise_rng = rng.split(2);
  Matrix truth;
  if (kind == EnsembleKind::Srop) {
    const Matrix f = truth_rng.normal_matrix(a.r, a.p1);
    truth = f.transpose() * f;
  } else {
    truth = random_low_rank(a.p1, a.p2, a.r, LowRankMode::FactorProduct, truth_rng);
  }
  const Index p2 = kind == EnsembleKind::Srop ? a.p1 : a.p2;
  const Ensemble ens = Ensemble::sample(kind, a.p1, p2, a.n, parse_distribution(a.dist), design_rng);
  Vector y = ens.forward(truth);
  if (a.sigma > 0.0) y += a.sigma * noise_rng.normal_vector(a.n);
  fs::create_directories(a.out);
  ens.save(a.out / "ensemble.bin");
  write_vector(a.out / "y.txt", y);
  write_matrix(a.out / "truth.csv", truth);
  std::cout << (a.out / "ensemble.bin").string() << '\n'
            << (a.out / "y.txt").string() << '\n'
            << (a.out / "truth.csv").string() << '\n';
  return 0;
}

struct RecoverArgs {
  fs::path ensemble, measurements, config, out = "out";
  std::string estimator = "equality", dist = "gaussian";
  double sigma = 0.0, tau = 0.0, lambda = 0.0, eta = 0.0;
};

int run_recover(const RecoverArgs& a) {
  const Ensemble ens = Ensemble::load(a.ensemble);
  const Vector y = read_vector(a.measurements);
  if (y.size() != ens.size()) {
    throw std::invalid_argument("measurement count " + std::to_string(y.size()) +
                                " does not match ensemble size " + std::to_string(ens.size()));
  }
  SolverConfig cfg;
  if (!a.config.empty()) cfg = parse(load_json(a.config), cfg);

  const bool sym = ens.symmetric();
  RecoveryEstimate est;
  const std::string& e = a.estimator;
  if (e == "equality") {
    est = sym ? solve(ens, y, ConstraintSpec::equality(), cfg, true, pairwise_difference(ens, y))
              : solve(ens, y, ConstraintSpec::equality(), cfg);
  } else if (e == "rop") {
    est = rop_estimate(ens, y, a.sigma, cfg);
  } else if (e == "srop") {
    est = srop_estimate(ens, y, a.sigma, cfg);
  } else if (e == "subgaussian") {
    est = subgaussian_estimate(ens, y, a.tau, parse_distribution(a.dist), cfg);
  } else {
    ConstraintSpec c;
    if (e == "l1") c = ConstraintSpec::l1_only(a.lambda);
    else if (e == "ds") c = ConstraintSpec::spectral_only(a.eta);
    else if (e == "intersection") c = ConstraintSpec::intersection(a.lambda, a.eta);
    else throw std::invalid_argument("unknown estimator '" + e + "'");
    const bool needs_diff = sym && c.kind != ConstraintSpec::Kind::L1Only;
    est = needs_diff ? solve(ens, y, c, cfg, true, pairwise_difference(ens, y)) : solve(ens, y, c, cfg, sym);
  }

  fs::create_directories(a.out);
  write_matrix(a.out / "estimate.csv", est.matrix);
  nlohmann::json info{{"estimator", e},
                      {"iterations", est.iterations},
                      {"converged", est.converged},
                      {"nuclear_norm", est.nuclear_norm},
                      {"residual_gap", est.gaps.residual},
                      {"spectral_gap", est.gaps.spectral},
                      {"feas_tol", est.feas_tol}};
  std::ofstream(a.out / "estimate.json") << info.dump(2) << '\n';
  std::cout << info.dump() << '\n';
  return est.converged ? 0 : 3;
}

struct VerifyArgs {
  std::string kind = "rop", dist = "gaussian";
  Index p1 = 20, p2 = 20, n = 400, r = 1;
  int trials = 200;
  std::uint64_t seed = 1;
  fs::path out = "out";
};

int run_verify(const VerifyArgs& a) {
  const EnsembleKind kind = parse_ensemble_kind(a.kind);
  const Index p2 = kind == EnsembleKind::Srop ? a.p1 : a.p2;
  Rng rng(a.seed);
  Rng design_rng = rng.split(0), rub_rng = rng.split(1), rip_rng = rng.split(2);
  const Ensemble ens = Ensemble::sample(kind, a.p1, p2, a.n, parse_distribution(a.dist), design_rng);
  const RatioEstimate rub = rub_ratio(ens, a.r, a.trials, rub_rng);
  const RatioEstimate rip = rip_ratio(ens, a.trials, rip_rng);

  fs::create_directories(a.out);
  const fs::path path = a.out / "verify.csv";
  std::ofstream out(path);
  out << "statistic,ensemble,p1,p2,n,r,trials,lower,upper,ratio,dof\n";
  auto row = [&](const char* name, const RatioEstimate& est) {
    out << name << ',' << to_string(kind) << ',' << a.p1 << ',' << p2 << ',' << a.n << ','
        << est.r << ',' << est.trials << ',' << format_double(est.lower) << ','
        << format_double(est.upper) << ',' << format_double(est.ratio()) << ','
        << dof(a.p1, p2, a.r) << '\n';
  };
  row("rub", rub);
  row("rip", rip);
  std::cout << path.string() << '\n';
  return 0;
}

int run_image_cmd(ImageTask task, const Common& c) {
  const ImageResult res = run_image(task);
  emit(res.result, c);
  write_pgm(c.out / "image_original.pgm", res.original);
  write_pgm(c.out / "image_target.pgm", res.target);
  for (std::size_t k = 0; k < res.reconstructions.size(); ++k) {
    const fs::path p = c.out / ("image_recovered_n" + std::to_string(task.measurements[k]) + ".pgm");
    write_pgm(p, res.reconstructions[k]);
    std::cout << p.string() << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Low-rank matrix recovery from rank-one projections"};
  app.require_subcommand(1);

  Common common;
  auto* phase = app.add_subcommand("phase", "exact-recovery phase transition");
  auto* robust = app.add_subcommand("robust", "approximately low-rank truths at fixed n");
  auto* rate = app.add_subcommand("rate", "noisy loss at two sample sizes");
  auto* compare = app.add_subcommand("compare", "intersection vs l1-only vs DS-only");
  auto* lower = app.add_subcommand("lower", "success rate across the identifiability line");
  auto* cov = app.add_subcommand("cov", "spiked covariance from one-dimensional projections");
  auto* cv = app.add_subcommand("cv", "cross-validated vs theoretical tuning");
  auto* image = app.add_subcommand("image", "compress and recover a grayscale image");
  for (auto* cmd : {phase, robust, rate, compare, lower, cov, cv, image}) add_common(cmd, common);

  std::string mode = "rop";
  compare->add_option("--mode", mode, "rop or srop")->check(CLI::IsMember({"rop", "srop"}));
  cv->add_option("--mode", mode, "rop or srop")->check(CLI::IsMember({"rop", "srop"}));

  fs::path image_input;
  std::optional<Index> rank_budget;
  std::vector<Index> measurements;
  image->add_option("--input", image_input, "P5 PGM image (default: synthetic rank-6 image)")
      ->check(CLI::ExistingFile);
  image->add_option("--rank", rank_budget, "truncate the image to this rank before measuring");
  image->add_option("--measurements", measurements, "measurement counts");

  SampleArgs sample_args;
  auto* sample = app.add_subcommand("sample", "draw a low-rank truth, a design and measurements");
  sample->add_option("--kind", sample_args.kind, "rop, srop or gaussian-ensemble");
  sample->add_option("--dist", sample_args.dist, "gaussian, rademacher or uniform");
  sample->add_option("--p1", sample_args.p1);
  sample->add_option("--p2", sample_args.p2);
  sample->add_option("--r", sample_args.r);
  sample->add_option("--n", sample_args.n);
  sample->add_option("--sigma", sample_args.sigma, "Gaussian noise level");
  sample->add_option("--seed", sample_args.seed);
  sample->add_option("--out", sample_args.out);

  RecoverArgs rec;
  auto* recover = app.add_subcommand("recover", "recover a matrix from a saved design and measurements");
  recover->add_option("--ensemble", rec.ensemble, "design file written by `sample`")
      ->required()
      ->check(CLI::ExistingFile);
  recover->add_option("--measurements", rec.measurements, "one measurement per line")
      ->required()
      ->check(CLI::ExistingFile);
  recover->add_option("--estimator", rec.estimator)
      ->check(CLI::IsMember({"equality", "rop", "srop", "subgaussian", "l1", "ds", "intersection"}));
  recover->add_option("--sigma", rec.sigma, "noise level for rop/srop");
  recover->add_option("--tau", rec.tau, "noise scale for subgaussian");
  recover->add_option("--dist", rec.dist, "design distribution for subgaussian");
  recover->add_option("--lambda", rec.lambda, "mean absolute residual bound");
  recover->add_option("--eta", rec.eta, "spectral bound");
  recover->add_option("--config", rec.config, "solver settings JSON")->check(CLI::ExistingFile);
  recover->add_option("--out", rec.out);

  VerifyArgs ver;
  auto* verify = app.add_subcommand("verify", "Monte Carlo RUB and RIP ratios of a sampled design");
  verify->add_option("--kind", ver.kind);
  verify->add_option("--dist", ver.dist);
  verify->add_option("--p1", ver.p1);
  verify->add_option("--p2", ver.p2);
  verify->add_option("--n", ver.n);
  verify->add_option("--r", ver.r);
  verify->add_option("--trials", ver.trials);
  verify->add_option("--seed", ver.seed);
  verify->add_option("--out", ver.out);

  CLI11_PARSE(app, argc, argv);

  try {
    const Scale scale = parse_scale(common.scale);
    if (phase->parsed()) emit(run_phase_transition(configure(PhaseSpec::defaults(scale), common)), common);
    if (robust->parsed()) emit(run_robustness(configure(RobustSpec::defaults(scale), common)), common);
    if (rate->parsed()) emit(run_rate_scaling(configure(RateSpec::defaults(scale), common)), common);
    if (compare->parsed()) {
      emit(run_comparison(configure(CompareSpec::defaults(scale, parse_compare_mode(mode)), common)), common);
    }
    if (lower->parsed()) emit(run_lower_bound_probe(configure(LowerSpec::defaults(scale), common)), common);
    if (cov->parsed()) emit(run_covariance(configure(CovSpec::defaults(scale), common)), common);
    if (cv->parsed()) emit(run_cv(configure(CvSpec::defaults(scale, parse_cv_mode(mode)), common)), common);
    if (image->parsed()) {
      ImageTask task = configure(ImageTask::defaults(scale), common);
      if (!image_input.empty()) task.input = image_input;
      if (rank_budget) task.rank_budget = rank_budget;
      if (!measurements.empty()) task.measurements = measurements;
      task.validate();
      return run_image_cmd(task, common);
    }
    if (sample->parsed()) return run_sample(sample_args);
    if (recover->parsed()) return run_recover(rec);
    if (verify->parsed()) return run_verify(ver);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
