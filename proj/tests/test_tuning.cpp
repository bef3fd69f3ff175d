#include "doctest.h"
#include "support.hpp"

#include "rop/estimators.hpp"
#include "rop/tuning.hpp"
#include "rop/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

using namespace rop;

namespace {

std::vector<double> log_grid(double lo, double hi, int points) {
  std::vector<double> g(points);
  for (int i = 0; i < points; ++i) g[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (points - 1));
  return g;
}

struct Instance {
  Ensemble ens;
  Matrix truth;
  Vector y;
};

Instance make(Index p, Index r, Index n, double sigma, std::uint64_t seed) {
  Rng rng(seed);
  Instance in;
  in.truth = random_low_rank(p, p, r, LowRankMode::FactorProduct, rng);
  in.ens = Ensemble::sample(EnsembleKind::Rop, p, p, n, Distribution::Gaussian, rng);
  in.y = in.ens.forward(in.truth) + sigma * rng.normal_vector(n);
  return in;
}

}  // namespace

TEST_SUITE("tuning") {

TEST_CASE("partitions cover every index once per split") {
  for (Index n : {10, 23, 100, 101}) {
    for (int folds : {2, 5}) {
      const auto parts = cv_partitions(n, folds, 3, 42);
      CHECK(parts.size() == 3u);
      for (const CvSplit& s : parts) {
        std::vector<Index> all = s.train;
        all.insert(all.end(), s.test.begin(), s.test.end());
        std::sort(all.begin(), all.end());
        CHECK(all.size() == static_cast<std::size_t>(n));
        for (Index i = 0; i < n; ++i) CHECK(all[i] == i);
        const auto held = static_cast<Index>(s.test.size());
        CHECK(held >= n / folds);
        CHECK(held <= (n + folds - 1) / folds);
        CHECK(std::is_sorted(s.train.begin(), s.train.end()));
      }
      CHECK(parts[0].test != parts[1].test);
    }
  }
  const auto a = cv_partitions(50, 5, 2, 7), b = cv_partitions(50, 5, 2, 7);
  CHECK(a[1].test == b[1].test);
  CHECK_THROWS_AS(cv_partitions(5, 5, 1, 0), std::invalid_argument);
  CHECK_THROWS_AS(cv_partitions(50, 1, 1, 0), std::invalid_argument);
}

TEST_CASE("plan validation") {
  CvPlan plan;
  CHECK_NOTHROW(plan.validate());
  plan.folds = 1;
  CHECK_THROWS_AS(plan.validate(), std::invalid_argument);
  plan = CvPlan{};
  plan.splits = 0;
  CHECK_THROWS_AS(plan.validate(), std::invalid_argument);
  plan = CvPlan{};
  plan.grid = {0.1, 0.0};
  CHECK_THROWS_AS(plan.validate(), std::invalid_argument);
  plan.grid = {0.2, 0.1};
  CHECK_THROWS_AS(plan.validate(), std::invalid_argument);
  CHECK_THROWS_AS(parse_cv_mode("lasso"), std::invalid_argument);
  CHECK(parse_cv_mode(to_string(CvMode::Srop)) == CvMode::Srop);
}

TEST_CASE("default grid and parameter maps") {
  Vector y(4);
  y << 1, -1, 2, -2;
  const auto g = default_grid(y);
  CHECK(g.size() == 16u);
  CHECK(g.front() == doctest::Approx(1.5e-4));
  CHECK(g.back() == doctest::Approx(1.5));
  CHECK(std::is_sorted(g.begin(), g.end()));

  const auto [l, e] = cv_params(CvMode::Rop, 400, 30, 30, 0.01);
  CHECK(l == 0.01);
  CHECK(e == doctest::Approx(comparison_eta(400, 30, 30, 0.01)));
  const auto [ls, es] = cv_params(CvMode::Srop, 200, 20, 20, 0.03);
  CHECK(ls == 0.03);
  CHECK(es == doctest::Approx(3.0 * srop_comparison_eta(200, 20, 0.03)));
}

TEST_CASE("singleton grid selects its only point") {
  const Instance in = make(8, 1, 80, 0.01, 1);
  CvPlan plan;
  plan.grid = {0.02};
  const CvResult res = cv_select(in.ens, in.y, plan, SolverConfig{});
  CHECK(res.t_star == 0.02);
  CHECK(res.risk_curve.size() == 1u);
  CHECK(res.lambda == 0.02);
  CHECK(res.final_estimate.converged);
}

TEST_CASE("risk curve is reproducible and matches a recomputation") {
  const Instance in = make(8, 1, 100, 0.01, 2);
  CvPlan plan;
  plan.grid = log_grid(1e-3, 1e-1, 4);
  plan.splits = 2;
  plan.seed = 11;
  const CvResult a = cv_select(in.ens, in.y, plan, SolverConfig{});
  const CvResult b = cv_select(in.ens, in.y, plan, SolverConfig{});
  REQUIRE(a.risk_curve.size() == 4u);
  for (std::size_t j = 0; j < 4; ++j) {
    CHECK(std::memcmp(&a.risk_curve[j].second, &b.risk_curve[j].second, sizeof(double)) == 0);
  }
  CHECK(a.t_star == b.t_star);

  // Independent evaluation: refit on each training half, summed in reverse split order.
  const auto parts = cv_partitions(in.ens.size(), plan.folds, plan.splits, plan.seed);
  for (std::size_t j = 0; j < 4; ++j) {
    double risk = 0.0;
    for (auto it = parts.rbegin(); it != parts.rend(); ++it) {
      Vector ytr(it->train.size());
      for (std::size_t k = 0; k < it->train.size(); ++k) ytr(k) = in.y(it->train[k]);
      const Matrix m = fit_at(CvMode::Rop, in.ens.subset(it->train), ytr, plan.grid[j], SolverConfig{}).matrix;
      const Vector pred = in.ens.subset(it->test).forward(m);
      for (std::size_t k = 0; k < it->test.size(); ++k) risk += std::pow(in.y(it->test[k]) - pred(k), 2);
    }
    CHECK(risk == doctest::Approx(a.risk_curve[j].second).epsilon(1e-9));
  }

  // Selected point minimizes the curve among unflagged points.
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < 4; ++j) {
    if (!a.flagged[j]) best = std::min(best, a.risk_curve[j].second);
  }
  for (const auto& [t, r] : a.risk_curve) {
    if (t == a.t_star) CHECK(r == best);
  }
}

TEST_CASE("every grid point unconverged is an error") {
  const Instance in = make(8, 1, 80, 0.01, 3);
  CvPlan plan;
  plan.grid = {1e-3, 1e-2};
  SolverConfig cfg;
  cfg.max_iters = 1;
  CHECK_THROWS_AS(cv_select(in.ens, in.y, plan, cfg), std::runtime_error);
}

TEST_CASE("SROP mode needs a symmetric ensemble") {
  const Instance in = make(6, 1, 60, 0.01, 4);
  CHECK_THROWS_AS(fit_at(CvMode::Srop, in.ens, in.y, 0.01, SolverConfig{}), std::invalid_argument);
  CvPlan plan;
  plan.grid = {0.01};
  CHECK_THROWS_AS(cv_select(in.ens, Vector::Zero(59), plan, SolverConfig{}), std::invalid_argument);
}

TEST_CASE("CV is close to the best fixed t on the same data") {
  const Index p = 30, r = 4, n = 1000;
  const double sigma = 0.01;
  const Instance in = make(p, r, n, sigma, 5);
  CvPlan plan;
  plan.grid = log_grid(sigma / 10.0, sigma * 10.0, 8);
  plan.seed = 5;
  const CvResult res = cv_select(in.ens, in.y, plan, SolverConfig{});
  const double cv_loss = (res.final_estimate.matrix - in.truth).squaredNorm();
  double best = std::numeric_limits<double>::infinity();
  for (double t : plan.grid) {
    best = std::min(best, (fit_at(CvMode::Rop, in.ens, in.y, t, SolverConfig{}).matrix - in.truth).squaredNorm());
  }
  CAPTURE(res.t_star);
  CHECK(cv_loss <= 1.2 * best);
}

}
