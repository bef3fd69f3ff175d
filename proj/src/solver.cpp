#include "rop/solver.hpp"

#include "normal_system.hpp"
#include "rop/prox.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rop {

ConstraintSpec ConstraintSpec::equality() { return {}; }

ConstraintSpec ConstraintSpec::l1_only(double lambda) {
  ConstraintSpec c;
  c.kind = Kind::L1Only;
  c.lambda = lambda;
  c.validate();
  return c;
}

ConstraintSpec ConstraintSpec::spectral_only(double eta) {
  ConstraintSpec c;
  c.kind = Kind::SpectralOnly;
  c.eta = eta;
  c.validate();
  return c;
}

ConstraintSpec ConstraintSpec::intersection(double lambda, double eta) {
  ConstraintSpec c;
  c.kind = Kind::Intersection;
  c.lambda = lambda;
  c.eta = eta;
  c.validate();
  return c;
}

void ConstraintSpec::validate() const {
  auto ok = [](double v) { return std::isfinite(v) && v >= 0.0; };
  if ((kind == Kind::L1Only || kind == Kind::Intersection) && !ok(lambda)) {
    throw std::invalid_argument("constraint: lambda must be finite and >= 0");
  }
  if (has_spectral_block() && !ok(eta)) {
    throw std::invalid_argument("constraint: eta must be finite and >= 0");
  }
}

std::string to_string(ConstraintSpec::Kind kind) {
  switch (kind) {
    case ConstraintSpec::Kind::Equality: return "equality";
    case ConstraintSpec::Kind::L1Only: return "l1";
    case ConstraintSpec::Kind::SpectralOnly: return "ds";
    case ConstraintSpec::Kind::Intersection: return "intersection";
  }
  return "unknown";
}

void SolverConfig::validate() const {
  if (max_iters < 1) throw std::invalid_argument("solver: max_iters must be >= 1");
  if (!(primal_tol > 0.0)) throw std::invalid_argument("solver: primal_tol must be > 0");
  if (!std::isfinite(feas_tol)) throw std::invalid_argument("solver: feas_tol must be finite");
  if (!(step_ratio > 0.0) || !std::isfinite(step_ratio)) {
    throw std::invalid_argument("solver: step_ratio must be > 0");
  }
  if (!(over_relaxation > 0.0 && over_relaxation < 2.0)) {
    throw std::invalid_argument("solver: over_relaxation must lie in (0, 2)");
  }
}

namespace {

constexpr int kCheckEvery = 10;
constexpr double kBalance = 3.0;
constexpr int kStallChecks = 50;
// Penalty changes allowed per solve. Unbounded back-and-forth rebalancing can
// make the iteration diverge; once the budget is spent the penalty stays fixed.
constexpr int kMaxRebalance = 24;

// The linear pieces of one program: X for the residual block and A = D X for
// the spectral block, with D the identity unless a differenced map is in use.
struct Problem {
  const Ensemble& ens;
  const Vector& y;
  ConstraintSpec c;
  const DifferencedEnsemble* diff = nullptr;
  Vector y_spec;  // y' paired with A

  Vector apply_p(const Vector& v) const {
    return diff ? diff->difference_adjoint(diff->difference(v)) : v;
  }
  // A^*(y' - A(m)) written through X so both cases share one path.
  Matrix spectral_residual(const Matrix& m) const {
    if (diff) return diff->adjoint(y_spec - diff->forward(m));
    return ens.adjoint(y_spec - ens.forward(m));
  }
  double residual_measure(const Vector& r) const {
    const double n = static_cast<double>(ens.size());
    if (c.residual_norm == ConstraintSpec::ResidualNorm::L2) return r.norm() / n;
    return r.lpNorm<1>() / n;
  }
};

Problem make_problem(const Ensemble& ens, const Vector& y, const ConstraintSpec& constraint,
                     bool symmetric, const std::optional<Differenced>& aux) {
  constraint.validate();
  if (ens.size() == 0) throw std::invalid_argument("solver: empty ensemble");
  if (y.size() != ens.size()) throw std::invalid_argument("solver: y has wrong length");
  require_finite(y, "solver: y");
  if (symmetric && ens.rows() != ens.cols()) {
    throw std::invalid_argument("solver: symmetric mode needs a square target");
  }
  Problem pb{ens, y, constraint, nullptr, Vector()};
  if (aux) {
    if (ens.kind() != EnsembleKind::Srop || !(aux->map.base() == ens)) {
      throw std::invalid_argument("solver: differenced map does not match the ensemble");
    }
    if (aux->y.size() != aux->map.size()) {
      throw std::invalid_argument("solver: differenced observations have wrong length");
    }
  }
  if (constraint.has_spectral_block()) {
    if (symmetric && ens.kind() == EnsembleKind::Srop) {
      if (!aux) throw std::invalid_argument("solver: symmetric SROP needs the differenced map");
    }
    if (aux) {
      pb.diff = &aux->map;
      pb.y_spec = aux->y;
    } else {
      pb.y_spec = y;
    }
  }
  return pb;
}

double spectral_map_norm(const Problem& pb) {
  Rng rng(0x5eedULL);
  if (pb.diff) {
    const auto* d = pb.diff;
    return operator_norm([d](const Matrix& m) { return d->forward(m); },
                         [d](const Vector& z) { return d->adjoint(z); }, d->rows(), d->cols(),
                         1e-6, 500, rng)
        .value;
  }
  const Ensemble& e = pb.ens;
  return operator_norm([&e](const Matrix& m) { return e.forward(m); },
                       [&e](const Vector& z) { return e.adjoint(z); }, e.rows(), e.cols(), 1e-6,
                       500, rng)
      .value;
}

double measurement_norm(const Ensemble& e) {
  Rng rng(0x5eedULL);
  return operator_norm([&e](const Matrix& m) { return e.forward(m); },
                       [&e](const Vector& z) { return e.adjoint(z); }, e.rows(), e.cols(), 1e-6,
                       500, rng)
      .value;
}

FeasibilityGaps compute_gaps(const Problem& pb, const Matrix& m, double a_norm) {
  FeasibilityGaps g;
  const Vector r = pb.y - pb.ens.forward(m);
  if (pb.c.kind == ConstraintSpec::Kind::Equality) {
    g.residual = r.norm();
  } else if (pb.c.has_residual_block()) {
    g.residual = std::max(0.0, pb.residual_measure(r) - pb.c.lambda);
  }
  if (pb.c.has_spectral_block()) {
    const double s = spectral_norm(pb.spectral_residual(m));
    g.spectral = a_norm > 0.0 ? std::max(0.0, s - pb.c.eta) / a_norm : std::max(0.0, s - pb.c.eta);
  }
  return g;
}

// Sum of ||X_i||_F^2 without forming the Gram matrix.
double measurement_energy(const Ensemble& e) {
  switch (e.kind()) {
    case EnsembleKind::Rop:
      return (e.betas().rowwise().squaredNorm().array() *
              e.gammas().rowwise().squaredNorm().array())
          .sum();
    case EnsembleKind::Srop: return e.betas().rowwise().squaredNorm().array().square().sum();
    case EnsembleKind::GaussianEnsemble: return e.mats().squaredNorm();
  }
  return 0.0;
}

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

// Projection of v onto the residual ball {u : ||u||_q <= radius}.
Vector project_residual(const Vector& v, double radius, ConstraintSpec::ResidualNorm q) {
  return q == ConstraintSpec::ResidualNorm::L2 ? project_l2_ball(v, radius)
                                               : project_l1_ball(v, radius);
}

}  // namespace

RecoveryEstimate solve(const Ensemble& ens, const Vector& y, const ConstraintSpec& constraint,
                       const SolverConfig& cfg, bool symmetric,
                       const std::optional<Differenced>& aux) {
  cfg.validate();
  const Problem pb = make_problem(ens, y, constraint, symmetric, aux);
  const Index n = ens.size();
  const Index p1 = ens.rows();
  const Index p2 = ens.cols();
  const bool use_res = constraint.has_residual_block();
  const bool use_spec = constraint.has_spectral_block();
  const bool equality = constraint.kind == ConstraintSpec::Kind::Equality;

  RecoveryEstimate est;
  const double ynorm = y.norm();
  est.feas_tol = cfg.feas_tol > 0.0 ? cfg.feas_tol : 1e-6 * (1.0 + ynorm);

  const double a_norm = use_spec ? spectral_map_norm(pb) : 0.0;
  const Matrix zero = Matrix::Zero(p1, p2);
  {
    const FeasibilityGaps g0 = compute_gaps(pb, zero, a_norm);
    if (g0.max() == 0.0) {
      est.matrix = zero;
      est.gaps = g0;
      est.converged = true;
      return est;
    }
  }

  // With n >= p1 p2 and X of full column rank the equality constraint has a
  // single feasible point; solve for it directly.
  if (equality && !symmetric && n >= p1 * p2 && cfg.warm_start.size() == 0) {
    const Eigen::ColPivHouseholderQR<Matrix> qr(ens.materialize());
    if (qr.rank() == p1 * p2) {
      const Matrix direct = unvec(qr.solve(y), p1, p2);
      const FeasibilityGaps g = compute_gaps(pb, direct, a_norm);
      if (g.max() <= est.feas_tol) {
        est.matrix = direct;
        est.gaps = g;
        est.nuclear_norm = nuclear_norm(direct);
        est.converged = true;
        return est;
      }
    }
  }

  const double x_norm = use_res ? measurement_norm(ens) : 0.0;
  const double w0 = 1.0;
  const double w1 = use_res ? 10.0 / (x_norm * x_norm) : 0.0;
  const double w2 = use_spec ? 1.0 / std::pow(a_norm, 4) : 0.0;
  const detail::NormalSystem normal(ens, pb.diff, w0, w1, w2);

  const double typical =
      std::sqrt(measurement_energy(ens) / static_cast<double>(std::min<Index>(n, p1 * p2)));
  double mscale = typical > 0.0
                      ? ynorm / typical / std::sqrt(static_cast<double>(std::min(p1, p2)))
                      : 0.0;
  if (!(mscale > 0.0)) mscale = 1.0;
  double mu = 3.0 * cfg.step_ratio / mscale;
  const double mu0 = mu;

  const double alpha = cfg.over_relaxation;
  const double radius = static_cast<double>(n) * constraint.lambda;
  const Matrix b = use_spec ? (pb.diff ? pb.diff->adjoint(pb.y_spec) : ens.adjoint(pb.y_spec))
                            : Matrix();
  auto k2 = [&](const Vector& xm) { return ens.adjoint(pb.apply_p(xm)); };
  auto res_set = [&](const Vector& v) -> Vector {
    if (equality) return y;
    return y - project_residual(y - v, radius, constraint.residual_norm);
  };
  auto spec_set = [&](const Matrix& k) -> Matrix {
    return b - project_spectral_ball(b - k, constraint.eta);
  };

  Matrix m = zero;
  if (cfg.warm_start.size() != 0) {
    if (cfg.warm_start.rows() != p1 || cfg.warm_start.cols() != p2) {
      throw std::invalid_argument("solver: warm start has wrong shape");
    }
    require_finite(cfg.warm_start, "solver: warm start");
    m = symmetric ? symmetrize(cfg.warm_start) : cfg.warm_start;
  }
  Matrix z = m;
  Matrix u0 = zero;
  Vector s, u1;
  Matrix w, u2;
  {
    const Vector xm = ens.forward(m);
    if (use_res) {
      s = res_set(xm);
      u1 = Vector::Zero(n);
    }
    if (use_spec) {
      w = spec_set(k2(xm));
      u2 = zero;
    }
  }

  Matrix z_check = z;
  int stalled = 0;
  int rebalanced = 0;
  int k = 0;
  while (k < cfg.max_iters) {
    ++k;
    Vector v = Vector::Zero(n);
    if (use_res) v += w1 * (s - u1);
    if (use_spec) v += w2 * pb.apply_p(ens.forward(w - u2));
    m = normal.solve(w0 * (z - u0) + ens.adjoint(v));

    const Vector xm = ens.forward(m);
    const Matrix z_old = z;
    const Matrix mh = alpha * m + (1.0 - alpha) * z;
    z = svt(mh + u0, 1.0 / (mu * w0));
    if (symmetric) z = symmetrize(z);
    u0 += mh - z;

    Vector s_old;
    if (use_res) {
      s_old = s;
      const Vector vh = alpha * xm + (1.0 - alpha) * s;
      s = res_set(vh + u1);
      u1 += vh - s;
    }
    Matrix w_old, km;
    if (use_spec) {
      w_old = w;
      km = k2(xm);
      const Matrix kh = alpha * km + (1.0 - alpha) * w;
      w = spec_set(kh + u2);
      u2 += kh - w;
    }

    if (k % kCheckEvery != 0 && k != cfg.max_iters) continue;

    double pr2 = w0 * (m - z).squaredNorm();
    if (use_res) pr2 += w1 * (xm - s).squaredNorm();
    if (use_spec) pr2 += w2 * (km - w).squaredNorm();
    Vector dv = Vector::Zero(n);
    if (use_res) dv += w1 * (s - s_old);
    if (use_spec) dv += w2 * pb.apply_p(ens.forward(w - w_old));
    const Matrix dz = w0 * (z - z_old) + ens.adjoint(dv);
    const double pr = std::sqrt(pr2);
    const double dr = mu * dz.norm() / std::sqrt(w0);
    // Logged with the initial penalty so that rebalancing does not rescale the history.
    est.residual_history.push_back(pr + mu0 * dz.norm() / std::sqrt(w0));

    est.gaps = compute_gaps(pb, z, a_norm);
    const double zn = z.norm();
    const double rel = (z - z_check).norm() / std::max(zn, 1e-300);
    z_check = z;
    if (est.gaps.max() <= est.feas_tol && rel <= cfg.primal_tol) {
      est.converged = true;
      break;
    }
    // Iterates frozen while still infeasible: the program has no feasible point
    // reachable at this precision.
    stalled = rel <= 1e-3 * cfg.primal_tol ? stalled + 1 : 0;
    if (stalled >= kStallChecks) break;

    if (rebalanced >= kMaxRebalance) continue;
    if (pr > kBalance * dr) {
      ++rebalanced;
      mu *= 2.0;
      u0 *= 0.5;
      if (use_res) u1 *= 0.5;
      if (use_spec) u2 *= 0.5;
    } else if (dr > kBalance * pr) {
      ++rebalanced;
      mu *= 0.5;
      u0 *= 2.0;
      if (use_res) u1 *= 2.0;
      if (use_spec) u2 *= 2.0;
    }
  }

  est.iterations = k;
  est.matrix = z;
  est.gaps = compute_gaps(pb, z, a_norm);
  est.nuclear_norm = nuclear_norm(z);
  return est;
}

RecoveryEstimate solve_l1_only(const Ensemble& ens, const Vector& y, double lambda,
                               const SolverConfig& cfg) {
  return solve(ens, y, ConstraintSpec::l1_only(lambda), cfg);
}

RecoveryEstimate solve_ds_only(const Ensemble& ens, const Vector& y, double eta,
                               const SolverConfig& cfg) {
  return solve(ens, y, ConstraintSpec::spectral_only(eta), cfg);
}

FeasibilityGaps feasibility_gaps(const Ensemble& ens, const Vector& y,
                                 const ConstraintSpec& constraint, const Matrix& m,
                                 const std::optional<Differenced>& aux) {
  if (m.rows() != ens.rows() || m.cols() != ens.cols()) {
    throw std::invalid_argument("feasibility_gaps: matrix has wrong shape");
  }
  const bool symmetric = aux.has_value();
  const Problem pb = make_problem(ens, y, constraint, symmetric, aux);
  const double a_norm = constraint.has_spectral_block() ? spectral_map_norm(pb) : 0.0;
  return compute_gaps(pb, m, a_norm);
}

}  // namespace rop
