#include "normal_system.hpp"

#include <stdexcept>

namespace rop::detail {

namespace {

// P G P with P = D^T D, built from the differenced Gram D G D^T in O(n^2).
Matrix difference_sandwich(const Matrix& g) {
  const Index n = g.rows();
  const Index m = n / 2;
  Matrix out = Matrix::Zero(n, n);
  for (Index j = 0; j < m; ++j) {
    for (Index i = 0; i < m; ++i) {
      const double v = g(2 * i, 2 * j) - g(2 * i, 2 * j + 1) - g(2 * i + 1, 2 * j) +
                       g(2 * i + 1, 2 * j + 1);
      out(2 * i, 2 * j) = v;
      out(2 * i + 1, 2 * j) = -v;
      out(2 * i, 2 * j + 1) = -v;
      out(2 * i + 1, 2 * j + 1) = v;
    }
  }
  return out;
}

}  // namespace

NormalSystem::NormalSystem(const Ensemble& ens, const DifferencedEnsemble* diff, double w0,
                           double w1, double w2)
    : ens_(ens), p1_(ens.rows()), p2_(ens.cols()), w0_(w0) {
  if (!(w0 > 0.0) || w1 < 0.0 || w2 < 0.0) throw std::invalid_argument("NormalSystem: bad weights");
  const Index n = ens.size();
  const Index d = p1_ * p2_;
  measurement_space_ = n <= d;

  if (measurement_space_) {
    const Matrix g = ens.gram();
    Matrix s = Matrix::Zero(n, n);
    if (w1 > 0.0) s.diagonal().array() += w1;
    if (w2 > 0.0) s += w2 * (diff ? difference_sandwich(g) : g);
    Matrix system = s * g;
    system.diagonal().array() += w0;
    n_kernel_ = system.partialPivLu().solve(s);
    // Symmetric in exact arithmetic.
    n_kernel_ = 0.5 * (n_kernel_ + n_kernel_.transpose()).eval();
    return;
  }

  const Matrix xm = ens.materialize();
  Matrix h = Matrix::Zero(d, d);
  Matrix k1;
  if (w1 > 0.0 || (w2 > 0.0 && !diff)) {
    k1 = Matrix::Zero(d, d);
    k1.selfadjointView<Eigen::Lower>().rankUpdate(xm.transpose());
    k1 = k1.selfadjointView<Eigen::Lower>();
  }
  if (w1 > 0.0) h += w1 * k1;
  if (w2 > 0.0) {
    Matrix k2;
    if (diff) {
      const Matrix xt = diff->materialize();
      k2 = Matrix::Zero(d, d);
      k2.selfadjointView<Eigen::Lower>().rankUpdate(xt.transpose());
      k2 = k2.selfadjointView<Eigen::Lower>();
    } else {
      k2 = k1;
    }
    h.noalias() += w2 * (k2 * k2);
  }
  h.diagonal().array() += w0;
  d_factor_.compute(h);
  if (d_factor_.info() != Eigen::Success) throw std::runtime_error("NormalSystem: Cholesky failed");
}

Matrix NormalSystem::solve(const Matrix& rhs) const {
  if (measurement_space_) {
    const Vector inner = n_kernel_ * ens_.forward(rhs);
    return (rhs - ens_.adjoint(inner)) / w0_;
  }
  const Vector x = d_factor_.solve(vec(rhs));
  return unvec(x, p1_, p2_);
}

}  // namespace rop::detail
