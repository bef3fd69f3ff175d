#pragma once

#include "rop/measure.hpp"

#include <optional>
#include <variant>

namespace rop::detail {

/// Solves (w0 I + w1 X^*X + w2 (A^*A)^2) M = R where A = D X and D is either the
/// identity or the pairwise-difference map. Factored once; the ADMM penalty is
/// a scalar multiple of this operator and never forces a refactorization.
///
/// With n measurements and d = p1 p2 unknowns the factorization lives in
/// whichever space is smaller: n x n via the push-through identity
///   (w0 I + X^* S X)^{-1} = (I - X^* (w0 I + S G)^{-1} S X) / w0,
/// with S = w1 I + w2 P G P, P = D^T D and G = X X^*, or d x d by Cholesky.
class NormalSystem {
 public:
  NormalSystem(const Ensemble& ens, const DifferencedEnsemble* diff, double w0, double w1,
               double w2);

  Matrix solve(const Matrix& rhs) const;

  bool uses_measurement_space() const { return measurement_space_; }

 private:
  const Ensemble& ens_;
  Index p1_, p2_;
  double w0_;
  bool measurement_space_;
  Matrix n_kernel_;                     // (w0 I + S G)^{-1} S, n x n
  Eigen::LLT<Matrix> d_factor_;         // d x d Cholesky
};

}  // namespace rop::detail
