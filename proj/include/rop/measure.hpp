#pragma once

#include "rop/core.hpp"

#include <cstddef>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>

namespace rop {

/// Symmetric, mean-zero, unit-variance law for the projection vectors.
enum class Distribution { Gaussian, Rademacher, UniformSym };

std::string to_string(Distribution d);
Distribution parse_distribution(std::string_view name);
double draw(Distribution d, Rng& rng);

enum class EnsembleKind { Rop, Srop, GaussianEnsemble };

std::string to_string(EnsembleKind k);
EnsembleKind parse_ensemble_kind(std::string_view name);

/// A realized linear map X : R^{p1 x p2} -> R^n.
///
/// ROP stores the factor vectors beta_i (rows of `betas`, n x p1) and gamma_i
/// (rows of `gammas`, n x p2) and never forms X_i = beta_i gamma_i^T. SROP reuses
/// `betas` for both sides. The Gaussian ensemble stores vec(X_i) as row i of
/// `mats` (column-major vec, n x p1 p2). Copies share the immutable storage.
class Ensemble {
 public:
  Ensemble() = default;

  static Ensemble sample(EnsembleKind kind, Index p1, Index p2, Index n, Distribution dist,
                         Rng& rng);
  static Ensemble rop(Matrix betas, Matrix gammas, Distribution dist = Distribution::Gaussian);
  static Ensemble srop(Matrix betas, Distribution dist = Distribution::Gaussian);
  static Ensemble gaussian(Matrix mats, Index p1, Index p2);

  EnsembleKind kind() const { return kind_; }
  Distribution distribution() const { return dist_; }
  Index size() const { return n_; }
  Index rows() const { return p1_; }
  Index cols() const { return p2_; }
  bool symmetric() const { return kind_ == EnsembleKind::Srop; }

  const Matrix& betas() const;
  const Matrix& gammas() const;
  const Matrix& mats() const;

  /// [X(A)]_i = <X_i, A>.
  Vector forward(const Matrix& a) const;
  /// X^*(z) = sum_i z_i X_i.
  Matrix adjoint(const Vector& z) const;
  /// The i-th measurement matrix.
  Matrix measurement(Index i) const;
  /// n x (p1 p2) matrix whose row i is vec(X_i), column-major vec.
  Matrix materialize() const;
  /// Gram matrix G_ij = <X_i, X_j> computed from the factors.
  Matrix gram() const;

  /// Ensemble restricted to the listed measurements, in the given order.
  Ensemble subset(std::span<const Index> indices) const;

  /// Bytes needed to store the measurement design as float64.
  std::size_t storage_bytes() const;

  void save(const std::filesystem::path& path) const;
  static Ensemble load(const std::filesystem::path& path);

  friend bool operator==(const Ensemble& a, const Ensemble& b);

 private:
  struct Storage {
    Matrix betas;
    Matrix gammas;
    Matrix mats;
  };

  EnsembleKind kind_ = EnsembleKind::Rop;
  Distribution dist_ = Distribution::Gaussian;
  Index n_ = 0;
  Index p1_ = 0;
  Index p2_ = 0;
  std::shared_ptr<const Storage> data_;

  void check_matrix(const Matrix& a, std::string_view op) const;
};

/// Pairwise-differenced SROP map: [Xt(A)]_i = [X(A)]_{2i-1} - [X(A)]_{2i},
/// i = 1..floor(n/2). An odd trailing measurement is dropped.
class DifferencedEnsemble {
 public:
  explicit DifferencedEnsemble(Ensemble base);

  const Ensemble& base() const { return base_; }
  Index size() const { return m_; }
  Index rows() const { return base_.rows(); }
  Index cols() const { return base_.cols(); }

  Vector forward(const Matrix& a) const;
  /// sum_i z_i (b_{2i-1} b_{2i-1}^T - b_{2i} b_{2i}^T).
  Matrix adjoint(const Vector& z) const;
  Matrix materialize() const;

  /// D v with (D v)_i = v_{2i-1} - v_{2i}; v has length base().size().
  Vector difference(const Vector& v) const;
  /// D^T z, length base().size().
  Vector difference_adjoint(const Vector& z) const;

 private:
  Ensemble base_;
  Index m_;
};

struct Differenced {
  DifferencedEnsemble map;
  Vector y;
};

/// Builds (Xt, yt) from an SROP ensemble and its observations.
Differenced pairwise_difference(const Ensemble& ens, const Vector& y);

}  // namespace rop
