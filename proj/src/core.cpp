#include "rop/core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace rop {

void require_finite(const Matrix& m, std::string_view what) {
  if (!m.allFinite()) {
    throw std::invalid_argument(std::string(what) + ": matrix has non-finite entries");
  }
}

void require_finite(const Vector& v, std::string_view what) {
  if (!v.allFinite()) {
    throw std::invalid_argument(std::string(what) + ": vector has non-finite entries");
  }
}

Matrix SvdResult::reconstruct() const {
  return left * values.asDiagonal() * right.transpose();
}

SvdResult svd(const Matrix& m) {
  require_finite(m, "svd");
  const Index k = std::min(m.rows(), m.cols());
  if (k == 0) return {Matrix(m.rows(), 0), Vector(0), Matrix(m.cols(), 0)};
  // BDCSVD delegates to one-sided Jacobi below its block size.
  Eigen::BDCSVD<Matrix> dec(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {dec.matrixU(), dec.singularValues(), dec.matrixV()};
}

Vector singular_values(const Matrix& m) {
  require_finite(m, "singular_values");
  if (m.size() == 0) return Vector(0);
  Eigen::BDCSVD<Matrix> dec(m);
  return dec.singularValues();
}

Norms norms(const Matrix& m) {
  const Vector s = singular_values(m);
  Norms out;
  out.frobenius = m.norm();
  out.spectral = s.size() > 0 ? s(0) : 0.0;
  out.nuclear = s.sum();
  return out;
}

double nuclear_norm(const Matrix& m) { return singular_values(m).sum(); }

double spectral_norm(const Matrix& m) {
  const Vector s = singular_values(m);
  return s.size() > 0 ? s(0) : 0.0;
}

RankSplit truncate_rank(const Matrix& m, Index r) {
  const Index k = std::min(m.rows(), m.cols());
  if (r < 0 || r > k) {
    throw std::invalid_argument("truncate_rank: r=" + std::to_string(r) + " outside [0, " +
                                std::to_string(k) + "]");
  }
  if (r == 0) return {Matrix::Zero(m.rows(), m.cols()), m};
  if (r == k) return {m, Matrix::Zero(m.rows(), m.cols())};
  const SvdResult d = svd(m);
  Matrix head = d.left.leftCols(r) * d.values.head(r).asDiagonal() *
                d.right.leftCols(r).transpose();
  Matrix tail = m - head;
  return {std::move(head), std::move(tail)};
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

Rng Rng::split(std::uint64_t stream) const {
  return Rng(splitmix64(seed_ ^ splitmix64(stream + 0x632be59bd9b4e019ULL)));
}

double Rng::normal() { return normal_(engine_); }

double Rng::uniform(double lo, double hi) {
  // 53 random mantissa bits, independent of the standard library's canonical generator.
  const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

std::uint64_t Rng::next_u64() { return engine_(); }

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("Rng::below: bound must be positive");
  // Rejection sampling keeps the result unbiased.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return x % bound;
}

Matrix Rng::normal_matrix(Index rows, Index cols) {
  Matrix m(rows, cols);
  // Fill row by row so that the stream order matches the row-major layout of serialized data.
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = normal();
  return m;
}

Vector Rng::normal_vector(Index n) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = normal();
  return v;
}

Matrix haar_orthonormal(Index p, Index k, Rng& rng) {
  if (k > p) throw std::invalid_argument("haar_orthonormal: k > p");
  const Matrix g = rng.normal_matrix(p, k);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(p, k);
  const Matrix r = qr.matrixQR().topLeftCorner(k, k);
  // Sign fix on diag(R) makes the distribution exactly Haar.
  for (Index j = 0; j < k; ++j) {
    if (r(j, j) < 0) q.col(j) *= -1.0;
  }
  return q;
}

std::string to_string(LowRankMode mode) {
  return mode == LowRankMode::FactorProduct ? "factor-product" : "decaying-spectrum";
}

LowRankMode parse_low_rank_mode(std::string_view name) {
  if (name == "factor-product") return LowRankMode::FactorProduct;
  if (name == "decaying-spectrum") return LowRankMode::DecayingSpectrum;
  throw std::invalid_argument("unknown low-rank mode '" + std::string(name) + "'");
}

Matrix random_low_rank(Index p1, Index p2, Index r, LowRankMode mode, Rng& rng) {
  if (p1 <= 0 || p2 <= 0) throw std::invalid_argument("random_low_rank: dimensions must be positive");
  if (r < 0 || r > std::min(p1, p2)) {
    throw std::invalid_argument("random_low_rank: rank " + std::to_string(r) +
                                " out of range for " + std::to_string(p1) + "x" +
                                std::to_string(p2));
  }
  if (r == 0) return Matrix::Zero(p1, p2);
  if (mode == LowRankMode::FactorProduct) {
    const Matrix x = rng.normal_matrix(r, p1);
    const Matrix y = rng.normal_matrix(r, p2);
    return x.transpose() * y;
  }
  const Matrix u = haar_orthonormal(p1, r, rng);
  const Matrix v = haar_orthonormal(p2, r, rng);
  Vector s(r);
  for (Index i = 0; i < r; ++i) s(i) = 1.0 / std::sqrt(static_cast<double>(i + 1));
  return u * s.asDiagonal() * v.transpose();
}

Index numerical_rank(const Matrix& m, double tol) {
  const Vector s = singular_values(m);
  if (s.size() == 0) return 0;
  const double cut = tol * std::max(1.0, s(0));
  Index rank = 0;
  for (Index i = 0; i < s.size(); ++i)
    if (s(i) > cut) ++rank;
  return rank;
}

}  // namespace rop
