#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace rop {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Throws std::invalid_argument naming `what` if any entry is NaN or infinite.
void require_finite(const Matrix& m, std::string_view what);
void require_finite(const Vector& v, std::string_view what);

/// Thin SVD, M = U diag(s) V^T with s sorted nonincreasing.
struct SvdResult {
  Matrix left;    // rows x k
  Vector values;  // k = min(rows, cols)
  Matrix right;   // cols x k

  Matrix reconstruct() const;
};

SvdResult svd(const Matrix& m);
Vector singular_values(const Matrix& m);

struct Norms {
  double frobenius = 0.0;
  double spectral = 0.0;
  double nuclear = 0.0;
};

Norms norms(const Matrix& m);
double nuclear_norm(const Matrix& m);
double spectral_norm(const Matrix& m);

/// Best rank-r approximation (`head`) and the remainder (`tail`), head + tail = M.
struct RankSplit {
  Matrix head;
  Matrix tail;
};

RankSplit truncate_rank(const Matrix& m, Index r);

/// Seeded generator. The stream is a pure function of (algorithm, seed);
/// per-trial streams come from split(), never from sharing one handle.
class Rng {
 public:
  static constexpr std::string_view kAlgorithm = "mt19937_64+splitmix64";

  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t seed() const { return seed_; }
  std::string algorithm() const { return std::string(kAlgorithm); }

  /// Independent child stream keyed by `stream`.
  Rng split(std::uint64_t stream) const;

  double normal();
  double uniform(double lo, double hi);
  std::uint64_t next_u64();
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

  Matrix normal_matrix(Index rows, Index cols);
  Vector normal_vector(Index n);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

std::uint64_t splitmix64(std::uint64_t x);

/// Haar-distributed p x k matrix with orthonormal columns.
Matrix haar_orthonormal(Index p, Index k, Rng& rng);

enum class LowRankMode { FactorProduct, DecayingSpectrum };

std::string to_string(LowRankMode mode);
LowRankMode parse_low_rank_mode(std::string_view name);

/// FactorProduct: A = X^T Y with X (r x p1), Y (r x p2) standard Gaussian.
/// DecayingSpectrum: A = U diag(1, 2^{-1/2}, ..., r^{-1/2}) V^T with Haar U, V.
Matrix random_low_rank(Index p1, Index p2, Index r, LowRankMode mode, Rng& rng);

/// Number of singular values above `tol` * max(1, sigma_1).
Index numerical_rank(const Matrix& m, double tol = 1e-10);

inline Vector vec(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }
inline Matrix unvec(const Vector& v, Index rows, Index cols) {
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

}  // namespace rop
