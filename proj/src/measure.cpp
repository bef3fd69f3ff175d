#include "rop/measure.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace rop {

namespace {

constexpr std::array<char, 8> kMagic = {'R', 'O', 'P', 'E', 'N', 'S', '0', '1'};

template <typename T>
T to_little(T value) {
  if constexpr (std::endian::native == std::endian::little) {
    return value;
  } else {
    std::array<unsigned char, sizeof(T)> bytes;
    std::memcpy(bytes.data(), &value, sizeof(T));
    std::reverse(bytes.begin(), bytes.end());
    std::memcpy(&value, bytes.data(), sizeof(T));
    return value;
  }
}

template <typename T>
void write_le(std::ostream& out, T value) {
  value = to_little(value);
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_le(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw std::runtime_error("ensemble file truncated");
  return to_little(value);
}

void write_rows(std::ostream& out, const Matrix& m) {
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) write_le(out, m(i, j));
}

Matrix read_rows(std::istream& in, Index rows, Index cols) {
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = read_le<double>(in);
  return m;
}

}  // namespace

std::string to_string(Distribution d) {
  switch (d) {
    case Distribution::Gaussian: return "gaussian";
    case Distribution::Rademacher: return "rademacher";
    case Distribution::UniformSym: return "uniform";
  }
  return "?";
}

Distribution parse_distribution(std::string_view name) {
  if (name == "gaussian") return Distribution::Gaussian;
  if (name == "rademacher") return Distribution::Rademacher;
  if (name == "uniform") return Distribution::UniformSym;
  throw std::invalid_argument("unknown distribution '" + std::string(name) + "'");
}

double draw(Distribution d, Rng& rng) {
  switch (d) {
    case Distribution::Gaussian: return rng.normal();
    case Distribution::Rademacher: return (rng.next_u64() >> 63) ? 1.0 : -1.0;
    case Distribution::UniformSym: {
      const double a = std::sqrt(3.0);
      return rng.uniform(-a, a);
    }
  }
  return 0.0;
}

std::string to_string(EnsembleKind k) {
  switch (k) {
    case EnsembleKind::Rop: return "rop";
    case EnsembleKind::Srop: return "srop";
    case EnsembleKind::GaussianEnsemble: return "gaussian-ensemble";
  }
  return "?";
}

EnsembleKind parse_ensemble_kind(std::string_view name) {
  if (name == "rop") return EnsembleKind::Rop;
  if (name == "srop") return EnsembleKind::Srop;
  if (name == "gaussian-ensemble" || name == "ge") return EnsembleKind::GaussianEnsemble;
  throw std::invalid_argument("unknown ensemble kind '" + std::string(name) + "'");
}

namespace {

Matrix draw_matrix(Index rows, Index cols, Distribution dist, Rng& rng) {
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = draw(dist, rng);
  return m;
}

}  // namespace

Ensemble Ensemble::sample(EnsembleKind kind, Index p1, Index p2, Index n, Distribution dist,
                          Rng& rng) {
  if (n < 1) throw std::invalid_argument("sample_ensemble: n must be >= 1");
  if (p1 < 1 || p2 < 1) throw std::invalid_argument("sample_ensemble: dimensions must be >= 1");
  switch (kind) {
    case EnsembleKind::Rop: {
      Matrix b = draw_matrix(n, p1, dist, rng);
      Matrix g = draw_matrix(n, p2, dist, rng);
      return rop(std::move(b), std::move(g), dist);
    }
    case EnsembleKind::Srop:
      if (p1 != p2) {
        throw std::invalid_argument("sample_ensemble: SROP requires p1 == p2 (got " +
                                    std::to_string(p1) + "x" + std::to_string(p2) + ")");
      }
      return srop(draw_matrix(n, p1, dist, rng), dist);
    case EnsembleKind::GaussianEnsemble: {
      Matrix mats(n, p1 * p2);
      for (Index i = 0; i < n; ++i)
        for (Index a = 0; a < p1; ++a)
          for (Index b = 0; b < p2; ++b) mats(i, a + b * p1) = draw(dist, rng);
      Ensemble e = gaussian(std::move(mats), p1, p2);
      e.dist_ = dist;
      return e;
    }
  }
  throw std::logic_error("unreachable");
}

Ensemble Ensemble::rop(Matrix betas, Matrix gammas, Distribution dist) {
  if (betas.rows() != gammas.rows() || betas.rows() < 1) {
    throw std::invalid_argument("ROP ensemble: beta and gamma counts must match and be >= 1");
  }
  Ensemble e;
  e.kind_ = EnsembleKind::Rop;
  e.dist_ = dist;
  e.n_ = betas.rows();
  e.p1_ = betas.cols();
  e.p2_ = gammas.cols();
  e.data_ = std::make_shared<const Storage>(Storage{std::move(betas), std::move(gammas), {}});
  return e;
}

Ensemble Ensemble::srop(Matrix betas, Distribution dist) {
  if (betas.rows() < 1) throw std::invalid_argument("SROP ensemble: need at least one vector");
  Ensemble e;
  e.kind_ = EnsembleKind::Srop;
  e.dist_ = dist;
  e.n_ = betas.rows();
  e.p1_ = e.p2_ = betas.cols();
  e.data_ = std::make_shared<const Storage>(Storage{std::move(betas), {}, {}});
  return e;
}

Ensemble Ensemble::gaussian(Matrix mats, Index p1, Index p2) {
  if (mats.cols() != p1 * p2 || mats.rows() < 1) {
    throw std::invalid_argument("Gaussian ensemble: expected n x (p1 p2) matrix");
  }
  Ensemble e;
  e.kind_ = EnsembleKind::GaussianEnsemble;
  e.n_ = mats.rows();
  e.p1_ = p1;
  e.p2_ = p2;
  e.data_ = std::make_shared<const Storage>(Storage{{}, {}, std::move(mats)});
  return e;
}

const Matrix& Ensemble::betas() const {
  if (kind_ == EnsembleKind::GaussianEnsemble) throw std::logic_error("Gaussian ensemble has no factors");
  return data_->betas;
}

const Matrix& Ensemble::gammas() const {
  if (kind_ == EnsembleKind::GaussianEnsemble) throw std::logic_error("Gaussian ensemble has no factors");
  return kind_ == EnsembleKind::Srop ? data_->betas : data_->gammas;
}

const Matrix& Ensemble::mats() const {
  if (kind_ != EnsembleKind::GaussianEnsemble) throw std::logic_error("factor ensemble has no dense matrices");
  return data_->mats;
}

void Ensemble::check_matrix(const Matrix& a, std::string_view op) const {
  if (a.rows() != p1_ || a.cols() != p2_) {
    throw std::invalid_argument(std::string(op) + ": expected " + std::to_string(p1_) + "x" +
                                std::to_string(p2_) + " matrix, got " +
                                std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
  }
}

Vector Ensemble::forward(const Matrix& a) const {
  check_matrix(a, "forward");
  if (kind_ == EnsembleKind::GaussianEnsemble) {
    return data_->mats * Eigen::Map<const Vector>(a.data(), a.size());
  }
  const Matrix& b = data_->betas;
  const Matrix& g = gammas();
  return (b * a).cwiseProduct(g).rowwise().sum();
}

Matrix Ensemble::adjoint(const Vector& z) const {
  if (z.size() != n_) {
    throw std::invalid_argument("adjoint: expected vector of length " + std::to_string(n_) +
                                ", got " + std::to_string(z.size()));
  }
  if (kind_ == EnsembleKind::GaussianEnsemble) {
    const Vector flat = data_->mats.transpose() * z;
    return unvec(flat, p1_, p2_);
  }
  const Matrix& b = data_->betas;
  const Matrix& g = gammas();
  return b.transpose() * (z.asDiagonal() * g);
}

Matrix Ensemble::measurement(Index i) const {
  if (i < 0 || i >= n_) throw std::out_of_range("measurement index");
  if (kind_ == EnsembleKind::GaussianEnsemble) return unvec(data_->mats.row(i).transpose(), p1_, p2_);
  return data_->betas.row(i).transpose() * gammas().row(i);
}

Matrix Ensemble::materialize() const {
  if (kind_ == EnsembleKind::GaussianEnsemble) return data_->mats;
  const Matrix& b = data_->betas;
  const Matrix& g = gammas();
  Matrix out(n_, p1_ * p2_);
  for (Index col = 0; col < p2_; ++col) {
    out.middleCols(col * p1_, p1_) = b.array().colwise() * g.col(col).array();
  }
  return out;
}

Matrix Ensemble::gram() const {
  if (kind_ == EnsembleKind::GaussianEnsemble) return data_->mats * data_->mats.transpose();
  const Matrix bb = data_->betas * data_->betas.transpose();
  if (kind_ == EnsembleKind::Srop) return bb.cwiseProduct(bb);
  const Matrix gg = data_->gammas * data_->gammas.transpose();
  return bb.cwiseProduct(gg);
}

Ensemble Ensemble::subset(std::span<const Index> indices) const {
  if (indices.empty()) throw std::invalid_argument("subset: empty index set");
  auto pick = [&](const Matrix& src) {
    Matrix out(static_cast<Index>(indices.size()), src.cols());
    for (std::size_t k = 0; k < indices.size(); ++k) {
      const Index i = indices[k];
      if (i < 0 || i >= n_) throw std::out_of_range("subset: index out of range");
      out.row(static_cast<Index>(k)) = src.row(i);
    }
    return out;
  };
  Ensemble e = *this;
  e.n_ = static_cast<Index>(indices.size());
  switch (kind_) {
    case EnsembleKind::Rop:
      e.data_ = std::make_shared<const Storage>(Storage{pick(data_->betas), pick(data_->gammas), {}});
      break;
    case EnsembleKind::Srop:
      e.data_ = std::make_shared<const Storage>(Storage{pick(data_->betas), {}, {}});
      break;
    case EnsembleKind::GaussianEnsemble:
      e.data_ = std::make_shared<const Storage>(Storage{{}, {}, pick(data_->mats)});
      break;
  }
  return e;
}

std::size_t Ensemble::storage_bytes() const {
  const auto n = static_cast<std::size_t>(n_);
  const auto p1 = static_cast<std::size_t>(p1_);
  const auto p2 = static_cast<std::size_t>(p2_);
  switch (kind_) {
    case EnsembleKind::Rop: return 8 * n * (p1 + p2);
    case EnsembleKind::Srop: return 8 * n * p1;
    case EnsembleKind::GaussianEnsemble: return 8 * n * p1 * p2;
  }
  return 0;
}

void Ensemble::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out.write(kMagic.data(), kMagic.size());
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(kind_));
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(dist_));
  write_le<std::uint64_t>(out, static_cast<std::uint64_t>(n_));
  write_le<std::uint64_t>(out, static_cast<std::uint64_t>(p1_));
  write_le<std::uint64_t>(out, static_cast<std::uint64_t>(p2_));
  switch (kind_) {
    case EnsembleKind::Rop:
      write_rows(out, data_->betas);
      write_rows(out, data_->gammas);
      break;
    case EnsembleKind::Srop:
      write_rows(out, data_->betas);
      break;
    case EnsembleKind::GaussianEnsemble:
      // Each X_i row-major.
      for (Index i = 0; i < n_; ++i)
        for (Index a = 0; a < p1_; ++a)
          for (Index b = 0; b < p2_; ++b) write_le(out, data_->mats(i, a + b * p1_));
      break;
  }
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

Ensemble Ensemble::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw std::runtime_error("'" + path.string() + "' is not an ensemble file");
  const auto kind = read_le<std::uint32_t>(in);
  const auto dist = read_le<std::uint32_t>(in);
  const auto n = static_cast<Index>(read_le<std::uint64_t>(in));
  const auto p1 = static_cast<Index>(read_le<std::uint64_t>(in));
  const auto p2 = static_cast<Index>(read_le<std::uint64_t>(in));
  if (kind > 2 || dist > 2 || n < 1 || p1 < 1 || p2 < 1) {
    throw std::runtime_error("corrupt ensemble header in '" + path.string() + "'");
  }
  const auto d = static_cast<Distribution>(dist);
  switch (static_cast<EnsembleKind>(kind)) {
    case EnsembleKind::Rop: {
      Matrix b = read_rows(in, n, p1);
      Matrix g = read_rows(in, n, p2);
      return rop(std::move(b), std::move(g), d);
    }
    case EnsembleKind::Srop:
      return srop(read_rows(in, n, p1), d);
    case EnsembleKind::GaussianEnsemble: {
      Matrix mats(n, p1 * p2);
      for (Index i = 0; i < n; ++i)
        for (Index a = 0; a < p1; ++a)
          for (Index b = 0; b < p2; ++b) mats(i, a + b * p1) = read_le<double>(in);
      Ensemble e = gaussian(std::move(mats), p1, p2);
      e.dist_ = d;
      return e;
    }
  }
  throw std::logic_error("unreachable");
}

bool operator==(const Ensemble& a, const Ensemble& b) {
  if (a.kind_ != b.kind_ || a.dist_ != b.dist_ || a.n_ != b.n_ || a.p1_ != b.p1_ || a.p2_ != b.p2_) {
    return false;
  }
  if (a.data_ == b.data_) return true;
  if (!a.data_ || !b.data_) return false;
  switch (a.kind_) {
    case EnsembleKind::Rop: return a.data_->betas == b.data_->betas && a.data_->gammas == b.data_->gammas;
    case EnsembleKind::Srop: return a.data_->betas == b.data_->betas;
    case EnsembleKind::GaussianEnsemble: return a.data_->mats == b.data_->mats;
  }
  return false;
}

DifferencedEnsemble::DifferencedEnsemble(Ensemble base) : base_(std::move(base)), m_(base_.size() / 2) {
  if (base_.kind() != EnsembleKind::Srop) {
    throw std::invalid_argument("pairwise differencing requires an SROP ensemble");
  }
  if (m_ < 1) throw std::invalid_argument("pairwise differencing needs n >= 2");
}

Vector DifferencedEnsemble::difference(const Vector& v) const {
  if (v.size() != base_.size()) throw std::invalid_argument("difference: length mismatch");
  Vector out(m_);
  for (Index i = 0; i < m_; ++i) out(i) = v(2 * i) - v(2 * i + 1);
  return out;
}

Vector DifferencedEnsemble::difference_adjoint(const Vector& z) const {
  if (z.size() != m_) throw std::invalid_argument("difference_adjoint: length mismatch");
  Vector out = Vector::Zero(base_.size());
  for (Index i = 0; i < m_; ++i) {
    out(2 * i) = z(i);
    out(2 * i + 1) = -z(i);
  }
  return out;
}

Vector DifferencedEnsemble::forward(const Matrix& a) const { return difference(base_.forward(a)); }

Matrix DifferencedEnsemble::adjoint(const Vector& z) const {
  if (z.size() != m_) {
    throw std::invalid_argument("adjoint: expected vector of length " + std::to_string(m_) +
                                ", got " + std::to_string(z.size()));
  }
  return base_.adjoint(difference_adjoint(z));
}

Matrix DifferencedEnsemble::materialize() const {
  const Matrix full = base_.materialize();
  Matrix out(m_, full.cols());
  for (Index i = 0; i < m_; ++i) out.row(i) = full.row(2 * i) - full.row(2 * i + 1);
  return out;
}

Differenced pairwise_difference(const Ensemble& ens, const Vector& y) {
  if (y.size() != ens.size()) {
    throw std::invalid_argument("pairwise_difference: y has length " + std::to_string(y.size()) +
                                ", ensemble has " + std::to_string(ens.size()));
  }
  DifferencedEnsemble map(ens);
  Vector yt = map.difference(y);
  return {std::move(map), std::move(yt)};
}

}  // namespace rop
