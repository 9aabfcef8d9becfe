#pragma once

// Dense 3-mode tensor algebra: storage, mode-d unfolding/folding,
// Khatri-Rao products, CP reconstruction and the PSD pseudo-inverse used by
// the least-squares factor updates.
//
// Storage is column-major over (i, j, k): offset = i + N1 * (j + N2 * k).
// Unfolding column orders are
//   mode 1: j + N2 * k      mode 2: i + N1 * k      mode 3: i + N1 * j
// which are the orders under which X_(1) = A (C ⊙ B)^T, X_(2) = B (C ⊙ A)^T
// and X_(3) = C (B ⊙ A)^T hold.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "notf/errors.hpp"

namespace notf {

using Matrix = Eigen::MatrixXd;
using Dims = std::array<std::size_t, 3>;

inline std::string to_string(const Dims& d) {
  return std::to_string(d[0]) + "x" + std::to_string(d[1]) + "x" + std::to_string(d[2]);
}

inline std::size_t volume(const Dims& d) { return d[0] * d[1] * d[2]; }

class Tensor3 {
 public:
  Tensor3() = default;

  explicit Tensor3(Dims dims, double fill = 0.0) : dims_(dims), values_(volume(dims), fill) {
    check_dims(dims_);
  }

  Tensor3(Dims dims, std::vector<double> values) : dims_(dims), values_(std::move(values)) {
    check_dims(dims_);
    if (values_.size() != volume(dims_)) {
      throw DimensionError("tensor " + to_string(dims_) + " needs " + std::to_string(volume(dims_)) +
                           " values, got " + std::to_string(values_.size()));
    }
  }

  const Dims& dims() const noexcept { return dims_; }
  std::size_t dim(int mode) const { return dims_.at(static_cast<std::size_t>(mode - 1)); }
  std::size_t size() const noexcept { return values_.size(); }

  std::size_t offset(std::size_t i, std::size_t j, std::size_t k) const noexcept {
    return i + dims_[0] * (j + dims_[1] * k);
  }

  double& operator()(std::size_t i, std::size_t j, std::size_t k) noexcept { return values_[offset(i, j, k)]; }
  double operator()(std::size_t i, std::size_t j, std::size_t k) const noexcept {
    return values_[offset(i, j, k)];
  }

  double& operator[](std::size_t n) noexcept { return values_[n]; }
  double operator[](std::size_t n) const noexcept { return values_[n]; }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  double* data() noexcept { return values_.data(); }
  const double* data() const noexcept { return values_.data(); }

  bool same_shape(const Tensor3& other) const noexcept { return dims_ == other.dims_; }

  // Vector-space operations used by the ADMM loop.
  Tensor3& operator+=(const Tensor3& rhs) {
    require_same_shape(rhs, "+=");
    for (std::size_t n = 0; n < values_.size(); ++n) values_[n] += rhs.values_[n];
    return *this;
  }
  Tensor3& operator-=(const Tensor3& rhs) {
    require_same_shape(rhs, "-=");
    for (std::size_t n = 0; n < values_.size(); ++n) values_[n] -= rhs.values_[n];
    return *this;
  }
  Tensor3& operator*=(double s) noexcept {
    for (auto& v : values_) v *= s;
    return *this;
  }
  friend Tensor3 operator+(Tensor3 lhs, const Tensor3& rhs) { return lhs += rhs; }
  friend Tensor3 operator-(Tensor3 lhs, const Tensor3& rhs) { return lhs -= rhs; }
  friend Tensor3 operator*(Tensor3 lhs, double s) { return lhs *= s; }

  friend bool operator==(const Tensor3&, const Tensor3&) = default;

  void require_same_shape(const Tensor3& other, const char* where) const {
    if (!same_shape(other)) {
      throw DimensionError(std::string(where) + ": shape " + to_string(dims_) + " vs " + to_string(other.dims_));
    }
  }

 private:
  static void check_dims(const Dims& d) {
    if (d[0] == 0 || d[1] == 0 || d[2] == 0) throw DimensionError("tensor dims must be positive, got " + to_string(d));
  }

  Dims dims_{1, 1, 1};
  std::vector<double> values_ = std::vector<double>(1, 0.0);
};

struct FactorTriple {
  Matrix A;
  Matrix B;
  Matrix C;

  FactorTriple() = default;
  FactorTriple(Matrix a, Matrix b, Matrix c) : A(std::move(a)), B(std::move(b)), C(std::move(c)) {
    if (A.cols() != B.cols() || A.cols() != C.cols()) {
      throw DimensionError("factor column counts differ: " + std::to_string(A.cols()) + ", " +
                           std::to_string(B.cols()) + ", " + std::to_string(C.cols()));
    }
  }

  Eigen::Index rank() const noexcept { return A.cols(); }
  Dims dims() const {
    return {static_cast<std::size_t>(A.rows()), static_cast<std::size_t>(B.rows()),
            static_cast<std::size_t>(C.rows())};
  }
  const Matrix& factor(int mode) const {
    switch (mode) {
      case 1: return A;
      case 2: return B;
      case 3: return C;
      default: throw DimensionError("mode must be 1, 2 or 3");
    }
  }

  static FactorTriple zeros(const Dims& dims, Eigen::Index rank) {
    return {Matrix::Zero(static_cast<Eigen::Index>(dims[0]), rank),
            Matrix::Zero(static_cast<Eigen::Index>(dims[1]), rank),
            Matrix::Zero(static_cast<Eigen::Index>(dims[2]), rank)};
  }

  friend bool operator==(const FactorTriple& a, const FactorTriple& b) {
    auto eq = [](const Matrix& x, const Matrix& y) {
      return x.rows() == y.rows() && x.cols() == y.cols() && x == y;
    };
    return eq(a.A, b.A) && eq(a.B, b.B) && eq(a.C, b.C);
  }
};

namespace detail {
inline void check_mode(int mode) {
  if (mode < 1 || mode > 3) throw DimensionError("mode must be 1, 2 or 3, got " + std::to_string(mode));
}
inline Eigen::Index idx(std::size_t n) { return static_cast<Eigen::Index>(n); }
}  // namespace detail

inline Matrix unfold(const Tensor3& t, int mode) {
  detail::check_mode(mode);
  const auto [n1, n2, n3] = t.dims();
  using detail::idx;
  using ConstMap = Eigen::Map<const Matrix>;
  switch (mode) {
    case 1:
      return ConstMap(t.data(), idx(n1), idx(n2 * n3));
    case 2: {
      Matrix m(idx(n2), idx(n1 * n3));
      for (std::size_t k = 0; k < n3; ++k) {
        m.middleCols(idx(n1 * k), idx(n1)) = ConstMap(t.data() + n1 * n2 * k, idx(n1), idx(n2)).transpose();
      }
      return m;
    }
    default:
      return ConstMap(t.data(), idx(n1 * n2), idx(n3)).transpose();
  }
}

inline Tensor3 fold(const Matrix& m, int mode, const Dims& dims) {
  detail::check_mode(mode);
  const auto [n1, n2, n3] = dims;
  using detail::idx;
  const std::size_t rows = dims[static_cast<std::size_t>(mode - 1)];
  const std::size_t cols = volume(dims) / rows;
  if (static_cast<std::size_t>(m.rows()) != rows || static_cast<std::size_t>(m.cols()) != cols) {
    throw DimensionError("fold mode " + std::to_string(mode) + " into " + to_string(dims) + " needs " +
                         std::to_string(rows) + "x" + std::to_string(cols) + ", got " + std::to_string(m.rows()) +
                         "x" + std::to_string(m.cols()));
  }
  Tensor3 t(dims);
  using Map = Eigen::Map<Matrix>;
  switch (mode) {
    case 1:
      Map(t.data(), idx(n1), idx(n2 * n3)) = m;
      break;
    case 2:
      for (std::size_t k = 0; k < n3; ++k) {
        Map(t.data() + n1 * n2 * k, idx(n1), idx(n2)) = m.middleCols(idx(n1 * k), idx(n1)).transpose();
      }
      break;
    default:
      Map(t.data(), idx(n1 * n2), idx(n3)) = m.transpose();
  }
  return t;
}

// Column r of the result is kron(a_r, b_r): row index ia * b.rows() + ib.
inline Matrix khatri_rao(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw DimensionError("khatri_rao: column counts differ (" + std::to_string(a.cols()) + " vs " +
                         std::to_string(b.cols()) + ")");
  }
  Matrix out(a.rows() * b.rows(), a.cols());
  for (Eigen::Index r = 0; r < a.cols(); ++r) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      out.col(r).segment(i * b.rows(), b.rows()) = a(i, r) * b.col(r);
    }
  }
  return out;
}

inline Tensor3 cp_reconstruct(const FactorTriple& f) {
  const Dims dims = f.dims();
  Tensor3 t(dims);
  Eigen::Map<Matrix>(t.data(), f.A.rows(), f.B.rows() * f.C.rows()).noalias() =
      f.A * khatri_rao(f.C, f.B).transpose();
  return t;
}

// Moore-Penrose pseudo-inverse of a symmetric PSD matrix via eigendecomposition.
// Eigenvalues at or below rcond * lambda_max count as zero.
inline Matrix pinv_psd(const Matrix& g, double rcond = 1e-10) {
  if (g.rows() != g.cols()) {
    throw DimensionError("pinv_psd: matrix must be square, got " + std::to_string(g.rows()) + "x" +
                         std::to_string(g.cols()));
  }
  if (g.size() == 0) return g;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(g);
  const auto& values = eig.eigenvalues();
  const double cutoff = rcond * std::max(values.maxCoeff(), 0.0);
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(values.size());
  for (Eigen::Index n = 0; n < values.size(); ++n) {
    if (values(n) > cutoff && values(n) > 0.0) inv(n) = 1.0 / values(n);
  }
  const Matrix& v = eig.eigenvectors();
  return v * inv.asDiagonal() * v.transpose();
}

// Rescales each rank-one component so that its three columns have equal
// 2-norm. A component with a zero column is zeroed entirely. The CP
// reconstruction is unchanged.
inline FactorTriple balance_columns(FactorTriple f) {
  for (Eigen::Index r = 0; r < f.rank(); ++r) {
    const double na = f.A.col(r).norm();
    const double nb = f.B.col(r).norm();
    const double nc = f.C.col(r).norm();
    if (na == 0.0 || nb == 0.0 || nc == 0.0) {
      f.A.col(r).setZero();
      f.B.col(r).setZero();
      f.C.col(r).setZero();
      continue;
    }
    const double w = std::cbrt(na) * std::cbrt(nb) * std::cbrt(nc);
    f.A.col(r) *= w / na;
    f.B.col(r) *= w / nb;
    f.C.col(r) *= w / nc;
  }
  return f;
}

inline std::size_t count_nonzero(const Tensor3& t) noexcept {
  std::size_t n = 0;
  for (double v : t.values()) n += (v != 0.0);
  return n;
}

inline double frobenius_norm(const Tensor3& t) noexcept {
  double s = 0.0;
  for (double v : t.values()) s += v * v;
  return std::sqrt(s);
}

inline bool all_finite(const Tensor3& t) noexcept {
  for (double v : t.values())
    if (!std::isfinite(v)) return false;
  return true;
}

inline bool all_finite(const FactorTriple& f) noexcept {
  return f.A.allFinite() && f.B.allFinite() && f.C.allFinite();
}

}  // namespace notf
