#pragma once

// Dense linear algebra over first-order jets. Every solved quantity carries
// its own x and y derivatives, which is what the curvature needs.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "webcurv/jet.hpp"

namespace webcurv {

/// A jet truncated at total order 1: value and the two first partials.
struct JetScalar {
  Scalar value = 0;
  Scalar dx = 0;
  Scalar dy = 0;

  constexpr JetScalar() = default;
  constexpr JetScalar(Scalar v) : value(v) {}  // NOLINT: constants promote
  constexpr JetScalar(Scalar v, Scalar x, Scalar y) : value(v), dx(x), dy(y) {}

  /// Reads (value, d/dx, d/dy) off a jet of order >= 1.
  static JetScalar from_jet(const Jet& j);

  Scalar slot(Axis a) const noexcept { return a == Axis::X ? dx : dy; }

  JetScalar& operator+=(const JetScalar& o) {
    value += o.value;
    dx += o.dx;
    dy += o.dy;
    return *this;
  }
  JetScalar& operator-=(const JetScalar& o) {
    value -= o.value;
    dx -= o.dx;
    dy -= o.dy;
    return *this;
  }
  JetScalar& operator*=(const JetScalar& o) {
    dx = dx * o.value + value * o.dx;
    dy = dy * o.value + value * o.dy;
    value *= o.value;
    return *this;
  }
  JetScalar& operator/=(const JetScalar& o) {
    const Scalar q = value / o.value;
    dx = (dx - q * o.dx) / o.value;
    dy = (dy - q * o.dy) / o.value;
    value = q;
    return *this;
  }

  friend JetScalar operator+(JetScalar a, const JetScalar& b) { return a += b; }
  friend JetScalar operator-(JetScalar a, const JetScalar& b) { return a -= b; }
  friend JetScalar operator*(JetScalar a, const JetScalar& b) { return a *= b; }
  friend JetScalar operator/(JetScalar a, const JetScalar& b) { return a /= b; }
  friend JetScalar operator-(const JetScalar& a) { return {-a.value, -a.dx, -a.dy}; }
};

inline Scalar value_of(Scalar s) { return s; }
inline Scalar value_of(const JetScalar& s) { return s.value; }

/// Largest magnitude over the three slots.
inline Scalar max_slot(const JetScalar& s) {
  return std::max({std::abs(s.value), std::abs(s.dx), std::abs(s.dy)});
}
inline Scalar max_slot(Scalar s) { return std::abs(s); }

/// Row-major dense matrix.
template <typename T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, T(0)) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t k = 0; k < n; ++k) m(k, k) = T(1);
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  Matrix transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
  }

  /// Copies rows [r0, r0+nr) x cols [c0, c0+nc).
  Matrix block(std::size_t r0, std::size_t c0, std::size_t nr,
               std::size_t nc) const {
    Matrix b(nr, nc);
    for (std::size_t r = 0; r < nr; ++r)
      for (std::size_t c = 0; c < nc; ++c) b(r, c) = (*this)(r0 + r, c0 + c);
    return b;
  }

  void set_block(std::size_t r0, std::size_t c0, const Matrix& b) {
    for (std::size_t r = 0; r < b.rows(); ++r)
      for (std::size_t c = 0; c < b.cols(); ++c) (*this)(r0 + r, c0 + c) = b(r, c);
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using JetMatrix = Matrix<JetScalar>;
using JetVector = std::vector<JetScalar>;
using RealMatrix = Matrix<Scalar>;

template <typename T>
Matrix<T> operator*(const Matrix<T>& a, const Matrix<T>& b) {
  Matrix<T> r(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const T& aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) r(i, j) += aik * b(k, j);
    }
  return r;
}

template <typename T>
std::vector<T> operator*(const Matrix<T>& a, const std::vector<T>& v) {
  std::vector<T> r(a.rows(), T(0));
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) r[i] += a(i, k) * v[k];
  return r;
}

template <typename T>
Matrix<T> operator-(const Matrix<T>& a, const Matrix<T>& b) {
  Matrix<T> r = a;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) r(i, j) -= b(i, j);
  return r;
}

template <typename T>
Matrix<T> operator+(const Matrix<T>& a, const Matrix<T>& b) {
  Matrix<T> r = a;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) r(i, j) += b(i, j);
  return r;
}

/// Value / d/dx / d/dy slot of every entry.
RealMatrix value_part(const JetMatrix& m);
RealMatrix slot_part(const JetMatrix& m, Axis a);

/// Pivot threshold applied after each row is scaled by its largest value.
inline constexpr Scalar kPivotEpsilon = 1e-10;

/// Solves M z = b with scaled partial pivoting on the value slot.
/// Throws SingularMatrixError naming the step and best pivot.
JetVector lu_solve(const JetMatrix& m, const JetVector& b);

/// Solves M Z = B column by column.
JetMatrix lu_solve(const JetMatrix& m, const JetMatrix& b);

JetMatrix inverse(const JetMatrix& m);

/// Row vector rho with rho M = (0, ..., 0, 1).
JetVector last_row_of_inverse(const JetMatrix& m);

/// Kernel vector of a (n-1) x n matrix normalized to last component 1.
/// Throws RankDeficient when the rows are dependent and BadNormalization when
/// the kernel's last component vanishes.
JetVector nullspace_vector(const JetMatrix& m);

/// Numerical row rank of the value slot via fully pivoted elimination.
std::size_t numeric_rank(const RealMatrix& m, Scalar relative_tol = 1e-10);

}  // namespace webcurv
