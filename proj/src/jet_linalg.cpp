#include "webcurv/jet_linalg.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "webcurv/error.hpp"

namespace webcurv {

JetScalar JetScalar::from_jet(const Jet& j) {
  if (j.order() < 1) {
    throw Error(ErrorCode::InsufficientJetOrder,
                "need a jet of order >= 1 to read first derivatives");
  }
  return {j.coeff(0, 0), j.coeff(1, 0), j.coeff(0, 1)};
}

RealMatrix value_part(const JetMatrix& m) {
  RealMatrix r(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) r(i, j) = m(i, j).value;
  return r;
}

RealMatrix slot_part(const JetMatrix& m, Axis a) {
  RealMatrix r(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) r(i, j) = m(i, j).slot(a);
  return r;
}

JetMatrix lu_solve(const JetMatrix& m, const JetMatrix& b) {
  const std::size_t n = m.rows();
  if (m.cols() != n || b.rows() != n) {
    throw Error(ErrorCode::InvalidArgument,
                "lu_solve needs a square matrix and a matching right-hand side");
  }
  JetMatrix a = m;
  JetMatrix rhs = b;

  // Row scaling by the largest value-slot entry.
  for (std::size_t i = 0; i < n; ++i) {
    Scalar big = 0;
    for (std::size_t j = 0; j < n; ++j) big = std::max(big, std::abs(a(i, j).value));
    if (big == 0) {
      throw SingularMatrixError(0, 0.0, "lu_solve: zero row " + std::to_string(i));
    }
    const JetScalar inv(1.0 / big);
    for (std::size_t j = 0; j < n; ++j) a(i, j) *= inv;
    for (std::size_t j = 0; j < rhs.cols(); ++j) rhs(i, j) *= inv;
  }

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    Scalar best = std::abs(a(k, k).value);
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(a(i, k).value) > best) {
        best = std::abs(a(i, k).value);
        piv = i;
      }
    }
    if (best <= kPivotEpsilon) {
      std::ostringstream msg;
      msg << "singular matrix: best pivot " << best << " at elimination step "
          << k;
      throw SingularMatrixError(k, best, msg.str());
    }
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
      for (std::size_t j = 0; j < rhs.cols(); ++j) std::swap(rhs(k, j), rhs(piv, j));
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const JetScalar factor = a(i, k) / a(k, k);
      if (factor.value == 0 && factor.dx == 0 && factor.dy == 0) continue;
      for (std::size_t j = k; j < n; ++j) a(i, j) -= factor * a(k, j);
      for (std::size_t j = 0; j < rhs.cols(); ++j) rhs(i, j) -= factor * rhs(k, j);
    }
  }

  JetMatrix z(n, rhs.cols());
  for (std::size_t c = 0; c < rhs.cols(); ++c) {
    for (std::size_t i = n; i-- > 0;) {
      JetScalar acc = rhs(i, c);
      for (std::size_t j = i + 1; j < n; ++j) acc -= a(i, j) * z(j, c);
      z(i, c) = acc / a(i, i);
    }
  }
  return z;
}

JetVector lu_solve(const JetMatrix& m, const JetVector& b) {
  JetMatrix rhs(b.size(), 1);
  for (std::size_t i = 0; i < b.size(); ++i) rhs(i, 0) = b[i];
  const JetMatrix z = lu_solve(m, rhs);
  JetVector out(z.rows());
  for (std::size_t i = 0; i < z.rows(); ++i) out[i] = z(i, 0);
  return out;
}

JetMatrix inverse(const JetMatrix& m) {
  return lu_solve(m, JetMatrix::identity(m.rows()));
}

JetVector last_row_of_inverse(const JetMatrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw Error(ErrorCode::InvalidArgument,
                "last_row_of_inverse needs a non-empty square matrix");
  }
  JetVector unit(m.rows(), JetScalar(0));
  unit.back() = JetScalar(1);
  return lu_solve(m.transpose(), unit);
}

std::size_t numeric_rank(const RealMatrix& m, Scalar relative_tol) {
  RealMatrix a = m;
  const std::size_t rows = a.rows(), cols = a.cols();
  Scalar scale = 0;
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) scale = std::max(scale, std::abs(a(i, j)));
  if (scale == 0) return 0;

  std::size_t rank = 0;
  std::vector<bool> used_col(cols, false);
  for (std::size_t r = 0; r < rows && rank < std::min(rows, cols); ++r) {
    // Full pivoting over the remaining sub-matrix.
    Scalar best = 0;
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = rank; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j)
        if (!used_col[j] && std::abs(a(i, j)) > best) {
          best = std::abs(a(i, j));
          bi = i;
          bj = j;
        }
    if (best <= relative_tol * scale) break;
    for (std::size_t j = 0; j < cols; ++j) std::swap(a(rank, j), a(bi, j));
    used_col[bj] = true;
    for (std::size_t i = rank + 1; i < rows; ++i) {
      const Scalar f = a(i, bj) / a(rank, bj);
      for (std::size_t j = 0; j < cols; ++j) a(i, j) -= f * a(rank, j);
    }
    ++rank;
  }
  return rank;
}

JetVector nullspace_vector(const JetMatrix& m) {
  const std::size_t rows = m.rows(), cols = m.cols();
  if (cols == 0 || rows + 1 != cols) {
    throw Error(ErrorCode::InvalidArgument,
                "nullspace_vector needs an (n-1) x n matrix");
  }
  if (numeric_rank(value_part(m)) < rows) {
    throw Error(ErrorCode::RankDeficient,
                "matrix has row rank below its row count");
  }
  const JetMatrix lead = m.block(0, 0, rows, rows);
  JetVector rhs(rows);
  for (std::size_t i = 0; i < rows; ++i) rhs[i] = -m(i, cols - 1);
  JetVector z;
  try {
    z = lu_solve(lead, rhs);
  } catch (const SingularMatrixError& e) {
    throw Error(ErrorCode::BadNormalization,
                std::string("kernel vector has vanishing last component (") +
                    e.what() + ")");
  }
  z.push_back(JetScalar(1));
  return z;
}

}  // namespace webcurv
