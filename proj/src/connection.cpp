#include "webcurv/connection.hpp"

#include <algorithm>
#include <string>

#include "webcurv/error.hpp"

namespace webcurv {
namespace {

using Row = std::vector<Jet>;  // coefficient jets of omega^1..omega^{level-1}

// d/daxis of sum_s c_s omega^s, using d(omega^s) = f_axis omega^{s+1}.
Row differentiate_row(const Row& row, const Jet& f_axis, Axis axis) {
  const int order = row.front().order() - 1;
  const Jet f_trunc = jet_truncate(f_axis, order);
  Row out(row.size() + 1, Jet(order, row.front().base_point()));
  for (std::size_t s = 0; s < row.size(); ++s) {
    out[s] += jet_partial(row[s], axis);
    out[s + 1] += jet_truncate(row[s], order) * f_trunc;
  }
  return out;
}

void require_min_order(std::span<const Jet> f, int order, const char* what) {
  for (const auto& j : f) {
    if (j.order() < order) {
      throw Error(ErrorCode::InsufficientJetOrder,
                  std::string(what) + ": integral jets of order " +
                      std::to_string(j.order()) + " given, need at least " +
                      std::to_string(order));
    }
  }
}

const RowSystem& level_of(const std::vector<RowSystem>& tower, int level) {
  return tower[static_cast<std::size_t>(level - 2)];
}

}  // namespace

void require_supported_size(int d) {
  if (d < kMinWebSize || d > kMaxWebSize) {
    throw Error(ErrorCode::UnsupportedWebSize,
                "web size d = " + std::to_string(d) + " outside the supported range [" +
                    std::to_string(kMinWebSize) + ", " +
                    std::to_string(kMaxWebSize) + "]");
  }
}

std::vector<Jet> web_jets(const WebDefinition& web, Point p, int order) {
  if (order <= 0) order = default_jet_order(web.d());
  std::vector<Jet> out;
  out.reserve(web.integrals.size());
  for (const auto& e : web.integrals) out.push_back(eval_jet(e, p, order));
  return out;
}

JetMatrix RowSystem::symbol_block(int s) const {
  JetMatrix m(static_cast<std::size_t>(level), static_cast<std::size_t>(d));
  for (int k = 0; k < level; ++k)
    for (int i = 0; i < d; ++i) m(k, i) = JetScalar::from_jet(at(k, s, i));
  return m;
}

JetMatrix RowSystem::g_matrix(int j) const {
  if (j < 2 || j > level - 1) {
    throw Error(ErrorCode::InvalidArgument,
                "G_r^j needs 2 <= j <= r-1 (r = " + std::to_string(level) +
                    ", j = " + std::to_string(j) + ")");
  }
  return symbol_block(level - j);
}

std::vector<RowSystem> build_row_tower(std::span<const Jet> f, int max_level) {
  if (max_level < 2) {
    throw Error(ErrorCode::InvalidArgument, "row levels start at 2");
  }
  require_min_order(f, max_level, "build_rows");
  const int d = static_cast<int>(f.size());

  std::vector<Jet> fx, fy;
  for (const auto& j : f) {
    fx.push_back(jet_partial(j, Axis::X));
    fy.push_back(jet_partial(j, Axis::Y));
  }

  // rows[i][k]: row k of integral i at the current level.
  std::vector<std::vector<Row>> rows(d);
  for (int i = 0; i < d; ++i) rows[i] = {Row{fx[i]}, Row{fy[i]}};

  std::vector<RowSystem> tower;
  for (int level = 2;; ++level) {
    RowSystem sys;
    sys.level = level;
    sys.d = d;
    sys.coeff.assign(level, std::vector<std::vector<Jet>>(level - 1));
    for (int k = 0; k < level; ++k)
      for (int s = 0; s < level - 1; ++s)
        for (int i = 0; i < d; ++i) sys.coeff[k][s].push_back(rows[i][k][s]);
    tower.push_back(std::move(sys));
    if (level == max_level) break;

    for (int i = 0; i < d; ++i) {
      std::vector<Row> next;
      next.reserve(level + 1);
      for (int k = 0; k < level; ++k) {
        next.push_back(differentiate_row(rows[i][k], fx[i], Axis::X));
      }
      next.push_back(differentiate_row(rows[i][level - 1], fy[i], Axis::Y));
      rows[i] = std::move(next);
    }
  }
  return tower;
}

RowSystem build_rows(std::span<const Jet> f, int level) {
  return std::move(build_row_tower(f, level).back());
}

std::vector<BasisLabel> basis_labels(int d) {
  std::vector<BasisLabel> out;
  for (int r = 1; r <= d - 2; ++r)
    for (int i = r + 2; i <= d; ++i) out.push_back({r, i});
  return out;
}

namespace {

JetMatrix assemble_MM(const std::vector<RowSystem>& tower, int d) {
  const std::size_t rows = static_cast<std::size_t>((d + 1) * (d - 2) / 2);
  const std::size_t cols = static_cast<std::size_t>((d - 2) * d);
  JetMatrix mm(rows, cols);
  std::size_t row0 = 0;
  for (int level = 2; level <= d - 1; ++level) {
    const RowSystem& sys = level_of(tower, level);
    for (int s = 1; s <= level - 1; ++s) {
      mm.set_block(row0, coordinate_index(d, s, 1), sys.symbol_block(s));
    }
    row0 += static_cast<std::size_t>(level);
  }
  return mm;
}

KernelBasis assemble_basis(const std::vector<RowSystem>& tower, int d) {
  KernelBasis basis;
  basis.d = d;
  basis.labels = basis_labels(d);
  const std::size_t n = static_cast<std::size_t>((d - 2) * d);

  // Coefficient blocks per level, converted once.
  std::vector<std::vector<JetMatrix>> blocks(d + 1);
  for (int level = 2; level <= d - 1; ++level) {
    for (int s = 1; s <= level - 1; ++s) {
      blocks[level].push_back(level_of(tower, level).symbol_block(s));
    }
  }

  for (const auto& [r, i] : basis.labels) {
    JetVector v(n, JetScalar(0));
    v[coordinate_index(d, r, i)] = JetScalar(1);
    for (int s = r; s <= d - 2; ++s) {
      const int level = s + 1;
      const JetMatrix& p = blocks[level][s - 1];
      // rhs = -(sum_{t<s} C_t omega^t + P[:, beta part] beta^s)
      JetVector rhs(level, JetScalar(0));
      for (int t = 1; t <= s; ++t) {
        const JetMatrix& c = blocks[level][t - 1];
        const int first = (t == s) ? s + 1 : 0;  // beta columns only for t = s
        for (int k = 0; k < level; ++k)
          for (int j = first; j < d; ++j)
            rhs[k] -= c(k, j) * v[coordinate_index(d, t, j + 1)];
      }
      JetVector unknown;
      try {
        unknown = lu_solve(p.block(0, 0, level, level), rhs);
      } catch (const SingularMatrixError& e) {
        throw Error(ErrorCode::SingularLeadingBlock,
                    "leading block of P_" + std::to_string(level) +
                        " is singular at this point (" + e.what() + ")");
      }
      for (int j = 0; j < level; ++j) v[coordinate_index(d, s, j + 1)] = unknown[j];
    }
    basis.vectors.push_back(std::move(v));
  }
  return basis;
}

DeltaMatrices assemble_delta(const std::vector<RowSystem>& tower,
                             std::span<const Jet> f, int d) {
  const RowSystem& top = level_of(tower, d);
  const JetMatrix p = top.p_matrix();
  const std::size_t n = static_cast<std::size_t>((d - 2) * d);
  const std::size_t ud = static_cast<std::size_t>(d);

  DeltaMatrices out;
  out.a_blocks.resize(static_cast<std::size_t>(d));
  for (int j = 2; j <= d - 1; ++j) {
    JetMatrix a = lu_solve(p, top.g_matrix(j));
    for (std::size_t r = 0; r < a.rows(); ++r)
      for (std::size_t c = 0; c < a.cols(); ++c) a(r, c) = -a(r, c);
    out.a_blocks[j] = std::move(a);
  }

  out.delta = JetMatrix(n, n);
  for (int q = 0; q + 1 < d - 2; ++q) {
    out.delta.set_block(q * ud, (q + 1) * ud, JetMatrix::identity(ud));
  }
  for (int t = 0; t < d - 2; ++t) {
    out.delta.set_block((d - 3) * ud, t * ud, out.a_blocks[d - 1 - t]);
  }

  std::vector<JetScalar> fx, fy;
  for (const auto& j : f) {
    fx.push_back(JetScalar::from_jet(jet_partial(j, Axis::X)));
    fy.push_back(JetScalar::from_jet(jet_partial(j, Axis::Y)));
  }
  out.delta_x = out.delta;
  out.delta_y = out.delta;
  for (std::size_t row = 0; row < n; ++row) {
    const std::size_t i = row % ud;
    for (std::size_t c = 0; c < n; ++c) {
      out.delta_x(row, c) = fx[i] * out.delta(row, c);
      out.delta_y(row, c) = fy[i] * out.delta(row, c);
    }
  }
  return out;
}

void require_web(std::span<const Jet> f, const char* what) {
  require_supported_size(static_cast<int>(f.size()));
  require_min_order(f, static_cast<int>(f.size()), what);
}

}  // namespace

JetMatrix build_MM(std::span<const Jet> f) {
  require_web(f, "build_MM");
  const int d = static_cast<int>(f.size());
  if (d == 3) {
    return build_rows(f, 2).p_matrix();
  }
  return assemble_MM(build_row_tower(f, d - 1), d);
}

KernelBasis kernel_basis(std::span<const Jet> f) {
  require_web(f, "kernel_basis");
  const int d = static_cast<int>(f.size());
  return assemble_basis(build_row_tower(f, std::max(2, d - 1)), d);
}

DeltaMatrices build_delta(std::span<const Jet> f) {
  require_web(f, "build_delta");
  const int d = static_cast<int>(f.size());
  return assemble_delta(build_row_tower(f, d), f, d);
}

OmegaPair omega_matrices(const KernelBasis& basis, const DeltaMatrices& delta) {
  const int d = basis.d;
  const std::size_t m = basis.size();
  OmegaPair out{JetMatrix(m, m), JetMatrix(m, m)};
  for (std::size_t a = 0; a < m; ++a) {
    const JetVector wx = delta.delta_x * basis.vectors[a];
    const JetVector wy = delta.delta_y * basis.vectors[a];
    for (std::size_t b = 0; b < m; ++b) {
      const auto idx = coordinate_index(d, basis.labels[b].r, basis.labels[b].i);
      out.x(b, a) = -wx[idx];
      out.y(b, a) = -wy[idx];
    }
  }
  return out;
}

OmegaPair omega_matrices(std::span<const Jet> f) {
  require_web(f, "omega_matrices");
  const int d = static_cast<int>(f.size());
  const auto tower = build_row_tower(f, d);
  return omega_matrices(assemble_basis(tower, d), assemble_delta(tower, f, d));
}

ConnectionAtPoint curvature(std::span<const Jet> f, Point p) {
  require_web(f, "curvature");
  const int d = static_cast<int>(f.size());
  const auto tower = build_row_tower(f, d);

  ConnectionAtPoint c;
  c.point = p;
  c.d = d;
  c.basis = assemble_basis(tower, d);
  c.delta = assemble_delta(tower, f, d);
  c.omega = omega_matrices(c.basis, c.delta);

  const RealMatrix ox = value_part(c.omega.x);
  const RealMatrix oy = value_part(c.omega.y);
  c.kk = slot_part(c.omega.x, Axis::Y) - slot_part(c.omega.y, Axis::X);
  // Columns of Omega are images of basis vectors, so the composition order
  // that makes K the curvature of the connection is Omega_y Omega_x first.
  c.k = c.kk + (oy * ox - ox * oy);

  const std::size_t m = c.k.rows();
  for (std::size_t a = 0; a < m; ++a) {
    c.trace_k += c.k(a, a);
    c.trace_kk += c.kk(a, a);
  }
  for (std::size_t r = 0; r + 1 < m; ++r)
    for (std::size_t col = 0; col < m; ++col)
      c.upper_rows_max = std::max(c.upper_rows_max, std::abs(c.k(r, col)));
  return c;
}

ConnectionAtPoint curvature(const WebDefinition& web, Point p, int jet_order) {
  return curvature(web_jets(web, p, jet_order), p);
}

}  // namespace webcurv
