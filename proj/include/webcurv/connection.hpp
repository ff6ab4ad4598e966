#pragma once

// Connection and curvature of a planar d-web given by first integrals.
//
// Differentiating an abelian relation sum_i h_i(f_i) = 0 produces, at
// derivative order r-1, r linear equations in the unknowns
// omega^s_i = h_i^{(s)}(f_i), s = 1..r-1, with rows ordered
//   d^{r-1}/dx^{r-1}, d^{r-1}/dx^{r-2}dy, ..., d^{r-1}/dy^{r-1}.
// The coefficient blocks are P_r (on omega^{r-1}) and G_r^j (on omega^{r-j}).
// Stacking levels 2..d-1 gives the block lower-triangular matrix MM whose
// kernel carries the connection; Delta encodes the level-d equations.
//
// Indices (r, i) and (s, j) below follow the construction and are 1-based;
// everything else is 0-based.

#include <span>
#include <vector>

#include "webcurv/expr.hpp"
#include "webcurv/jet.hpp"
#include "webcurv/jet_linalg.hpp"

namespace webcurv {

inline constexpr int kMinWebSize = 3;
inline constexpr int kMaxWebSize = 8;

/// Jet order used for first integrals of a d-web.
constexpr int default_jet_order(int d) noexcept { return d + 1; }

/// Jets of every integral of the web at p. order <= 0 selects the default.
std::vector<Jet> web_jets(const WebDefinition& web, Point p, int order = 0);

/// Equations of derivative order level-1.
struct RowSystem {
  int level = 0;
  int d = 0;
  /// coeff[k][s-1][i]: row k, symbol omega^s, integral i.
  std::vector<std::vector<std::vector<Jet>>> coeff;

  const Jet& at(int row, int s, int i) const { return coeff[row][s - 1][i]; }

  /// Coefficients of omega^s as a level x d matrix of first-order jets.
  JetMatrix symbol_block(int s) const;
  /// P_level: coefficients of omega^{level-1}.
  JetMatrix p_matrix() const { return symbol_block(level - 1); }
  /// G_level^j: coefficients of omega^{level-j}, 2 <= j <= level-1.
  JetMatrix g_matrix(int j) const;
};

/// Row systems for levels 2..max_level (element k holds level k+2).
std::vector<RowSystem> build_row_tower(std::span<const Jet> f, int max_level);
RowSystem build_rows(std::span<const Jet> f, int level);

/// Position of coordinate omega^s_j / beta^s_j in a (d-2)d vector.
constexpr std::size_t coordinate_index(int d, int s, int j) noexcept {
  return static_cast<std::size_t>((s - 1) * d + (j - 1));
}

struct BasisLabel {
  int r = 0;
  int i = 0;
  friend bool operator==(const BasisLabel&, const BasisLabel&) = default;
};

/// (r, i) for 1 <= r <= d-2, r+2 <= i <= d, lexicographic.
std::vector<BasisLabel> basis_labels(int d);

struct KernelBasis {
  int d = 0;
  std::vector<BasisLabel> labels;
  std::vector<JetVector> vectors;  // each of length (d-2)d

  std::size_t size() const noexcept { return vectors.size(); }
};

/// (d+1)(d-2)/2 x (d-2)d block lower-triangular matrix of levels 2..d-1.
JetMatrix build_MM(std::span<const Jet> f);

/// Basis e^r_i of ker MM by block forward substitution: beta^s_j vanish
/// except beta^r_i = 1. Throws SingularLeadingBlock(level) at a non-generic
/// point.
KernelBasis kernel_basis(std::span<const Jet> f);

struct DeltaMatrices {
  JetMatrix delta;
  JetMatrix delta_x;  // DD_x * Delta
  JetMatrix delta_y;  // DD_y * Delta
  /// a_blocks[j] = A_j = -P_d^{-1} G_d^j for 2 <= j <= d-1 (lower entries empty).
  std::vector<JetMatrix> a_blocks;
};

DeltaMatrices build_delta(std::span<const Jet> f);

struct OmegaPair {
  JetMatrix x;
  JetMatrix y;
};

/// Column (r,i) of Omega_x holds the beta-components of -Delta_x(e^r_i).
OmegaPair omega_matrices(std::span<const Jet> f);
OmegaPair omega_matrices(const KernelBasis& basis, const DeltaMatrices& delta);

struct ConnectionAtPoint {
  Point point;
  int d = 0;
  KernelBasis basis;
  DeltaMatrices delta;
  OmegaPair omega;
  RealMatrix kk;  // d/dy Omega_x - d/dx Omega_y
  RealMatrix k;   // kk + Omega_y Omega_x - Omega_x Omega_y
  Scalar trace_k = 0;       // trace(K)
  Scalar trace_kk = 0;      // trace(KK), the reported trace
  Scalar upper_rows_max = 0;  // max |K| over all rows but the last
};

ConnectionAtPoint curvature(std::span<const Jet> f, Point p = {});
ConnectionAtPoint curvature(const WebDefinition& web, Point p,
                            int jet_order = 0);

/// Throws UnsupportedWebSize outside [kMinWebSize, kMaxWebSize].
void require_supported_size(int d);

}  // namespace webcurv
