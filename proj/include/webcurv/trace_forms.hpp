#pragma once

// Trace elements, Blaschke curvatures of 3-webs, the trace 2-form and the
// closed forms that reduce the trace formula to symmetric-polynomial
// identities in the slopes m_i = f_iy / f_ix.
//
// The closed-form operations expect a normalized web: the last integral is
// literally `y` and every other integral has f_ix != 0. Nothing here
// reorders arguments; trace elements depend on the order they are given in.

#include <span>
#include <string>
#include <vector>

#include "webcurv/connection.hpp"
#include "webcurv/expr.hpp"
#include "webcurv/jet.hpp"
#include "webcurv/jet_linalg.hpp"

namespace webcurv {

/// gamma and its first partials at a point.
struct TraceElement {
  Scalar value = 0;
  Scalar dx = 0;
  Scalar dy = 0;

  JetScalar as_jet() const noexcept { return {value, dx, dy}; }
  static TraceElement from(const JetScalar& s) noexcept {
    return {s.value, s.dx, s.dy};
  }
};

/// Coefficient of dx ^ dy.
struct TwoForm {
  Scalar coeff = 0;
};

/// dx^dy coefficient of -dh ^ dgamma for dh = hx dx + hy dy.
Scalar minus_wedge(Scalar hx, Scalar hy, const TraceElement& gamma);

/// Last component of -P_s^{-1} G_s^2 (X_1, ..., X_{s-1}, 1) where (X, 1)
/// spans ker P_{s-1}; needs s >= 3 jets of order >= s.
TraceElement gamma(std::span<const Jet> f);

/// Closed form of gamma(f, g, y). Throws SlopeCollision or VanishingFx.
TraceElement gamma_closed_form_3(const Jet& f, const Jet& g);

TwoForm blaschke(const Jet& f, const Jet& g, const Jet& h);

/// -sum_{r=3}^{d} df_r ^ dgamma(f_1, ..., f_r).
TwoForm trace_via_proposition(std::span<const Jet> f);

/// Sum of the Blaschke curvatures of all sub-3-webs (f_i, f_j, f_r), i<j<r.
TwoForm sum_subweb_curvatures(std::span<const Jet> f);

struct TracePointResult {
  Point point;
  bool ok = false;
  std::string skip_reason;   // error code name when !ok
  std::string skip_detail;
  Scalar trace_k = 0;        // trace of the connection's curvature
  Scalar trace_prop = 0;     // trace via trace elements of prefixes
  Scalar sc = 0;             // sum of sub-3-web curvatures
  Scalar residual = 0;       // |trace_k - sc|
  Scalar relative_residual = 0;  // residual / max(1, |trace_k|)
  Scalar path_residual = 0;  // |trace_k - trace_prop| / max(1, |trace_k|)
};

struct TraceFormulaReport {
  std::vector<TracePointResult> points;
  Scalar max_relative_residual = 0;
  Scalar max_path_residual = 0;
  std::size_t evaluated = 0;
  std::size_t skipped = 0;
};

/// Never throws for inadmissible points; they are reported as skipped.
/// A positive `screen_margin` skips points where some pair of integrals has
/// |sin(angle between gradients)| <= screen_margin (reason SlopeCollision) or a
/// gradient vanishes (VanishingGradient).
TraceFormulaReport trace_formula_check(const WebDefinition& web,
                                       std::span<const Point> points,
                                       int jet_order = 0,
                                       Scalar screen_margin = 0);

/// Skip reason from the transversality screen, empty when the point passes.
std::string screen_point(const WebDefinition& web, Point p, Scalar margin);

// --- Normalized webs (last integral is y) ----------------------------------

inline constexpr Scalar kSlopeCollisionRelative = 1e-8;
inline constexpr Scalar kVanishingFxEpsilon = 1e-12;

/// Throws NotNormalized unless the web's last integral is literally y.
void require_normalized(const WebDefinition& web);

struct GammaAdditivity {
  TraceElement full;       // gamma(f_1, ..., f_d)
  TraceElement pair_sum;   // sum_{i<j<d} gamma(f_i, f_j, y)
  JetScalar residual;      // absolute difference per slot
};

GammaAdditivity gamma_additivity_check(const WebDefinition& web, Point p);

/// X_i = -1 / (f_ix^{d-2} prod_{j != i} (m_i - m_j)), i = 1..d-1.
JetVector closed_form_X(const WebDefinition& web, Point p);

/// Last row of P_d^{-1}: ((-1)^{d-1} S_{d-1}, ..., -S_1, 1).
JetVector closed_form_alpha(const WebDefinition& web, Point p);

struct AbcTriple {
  int a = 0;
  int b = 0;
  int c = 0;
  friend bool operator==(const AbcTriple&, const AbcTriple&) = default;
};

/// Coefficients of G^d_i(f) = a_i f_x^{d-i-2} f_y^{i-1} f_xx
///   + b_i f_x^{d-i-1} f_y^{i-2} f_xy + c_i f_x^{d-i} f_y^{i-3} f_yy.
std::vector<AbcTriple> abc_table(int d);

/// Same table read off the row recurrence by evaluating G_d^2 on quadratics
/// with unit first derivatives.
std::vector<AbcTriple> abc_from_row_recurrence(int d);

struct CoefficientSums {
  JetScalar a;  // A_s
  JetScalar b;  // B_s
  JetScalar c;  // C_s
};

/// Coefficients of f_sxx, f_sxy, f_syy in sum_{i<j<d} gamma(f_i, f_j, y).
/// s is 1-based, 1 <= s <= d-1.
CoefficientSums coefficient_sums_ABC(const WebDefinition& web, Point p, int s);

struct ExpansionCoefficients {
  JetScalar a;
  JetScalar b;
  JetScalar c;
};

/// alpha . G^d(f_s) = a^s f_sxx + b^s f_sxy + c^s f_syy, evaluated through
/// leave-one-out symmetric polynomials of the slopes.
ExpansionCoefficients expansion_coeffs_abc(const WebDefinition& web, Point p,
                                           int s);

/// Same coefficients straight from alpha and the (a, b, c) table.
ExpansionCoefficients expansion_coeffs_from_alpha(const WebDefinition& web,
                                                  Point p, int s);

/// -sum_s X_s (a^s f_sxx + b^s f_sxy + c^s f_syy).
JetScalar gamma_expansion(const WebDefinition& web, Point p);

// --- Symmetric polynomials -------------------------------------------------

template <typename T>
struct SymmetricPolyBundle {
  std::vector<T> slopes;
  std::vector<T> s;  // S_0 .. S_k
  /// leave_one_out[q][j] = S^q_j over all slopes but slopes[q], j = 0..k-1.
  std::vector<std::vector<T>> leave_one_out;

  /// S_j with S_j = 0 outside [0, k].
  T full(int j) const {
    return (j < 0 || j >= static_cast<int>(s.size())) ? T(0) : s[j];
  }
  /// S^q_j with S^q_j = 0 outside [0, k-1].
  T without(int q, int j) const {
    const auto& row = leave_one_out[q];
    return (j < 0 || j >= static_cast<int>(row.size())) ? T(0) : row[j];
  }
};

/// S_j by incremental product expansion; S^q_j by synthetic division of
/// prod (t - m) by (t - m_q).
template <typename T>
SymmetricPolyBundle<T> symmetric_polys(std::span<const T> slopes) {
  SymmetricPolyBundle<T> out;
  out.slopes.assign(slopes.begin(), slopes.end());
  const std::size_t k = slopes.size();
  out.s.assign(k + 1, T(0));
  out.s[0] = T(1);
  for (std::size_t n = 0; n < k; ++n) {
    for (std::size_t j = n + 1; j >= 1; --j) out.s[j] += slopes[n] * out.s[j - 1];
  }
  out.leave_one_out.resize(k);
  for (std::size_t q = 0; q < k; ++q) {
    auto& row = out.leave_one_out[q];
    row.assign(k, T(0));
    if (k == 0) continue;
    row[0] = T(1);
    for (std::size_t j = 1; j < k; ++j) row[j] = out.s[j] - slopes[q] * row[j - 1];
  }
  return out;
}

}  // namespace webcurv
