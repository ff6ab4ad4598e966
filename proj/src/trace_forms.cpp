#include "webcurv/trace_forms.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "webcurv/error.hpp"

namespace webcurv {
namespace {

// (value, d/dx, d/dy) of the partial d^{a+b} f / dx^a dy^b.
JetScalar partial_scalar(const Jet& f, int a, int b) {
  if (f.order() < a + b + 1) {
    throw Error(ErrorCode::InsufficientJetOrder,
                "jet order too low for a first-order jet of a derivative");
  }
  return {f.extract(a, b), f.extract(a + 1, b), f.extract(a, b + 1)};
}

JetScalar ipow(JetScalar base, int e) {
  JetScalar r(1);
  for (int k = 0; k < e; ++k) r *= base;
  return r;
}

Scalar sign_pow(int n) { return (n % 2 == 0) ? 1.0 : -1.0; }

void check_slopes_distinct(const JetScalar& mi, const JetScalar& mj, int i,
                           int j) {
  const Scalar gap = std::abs(mi.value - mj.value);
  if (gap <= kSlopeCollisionRelative *
                 (1 + std::abs(mi.value) + std::abs(mj.value))) {
    throw Error(ErrorCode::SlopeCollision,
                "slopes of integrals " + std::to_string(i) + " and " +
                    std::to_string(j) + " collide (|m_i - m_j| = " +
                    std::to_string(gap) + ")");
  }
}

void check_fx(const JetScalar& fx, int i) {
  if (std::abs(fx.value) <= kVanishingFxEpsilon) {
    throw Error(ErrorCode::VanishingFx,
                "f_x of integral " + std::to_string(i) + " vanishes");
  }
}

// First and second partials of f_1..f_{d-1} of a normalized web.
struct NormalizedData {
  int d = 0;
  std::vector<Jet> jets;
  std::vector<JetScalar> fx, fy, fxx, fxy, fyy, m;

  NormalizedData(const WebDefinition& web, Point p) : d(web.d()) {
    require_normalized(web);
    jets = web_jets(web, p, std::max(default_jet_order(d), 3));
    for (int i = 0; i + 1 < d; ++i) {
      const Jet& f = jets[i];
      fx.push_back(partial_scalar(f, 1, 0));
      fy.push_back(partial_scalar(f, 0, 1));
      fxx.push_back(partial_scalar(f, 2, 0));
      fxy.push_back(partial_scalar(f, 1, 1));
      fyy.push_back(partial_scalar(f, 0, 2));
      check_fx(fx.back(), i + 1);
      m.push_back(fy.back() / fx.back());
    }
    for (int i = 0; i + 1 < d; ++i)
      for (int j = i + 1; j + 1 < d; ++j) check_slopes_distinct(m[i], m[j], i + 1, j + 1);
  }

  int count() const { return d - 1; }

  void require_index(int s) const {
    if (s < 1 || s > d - 1) {
      throw Error(ErrorCode::InvalidArgument,
                  "index s = " + std::to_string(s) + " outside 1.." +
                      std::to_string(d - 1));
    }
  }
};

TraceElement gamma_of(std::span<const Jet> f) {
  const int s = static_cast<int>(f.size());
  if (s < 3) {
    throw Error(ErrorCode::InvalidArgument, "trace element needs at least 3 integrals");
  }
  const auto tower = build_row_tower(f, s);
  const JetVector kernel = nullspace_vector(tower[s - 3].p_matrix());
  const JetMatrix& g2 = tower[s - 2].g_matrix(2);
  JetVector rhs = g2 * kernel;
  for (auto& v : rhs) v = -v;
  const JetVector z = lu_solve(tower[s - 2].p_matrix(), rhs);
  return TraceElement::from(z.back());
}

std::string triple_name(int i, int j, int k) {
  return "(" + std::to_string(i) + "," + std::to_string(j) + "," +
         std::to_string(k) + ")";
}

}  // namespace

Scalar minus_wedge(Scalar hx, Scalar hy, const TraceElement& g) {
  return -(hx * g.dy - hy * g.dx);
}

TraceElement gamma(std::span<const Jet> f) { return gamma_of(f); }

TraceElement gamma_closed_form_3(const Jet& f, const Jet& g) {
  const JetScalar fx = partial_scalar(f, 1, 0), fy = partial_scalar(f, 0, 1);
  const JetScalar gx = partial_scalar(g, 1, 0), gy = partial_scalar(g, 0, 1);
  check_fx(fx, 1);
  check_fx(gx, 2);
  const JetScalar mf = fy / fx, mg = gy / gx;
  check_slopes_distinct(mf, mg, 1, 2);
  const JetScalar fxx = partial_scalar(f, 2, 0), fxy = partial_scalar(f, 1, 1),
                  fyy = partial_scalar(f, 0, 2);
  const JetScalar gxx = partial_scalar(g, 2, 0), gxy = partial_scalar(g, 1, 1),
                  gyy = partial_scalar(g, 0, 2);
  const JetScalar bracket = mf * mg * (fxx / fx - gxx / gx) -
                            (mf + mg) * (fxy / fx - gxy / gx) +
                            (fyy / fx - gyy / gx);
  return TraceElement::from(bracket / (mf - mg));
}

TwoForm blaschke(const Jet& f, const Jet& g, const Jet& h) {
  const Jet triple[] = {f, g, h};
  const TraceElement gm = gamma_of(triple);
  return {minus_wedge(h.coeff(1, 0), h.coeff(0, 1), gm)};
}

TwoForm trace_via_proposition(std::span<const Jet> f) {
  TwoForm out;
  for (std::size_t r = 3; r <= f.size(); ++r) {
    try {
      const TraceElement gm = gamma_of(f.first(r));
      out.coeff += minus_wedge(f[r - 1].coeff(1, 0), f[r - 1].coeff(0, 1), gm);
    } catch (const Error& e) {
      throw Error(e.code(), "prefix r = " + std::to_string(r) + ": " + e.what());
    }
  }
  return out;
}

TwoForm sum_subweb_curvatures(std::span<const Jet> f) {
  TwoForm out;
  const int d = static_cast<int>(f.size());
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j)
      for (int k = j + 1; k < d; ++k) {
        try {
          out.coeff += blaschke(f[i], f[j], f[k]).coeff;
        } catch (const Error& e) {
          throw Error(e.code(), "triple " + triple_name(i + 1, j + 1, k + 1) +
                                    ": " + e.what());
        }
      }
  return out;
}

std::string screen_point(const WebDefinition& web, Point p, Scalar margin) {
  const TransversalityReport t = check_transversality(web, p);
  if (!t.vanishing_gradients.empty()) {
    return std::string(error_code_name(ErrorCode::VanishingGradient));
  }
  if (t.min_sine() <= margin) {
    return std::string(error_code_name(ErrorCode::SlopeCollision));
  }
  return {};
}

TraceFormulaReport trace_formula_check(const WebDefinition& web,
                                       std::span<const Point> points,
                                       int jet_order, Scalar screen_margin) {
  TraceFormulaReport report;
  for (const Point& p : points) {
    TracePointResult r;
    r.point = p;
    try {
      if (screen_margin > 0) {
        r.skip_reason = screen_point(web, p, screen_margin);
        if (!r.skip_reason.empty()) {
          r.skip_detail = "point within the transversality screen margin";
          report.points.push_back(r);
          ++report.skipped;
          continue;
        }
      }
      const auto f = web_jets(web, p, jet_order);
      const ConnectionAtPoint c = curvature(f, p);
      r.trace_k = c.trace_kk;
      r.trace_prop = trace_via_proposition(f).coeff;
      r.sc = sum_subweb_curvatures(f).coeff;
      const Scalar scale = std::max(1.0, std::abs(r.trace_k));
      r.residual = std::abs(r.trace_k - r.sc);
      r.relative_residual = r.residual / scale;
      r.path_residual = std::abs(r.trace_k - r.trace_prop) / scale;
      r.ok = true;
      report.max_relative_residual =
          std::max(report.max_relative_residual, r.relative_residual);
      report.max_path_residual = std::max(report.max_path_residual, r.path_residual);
      ++report.evaluated;
    } catch (const Error& e) {
      r.ok = false;
      r.skip_reason = std::string(e.name());
      r.skip_detail = e.what();
      ++report.skipped;
    }
    report.points.push_back(r);
  }
  return report;
}

void require_normalized(const WebDefinition& web) {
  if (web.d() < 3 || !web.integrals.back().is_coordinate_y()) {
    throw Error(ErrorCode::NotNormalized,
                "closed forms need the last integral to be exactly y");
  }
}

GammaAdditivity gamma_additivity_check(const WebDefinition& web, Point p) {
  const NormalizedData data(web, p);
  const auto& f = data.jets;
  const int d = data.d;
  GammaAdditivity out;
  out.full = gamma_of(f);
  JetScalar sum(0);
  for (int i = 0; i + 1 < d; ++i)
    for (int j = i + 1; j + 1 < d; ++j) {
      const Jet triple[] = {f[i], f[j], f[d - 1]};
      sum += gamma_of(triple).as_jet();
    }
  out.pair_sum = TraceElement::from(sum);
  const JetScalar diff = out.full.as_jet() - sum;
  out.residual = {std::abs(diff.value), std::abs(diff.dx), std::abs(diff.dy)};
  return out;
}

JetVector closed_form_X(const WebDefinition& web, Point p) {
  const NormalizedData data(web, p);
  const int n = data.count();
  JetVector x(n);
  for (int i = 0; i < n; ++i) {
    JetScalar denom = ipow(data.fx[i], data.d - 2);
    for (int j = 0; j < n; ++j) {
      if (j != i) denom *= data.m[i] - data.m[j];
    }
    x[i] = JetScalar(-1) / denom;
  }
  return x;
}

JetVector closed_form_alpha(const WebDefinition& web, Point p) {
  const NormalizedData data(web, p);
  const int d = data.d;
  const auto sym = symmetric_polys<JetScalar>(data.m);
  JetVector alpha(d);
  for (int j = 1; j <= d; ++j) {
    alpha[j - 1] = JetScalar(sign_pow(d - j)) * sym.full(d - j);
  }
  return alpha;
}

std::vector<AbcTriple> abc_table(int d) {
  if (d < 3) throw Error(ErrorCode::InvalidArgument, "abc_table needs d >= 3");
  std::vector<AbcTriple> out;
  for (int i = 1; i <= d; ++i) {
    out.push_back({(d - 1 - i) * (d - i) / 2, (i - 1) * (d - i), (i - 2) * (i - 1) / 2});
  }
  return out;
}

std::vector<AbcTriple> abc_from_row_recurrence(int d) {
  if (d < 3) {
    throw Error(ErrorCode::InvalidArgument, "abc_from_row_recurrence needs d >= 3");
  }
  // f_x = f_y = 1 with exactly one unit second derivative isolates a, b or c.
  const char* probes[] = {"x + y + x^2/2", "x + y + x*y", "x + y + y^2/2"};
  std::vector<AbcTriple> out(d);
  for (int which = 0; which < 3; ++which) {
    const Jet f = eval_jet(parse(probes[which]), Point{0, 0}, d);
    const JetMatrix g = build_rows(std::span<const Jet>(&f, 1), d).g_matrix(2);
    for (int i = 0; i < d; ++i) {
      const Scalar raw = g(i, 0).value;
      if (raw != std::round(raw)) {
        throw Error(ErrorCode::InvalidArgument,
                    "non-integer coefficient extracted from the row recurrence");
      }
      const int v = static_cast<int>(std::lround(raw));
      (which == 0 ? out[i].a : which == 1 ? out[i].b : out[i].c) = v;
    }
  }
  return out;
}

CoefficientSums coefficient_sums_ABC(const WebDefinition& web, Point p, int s) {
  const NormalizedData data(web, p);
  data.require_index(s);
  const int q = s - 1;
  const JetScalar& ms = data.m[q];
  CoefficientSums out{JetScalar(0), JetScalar(0), JetScalar(0)};
  for (int j = 0; j < data.count(); ++j) {
    if (j == q) continue;
    const JetScalar gap = ms - data.m[j];
    out.a += ms * data.m[j] / gap;
    out.b += (ms + data.m[j]) / gap;
    out.c += JetScalar(1) / gap;
  }
  out.a = out.a / data.fx[q];
  out.b = -(out.b / data.fx[q]);
  out.c = out.c / data.fx[q];
  return out;
}

ExpansionCoefficients expansion_coeffs_abc(const WebDefinition& web, Point p,
                                           int s) {
  const NormalizedData data(web, p);
  data.require_index(s);
  const int d = data.d;
  const int q = s - 1;
  const auto sym = symmetric_polys<JetScalar>(data.m);
  const JetScalar& m = data.m[q];

  // The m^0 terms of b and c are not zero, so the sums start at k = 0.
  ExpansionCoefficients out{JetScalar(0), JetScalar(0), JetScalar(0)};
  JetScalar m_pow(1);
  for (int k = 0; k <= d; ++k) {
    out.a += JetScalar(sign_pow(d - k) * (d - k - 1)) * sym.without(q, d - k - 1) * m_pow;
    out.b += JetScalar(sign_pow(d - k) * (d - 2 * k - 2)) * sym.without(q, d - k - 2) * m_pow;
    out.c += JetScalar(sign_pow(d - k - 1) * (k + 1)) * sym.without(q, d - k - 3) * m_pow;
    m_pow *= m;
  }
  const JetScalar scale = ipow(data.fx[q], d - 3);
  out.a *= scale;
  out.b *= scale;
  out.c *= scale;
  return out;
}

ExpansionCoefficients expansion_coeffs_from_alpha(const WebDefinition& web,
                                                  Point p, int s) {
  const NormalizedData data(web, p);
  data.require_index(s);
  const int d = data.d;
  const int q = s - 1;
  const JetVector alpha = closed_form_alpha(web, p);
  const auto table = abc_table(d);
  const JetScalar& fx = data.fx[q];
  const JetScalar& fy = data.fy[q];

  // Negative powers of f_x or f_y count as zero.
  auto monomial = [&](int ex, int ey) -> JetScalar {
    if (ex < 0 || ey < 0) return JetScalar(0);
    return ipow(fx, ex) * ipow(fy, ey);
  };
  ExpansionCoefficients out{JetScalar(0), JetScalar(0), JetScalar(0)};
  for (int i = 1; i <= d; ++i) {
    const auto& t = table[i - 1];
    const JetScalar& al = alpha[i - 1];
    out.a += al * JetScalar(t.a) * monomial(d - i - 2, i - 1);
    out.b += al * JetScalar(t.b) * monomial(d - i - 1, i - 2);
    out.c += al * JetScalar(t.c) * monomial(d - i, i - 3);
  }
  return out;
}

JetScalar gamma_expansion(const WebDefinition& web, Point p) {
  const NormalizedData data(web, p);
  const JetVector x = closed_form_X(web, p);
  JetScalar sum(0);
  for (int s = 1; s <= data.count(); ++s) {
    const int q = s - 1;
    const ExpansionCoefficients e = expansion_coeffs_abc(web, p, s);
    sum += x[q] * (e.a * data.fxx[q] + e.b * data.fxy[q] + e.c * data.fyy[q]);
  }
  return -sum;
}

}  // namespace webcurv
