#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "webcurv/connection.hpp"
#include "webcurv/error.hpp"
#include "webcurv/trace_forms.hpp"

using namespace webcurv;

namespace {

std::vector<Point> random_points(std::mt19937_64& rng, int n, double lo = 0.1,
                                 double hi = 0.9) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<Point> out;
  for (int k = 0; k < n; ++k) out.push_back({u(rng), u(rng)});
  return out;
}

// Random normalized web and an admissible point, retried until well spread.
std::pair<WebDefinition, Point> admissible_sample(std::mt19937_64& rng, int d) {
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  while (true) {
    WebDefinition web = oracle::random_normalized_web(rng, d);
    const Point p{u(rng), u(rng)};
    const auto spread = oracle::slope_spread(web, p);
    if (spread.slope_gap > 0.05 && spread.min_fx > 0.1) return {web, p};
  }
}

void check_close(const JetScalar& got, const JetScalar& want, double tol) {
  CHECK(oracle::rel_err(got.value, want.value) <= tol);
  CHECK(oracle::rel_err(got.dx, want.dx) <= tol);
  CHECK(oracle::rel_err(got.dy, want.dy) <= tol);
}

const WebDefinition kBlaschkeSpot = make_web({"x", "x + y + x^2*y", "y"});

}  // namespace

TEST_CASE("trace elements of simple webs") {
  const auto affine = web_jets(make_web({"x", "2*x - y", "y"}), {0.3, 0.1});
  const TraceElement g0 = gamma(affine);
  CHECK(g0.value == 0);
  CHECK(g0.dx == 0);
  CHECK(g0.dy == 0);

  const auto f = web_jets(kBlaschkeSpot, {0, 0});
  const TraceElement g = gamma(f);
  CHECK(std::abs(g.value) <= 1e-14);
  CHECK(g.dx == doctest::Approx(-2).epsilon(1e-12));

  const TraceElement c = gamma_closed_form_3(f[0], f[1]);
  CHECK(std::abs(c.value) <= 1e-14);
  CHECK(c.dx == doctest::Approx(-2).epsilon(1e-12));
  const TraceElement c0 = gamma_closed_form_3(affine[0], affine[1]);
  CHECK(c0.value == 0);
  CHECK(c0.dx == 0);
}

TEST_CASE("three-web closed form agrees with the definition") {
  std::mt19937_64 rng(101);
  for (int t = 0; t < 100; ++t) {
    const auto [web, p] = admissible_sample(rng, 3);
    const auto f = web_jets(web, p);
    const TraceElement def = gamma(f);
    const TraceElement closed = gamma_closed_form_3(f[0], f[1]);
    check_close(closed.as_jet(), def.as_jet(), 1e-8);
  }
  const auto f = web_jets(make_web({"x", "x^2", "y"}), {0.5, 0.3});
  try {
    (void)gamma_closed_form_3(f[0], f[1]);
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SlopeCollision);
  }
  const auto v = web_jets(make_web({"y + x^2", "x + y", "y"}), {0.0, 0.3});
  try {
    (void)gamma_closed_form_3(v[0], v[1]);
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::VanishingFx);
  }
}

TEST_CASE("Blaschke curvature") {
  const auto hex = web_jets(make_web({"x", "y", "x + y"}), {0.4, -0.3});
  CHECK(blaschke(hex[0], hex[1], hex[2]).coeff == 0);

  const auto spot = web_jets(kBlaschkeSpot, {0, 0});
  CHECK(blaschke(spot[0], spot[1], spot[2]).coeff == doctest::Approx(-2).epsilon(1e-12));

  const WebDefinition dec = make_web(
      {"-exp(-x) + exp(y)", "-exp(-x)/2 + exp(y)", "-exp(-x)/3 + exp(y)"});
  std::mt19937_64 rng(4);
  for (Point p : random_points(rng, 10)) {
    const auto f = web_jets(dec, p);
    CHECK(std::abs(blaschke(f[0], f[1], f[2]).coeff) <= 1e-9);
  }
}

TEST_CASE("trace 2-form paths") {
  std::mt19937_64 rng(77);
  for (int t = 0; t < 20; ++t) {
    const auto [web, p] = admissible_sample(rng, 3);
    const auto f = web_jets(web, p);
    CHECK(trace_via_proposition(f).coeff == blaschke(f[0], f[1], f[2]).coeff);
    CHECK(sum_subweb_curvatures(f).coeff == blaschke(f[0], f[1], f[2]).coeff);
  }

  const auto par = web_jets(
      make_web({"y - x", "y - 2*x", "y - 3*x", "y - 4*x", "y - 5*x"}), {0.2, 0.7});
  CHECK(std::abs(trace_via_proposition(par).coeff) <= 1e-9);
  CHECK(std::abs(sum_subweb_curvatures(par).coeff) <= 1e-9);

  const WebDefinition dec = make_web({"-exp(-x) + exp(y)", "-exp(-x)/2 + exp(y)",
                                      "-exp(-x)/3 + exp(y)", "-exp(-x)/4 + exp(y)"});
  for (Point p : random_points(rng, 5)) {
    CHECK(std::abs(sum_subweb_curvatures(web_jets(dec, p)).coeff) <= 1e-8);
  }

  const WebDefinition w4 = make_web({"x", "y", "x + y", "x*y + x"});
  const auto f = web_jets(w4, {0.3, 0.2});
  CHECK(oracle::rel_err(trace_via_proposition(f).coeff, curvature(f).trace_kk) <= 1e-8);

  // Failures name the prefix or triple.
  const auto bad = web_jets(make_web({"x", "y", "x + y", "2*x + 2*y"}), {0.3, 0.2});
  try {
    (void)trace_via_proposition(bad);
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("r = 4") != std::string::npos);
  }
  try {
    (void)sum_subweb_curvatures(bad);
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("(1,3,4)") != std::string::npos);
  }
}

TEST_CASE("trace formula on the test webs") {
  std::mt19937_64 rng(2024);
  for (const char* extra : {"", "x^2 + y^2"}) {
    std::vector<std::string> exprs = {"x", "y", "x + y", "x*y + x"};
    if (*extra) exprs.push_back(extra);
    const WebDefinition web = make_web(exprs);
    const auto pts = random_points(rng, 20);
    const TraceFormulaReport r = trace_formula_check(web, pts, 0, 1e-3);
    CHECK(r.evaluated + r.skipped == 20);
    CHECK(r.evaluated >= 15);
    CHECK(r.max_relative_residual <= 1e-7);
    CHECK(r.max_path_residual <= 1e-8);
  }

  const WebDefinition three = make_web({"x*y + x", "sin(x) + y", "exp(x - y)"});
  const auto r3 = trace_formula_check(three, random_points(rng, 10));
  CHECK(r3.max_relative_residual <= 1e-13);

  const WebDefinition w4 = make_web({"x", "y", "x + y", "x*y + x"});
  const std::vector<Point> collide = {{0, 0.5}, {0.3, 0.2}};
  const auto screened = trace_formula_check(w4, collide, 0, 1e-3);
  CHECK(screened.skipped == 1);
  CHECK(screened.points[0].skip_reason == "SlopeCollision");
  CHECK(screened.points[1].ok);
}

TEST_CASE("trace element additivity") {
  const WebDefinition affine = make_web({"x", "x + y", "x - 3*y", "y"});
  const auto a = gamma_additivity_check(affine, {0.2, 0.5});
  CHECK(max_slot(a.residual) == 0);
  CHECK(a.full.value == 0);

  const WebDefinition w = make_web({"x", "x + y + x^2*y", "x - y + y^2", "y"});
  const auto r = gamma_additivity_check(w, {0.1, 0.2});
  const double scale = std::max({1.0, std::abs(r.full.value), std::abs(r.full.dx),
                                 std::abs(r.full.dy)});
  CHECK(max_slot(r.residual) <= 1e-8 * scale);

  const auto r3 = gamma_additivity_check(make_web({"x*y + x", "x + y^2", "y"}), {0.3, 0.6});
  CHECK(max_slot(r3.residual) <= 1e-14);

  try {
    (void)gamma_additivity_check(make_web({"x", "x + y", "y + 0"}), {0.1, 0.1});
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotNormalized);
  }
}

TEST_CASE("closed-form kernel vector") {
  // d = 3, f = x (m = 0), g = x + y (m = 1).
  const JetVector x3 = closed_form_X(make_web({"x", "x + y", "y"}), {0.2, 0.2});
  CHECK(x3[0].value == doctest::Approx(1));
  CHECK(x3[1].value == doctest::Approx(-1));

  std::mt19937_64 rng(55);
  for (int t = 0; t < 30; ++t) {
    const auto [web, p] = admissible_sample(rng, 5);
    const JetVector closed = closed_form_X(web, p);
    const JetVector kernel = nullspace_vector(build_rows(web_jets(web, p), 4).p_matrix());
    REQUIRE(kernel.size() == 5);
    for (std::size_t i = 0; i < 4; ++i) check_close(closed[i], kernel[i], 1e-8);
  }

  // Doubling f_1 divides X_1 by 2^{d-2} and leaves the others.
  const WebDefinition base = make_web({"x + x*y", "x - y^2", "2*x + y + x^2", "y"});
  const WebDefinition scaled =
      make_web({"2*(x + x*y)", "x - y^2", "2*x + y + x^2", "y"});
  const Point p{0.3, 0.4};
  const JetVector xb = closed_form_X(base, p);
  const JetVector xs = closed_form_X(scaled, p);
  CHECK(oracle::rel_err(xs[0].value, xb[0].value / 4) <= 1e-12);
  CHECK(oracle::rel_err(xs[1].value, xb[1].value) <= 1e-12);
  // and (X, 1) still spans the kernel of the rescaled P_{d-1}.
  JetVector v = xs;
  v.push_back(JetScalar(1));
  const JetVector image = build_rows(web_jets(scaled, p), 3).p_matrix() * v;
  for (const auto& e : image) CHECK(std::abs(e.value) <= 1e-12);
}

TEST_CASE("closed-form last row of the inverse") {
  const JetVector a3 = closed_form_alpha(make_web({"x + 2*y", "x - y", "y"}), {0.1, 0.1});
  CHECK(a3[0].value == doctest::Approx(-2));
  CHECK(a3[1].value == doctest::Approx(-1));
  CHECK(a3[2].value == 1);

  std::mt19937_64 rng(66);
  for (int t = 0; t < 30; ++t) {
    const auto [web, p] = admissible_sample(rng, 5);
    const JetVector closed = closed_form_alpha(web, p);
    const JetVector lin = last_row_of_inverse(build_rows(web_jets(web, p), 5).p_matrix());
    for (std::size_t i = 0; i < 5; ++i) check_close(closed[i], lin[i], 1e-8);
  }

  const std::vector<double> zeros(4, 0.0);
  const auto sym = symmetric_polys<double>(zeros);
  for (int j = 1; j <= 4; ++j) CHECK(sym.full(j) == 0);
  CHECK(sym.full(0) == 1);
}

TEST_CASE("coefficient table") {
  for (int d = 3; d <= 7; ++d) {
    const auto closed = abc_table(d);
    CHECK(abc_from_row_recurrence(d) == closed);
    for (int i = 1; i <= d; ++i) {
      CHECK(closed[i - 1].a == closed[d - i].c);
      CHECK(closed[i - 1].b == closed[d - i].b);
      if (d > 3 && i < d) {
        const auto prev = abc_table(d - 1);
        CHECK(closed[i - 1].a == prev[i - 1].a + d - 1 - i);
        CHECK(closed[i - 1].b == prev[i - 1].b + i - 1);
        CHECK(closed[i - 1].c == prev[i - 1].c);
      }
    }
  }
  const std::vector<AbcTriple> d3 = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  CHECK(abc_table(3) == d3);
  const std::vector<AbcTriple> d4 = {{3, 0, 0}, {1, 2, 0}, {0, 2, 1}, {0, 0, 3}};
  CHECK(abc_table(4) == d4);
}

TEST_CASE("coefficient sums") {
  // Two slopes 1 and -1: A_1 = (1 * -1) / (1 - -1) / f_1x.
  const WebDefinition w = make_web({"2*x + 2*y", "x - y", "y"});
  const CoefficientSums s = coefficient_sums_ABC(w, {0.1, 0.1}, 1);
  CHECK(s.a.value == doctest::Approx(-1.0 / (2 * 2)));

  // Sum of 3-web trace elements against the A, B, C expansion.
  std::mt19937_64 rng(88);
  for (int d = 4; d <= 6; ++d) {
    for (int t = 0; t < 10; ++t) {
      const auto [web, p] = admissible_sample(rng, d);
      const auto f = web_jets(web, p);
      JetScalar expansion(0);
      for (int s2 = 1; s2 < d; ++s2) {
        const CoefficientSums c = coefficient_sums_ABC(web, p, s2);
        const Jet& fs = f[s2 - 1];
        expansion += c.a * JetScalar(fs.extract(2, 0)) + c.b * JetScalar(fs.extract(1, 1)) +
                     c.c * JetScalar(fs.extract(0, 2));
      }
      const auto add = gamma_additivity_check(web, p);
      CHECK(oracle::rel_err(expansion.value, add.pair_sum.value) <= 1e-8);
    }
  }

  // Relabeling f_1 <-> f_2 swaps A_1 and A_2.
  const WebDefinition a = make_web({"x + y", "x - 2*y + x*y", "3*x + y^2", "y"});
  const WebDefinition b = make_web({"x - 2*y + x*y", "x + y", "3*x + y^2", "y"});
  const Point p{0.2, 0.3};
  CHECK(coefficient_sums_ABC(a, p, 1).a.value ==
        doctest::Approx(coefficient_sums_ABC(b, p, 2).a.value));
  CHECK(coefficient_sums_ABC(a, p, 3).c.value ==
        doctest::Approx(coefficient_sums_ABC(b, p, 3).c.value));
}

TEST_CASE("expansion coefficients") {
  std::mt19937_64 rng(99);
  for (int d = 4; d <= 6; ++d) {
    for (int t = 0; t < 15; ++t) {
      const auto [web, p] = admissible_sample(rng, d);
      const JetVector x = closed_form_X(web, p);
      for (int s = 1; s < d; ++s) {
        const ExpansionCoefficients e = expansion_coeffs_abc(web, p, s);
        const ExpansionCoefficients viaalpha = expansion_coeffs_from_alpha(web, p, s);
        const CoefficientSums c = coefficient_sums_ABC(web, p, s);
        const JetScalar& xs = x[s - 1];
        check_close(e.a, -c.a / xs, 1e-8);
        check_close(e.b, -c.b / xs, 1e-8);
        check_close(e.c, -c.c / xs, 1e-8);
        check_close(e.a, viaalpha.a, 1e-8);
        check_close(e.b, viaalpha.b, 1e-8);
        check_close(e.c, viaalpha.c, 1e-8);
      }
      const auto f = web_jets(web, p);
      check_close(gamma_expansion(web, p), gamma(f).as_jet(), 1e-8);
    }
  }

  // d = 3: alpha . G(f_1) = m_1 m_2 f_xx - (m_1 + m_2) f_xy + f_yy.
  const WebDefinition w3 = make_web({"x + 2*y + x^2", "x - y + x*y", "y"});
  const Point p{0.3, 0.1};
  const ExpansionCoefficients e1 = expansion_coeffs_abc(w3, p, 1);
  const auto f = web_jets(w3, p);
  const double m1 = f[0].extract(0, 1) / f[0].extract(1, 0);
  const double m2 = f[1].extract(0, 1) / f[1].extract(1, 0);
  CHECK(e1.a.value == doctest::Approx(m1 * m2));
  CHECK(e1.b.value == doctest::Approx(-(m1 + m2)));
  CHECK(e1.c.value == doctest::Approx(1));
}

TEST_CASE("symmetric polynomials") {
  const std::vector<double> ms = {1, 2};
  const auto s = symmetric_polys<double>(ms);
  CHECK(s.full(0) == 1);
  CHECK(s.full(1) == 3);
  CHECK(s.full(2) == 2);
  CHECK(s.full(3) == 0);
  CHECK(s.without(0, -1) == 0);
  CHECK(s.without(0, 2) == 0);

  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int k = 1; k <= 7; ++k) {
    std::vector<double> m(k);
    for (auto& v : m) v = u(rng);
    const auto bundle = symmetric_polys<double>(m);
    const auto brute = oracle::symmetric_by_subsets(m);
    for (int j = 0; j <= k; ++j) CHECK(oracle::rel_err(bundle.full(j), brute[j]) <= 1e-12);
    for (int q = 0; q < k; ++q) {
      std::vector<double> rest = m;
      rest.erase(rest.begin() + q);
      const auto brute_q = oracle::symmetric_by_subsets(rest);
      for (int j = 0; j < k; ++j) {
        CHECK(oracle::rel_err(bundle.without(q, j), brute_q[j]) <= 1e-12);
        CHECK(oracle::rel_err(bundle.full(j + 1),
                              m[q] * bundle.without(q, j) + bundle.without(q, j + 1)) <=
              1e-12);
      }
    }
    // Polynomial identities in t with P(t) = prod (t - m_r).
    for (int trial = 0; trial < 5; ++trial) {
      const double t = u(rng) * 3 + 7;
      double p = 1, dp = 0;
      for (double mr : m) {
        dp = dp * (t - mr) + p;
        p *= (t - mr);
      }
      double sum_tm = 0, sum_inv = 0;
      for (double mj : m) {
        sum_tm += t * mj / (t - mj);
        sum_inv += 1 / (t - mj);
      }
      // The sums run over the d - 2 slopes other than m_s, so k = d - 2.
      const double lhs = p * sum_tm, rhs = t * (t * dp - k * p);
      CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(rhs)));
      CHECK(std::abs(p * sum_inv - dp) <= 1e-10 * std::max(1.0, std::abs(dp)));
    }
  }
}
