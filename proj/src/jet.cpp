#include "webcurv/jet.hpp"

#include <cmath>
#include <sstream>

#include "webcurv/error.hpp"

namespace webcurv {
namespace {

void require_compatible(const Jet& a, const Jet& b, const char* op) {
  if (a.order() != b.order()) {
    std::ostringstream msg;
    msg << op << ": jet order mismatch (" << a.order() << " vs " << b.order()
        << ")";
    throw Error(ErrorCode::OrderMismatch, msg.str());
  }
  if (!(a.base_point() == b.base_point())) {
    throw Error(ErrorCode::BasePointMismatch,
                std::string(op) + ": jets expanded at different base points");
  }
}

double factorial(int n) {
  double f = 1;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

void require_order(int order) {
  if (order < 0) {
    throw Error(ErrorCode::InvalidArgument, "jet order must be non-negative");
  }
}

}  // namespace

// --- UnivariateSeries ------------------------------------------------------

UnivariateSeries UnivariateSeries::exp(Scalar center, int order) {
  require_order(order);
  UnivariateSeries g{center, std::vector<Scalar>(order + 1)};
  Scalar term = std::exp(center);
  for (int k = 0; k <= order; ++k) {
    g.coeffs[k] = term;
    term /= (k + 1);
  }
  return g;
}

UnivariateSeries UnivariateSeries::log(Scalar center, int order) {
  require_order(order);
  if (!(center > 0)) {
    throw Error(ErrorCode::DomainError, "log of a non-positive value");
  }
  UnivariateSeries g{center, std::vector<Scalar>(order + 1)};
  g.coeffs[0] = std::log(center);
  Scalar inv_pow = 1;
  for (int k = 1; k <= order; ++k) {
    inv_pow /= center;
    g.coeffs[k] = ((k % 2 == 1) ? 1.0 : -1.0) * inv_pow / k;
  }
  return g;
}

UnivariateSeries UnivariateSeries::sin(Scalar center, int order) {
  require_order(order);
  UnivariateSeries g{center, std::vector<Scalar>(order + 1)};
  const Scalar s = std::sin(center);
  const Scalar c = std::cos(center);
  // k-th derivative cycles through sin, cos, -sin, -cos.
  const Scalar cycle[4] = {s, c, -s, -c};
  for (int k = 0; k <= order; ++k) g.coeffs[k] = cycle[k % 4] / factorial(k);
  return g;
}

UnivariateSeries UnivariateSeries::cos(Scalar center, int order) {
  require_order(order);
  UnivariateSeries g{center, std::vector<Scalar>(order + 1)};
  const Scalar s = std::sin(center);
  const Scalar c = std::cos(center);
  const Scalar cycle[4] = {c, -s, -c, s};
  for (int k = 0; k <= order; ++k) g.coeffs[k] = cycle[k % 4] / factorial(k);
  return g;
}

UnivariateSeries UnivariateSeries::sqrt(Scalar center, int order) {
  require_order(order);
  if (center < 0 || (center == 0 && order > 0)) {
    throw Error(ErrorCode::DomainError,
                "sqrt of a negative value (or of zero with derivatives)");
  }
  UnivariateSeries g{center, std::vector<Scalar>(order + 1)};
  // (c + t)^{1/2} = sqrt(c) * sum binom(1/2, k) (t/c)^k
  Scalar binom = 1;
  Scalar scale = std::sqrt(center);
  for (int k = 0; k <= order; ++k) {
    g.coeffs[k] = binom * scale;
    binom *= (0.5 - k) / (k + 1);
    if (k < order) scale /= center;
  }
  return g;
}

UnivariateSeries UnivariateSeries::power(Scalar center, int exponent,
                                         int order) {
  require_order(order);
  UnivariateSeries g{center, std::vector<Scalar>(order + 1, 0.0)};
  if (exponent < 0 && std::abs(center) <= kInvertibilityEpsilon) {
    throw Error(ErrorCode::NearZeroDivisor,
                "negative power of a value near zero");
  }
  // (c + t)^n = sum binom(n, k) c^{n-k} t^k; terminates for n >= 0.
  Scalar binom = 1;
  for (int k = 0; k <= order; ++k) {
    if (exponent >= 0 && k > exponent) break;
    g.coeffs[k] = binom * std::pow(center, exponent - k);
    binom *= static_cast<Scalar>(exponent - k) / (k + 1);
  }
  return g;
}

// --- Jet -------------------------------------------------------------------

Jet::Jet(int order, Point base)
    : order_(order), base_(base), coeffs_(size_for_order(order), 0.0) {
  require_order(order);
}

Jet Jet::constant(Scalar value, Point base, int order) {
  Jet j(order, base);
  j.coeffs_[0] = value;
  return j;
}

Jet Jet::variable(Point base, Axis which, int order) {
  Jet j(order, base);
  j.coeffs_[0] = (which == Axis::X) ? base.x : base.y;
  if (order >= 1) {
    j.coeff_ref(which == Axis::X ? 1 : 0, which == Axis::X ? 0 : 1) = 1.0;
  }
  return j;
}

Scalar Jet::coeff(int a, int b) const noexcept {
  if (a < 0 || b < 0 || a + b > order_) return 0.0;
  return coeffs_[index(a, b)];
}

Scalar& Jet::coeff_ref(int a, int b) {
  if (a < 0 || b < 0 || a + b > order_) {
    throw Error(ErrorCode::InvalidArgument, "jet coefficient out of range");
  }
  return coeffs_[index(a, b)];
}

Scalar Jet::extract(int a, int b) const {
  if (a < 0 || b < 0 || a + b > order_) {
    throw Error(ErrorCode::InsufficientJetOrder,
                "derivative order exceeds jet order");
  }
  return coeffs_[index(a, b)] * factorial(a) * factorial(b);
}

Jet& Jet::operator+=(const Jet& other) {
  require_compatible(*this, other, "jet_add");
  for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] += other.coeffs_[k];
  return *this;
}

Jet& Jet::operator-=(const Jet& other) {
  require_compatible(*this, other, "jet_sub");
  for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] -= other.coeffs_[k];
  return *this;
}

Jet& Jet::operator*=(Scalar s) {
  for (auto& c : coeffs_) c *= s;
  return *this;
}

Jet operator+(Jet a, const Jet& b) { return a += b; }
Jet operator-(Jet a, const Jet& b) { return a -= b; }
Jet operator-(Jet a) { return a *= -1.0; }
Jet operator*(Jet a, Scalar s) { return a *= s; }
Jet operator*(Scalar s, Jet a) { return a *= s; }

Jet operator*(const Jet& a, const Jet& b) {
  require_compatible(a, b, "jet_mul");
  const int K = a.order();
  Jet r(K, a.base_point());
  for (int n = 0; n <= K; ++n) {
    for (int b1 = 0; b1 <= n; ++b1) {
      const int a1 = n - b1;
      const Scalar lhs = a.coeff(a1, b1);
      if (lhs == 0.0) continue;
      for (int m = 0; m + n <= K; ++m) {
        for (int b2 = 0; b2 <= m; ++b2) {
          r.coeff_ref(a1 + m - b2, b1 + b2) += lhs * b.coeff(m - b2, b2);
        }
      }
    }
  }
  return r;
}

Jet operator/(const Jet& a, const Jet& b) {
  require_compatible(a, b, "jet_div");
  const Scalar b0 = b.value();
  if (std::abs(b0) <= kInvertibilityEpsilon) {
    throw Error(ErrorCode::NearZeroDivisor,
                "jet division by a jet whose value is near zero");
  }
  // Solve q * b = a coefficient by coefficient in increasing total order.
  const int K = a.order();
  Jet q(K, a.base_point());
  for (int n = 0; n <= K; ++n) {
    for (int qb = 0; qb <= n; ++qb) {
      const int qa = n - qb;
      Scalar acc = a.coeff(qa, qb);
      for (int i = 0; i <= qa; ++i) {
        for (int j = 0; j <= qb; ++j) {
          if (i == 0 && j == 0) continue;
          acc -= b.coeff(i, j) * q.coeff(qa - i, qb - j);
        }
      }
      q.coeff_ref(qa, qb) = acc / b0;
    }
  }
  return q;
}

Jet jet_var(Point p, Axis which, int order) {
  return Jet::variable(p, which, order);
}
Jet jet_add(const Jet& a, const Jet& b) { return a + b; }
Jet jet_sub(const Jet& a, const Jet& b) { return a - b; }
Jet jet_mul(const Jet& a, const Jet& b) { return a * b; }
Jet jet_div(const Jet& a, const Jet& b) { return a / b; }

Jet jet_compose(const UnivariateSeries& g, const Jet& a) {
  if (g.coeffs.empty()) {
    throw Error(ErrorCode::InvalidArgument, "empty univariate series");
  }
  Jet h = a;
  h.coeff_ref(0, 0) = 0.0;  // nilpotent part
  Jet r = Jet::constant(g.coeffs.back(), a.base_point(), a.order());
  for (int k = static_cast<int>(g.coeffs.size()) - 2; k >= 0; --k) {
    r = r * h;
    r.coeff_ref(0, 0) += g.coeffs[k];
  }
  return r;
}

Jet jet_partial(const Jet& a, Axis which) {
  if (a.order() == 0) {
    throw Error(ErrorCode::ZeroOrderJet,
                "cannot differentiate a jet of order 0");
  }
  const int K = a.order() - 1;
  Jet r(K, a.base_point());
  for (int n = 0; n <= K; ++n) {
    for (int b = 0; b <= n; ++b) {
      const int x = n - b;
      r.coeff_ref(x, b) = (which == Axis::X) ? (x + 1) * a.coeff(x + 1, b)
                                             : (b + 1) * a.coeff(x, b + 1);
    }
  }
  return r;
}

Jet jet_truncate(const Jet& a, int new_order) {
  if (new_order < 0 || new_order > a.order()) {
    throw Error(ErrorCode::InvalidArgument,
                "truncation order must lie in [0, jet order]");
  }
  Jet r(new_order, a.base_point());
  for (int n = 0; n <= new_order; ++n) {
    for (int b = 0; b <= n; ++b) r.coeff_ref(n - b, b) = a.coeff(n - b, b);
  }
  return r;
}

Jet exp(const Jet& a) {
  return jet_compose(UnivariateSeries::exp(a.value(), a.order()), a);
}
Jet log(const Jet& a) {
  return jet_compose(UnivariateSeries::log(a.value(), a.order()), a);
}
Jet sin(const Jet& a) {
  return jet_compose(UnivariateSeries::sin(a.value(), a.order()), a);
}
Jet cos(const Jet& a) {
  return jet_compose(UnivariateSeries::cos(a.value(), a.order()), a);
}
Jet sqrt(const Jet& a) {
  return jet_compose(UnivariateSeries::sqrt(a.value(), a.order()), a);
}

Jet pow(const Jet& a, int exponent) {
  if (exponent >= 0) {
    // Repeated squaring keeps x^n exact at a zero base value.
    Jet result = Jet::constant(1.0, a.base_point(), a.order());
    Jet base = a;
    for (int e = exponent; e > 0; e >>= 1) {
      if (e & 1) result = result * base;
      if (e > 1) base = base * base;
    }
    return result;
  }
  return jet_compose(UnivariateSeries::power(a.value(), exponent, a.order()),
                     a);
}

}  // namespace webcurv
