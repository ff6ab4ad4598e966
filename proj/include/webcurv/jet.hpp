#pragma once

// Truncated bivariate Taylor jets.
//
// A Jet of order K stores the normalized Taylor coefficients
//   c[a][b] = (d^{a+b} f / dx^a dy^b)(P) / (a! b!),   a + b <= K
// of a scalar function at a base point P. Multiplication is a plain Cauchy
// product truncated at total order K, so every operation below is exact up to
// truncation.

#include <cstddef>
#include <span>
#include <vector>

namespace webcurv {

using Scalar = double;

struct Point {
  Scalar x = 0;
  Scalar y = 0;

  friend bool operator==(const Point&, const Point&) = default;
};

enum class Axis { X, Y };

/// Threshold below which a jet's constant term is treated as zero when it is
/// used as a divisor.
inline constexpr Scalar kInvertibilityEpsilon = 1e-12;

/// Coefficients g_0..g_K of a univariate Taylor expansion about `center`.
struct UnivariateSeries {
  Scalar center = 0;
  std::vector<Scalar> coeffs;

  int order() const noexcept { return static_cast<int>(coeffs.size()) - 1; }

  static UnivariateSeries exp(Scalar center, int order);
  static UnivariateSeries log(Scalar center, int order);
  static UnivariateSeries sin(Scalar center, int order);
  static UnivariateSeries cos(Scalar center, int order);
  static UnivariateSeries sqrt(Scalar center, int order);
  static UnivariateSeries power(Scalar center, int exponent, int order);
};

class Jet {
 public:
  Jet() : Jet(0, Point{}) {}
  Jet(int order, Point base);

  static Jet constant(Scalar value, Point base, int order);
  static Jet variable(Point base, Axis which, int order);

  int order() const noexcept { return order_; }
  const Point& base_point() const noexcept { return base_; }

  /// Number of stored coefficients, (K+1)(K+2)/2.
  std::size_t size() const noexcept { return coeffs_.size(); }
  static std::size_t size_for_order(int order) noexcept {
    return static_cast<std::size_t>(order + 1) * (order + 2) / 2;
  }

  Scalar value() const noexcept { return coeffs_[0]; }

  /// Normalized coefficient c[a][b]; zero beyond the truncation order.
  Scalar coeff(int a, int b) const noexcept;
  Scalar& coeff_ref(int a, int b);

  /// Partial derivative d^{a+b}/dx^a dy^b at the base point.
  Scalar extract(int a, int b) const;

  std::span<const Scalar> coefficients() const noexcept { return coeffs_; }

  Jet& operator+=(const Jet& other);
  Jet& operator-=(const Jet& other);
  Jet& operator*=(Scalar s);

 private:
  static std::size_t index(int a, int b) noexcept {
    const auto n = static_cast<std::size_t>(a + b);
    return n * (n + 1) / 2 + static_cast<std::size_t>(b);
  }

  int order_;
  Point base_;
  std::vector<Scalar> coeffs_;
};

Jet operator+(Jet a, const Jet& b);
Jet operator-(Jet a, const Jet& b);
Jet operator-(Jet a);
Jet operator*(const Jet& a, const Jet& b);
Jet operator*(Jet a, Scalar s);
Jet operator*(Scalar s, Jet a);
Jet operator/(const Jet& a, const Jet& b);

Jet jet_var(Point p, Axis which, int order);
Jet jet_add(const Jet& a, const Jet& b);
Jet jet_sub(const Jet& a, const Jet& b);
Jet jet_mul(const Jet& a, const Jet& b);
Jet jet_div(const Jet& a, const Jet& b);

/// Horner evaluation of g in the nilpotent part of a. The series must be
/// centered at a's constant term.
Jet jet_compose(const UnivariateSeries& g, const Jet& a);

/// Jet of order K-1 for the chosen partial derivative.
Jet jet_partial(const Jet& a, Axis which);

Jet jet_truncate(const Jet& a, int new_order);

Jet exp(const Jet& a);
Jet log(const Jet& a);
Jet sin(const Jet& a);
Jet cos(const Jet& a);
Jet sqrt(const Jet& a);
Jet pow(const Jet& a, int exponent);

}  // namespace webcurv
