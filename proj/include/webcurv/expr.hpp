#pragma once

// First integrals as text: parser, pretty-printer, evaluation to jets and the
// web file format.
//
// Grammar (whitespace is insignificant):
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | '+' unary | power
//   power   := primary ('^' exponent)?
//   exponent:= ('-' | '+')? (integer | '(' exponent ')') ('^' exponent)?
//   primary := number | 'x' | 'y' | func '(' expr ')' | '(' expr ')'
//   func    := exp | log | sin | cos | sqrt

#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "webcurv/jet.hpp"

namespace webcurv {

enum class NodeKind { Constant, Var, Add, Sub, Mul, Div, Neg, Pow, Call };
enum class Function { Exp, Log, Sin, Cos, Sqrt };

std::string_view function_name(Function f) noexcept;

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  NodeKind kind = NodeKind::Constant;
  Scalar value = 0;          // Constant
  Axis var = Axis::X;        // Var
  Function func = Function::Exp;  // Call
  int exponent = 0;          // Pow
  std::vector<NodePtr> args;
  std::size_t position = 0;  // 1-based offset in the source text, 0 if built
};

/// Immutable expression tree in the variables x and y.
class Expression {
 public:
  Expression() = default;
  explicit Expression(NodePtr root) : root_(std::move(root)) {}

  static Expression constant(Scalar v);
  static Expression variable(Axis a);

  const Node& root() const { return *root_; }
  bool empty() const noexcept { return !root_; }

  /// True iff the tree is literally the coordinate `y`.
  bool is_coordinate_y() const noexcept;

  std::string to_string() const;

  /// Structural equality; source positions are ignored.
  friend bool operator==(const Expression& a, const Expression& b);

 private:
  NodePtr root_;
};

Expression parse(std::string_view text);

/// Minimal-parenthesis printer; parse(print(e)) == e.
std::string print(const Expression& e);
std::string print(const Node& n);

/// Plain double evaluation.
Scalar evaluate(const Expression& e, Point p);

/// Order-K jet of the expression at p. Domain violations raise DomainError
/// naming the offending subexpression; near-zero divisors raise
/// NearZeroDivisor with the same annotation.
Jet eval_jet(const Expression& e, Point p, int order);

/// Evaluation over any scalar type with ADL-visible exp/log/sin/cos/sqrt.
template <typename T>
T evaluate_as(const Node& n, const T& x, const T& y) {
  using std::cos;
  using std::exp;
  using std::log;
  using std::sin;
  using std::sqrt;
  switch (n.kind) {
    case NodeKind::Constant: return T(n.value);
    case NodeKind::Var: return n.var == Axis::X ? x : y;
    case NodeKind::Add:
      return evaluate_as(*n.args[0], x, y) + evaluate_as(*n.args[1], x, y);
    case NodeKind::Sub:
      return evaluate_as(*n.args[0], x, y) - evaluate_as(*n.args[1], x, y);
    case NodeKind::Mul:
      return evaluate_as(*n.args[0], x, y) * evaluate_as(*n.args[1], x, y);
    case NodeKind::Div:
      return evaluate_as(*n.args[0], x, y) / evaluate_as(*n.args[1], x, y);
    case NodeKind::Neg: return -evaluate_as(*n.args[0], x, y);
    case NodeKind::Pow: {
      const T base = evaluate_as(*n.args[0], x, y);
      T r(1);
      for (int k = 0; k < (n.exponent < 0 ? -n.exponent : n.exponent); ++k) {
        r = r * base;
      }
      return n.exponent < 0 ? T(1) / r : r;
    }
    case NodeKind::Call: {
      const T a = evaluate_as(*n.args[0], x, y);
      switch (n.func) {
        case Function::Exp: return exp(a);
        case Function::Log: return log(a);
        case Function::Sin: return sin(a);
        case Function::Cos: return cos(a);
        case Function::Sqrt: return sqrt(a);
      }
    }
  }
  return T(0);
}

/// A planar web given by d >= 3 ordered first integrals. The order is
/// significant: trace elements are not symmetric in their arguments.
struct WebDefinition {
  std::vector<Expression> integrals;
  std::vector<std::string> labels;

  int d() const noexcept { return static_cast<int>(integrals.size()); }
};

/// Builds a web from expression strings; labels default to f1..fd.
WebDefinition make_web(std::span<const std::string> expressions);
WebDefinition make_web(std::initializer_list<std::string_view> expressions);

/// Web file format: one `<label> = <expression>` per line (the label is
/// optional), `#` starts a comment, blank lines are ignored. Errors carry the
/// line number.
WebDefinition parse_web_text(std::string_view text);
WebDefinition load_web_file(const std::string& path);

/// Relative threshold on |det| / (|grad f_i| |grad f_j|).
inline constexpr Scalar kTransversalityEpsilon = 1e-9;
/// Absolute threshold on |grad f_i|.
inline constexpr Scalar kVanishingGradientEpsilon = 1e-12;

struct PairVerdict {
  int i = 0;  // 0-based
  int j = 0;
  Scalar det = 0;   // f_ix f_jy - f_iy f_jx
  Scalar sine = 0;  // |det| / (|grad f_i| |grad f_j|), 0 if a gradient vanishes
  bool degenerate = false;
};

struct TransversalityReport {
  std::vector<PairVerdict> pairs;        // i < j, lexicographic
  std::vector<int> vanishing_gradients;  // 0-based indices

  bool any_degenerate() const noexcept;
  /// Smallest pairwise sine; 0 when some gradient vanishes.
  Scalar min_sine() const noexcept;
};

TransversalityReport check_transversality(std::span<const Expression> integrals,
                                          Point p);
TransversalityReport check_transversality(const WebDefinition& web, Point p);

}  // namespace webcurv
