#include "webcurv/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "webcurv/error.hpp"

namespace webcurv {

std::string_view function_name(Function f) noexcept {
  switch (f) {
    case Function::Exp: return "exp";
    case Function::Log: return "log";
    case Function::Sin: return "sin";
    case Function::Cos: return "cos";
    case Function::Sqrt: return "sqrt";
  }
  return "?";
}

namespace {

NodePtr make_node(NodeKind kind, std::vector<NodePtr> args, std::size_t pos) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->args = std::move(args);
  n->position = pos;
  return n;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  NodePtr parse_all() {
    NodePtr e = parse_expr();
    skip_ws();
    if (!at_end()) fail("operator or end of input");
    return e;
  }

 private:
  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return at_end() ? '\0' : text_[pos_]; }

  void skip_ws() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }

  bool accept(char c) {
    skip_ws();
    if (peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& expected) const {
    std::ostringstream msg;
    msg << "syntax error at position " << (pos_ + 1) << ": expected "
        << expected;
    if (at_end()) {
      msg << ", found end of input";
    } else {
      msg << ", found '" << text_[pos_] << "'";
    }
    throw SyntaxError(pos_ + 1, expected, msg.str());
  }

  NodePtr parse_expr() {
    NodePtr lhs = parse_term();
    for (;;) {
      skip_ws();
      const std::size_t at = pos_ + 1;
      if (accept('+')) {
        lhs = make_node(NodeKind::Add, {lhs, parse_term()}, at);
      } else if (accept('-')) {
        lhs = make_node(NodeKind::Sub, {lhs, parse_term()}, at);
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_unary();
    for (;;) {
      skip_ws();
      const std::size_t at = pos_ + 1;
      if (accept('*')) {
        lhs = make_node(NodeKind::Mul, {lhs, parse_unary()}, at);
      } else if (accept('/')) {
        lhs = make_node(NodeKind::Div, {lhs, parse_unary()}, at);
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_unary() {
    skip_ws();
    const std::size_t at = pos_ + 1;
    if (accept('-')) return make_node(NodeKind::Neg, {parse_unary()}, at);
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_primary();
    skip_ws();
    const std::size_t at = pos_ + 1;
    if (accept('^')) {
      auto n = std::make_shared<Node>();
      n->kind = NodeKind::Pow;
      n->args = {base};
      n->exponent = parse_exponent();
      n->position = at;
      return n;
    }
    return base;
  }

  int parse_exponent() {
    skip_ws();
    int sign = 1;
    if (accept('-')) {
      sign = -1;
    } else {
      accept('+');
    }
    skip_ws();
    long long value = 0;
    if (accept('(')) {
      value = parse_exponent();
      if (!accept(')')) fail("')'");
    } else {
      if (!std::isdigit(static_cast<unsigned char>(peek()))) {
        fail("integer exponent");
      }
      while (std::isdigit(static_cast<unsigned char>(peek()))) {
        value = value * 10 + (text_[pos_] - '0');
        if (value > 1000000) fail("integer exponent of reasonable size");
        ++pos_;
      }
      if (peek() == '.' || peek() == 'e' || peek() == 'E') {
        fail("integer exponent");
      }
    }
    value *= sign;
    skip_ws();
    if (accept('^')) {
      const int inner = parse_exponent();
      if (inner < 0) fail("non-negative exponent in a power tower");
      long long folded = 1;
      for (int k = 0; k < inner; ++k) {
        folded *= value;
        if (std::llabs(folded) > 1000000) fail("integer exponent of reasonable size");
      }
      value = folded;
    }
    return static_cast<int>(value);
  }

  NodePtr parse_primary() {
    skip_ws();
    const std::size_t at = pos_ + 1;
    const char c = peek();
    if (c == '(') {
      ++pos_;
      NodePtr inner = parse_expr();
      if (!accept(')')) fail("')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      return parse_number(at);
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) ||
                           peek() == '_')) {
        ++pos_;
      }
      const std::string_view ident = text_.substr(start, pos_ - start);
      if (ident == "x" || ident == "y") {
        auto n = std::make_shared<Node>();
        n->kind = NodeKind::Var;
        n->var = ident == "x" ? Axis::X : Axis::Y;
        n->position = at;
        return n;
      }
      static constexpr Function kFuncs[] = {Function::Exp, Function::Log,
                                            Function::Sin, Function::Cos,
                                            Function::Sqrt};
      for (Function f : kFuncs) {
        if (ident == function_name(f)) {
          if (!accept('(')) fail("'(' after function name");
          NodePtr arg = parse_expr();
          if (!accept(')')) fail("')'");
          auto n = std::make_shared<Node>();
          n->kind = NodeKind::Call;
          n->func = f;
          n->args = {arg};
          n->position = at;
          return n;
        }
      }
      pos_ = start;
      fail("x, y, a number or one of exp, log, sin, cos, sqrt");
    }
    fail("number, variable, function call or '('");
  }

  NodePtr parse_number(std::size_t at) {
    const std::size_t start = pos_;
    while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
    if (peek() == '.') {
      ++pos_;
      while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
    }
    if (peek() == 'e' || peek() == 'E') {
      const std::size_t mark = pos_;
      ++pos_;
      if (peek() == '+' || peek() == '-') ++pos_;
      if (!std::isdigit(static_cast<unsigned char>(peek()))) {
        pos_ = mark;  // not an exponent; let the caller complain
      } else {
        while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
      }
    }
    const std::string token(text_.substr(start, pos_ - start));
    if (token == ".") {
      pos_ = start;
      fail("number");
    }
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::Constant;
    n->value = std::strtod(token.c_str(), nullptr);
    n->position = at;
    return n;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

// Printer precedence: atoms bind tightest.
int precedence(const Node& n) {
  switch (n.kind) {
    case NodeKind::Add:
    case NodeKind::Sub: return 1;
    case NodeKind::Mul:
    case NodeKind::Div: return 2;
    case NodeKind::Neg: return 3;
    case NodeKind::Pow: return 4;
    default: return 5;
  }
}

std::string format_number(Scalar v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s = buf;
  // Shortest representation that round-trips.
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) {
      s = buf;
      break;
    }
  }
  return s;
}

void print_into(const Node& n, std::string& out);

void print_child(const Node& child, bool paren, std::string& out) {
  if (paren) out += '(';
  print_into(child, out);
  if (paren) out += ')';
}

void print_into(const Node& n, std::string& out) {
  const int p = precedence(n);
  switch (n.kind) {
    case NodeKind::Constant: out += format_number(n.value); return;
    case NodeKind::Var: out += (n.var == Axis::X ? 'x' : 'y'); return;
    case NodeKind::Add:
    case NodeKind::Sub:
    case NodeKind::Mul:
    case NodeKind::Div: {
      static constexpr const char* kOps[] = {" + ", " - ", "*", "/"};
      const int op = static_cast<int>(n.kind) - static_cast<int>(NodeKind::Add);
      print_child(*n.args[0], precedence(*n.args[0]) < p, out);
      out += kOps[op];
      print_child(*n.args[1], precedence(*n.args[1]) <= p, out);
      return;
    }
    case NodeKind::Neg:
      out += '-';
      print_child(*n.args[0], precedence(*n.args[0]) < p, out);
      return;
    case NodeKind::Pow:
      print_child(*n.args[0], precedence(*n.args[0]) <= p, out);
      out += '^';
      out += std::to_string(n.exponent);
      return;
    case NodeKind::Call:
      out += function_name(n.func);
      out += '(';
      print_into(*n.args[0], out);
      out += ')';
      return;
  }
}

bool same_tree(const Node& a, const Node& b) {
  if (a.kind != b.kind || a.args.size() != b.args.size()) return false;
  switch (a.kind) {
    case NodeKind::Constant:
      if (a.value != b.value) return false;
      break;
    case NodeKind::Var:
      if (a.var != b.var) return false;
      break;
    case NodeKind::Pow:
      if (a.exponent != b.exponent) return false;
      break;
    case NodeKind::Call:
      if (a.func != b.func) return false;
      break;
    default: break;
  }
  for (std::size_t k = 0; k < a.args.size(); ++k) {
    if (!same_tree(*a.args[k], *b.args[k])) return false;
  }
  return true;
}

std::string locate(const Node& n) {
  std::string s = "'" + print(n) + "'";
  if (n.position > 0) s += " at position " + std::to_string(n.position);
  return s;
}

Jet jet_of(const Node& n, Point p, int order) {
  switch (n.kind) {
    case NodeKind::Constant: return Jet::constant(n.value, p, order);
    case NodeKind::Var: return Jet::variable(p, n.var, order);
    case NodeKind::Add:
      return jet_of(*n.args[0], p, order) + jet_of(*n.args[1], p, order);
    case NodeKind::Sub:
      return jet_of(*n.args[0], p, order) - jet_of(*n.args[1], p, order);
    case NodeKind::Mul:
      return jet_of(*n.args[0], p, order) * jet_of(*n.args[1], p, order);
    case NodeKind::Neg: return -jet_of(*n.args[0], p, order);
    case NodeKind::Div: {
      const Jet num = jet_of(*n.args[0], p, order);
      const Jet den = jet_of(*n.args[1], p, order);
      try {
        return num / den;
      } catch (const Error& e) {
        throw Error(e.code(), std::string(e.what()) + " in " + locate(n));
      }
    }
    case NodeKind::Pow: {
      const Jet base = jet_of(*n.args[0], p, order);
      try {
        return pow(base, n.exponent);
      } catch (const Error& e) {
        throw Error(e.code(), std::string(e.what()) + " in " + locate(n));
      }
    }
    case NodeKind::Call: {
      const Jet arg = jet_of(*n.args[0], p, order);
      try {
        switch (n.func) {
          case Function::Exp: return exp(arg);
          case Function::Log: return log(arg);
          case Function::Sin: return sin(arg);
          case Function::Cos: return cos(arg);
          case Function::Sqrt: return sqrt(arg);
        }
      } catch (const Error& e) {
        throw Error(e.code(), std::string(e.what()) + " in " + locate(n));
      }
    }
  }
  throw Error(ErrorCode::InvalidArgument, "malformed expression tree");
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

}  // namespace

Expression Expression::constant(Scalar v) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Constant;
  n->value = v;
  return Expression(n);
}

Expression Expression::variable(Axis a) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Var;
  n->var = a;
  return Expression(n);
}

bool Expression::is_coordinate_y() const noexcept {
  return root_ && root_->kind == NodeKind::Var && root_->var == Axis::Y;
}

std::string Expression::to_string() const { return print(*this); }

bool operator==(const Expression& a, const Expression& b) {
  if (a.empty() || b.empty()) return a.empty() == b.empty();
  return same_tree(a.root(), b.root());
}

Expression parse(std::string_view text) {
  return Expression(Parser(text).parse_all());
}

std::string print(const Node& n) {
  std::string out;
  print_into(n, out);
  return out;
}

std::string print(const Expression& e) { return print(e.root()); }

Scalar evaluate(const Expression& e, Point p) {
  return evaluate_as<Scalar>(e.root(), p.x, p.y);
}

Jet eval_jet(const Expression& e, Point p, int order) {
  return jet_of(e.root(), p, order);
}

WebDefinition make_web(std::span<const std::string> expressions) {
  WebDefinition web;
  for (std::size_t k = 0; k < expressions.size(); ++k) {
    web.integrals.push_back(parse(expressions[k]));
    web.labels.push_back("f" + std::to_string(k + 1));
  }
  return web;
}

WebDefinition make_web(std::initializer_list<std::string_view> expressions) {
  std::vector<std::string> v(expressions.begin(), expressions.end());
  return make_web(v);
}

WebDefinition parse_web_text(std::string_view text) {
  WebDefinition web;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    ++line_no;
    start = end + 1;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }

    std::string label = "f" + std::to_string(web.integrals.size() + 1);
    std::string_view body = line;
    std::size_t body_offset = 0;
    if (const auto eq = line.find('='); eq != std::string_view::npos) {
      const std::string_view lhs = trim(line.substr(0, eq));
      if (lhs.empty()) {
        throw Error(ErrorCode::InputError,
                    "line " + std::to_string(line_no) + ": empty label");
      }
      label = std::string(lhs);
      body = line.substr(eq + 1);
      body_offset = eq + 1;
    }
    try {
      web.integrals.push_back(parse(body));
    } catch (const SyntaxError& e) {
      throw Error(ErrorCode::InputError,
                  "line " + std::to_string(line_no) + ", column " +
                      std::to_string(e.position() + body_offset) + ": " +
                      e.what());
    }
    web.labels.push_back(std::move(label));
    if (end == text.size()) break;
  }
  if (web.d() < 3) {
    throw Error(ErrorCode::InputError,
                "a web needs at least 3 first integrals, found " +
                    std::to_string(web.d()));
  }
  return web;
}

WebDefinition load_web_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InputError, "cannot open web file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_web_text(buf.str());
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

bool TransversalityReport::any_degenerate() const noexcept {
  if (!vanishing_gradients.empty()) return true;
  for (const auto& v : pairs) {
    if (v.degenerate) return true;
  }
  return false;
}

Scalar TransversalityReport::min_sine() const noexcept {
  if (!vanishing_gradients.empty()) return 0;
  Scalar m = 1;
  for (const auto& v : pairs) m = std::min(m, v.sine);
  return m;
}

TransversalityReport check_transversality(std::span<const Expression> integrals,
                                          Point p) {
  TransversalityReport report;
  std::vector<Scalar> gx, gy, norm;
  for (const auto& e : integrals) {
    const Jet j = eval_jet(e, p, 1);
    gx.push_back(j.coeff(1, 0));
    gy.push_back(j.coeff(0, 1));
    norm.push_back(std::hypot(gx.back(), gy.back()));
  }
  const int n = static_cast<int>(integrals.size());
  for (int i = 0; i < n; ++i) {
    if (norm[i] <= kVanishingGradientEpsilon) {
      report.vanishing_gradients.push_back(i);
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      PairVerdict v;
      v.i = i;
      v.j = j;
      v.det = gx[i] * gy[j] - gy[i] * gx[j];
      const Scalar scale = norm[i] * norm[j];
      v.sine = scale > 0 ? std::abs(v.det) / scale : 0.0;
      v.degenerate = norm[i] <= kVanishingGradientEpsilon ||
                     norm[j] <= kVanishingGradientEpsilon ||
                     std::abs(v.det) <= kTransversalityEpsilon * scale;
      report.pairs.push_back(v);
    }
  }
  return report;
}

TransversalityReport check_transversality(const WebDefinition& web, Point p) {
  return check_transversality(web.integrals, p);
}

}  // namespace webcurv
