#pragma once

// Scalar expressions in (t, x, y): parsing, evaluation, printing and exact
// structural differentiation.
//
// Trees are immutable and shared; an Expr is a cheap handle. The only
// simplification ever applied is constant folding (see the make_* builders),
// so evaluation results do not depend on how a tree was produced.

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <numbers>
#include <string>
#include <string_view>

#include "ejecta/errors.hpp"

namespace ejecta::expr {

enum class Var : std::uint8_t { t = 0, x = 1, y = 2 };
enum class UnaryOp : std::uint8_t { neg, sin, cos, tan, exp, log, sqrt };
enum class BinaryOp : std::uint8_t { add, sub, mul, div, pow };
enum class Kind : std::uint8_t { constant, variable, unary, binary };

inline const char* name(Var v) {
  switch (v) {
    case Var::t: return "t";
    case Var::x: return "x";
    case Var::y: return "y";
  }
  return "?";
}

inline const char* name(UnaryOp op) {
  switch (op) {
    case UnaryOp::neg: return "-";
    case UnaryOp::sin: return "sin";
    case UnaryOp::cos: return "cos";
    case UnaryOp::tan: return "tan";
    case UnaryOp::exp: return "exp";
    case UnaryOp::log: return "log";
    case UnaryOp::sqrt: return "sqrt";
  }
  return "?";
}

inline const char* symbol(BinaryOp op) {
  switch (op) {
    case BinaryOp::add: return "+";
    case BinaryOp::sub: return "-";
    case BinaryOp::mul: return "*";
    case BinaryOp::div: return "/";
    case BinaryOp::pow: return "^";
  }
  return "?";
}

class Expr;

namespace detail {
struct Node;
}

/// Handle to an immutable expression node.
class Expr {
 public:
  Expr() = default;

  static Expr constant(double value);
  static Expr variable(Var v);
  static Expr unary(UnaryOp op, Expr child);
  static Expr binary(BinaryOp op, Expr lhs, Expr rhs);

  bool valid() const noexcept { return static_cast<bool>(node_); }
  Kind kind() const;
  double value() const;  // constant
  Var var() const;       // variable
  UnaryOp unary_op() const;
  BinaryOp binary_op() const;
  const Expr& child() const;  // unary
  const Expr& lhs() const;    // binary
  const Expr& rhs() const;

  bool is_constant(double v) const { return kind() == Kind::constant && value() == v; }

 private:
  explicit Expr(std::shared_ptr<const detail::Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const detail::Node> node_;
};

namespace detail {
struct Node {
  Kind kind{};
  double value = 0.0;
  Var var = Var::x;
  UnaryOp uop = UnaryOp::neg;
  BinaryOp bop = BinaryOp::add;
  Expr a;
  Expr b;
};
}  // namespace detail

inline Expr Expr::constant(double value) {
  auto n = std::make_shared<detail::Node>();
  n->kind = Kind::constant;
  n->value = value;
  return Expr(std::move(n));
}

inline Expr Expr::variable(Var v) {
  auto n = std::make_shared<detail::Node>();
  n->kind = Kind::variable;
  n->var = v;
  return Expr(std::move(n));
}

inline Expr Expr::unary(UnaryOp op, Expr child) {
  auto n = std::make_shared<detail::Node>();
  n->kind = Kind::unary;
  n->uop = op;
  n->a = std::move(child);
  return Expr(std::move(n));
}

inline Expr Expr::binary(BinaryOp op, Expr lhs, Expr rhs) {
  auto n = std::make_shared<detail::Node>();
  n->kind = Kind::binary;
  n->bop = op;
  n->a = std::move(lhs);
  n->b = std::move(rhs);
  return Expr(std::move(n));
}

inline Kind Expr::kind() const { return node_->kind; }
inline double Expr::value() const { return node_->value; }
inline Var Expr::var() const { return node_->var; }
inline UnaryOp Expr::unary_op() const { return node_->uop; }
inline BinaryOp Expr::binary_op() const { return node_->bop; }
inline const Expr& Expr::child() const { return node_->a; }
inline const Expr& Expr::lhs() const { return node_->a; }
inline const Expr& Expr::rhs() const { return node_->b; }

/// Variable bindings for evaluation; unset variables raise UnboundVariable when read.
struct Bindings {
  std::array<double, 3> values{};
  std::uint8_t mask = 0;

  Bindings& set(Var v, double value) {
    values[static_cast<int>(v)] = value;
    mask |= static_cast<std::uint8_t>(1u << static_cast<int>(v));
    return *this;
  }
  bool bound(Var v) const { return (mask >> static_cast<int>(v)) & 1u; }

  static Bindings txy(double t, double x, double y) {
    return Bindings{}.set(Var::t, t).set(Var::x, x).set(Var::y, y);
  }
};

// ---------------------------------------------------------------------------
// Evaluation

namespace detail {

inline double checked(double v, const char* what) {
  if (!std::isfinite(v)) throw EvalError(std::string("non-finite result in ") + what);
  return v;
}

inline double apply(UnaryOp op, double u) {
  switch (op) {
    case UnaryOp::neg: return -u;
    case UnaryOp::sin: return checked(std::sin(u), "sin");
    case UnaryOp::cos: return checked(std::cos(u), "cos");
    case UnaryOp::tan: return checked(std::tan(u), "tan");
    case UnaryOp::exp: return checked(std::exp(u), "exp");
    case UnaryOp::log:
      if (!(u > 0.0)) throw EvalError("log of non-positive argument");
      return std::log(u);
    case UnaryOp::sqrt:
      if (u < 0.0) throw EvalError("sqrt of negative argument");
      return std::sqrt(u);
  }
  return 0.0;
}

inline double apply(BinaryOp op, double a, double b) {
  switch (op) {
    case BinaryOp::add: return checked(a + b, "+");
    case BinaryOp::sub: return checked(a - b, "-");
    case BinaryOp::mul: return checked(a * b, "*");
    case BinaryOp::div:
      if (b == 0.0) throw EvalError("division by zero");
      return checked(a / b, "/");
    case BinaryOp::pow:
      if (a == 0.0 && b < 0.0) throw EvalError("zero raised to a negative power");
      if (a < 0.0 && b != std::trunc(b)) throw EvalError("negative base with non-integer exponent");
      return checked(std::pow(a, b), "^");
  }
  return 0.0;
}

}  // namespace detail

inline double eval(const Expr& e, const Bindings& b) {
  switch (e.kind()) {
    case Kind::constant: return e.value();
    case Kind::variable:
      if (!b.bound(e.var())) throw UnboundVariable(std::string("unbound variable ") + name(e.var()));
      return b.values[static_cast<int>(e.var())];
    case Kind::unary: return detail::apply(e.unary_op(), eval(e.child(), b));
    case Kind::binary: {
      const double l = eval(e.lhs(), b);
      const double r = eval(e.rhs(), b);
      return detail::apply(e.binary_op(), l, r);
    }
  }
  return 0.0;
}

inline double eval(const Expr& e, const std::map<std::string, double>& vars) {
  Bindings b;
  for (const auto& [k, v] : vars) {
    if (k == "t") b.set(Var::t, v);
    else if (k == "x") b.set(Var::x, v);
    else if (k == "y") b.set(Var::y, v);
    else throw UnsupportedError("unknown variable name '" + k + "'");
  }
  return eval(e, b);
}

inline bool uses(const Expr& e, Var v) {
  switch (e.kind()) {
    case Kind::constant: return false;
    case Kind::variable: return e.var() == v;
    case Kind::unary: return uses(e.child(), v);
    case Kind::binary: return uses(e.lhs(), v) || uses(e.rhs(), v);
  }
  return false;
}

inline bool has_variables(const Expr& e) {
  return uses(e, Var::t) || uses(e, Var::x) || uses(e, Var::y);
}

inline std::size_t node_count(const Expr& e) {
  switch (e.kind()) {
    case Kind::constant:
    case Kind::variable: return 1;
    case Kind::unary: return 1 + node_count(e.child());
    case Kind::binary: return 1 + node_count(e.lhs()) + node_count(e.rhs());
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Folding builders

inline Expr make_const(double v) { return Expr::constant(v); }

inline Expr make_unary(UnaryOp op, Expr u) {
  if (u.kind() == Kind::constant) {
    try {
      return Expr::constant(detail::apply(op, u.value()));
    } catch (const EvalError&) {
      // leave the domain violation for eval to report
    }
  }
  return Expr::unary(op, std::move(u));
}

inline Expr make_binary(BinaryOp op, Expr a, Expr b) {
  if (a.kind() == Kind::constant && b.kind() == Kind::constant) {
    try {
      return Expr::constant(detail::apply(op, a.value(), b.value()));
    } catch (const EvalError&) {
    }
  }
  switch (op) {
    case BinaryOp::add:
      if (a.is_constant(0.0)) return b;
      if (b.is_constant(0.0)) return a;
      break;
    case BinaryOp::sub:
      if (b.is_constant(0.0)) return a;
      if (a.is_constant(0.0)) return make_unary(UnaryOp::neg, std::move(b));
      break;
    case BinaryOp::mul:
      if (a.is_constant(0.0) || b.is_constant(0.0)) return make_const(0.0);
      if (a.is_constant(1.0)) return b;
      if (b.is_constant(1.0)) return a;
      break;
    case BinaryOp::div:
      if (a.is_constant(0.0)) return make_const(0.0);
      if (b.is_constant(1.0)) return a;
      break;
    case BinaryOp::pow:
      if (b.is_constant(1.0)) return a;
      if (b.is_constant(0.0)) return make_const(1.0);
      break;
  }
  return Expr::binary(op, std::move(a), std::move(b));
}

inline Expr operator+(Expr a, Expr b) { return make_binary(BinaryOp::add, std::move(a), std::move(b)); }
inline Expr operator-(Expr a, Expr b) { return make_binary(BinaryOp::sub, std::move(a), std::move(b)); }
inline Expr operator*(Expr a, Expr b) { return make_binary(BinaryOp::mul, std::move(a), std::move(b)); }
inline Expr operator/(Expr a, Expr b) { return make_binary(BinaryOp::div, std::move(a), std::move(b)); }
inline Expr operator-(Expr a) { return make_unary(UnaryOp::neg, std::move(a)); }

// ---------------------------------------------------------------------------
// Differentiation

inline Expr differentiate(const Expr& e, Var v) {
  switch (e.kind()) {
    case Kind::constant: return make_const(0.0);
    case Kind::variable: return make_const(e.var() == v ? 1.0 : 0.0);
    case Kind::unary: {
      const Expr& u = e.child();
      Expr du = differentiate(u, v);
      if (du.is_constant(0.0)) return make_const(0.0);
      switch (e.unary_op()) {
        case UnaryOp::neg: return -du;
        case UnaryOp::sin: return make_unary(UnaryOp::cos, u) * du;
        case UnaryOp::cos: return -(make_unary(UnaryOp::sin, u) * du);
        case UnaryOp::tan: {
          Expr c = make_unary(UnaryOp::cos, u);
          return du / make_binary(BinaryOp::pow, c, make_const(2.0));
        }
        case UnaryOp::exp: return make_unary(UnaryOp::exp, u) * du;
        case UnaryOp::log: return du / u;
        case UnaryOp::sqrt: return du / (make_const(2.0) * make_unary(UnaryOp::sqrt, u));
      }
      break;
    }
    case Kind::binary: {
      const Expr& a = e.lhs();
      const Expr& b = e.rhs();
      switch (e.binary_op()) {
        case BinaryOp::add: return differentiate(a, v) + differentiate(b, v);
        case BinaryOp::sub: return differentiate(a, v) - differentiate(b, v);
        case BinaryOp::mul: return differentiate(a, v) * b + a * differentiate(b, v);
        case BinaryOp::div: {
          Expr da = differentiate(a, v);
          Expr db = differentiate(b, v);
          if (db.is_constant(0.0)) return da / b;
          return (da * b - a * db) / make_binary(BinaryOp::pow, b, make_const(2.0));
        }
        case BinaryOp::pow: {
          // exponent is a constant by construction
          const double n = b.value();
          Expr da = differentiate(a, v);
          return make_const(n) * make_binary(BinaryOp::pow, a, make_const(n - 1.0)) * da;
        }
      }
      break;
    }
  }
  return make_const(0.0);
}

// ---------------------------------------------------------------------------
// Printing

inline std::string format_number(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  (void)ec;
  return std::string(buf.data(), end);
}

/// Fully parenthesised text that reparses to a tree with bit-identical evaluation.
inline std::string print(const Expr& e) {
  switch (e.kind()) {
    case Kind::constant: {
      const double v = e.value();
      if (std::signbit(v)) return "(-" + format_number(-v) + ")";
      return format_number(v);
    }
    case Kind::variable: return name(e.var());
    case Kind::unary:
      if (e.unary_op() == UnaryOp::neg) return "(-" + print(e.child()) + ")";
      return std::string(name(e.unary_op())) + "(" + print(e.child()) + ")";
    case Kind::binary:
      return "(" + print(e.lhs()) + symbol(e.binary_op()) + print(e.rhs()) + ")";
  }
  return {};
}

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

class Parser {
 public:
  explicit Parser(std::string_view src) : s_(src) {}

  Expr parse() {
    Expr e = expr();
    skip_ws();
    if (pos_ != s_.size()) throw SyntaxError(pos_, "operator or end of input");
    return e;
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\n' || s_[pos_] == '\r'))
      ++pos_;
  }
  bool accept(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr expr() {
    Expr lhs = term();
    for (;;) {
      if (accept('+')) lhs = Expr::binary(BinaryOp::add, lhs, term());
      else if (accept('-')) lhs = Expr::binary(BinaryOp::sub, lhs, term());
      else return lhs;
    }
  }

  Expr term() {
    Expr lhs = factor();
    for (;;) {
      if (accept('*')) lhs = Expr::binary(BinaryOp::mul, lhs, factor());
      else if (accept('/')) lhs = Expr::binary(BinaryOp::div, lhs, factor());
      else return lhs;
    }
  }

  Expr factor() {
    if (accept('-')) return Expr::unary(UnaryOp::neg, power());
    return power();
  }

  Expr power() {
    Expr base = atom();
    skip_ws();
    const std::size_t at = pos_;
    if (accept('^')) {
      Expr exponent = factor();
      if (has_variables(exponent))
        throw UnsupportedError("non-constant exponent at position " + std::to_string(at));
      return Expr::binary(BinaryOp::pow, base, Expr::constant(eval(exponent, Bindings{})));
    }
    return base;
  }

  Expr atom() {
    skip_ws();
    if (pos_ >= s_.size()) throw SyntaxError(pos_, "number, identifier or '('");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      Expr inner = expr();
      if (!accept(')')) throw SyntaxError(pos_, "')'");
      return inner;
    }
    if ((c >= '0' && c <= '9') || c == '.') return number();
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_') return identifier();
    throw SyntaxError(pos_, "number, identifier or '('");
  }

  Expr number() {
    const std::size_t start = pos_;
    auto digit = [&](std::size_t i) { return i < s_.size() && s_[i] >= '0' && s_[i] <= '9'; };
    std::size_t i = pos_;
    bool any = false;
    while (digit(i)) ++i, any = true;
    if (i < s_.size() && s_[i] == '.') {
      ++i;
      while (digit(i)) ++i, any = true;
    }
    if (!any) throw SyntaxError(start, "digits");
    if (i < s_.size() && (s_[i] == 'e' || s_[i] == 'E')) {
      std::size_t j = i + 1;
      if (j < s_.size() && (s_[j] == '+' || s_[j] == '-')) ++j;
      if (digit(j)) {
        while (digit(j)) ++j;
        i = j;
      }
    }
    double v = 0.0;
    const auto res = std::from_chars(s_.data() + start, s_.data() + i, v);
    if (res.ec != std::errc{} || res.ptr != s_.data() + i) throw SyntaxError(start, "number");
    pos_ = i;
    return Expr::constant(v);
  }

  Expr identifier() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && ((s_[pos_] >= 'a' && s_[pos_] <= 'z') || (s_[pos_] >= 'A' && s_[pos_] <= 'Z') ||
                                (s_[pos_] >= '0' && s_[pos_] <= '9') || s_[pos_] == '_'))
      ++pos_;
    const std::string_view id = s_.substr(start, pos_ - start);
    if (id == "t") return Expr::variable(Var::t);
    if (id == "x") return Expr::variable(Var::x);
    if (id == "y") return Expr::variable(Var::y);
    if (id == "pi") return Expr::constant(std::numbers::pi);
    if (id == "e") return Expr::constant(std::numbers::e);
    static constexpr std::array<std::pair<std::string_view, UnaryOp>, 6> functions{{
        {"sin", UnaryOp::sin},
        {"cos", UnaryOp::cos},
        {"tan", UnaryOp::tan},
        {"exp", UnaryOp::exp},
        {"log", UnaryOp::log},
        {"sqrt", UnaryOp::sqrt},
    }};
    for (const auto& [fname, op] : functions) {
      if (id == fname) {
        if (!accept('(')) throw SyntaxError(pos_, "'(' after " + std::string(fname));
        Expr arg = expr();
        if (!accept(')')) throw SyntaxError(pos_, "')'");
        return Expr::unary(op, arg);
      }
    }
    throw UnsupportedError("unknown identifier '" + std::string(id) + "' at position " + std::to_string(start));
  }
};

}  // namespace detail

inline Expr parse(std::string_view source) { return detail::Parser(source).parse(); }

}  // namespace ejecta::expr
