#pragma once

// Problem files: a flat, sectioned key = value format.
//
//   [problem]  dim, period, g, f, separated
//   [window]   lambda, p (dim 1) or x, y (dim 2)
//   [numerics] rk_tol, grid, resonance_eps
//
// Values are numbers, "strings", true/false, or [lists] of numbers/strings.
// '#' starts a comment outside strings.

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ejecta/errors.hpp"
#include "ejecta/expr.hpp"
#include "ejecta/field.hpp"
#include "ejecta/window.hpp"

namespace ejecta {

struct Numerics {
  double rk_tol = 1e-10;
  int grid = 400;
  double resonance_eps = 1e-8;
};

struct ProblemSpec {
  std::string id;  // bundled id or file stem
  int dim = 1;
  double period = 2.0 * std::numbers::pi;
  std::string period_text = "2pi";
  std::vector<std::string> g_text, f_text;
  bool separated = false;
  Window window;
  Numerics numerics;
  FieldSpec field;
};

namespace problem_detail {

struct Value {
  std::variant<double, std::string, bool, std::vector<double>, std::vector<std::string>> v;
  int line = 0, col = 0;
  int key_col = 0;
};

inline std::string where(int line, int col) { return std::to_string(line) + ":" + std::to_string(col); }

[[noreturn]] inline void fail(int line, int col, const std::string& msg) {
  throw InputError("problem file " + where(line, col) + ": " + msg);
}

class LineParser {
 public:
  LineParser(std::string_view s, int line) : s_(s), line_(line) {}

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\r')) ++pos_;
  }
  bool at_end() {
    skip_ws();
    return pos_ >= s_.size() || s_[pos_] == '#';
  }
  int col() const { return static_cast<int>(pos_) + 1; }
  char peek() {
    skip_ws();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }
  void expect(char c) {
    if (peek() != c) fail(line_, col(), std::string("expected '") + c + "'");
    ++pos_;
  }
  std::string ident() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    if (pos_ == start) fail(line_, col(), "expected a key");
    return std::string(s_.substr(start, pos_ - start));
  }
  std::string string_lit() {
    expect('"');
    std::string out;
    while (pos_ < s_.size() && s_[pos_] != '"') {
      if (s_[pos_] == '\\' && pos_ + 1 < s_.size()) ++pos_;
      out += s_[pos_++];
    }
    if (pos_ >= s_.size()) fail(line_, col(), "unterminated string");
    ++pos_;
    return out;
  }
  double number() {
    skip_ws();
    const std::size_t start = pos_;
    double v = 0.0;
    const char* first = s_.data() + pos_;
    if (pos_ < s_.size() && s_[pos_] == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, s_.data() + s_.size(), v);
    if (ec != std::errc() || ptr == first) fail(line_, static_cast<int>(start) + 1, "expected a number");
    pos_ = static_cast<std::size_t>(ptr - s_.data());
    return v;
  }
  Value value() {
    Value out;
    out.line = line_;
    out.col = col();
    const char c = peek();
    if (c == '"') {
      out.v = string_lit();
    } else if (c == '[') {
      ++pos_;
      if (peek() == '"') {
        std::vector<std::string> items;
        for (;;) {
          items.push_back(string_lit());
          if (peek() == ',') {
            ++pos_;
            continue;
          }
          break;
        }
        out.v = items;
      } else {
        std::vector<double> items;
        if (peek() != ']')
          for (;;) {
            items.push_back(number());
            if (peek() == ',') {
              ++pos_;
              continue;
            }
            break;
          }
        out.v = items;
      }
      expect(']');
    } else if (s_.substr(pos_, 4) == "true") {
      pos_ += 4;
      out.v = true;
    } else if (s_.substr(pos_, 5) == "false") {
      pos_ += 5;
      out.v = false;
    } else {
      out.v = number();
    }
    return out;
  }

 private:
  std::string_view s_;
  int line_;
  std::size_t pos_ = 0;
};

/// "2pi", "pi", "6.5", "2*pi" ...
inline double parse_period(const std::string& text, int line, int col) {
  std::string t;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) t += c;
  if (t.size() >= 2 && t.compare(t.size() - 2, 2, "pi") == 0) {
    const std::string head = t.substr(0, t.size() - 2);
    double k = 1.0;
    if (!head.empty()) {
      const auto [ptr, ec] = std::from_chars(head.data(), head.data() + head.size(), k);
      if (ec != std::errc() || ptr != head.data() + head.size()) k = std::nan("");
    }
    if (!std::isnan(k)) return k * std::numbers::pi;
  }
  expr::Expr e;
  try {
    e = expr::parse(t);
  } catch (const InputError& err) {
    fail(line, col, std::string("bad period: ") + err.what());
  }
  if (expr::has_variables(e)) fail(line, col, "period must be a constant");
  try {
    return expr::eval(e, expr::Bindings{});
  } catch (const NumericalError& err) {
    fail(line, col, std::string("bad period: ") + err.what());
  }
}

}  // namespace problem_detail

inline ProblemSpec parse_problem(std::string_view text, const std::string& id = "problem") {
  using problem_detail::fail;
  using problem_detail::Value;
  std::map<std::string, Value> keys;  // "section.key"
  std::string section;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find('\n', start), text.size());
    const std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    problem_detail::LineParser lp(line, line_no);
    if (lp.at_end()) continue;
    if (lp.peek() == '[') {
      lp.expect('[');
      section = lp.ident();
      lp.expect(']');
      if (section != "problem" && section != "window" && section != "numerics")
        fail(line_no, 2, "unknown section [" + section + "]");
    } else {
      const int key_col = lp.col();
      if (section.empty()) fail(line_no, key_col, "key outside of a section");
      const std::string key = lp.ident();
      lp.expect('=');
      Value v = lp.value();
      v.key_col = key_col;
      if (!lp.at_end()) fail(line_no, lp.col(), "unexpected trailing characters");
      const std::string full = section + "." + key;
      if (keys.count(full)) fail(line_no, key_col, "duplicate key '" + key + "'");
      keys.emplace(full, std::move(v));
    }
    if (end == text.size()) break;
  }

  std::map<std::string, bool> used;
  auto find = [&](const std::string& k) -> const Value* {
    const auto it = keys.find(k);
    if (it == keys.end()) return nullptr;
    used[k] = true;
    return &it->second;
  };
  auto require = [&](const std::string& k) -> const Value& {
    const Value* v = find(k);
    if (!v) throw InputError("problem file: missing key '" + k + "'");
    return *v;
  };
  auto as_number = [](const Value& v, const std::string& k) {
    if (const double* d = std::get_if<double>(&v.v)) return *d;
    fail(v.line, v.col, "'" + k + "' must be a number");
  };
  auto as_interval = [](const Value& v, const std::string& k) {
    const auto* xs = std::get_if<std::vector<double>>(&v.v);
    if (!xs || xs->size() != 2) fail(v.line, v.col, "'" + k + "' must be a list [lo, hi]");
    if (!((*xs)[0] < (*xs)[1])) fail(v.line, v.col, "'" + k + "' bounds must satisfy lo < hi");
    return Interval{(*xs)[0], (*xs)[1]};
  };
  auto as_strings = [](const Value& v, const std::string& k) {
    if (const auto* s = std::get_if<std::string>(&v.v)) return std::vector<std::string>{*s};
    if (const auto* ss = std::get_if<std::vector<std::string>>(&v.v)) return *ss;
    fail(v.line, v.col, "'" + k + "' must be a string or list of strings");
  };

  ProblemSpec spec;
  spec.id = id;
  {
    const Value& d = require("problem.dim");
    const double dim = as_number(d, "dim");
    if (dim != 1.0 && dim != 2.0) fail(d.line, d.col, "dim must be 1 or 2");
    spec.dim = static_cast<int>(dim);
  }
  if (const Value* p = find("problem.period")) {
    if (const auto* s = std::get_if<std::string>(&p->v)) {
      spec.period_text = *s;
      spec.period = problem_detail::parse_period(*s, p->line, p->col);
    } else {
      spec.period = as_number(*p, "period");
      spec.period_text = std::to_string(spec.period);
    }
    if (!(spec.period > 0.0) || !std::isfinite(spec.period)) fail(p->line, p->col, "period must be positive");
  }
  const Value& gv = require("problem.g");
  const Value& fv = require("problem.f");
  spec.g_text = as_strings(gv, "g");
  spec.f_text = as_strings(fv, "f");
  if (static_cast<int>(spec.g_text.size()) != spec.dim) fail(gv.line, gv.col, "g must have dim components");
  if (static_cast<int>(spec.f_text.size()) != spec.dim) fail(fv.line, fv.col, "f must have dim components");
  if (const Value* s = find("problem.separated")) {
    const bool* b = std::get_if<bool>(&s->v);
    if (!b) fail(s->line, s->col, "'separated' must be true or false");
    spec.separated = *b;
  }

  spec.window.dim = spec.dim;
  spec.window.lambda = as_interval(require("window.lambda"), "lambda");
  if (spec.dim == 1) {
    spec.window.p[0] = as_interval(require("window.p"), "p");
  } else {
    spec.window.p[0] = as_interval(require("window.x"), "x");
    spec.window.p[1] = as_interval(require("window.y"), "y");
  }

  if (const Value* v = find("numerics.rk_tol")) {
    spec.numerics.rk_tol = as_number(*v, "rk_tol");
    if (!(spec.numerics.rk_tol > 0.0)) fail(v->line, v->col, "rk_tol must be positive");
  }
  if (const Value* v = find("numerics.grid")) {
    const double g = as_number(*v, "grid");
    if (g < 8 || g != std::floor(g) || g > 1e7) fail(v->line, v->col, "grid must be an integer >= 8");
    spec.numerics.grid = static_cast<int>(g);
  }
  if (const Value* v = find("numerics.resonance_eps")) {
    spec.numerics.resonance_eps = as_number(*v, "resonance_eps");
    if (!(spec.numerics.resonance_eps > 0.0)) fail(v->line, v->col, "resonance_eps must be positive");
  }

  for (const auto& [k, v] : keys)
    if (!used.count(k)) fail(v.line, v.key_col, "unknown key '" + k + "'");

  auto parse_all = [](const std::vector<std::string>& texts, const Value& v, const char* name) {
    std::vector<expr::Expr> out;
    for (const auto& s : texts) {
      try {
        out.push_back(expr::parse(s));
      } catch (const InputError& e) {
        fail(v.line, v.col, std::string("in ") + name + ": " + e.what());
      }
    }
    return out;
  };
  auto ge = parse_all(spec.g_text, gv, "g");
  auto fe = parse_all(spec.f_text, fv, "f");
  try {
    spec.field = FieldSpec::make(spec.dim, std::move(ge), std::move(fe), spec.separated);
  } catch (const InputError& e) {
    fail(gv.line, gv.col, e.what());
  }
  return spec;
}

inline ProblemSpec load_problem(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open problem file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string id = path;
  if (const auto slash = id.find_last_of('/'); slash != std::string::npos) id = id.substr(slash + 1);
  if (const auto dot = id.find_last_of('.'); dot != std::string::npos && dot > 0) id = id.substr(0, dot);
  return parse_problem(ss.str(), id);
}

}  // namespace ejecta
