#pragma once

// The perturbed vector field  x' = g(x) + lambda * f(t, x)  with structural
// first and second derivatives of both parts precomputed.

#include <array>
#include <string>
#include <vector>

#include "ejecta/errors.hpp"
#include "ejecta/expr.hpp"
#include "ejecta/linalg.hpp"

namespace ejecta {

/// Second derivative tensor of a vector field: one symmetric Hessian per component.
struct HessianTensor {
  std::array<SmallMatrix, 2> component{};
  int n = 1;

  /// w -> D^2(.)[w, w]
  Vec vv(const Vec& w) const {
    Vec r(n);
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) s += component[static_cast<std::size_t>(i)](j, k) * w[j] * w[k];
      r[i] = s;
    }
    return r;
  }
  double frobenius() const {
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      const double f = component[static_cast<std::size_t>(i)].frobenius();
      s += f * f;
    }
    return std::sqrt(s);
  }
};

class FieldSpec {
 public:
  /// Validates and differentiates. g must be autonomous; a 1-D field may not mention y.
  static FieldSpec make(int dim, std::vector<expr::Expr> g, std::vector<expr::Expr> f, bool separated = false) {
    if (dim != 1 && dim != 2) throw InputError("dim must be 1 or 2");
    if (static_cast<int>(g.size()) != dim || static_cast<int>(f.size()) != dim)
      throw InputError("number of g and f components must equal dim");
    for (const auto& gi : g) {
      if (expr::uses(gi, expr::Var::t)) throw InputError("g must not depend on t");
      if (dim == 1 && expr::uses(gi, expr::Var::y)) throw InputError("1-D field uses variable y");
    }
    for (const auto& fi : f)
      if (dim == 1 && expr::uses(fi, expr::Var::y)) throw InputError("1-D field uses variable y");

    FieldSpec s;
    s.dim_ = dim;
    s.separated_ = separated;
    s.g_ = std::move(g);
    s.f_ = std::move(f);
    derive(s.g_, dim, s.dg_, s.d2g_);
    derive(s.f_, dim, s.df_, s.d2f_);
    return s;
  }

  static FieldSpec parse(int dim, const std::vector<std::string>& g, const std::vector<std::string>& f,
                         bool separated = false) {
    std::vector<expr::Expr> ge, fe;
    for (const auto& s : g) ge.push_back(expr::parse(s));
    for (const auto& s : f) fe.push_back(expr::parse(s));
    return make(dim, std::move(ge), std::move(fe), separated);
  }

  int dim() const { return dim_; }
  bool separated() const { return separated_; }
  const std::vector<expr::Expr>& g_components() const { return g_; }
  const std::vector<expr::Expr>& f_components() const { return f_; }

  Vec g(const Vec& p) const { return values(g_, bind(0.0, p)); }
  SmallMatrix g_jacobian(const Vec& p) const { return jacobian(dg_, bind(0.0, p)); }
  HessianTensor g_hessian(const Vec& p) const { return hessian(d2g_, bind(0.0, p)); }

  Vec f(double t, const Vec& p) const { return values(f_, bind(t, p)); }
  SmallMatrix f_jacobian(double t, const Vec& p) const { return jacobian(df_, bind(t, p)); }
  HessianTensor f_hessian(double t, const Vec& p) const { return hessian(d2f_, bind(t, p)); }

  /// Binding for (t, p); unused coordinates are bound to 0.
  static expr::Bindings bind(double t, const Vec& p) {
    return expr::Bindings::txy(t, p[0], p.n > 1 ? p[1] : 0.0);
  }

  // Raw-binding variants for the integrator hot loop.
  void g_into(const expr::Bindings& b, Vec& out) const { out = values(g_, b); }
  void f_into(const expr::Bindings& b, Vec& out) const { out = values(f_, b); }
  SmallMatrix g_jacobian_at(const expr::Bindings& b) const { return jacobian(dg_, b); }
  SmallMatrix f_jacobian_at(const expr::Bindings& b) const { return jacobian(df_, b); }
  HessianTensor g_hessian_at(const expr::Bindings& b) const { return hessian(d2g_, b); }
  HessianTensor f_hessian_at(const expr::Bindings& b) const { return hessian(d2f_, b); }

 private:
  using Jac = std::array<std::array<expr::Expr, 2>, 2>;
  using Hess = std::array<std::array<std::array<expr::Expr, 2>, 2>, 2>;

  int dim_ = 1;
  bool separated_ = false;
  std::vector<expr::Expr> g_, f_;
  Jac dg_, df_;
  Hess d2g_, d2f_;

  static expr::Var coord(int j) { return j == 0 ? expr::Var::x : expr::Var::y; }

  static void derive(const std::vector<expr::Expr>& comps, int dim, Jac& d1, Hess& d2) {
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) {
        d1[i][j] = expr::differentiate(comps[static_cast<std::size_t>(i)], coord(j));
        for (int k = 0; k < dim; ++k) {
          if (k < j) {
            d2[i][j][k] = d2[i][k][j];
          } else {
            d2[i][j][k] = expr::differentiate(d1[i][j], coord(k));
          }
        }
      }
  }

  Vec values(const std::vector<expr::Expr>& comps, const expr::Bindings& b) const {
    Vec r(dim_);
    for (int i = 0; i < dim_; ++i) r[i] = expr::eval(comps[static_cast<std::size_t>(i)], b);
    return r;
  }
  SmallMatrix jacobian(const Jac& d1, const expr::Bindings& b) const {
    SmallMatrix m(dim_);
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) m(i, j) = expr::eval(d1[i][j], b);
    return m;
  }
  HessianTensor hessian(const Hess& d2, const expr::Bindings& b) const {
    HessianTensor h;
    h.n = dim_;
    for (int i = 0; i < dim_; ++i) {
      SmallMatrix m(dim_);
      for (int j = 0; j < dim_; ++j)
        for (int k = j; k < dim_; ++k) {
          m(j, k) = expr::eval(d2[i][j][k], b);
          m(k, j) = m(j, k);
        }
      h.component[static_cast<std::size_t>(i)] = m;
    }
    return h;
  }
};

}  // namespace ejecta
