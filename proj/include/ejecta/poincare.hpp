#pragma once

// The starting-point map F(lambda, p) = P_T^lambda(p) - p and its partials.

#include <limits>
#include <span>
#include <vector>

#include "ejecta/field.hpp"
#include "ejecta/flow.hpp"
#include "ejecta/linalg.hpp"

namespace ejecta::poincare {

struct StartingMapEval {
  Vec value;              // F(lambda, p)
  Vec d_lambda;           // dF/dlambda
  SmallMatrix d_p;        // dF/dp
  flow::Status status = flow::Status::Completed;
  flow::Stats stats;

  bool completed() const { return status == flow::Status::Completed; }
};

/// Root acceptance for "is a starting point", independent of the integrator tolerance.
inline double root_tolerance(const Vec& p) { return 1e-9 * (1.0 + p.norm()); }

inline bool is_root(const StartingMapEval& e, const Vec& p) {
  return e.completed() && e.value.norm() <= root_tolerance(p);
}

inline StartingMapEval eval_F(const FieldSpec& field, double lambda, const Vec& p, double T,
                              const flow::Options& opt = {}) {
  const flow::VariationalResult r = flow::integrate_with_variations(field, lambda, p, T, {}, opt, true);
  StartingMapEval out;
  out.status = r.status;
  out.stats = r.stats;
  out.value = r.terminal_state - p;
  out.d_lambda = r.lambda_sensitivity;
  out.d_p = r.first_variation - SmallMatrix::identity(field.dim());
  return out;
}

/// Value of F only (no variational equations).
inline StartingMapEval eval_F_value(const FieldSpec& field, double lambda, const Vec& p, double T,
                                    const flow::Options& opt = {}) {
  const flow::FlowResult r = flow::integrate(field, lambda, p, T, opt);
  StartingMapEval out;
  out.status = r.status;
  out.stats = r.stats;
  out.value = r.terminal_state - p;
  out.d_lambda = Vec(field.dim());
  out.d_p = SmallMatrix(field.dim());
  return out;
}

/// int_0^T e^{(T-s)A} f(s, p0) ds, i.e. y(T) for y' = A y + f(t, p0), y(0) = 0.
/// At a zero p0 of g with A = g'(p0) this is dF/dlambda(0, p0).
inline Vec weighted_forcing_integral(const FieldSpec& field, const SmallMatrix& a, const Vec& p0, double T,
                                     const flow::Options& opt = {}) {
  const int d = field.dim();
  auto rhs = [&](double t, std::span<const double> y, std::span<double> dy) {
    const Vec f = field.f(t, p0);
    for (int i = 0; i < d; ++i) {
      double s = f[i];
      for (int k = 0; k < d; ++k) s += a(i, k) * y[static_cast<std::size_t>(k)];
      dy[static_cast<std::size_t>(i)] = s;
    }
  };
  flow::Options o = opt;
  o.blow_up_bound = std::numeric_limits<double>::infinity();
  const flow::OdeResult r =
      flow::integrate_ode(rhs, std::vector<double>(static_cast<std::size_t>(d), 0.0), 0.0, T, o, 0);
  Vec out(d);
  for (int i = 0; i < d; ++i) out[i] = r.y[static_cast<std::size_t>(i)];
  return out;
}

/// Closed-form dF/dlambda at (0, p0) for a zero p0 of g.
inline Vec eval_dlambda_closed_form(const FieldSpec& field, const Vec& p0, double T, const flow::Options& opt = {}) {
  return weighted_forcing_integral(field, field.g_jacobian(p0), p0, T, opt);
}

}  // namespace ejecta::poincare
