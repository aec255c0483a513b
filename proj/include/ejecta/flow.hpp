#pragma once

// Dormand-Prince 5(4) integration of the perturbed field and of its first and
// second variational equations.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "ejecta/field.hpp"
#include "ejecta/linalg.hpp"

namespace ejecta::flow {

enum class Status { Completed, Escaped, StepFailure };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::Completed: return "Completed";
    case Status::Escaped: return "Escaped";
    case Status::StepFailure: return "StepFailure";
  }
  return "?";
}

struct Options {
  double tol = 1e-10;
  double blow_up_bound = 1e6;
};

struct Stats {
  long steps = 0;
  long rejects = 0;
};

struct OdeResult {
  std::vector<double> y;
  Status status = Status::Completed;
  double event_time = 0.0;  // Escaped / StepFailure time
  double event_norm = 0.0;  // Escaped norm
  Stats stats;
};

/// Integrates y' = rhs(t, y) from t0 to t1 (> t0). The first `monitored`
/// components form the physical state checked against the blow-up bound.
/// Per-step error: |err_i| <= tol * (1 + max(|y_i|, |y_new_i|)).
template <class Rhs>
OdeResult integrate_ode(Rhs&& rhs, std::vector<double> y0, double t0, double t1, const Options& opt,
                        std::size_t monitored) {
  // Dormand-Prince coefficients
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                   a65 = -5103.0 / 18656;
  constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                   a76 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                   e6 = 22.0 / 525, e7 = -1.0 / 40;
  // PI controller (Hairer & Wanner, DOPRI5 defaults)
  constexpr double beta = 0.04, safe = 0.9, fac_min = 0.2, fac_max = 10.0;
  constexpr double expo = 0.2 - beta * 0.75;

  const std::size_t n = y0.size();
  OdeResult res;
  std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), ynew(n);
  std::vector<double>& y = y0;
  const double span_t = t1 - t0;
  const double h_min = 1e-14 * span_t;

  auto state_norm = [&](const std::vector<double>& v) {
    double s = 0.0;
    for (std::size_t i = 0; i < monitored; ++i) s += v[i] * v[i];
    return std::sqrt(s);
  };
  auto scaled_norm = [&](const std::vector<double>& v, const std::vector<double>& ref) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(v[i]) / (opt.tol * (1.0 + std::abs(ref[i]))));
    return m;
  };

  double t = t0;
  rhs(t, std::span<const double>(y), std::span<double>(k1));

  // starting step
  double h;
  {
    const double d0 = scaled_norm(y, y);
    const double d1 = scaled_norm(k1, y);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 * span_t : 0.01 * d0 / d1;
    h0 = std::min(h0, span_t);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h0 * k1[i];
    rhs(t + h0, std::span<const double>(tmp), std::span<double>(k2));
    for (std::size_t i = 0; i < n; ++i) k3[i] = k2[i] - k1[i];
    const double d2 = scaled_norm(k3, y) / h0;
    const double dmax = std::max(d1, d2);
    const double h1 = dmax <= 1e-15 ? std::max(1e-6 * span_t, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
    h = std::min({100.0 * h0, h1, span_t});
  }

  double fac_old = 1e-4;
  bool last_rejected = false;
  while (t < t1) {
    if (h < h_min) {
      res.status = Status::StepFailure;
      res.event_time = t;
      break;
    }
    bool last = false;
    if (t + h >= t1) {
      h = t1 - t;
      last = true;
    }
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * a21 * k1[i];
    rhs(t + c2 * h, std::span<const double>(tmp), std::span<double>(k2));
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    rhs(t + c3 * h, std::span<const double>(tmp), std::span<double>(k3));
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    rhs(t + c4 * h, std::span<const double>(tmp), std::span<double>(k4));
    for (std::size_t i = 0; i < n; ++i)
      tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    rhs(t + c5 * h, std::span<const double>(tmp), std::span<double>(k5));
    for (std::size_t i = 0; i < n; ++i)
      tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    const double t_new = last ? t1 : t + h;
    rhs(t_new, std::span<const double>(tmp), std::span<double>(k6));
    for (std::size_t i = 0; i < n; ++i)
      ynew[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    rhs(t_new, std::span<const double>(ynew), std::span<double>(k7));

    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double ei = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sk = opt.tol * (1.0 + std::max(std::abs(y[i]), std::abs(ynew[i])));
      const double ri = std::abs(ei) / sk;
      err = std::isnan(ri) ? ri : std::max(err, ri);  // std::max would drop a NaN
      if (std::isnan(err)) break;
    }
    if (!std::isfinite(err)) {
      ++res.stats.rejects;
      h *= 0.25;
      last_rejected = true;
      continue;
    }

    const double fac11 = std::pow(std::max(err, 1e-300), expo);
    double fac = fac11 / std::pow(fac_old, beta);
    fac = std::clamp(fac / safe, 1.0 / fac_max, 1.0 / fac_min);
    double h_new = h / fac;

    if (err <= 1.0) {
      fac_old = std::max(err, 1e-4);
      ++res.stats.steps;
      t = t_new;
      std::swap(y, ynew);
      std::swap(k1, k7);
      const double norm = state_norm(y);
      if (norm > opt.blow_up_bound) {
        res.status = Status::Escaped;
        res.event_time = t;
        res.event_norm = norm;
        break;
      }
      if (last_rejected) h_new = std::min(h_new, h);
      last_rejected = false;
      h = h_new;
    } else {
      ++res.stats.rejects;
      h = h / std::min(1.0 / fac_min, fac11 / safe);
      last_rejected = true;
    }
  }
  res.y = std::move(y);
  return res;
}

// ---------------------------------------------------------------------------
// Field flows

struct FlowResult {
  Vec terminal_state;
  Status status = Status::Completed;
  double event_time = 0.0;
  double event_norm = 0.0;
  Stats stats;

  bool completed() const { return status == Status::Completed; }
};

struct VariationalResult {
  Vec terminal_state;
  SmallMatrix first_variation;              // d x(T) / d p
  Vec lambda_sensitivity;                   // d x(T) / d lambda
  std::vector<Vec> second_variation_vv;     // d^2 x(T) / dp^2 [v, v], one per probe
  Status status = Status::Completed;
  double event_time = 0.0;
  double event_norm = 0.0;
  Stats stats;

  bool completed() const { return status == Status::Completed; }
};

inline FlowResult integrate(const FieldSpec& field, double lambda, const Vec& p, double t_final,
                            const Options& opt = {}) {
  const int d = field.dim();
  auto rhs = [&](double t, std::span<const double> y, std::span<double> dy) {
    const auto b = expr::Bindings::txy(t, y[0], d > 1 ? y[1] : 0.0);
    Vec g, f;
    field.g_into(b, g);
    if (lambda != 0.0) field.f_into(b, f);
    for (int i = 0; i < d; ++i) dy[static_cast<std::size_t>(i)] = g[i] + (lambda != 0.0 ? lambda * f[i] : 0.0);
  };
  std::vector<double> y0(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) y0[static_cast<std::size_t>(i)] = p[i];
  OdeResult r = integrate_ode(rhs, std::move(y0), 0.0, t_final, opt, static_cast<std::size_t>(d));
  FlowResult out;
  out.terminal_state = Vec(d);
  for (int i = 0; i < d; ++i) out.terminal_state[i] = r.y[static_cast<std::size_t>(i)];
  out.status = r.status;
  out.event_time = r.event_time;
  out.event_norm = r.event_norm;
  out.stats = r.stats;
  return out;
}

/// Co-integrates the state, the first variation M (M(0) = I), the lambda
/// sensitivity (optional) and one second variation per probe direction.
inline VariationalResult integrate_with_variations(const FieldSpec& field, double lambda, const Vec& p,
                                                   double t_final, const std::vector<Vec>& probe_dirs,
                                                   const Options& opt = {}, bool lambda_sensitivity = false) {
  const int d = field.dim();
  const std::size_t nd = static_cast<std::size_t>(d);
  const std::size_t off_m = nd;
  const std::size_t off_s = off_m + nd * nd;
  const std::size_t off_b = off_s + (lambda_sensitivity ? nd : 0);
  const std::size_t total = off_b + nd * probe_dirs.size();
  const bool forced = lambda != 0.0;

  auto rhs = [&](double t, std::span<const double> y, std::span<double> dy) {
    const auto b = expr::Bindings::txy(t, y[0], d > 1 ? y[1] : 0.0);
    Vec g;
    field.g_into(b, g);
    SmallMatrix jac = field.g_jacobian_at(b);
    Vec f(d);
    if (forced || lambda_sensitivity) field.f_into(b, f);
    if (forced) jac = jac + lambda * field.f_jacobian_at(b);
    for (std::size_t i = 0; i < nd; ++i) dy[i] = g[static_cast<int>(i)] + (forced ? lambda * f[static_cast<int>(i)] : 0.0);
    // M' = J M
    for (std::size_t i = 0; i < nd; ++i)
      for (std::size_t j = 0; j < nd; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < nd; ++k) s += jac(static_cast<int>(i), static_cast<int>(k)) * y[off_m + k * nd + j];
        dy[off_m + i * nd + j] = s;
      }
    if (lambda_sensitivity) {
      for (std::size_t i = 0; i < nd; ++i) {
        double s = f[static_cast<int>(i)];
        for (std::size_t k = 0; k < nd; ++k) s += jac(static_cast<int>(i), static_cast<int>(k)) * y[off_s + k];
        dy[off_s + i] = s;
      }
    }
    if (!probe_dirs.empty()) {
      HessianTensor hess = field.g_hessian_at(b);
      if (forced) {
        const HessianTensor fh = field.f_hessian_at(b);
        for (int i = 0; i < d; ++i)
          hess.component[static_cast<std::size_t>(i)] =
              hess.component[static_cast<std::size_t>(i)] + lambda * fh.component[static_cast<std::size_t>(i)];
      }
      for (std::size_t q = 0; q < probe_dirs.size(); ++q) {
        const Vec& v = probe_dirs[q];
        Vec mv(d);
        for (std::size_t i = 0; i < nd; ++i) {
          double s = 0.0;
          for (std::size_t k = 0; k < nd; ++k) s += y[off_m + i * nd + k] * v[static_cast<int>(k)];
          mv[static_cast<int>(i)] = s;
        }
        const Vec hvv = hess.vv(mv);
        const std::size_t off = off_b + q * nd;
        for (std::size_t i = 0; i < nd; ++i) {
          double s = hvv[static_cast<int>(i)];
          for (std::size_t k = 0; k < nd; ++k) s += jac(static_cast<int>(i), static_cast<int>(k)) * y[off + k];
          dy[off + i] = s;
        }
      }
    }
  };

  std::vector<double> y0(total, 0.0);
  for (std::size_t i = 0; i < nd; ++i) {
    y0[i] = p[static_cast<int>(i)];
    y0[off_m + i * nd + i] = 1.0;
  }
  OdeResult r = integrate_ode(rhs, std::move(y0), 0.0, t_final, opt, nd);

  VariationalResult out;
  out.terminal_state = Vec(d);
  out.first_variation = SmallMatrix(d);
  out.lambda_sensitivity = Vec(d);
  for (std::size_t i = 0; i < nd; ++i) {
    out.terminal_state[static_cast<int>(i)] = r.y[i];
    for (std::size_t j = 0; j < nd; ++j)
      out.first_variation(static_cast<int>(i), static_cast<int>(j)) = r.y[off_m + i * nd + j];
    if (lambda_sensitivity) out.lambda_sensitivity[static_cast<int>(i)] = r.y[off_s + i];
  }
  for (std::size_t q = 0; q < probe_dirs.size(); ++q) {
    Vec b(d);
    for (std::size_t i = 0; i < nd; ++i) b[static_cast<int>(i)] = r.y[off_b + q * nd + i];
    out.second_variation_vv.push_back(b);
  }
  out.status = r.status;
  out.event_time = r.event_time;
  out.event_norm = r.event_norm;
  out.stats = r.stats;
  return out;
}

}  // namespace ejecta::flow
