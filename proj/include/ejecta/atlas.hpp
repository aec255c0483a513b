#pragma once

// Point clouds of the starting-point set {(lambda, p) : F(lambda, p) = 0}:
// per-lambda slice scans, pseudo-arclength continuation in the (lambda, p)
// plane, and CSV export.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "ejecta/errors.hpp"
#include "ejecta/flow.hpp"
#include "ejecta/linalg.hpp"
#include "ejecta/local_analysis.hpp"
#include "ejecta/parallel.hpp"
#include "ejecta/poincare.hpp"
#include "ejecta/problem.hpp"
#include "ejecta/window.hpp"

namespace ejecta::atlas {

enum class Provenance { SliceScan, Continuation };

inline const char* to_string(Provenance p) { return p == Provenance::SliceScan ? "SliceScan" : "Continuation"; }

struct CloudPoint {
  double lambda = 0.0;
  Vec p;
  double residual = 0.0;
  Provenance provenance = Provenance::SliceScan;
};

inline bool point_less(const CloudPoint& a, const CloudPoint& b) {
  if (a.lambda != b.lambda) return a.lambda < b.lambda;
  return a.p < b.p;
}

struct BranchCloud {
  int dim = 1;
  std::vector<CloudPoint> points;
  Window window;
  std::uint64_t problem_hash = 0;

  void sort() { std::sort(points.begin(), points.end(), point_less); }
};

/// FNV-1a over the canonical problem text.
inline std::uint64_t problem_hash(const ProblemSpec& spec) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
    h ^= 0xff;
    h *= 1099511628211ull;
  };
  char buf[64];
  mix(std::to_string(spec.dim));
  std::snprintf(buf, sizeof buf, "%.17g", spec.period);
  mix(buf);
  for (const auto& s : spec.g_text) mix(s);
  for (const auto& s : spec.f_text) mix(s);
  mix(spec.separated ? "1" : "0");
  const Interval* ivs[] = {&spec.window.lambda, &spec.window.p[0], &spec.window.p[1]};
  for (const Interval* iv : ivs) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g", iv->lo, iv->hi);
    mix(buf);
  }
  return h;
}

inline flow::Options flow_options(const ProblemSpec& spec) {
  flow::Options o;
  o.tol = spec.numerics.rk_tol;
  return o;
}

/// Tighter options for root polish and the residual check. Value-only and
/// variational integrations take different steps, so at the scan tolerance two
/// evaluations of F at the same point can differ by more than root_tolerance
/// where |dF/dp| is large.
inline flow::Options verify_options(const ProblemSpec& spec) {
  flow::Options o = flow_options(spec);
  o.tol = std::max(o.tol / 100.0, 1e-14);
  return o;
}

// ---------------------------------------------------------------------------
// Slice scans

struct SliceDiagnostics {
  double lambda = 0.0;
  int seeds = 0;
  int escaped = 0;
  int eval_errors = 0;
  int found = 0;
  int rejected = 0;  // candidates failing the residual check
};

struct SliceScan {
  BranchCloud cloud;
  std::vector<SliceDiagnostics> slices;

  int total_escaped() const {
    int n = 0;
    for (const auto& s : slices) n += s.escaped;
    return n;
  }
};

namespace detail {

struct Probe {
  bool ok = false;
  bool escaped = false;
  double value = 0.0;
};

inline Probe probe_1d(const FieldSpec& field, double lambda, double p, double T, const flow::Options& opt) {
  Probe out;
  try {
    const auto e = poincare::eval_F_value(field, lambda, Vec{p}, T, opt);
    if (!e.completed()) {
      out.escaped = true;
      return out;
    }
    out.ok = true;
    out.value = e.value[0];
  } catch (const NumericalError&) {
  }
  return out;
}

inline std::vector<double> linspace(const Interval& iv, int n) {
  std::vector<double> xs(static_cast<std::size_t>(n + 1));
  for (int k = 0; k <= n; ++k) xs[static_cast<std::size_t>(k)] = k == n ? iv.hi : iv.lo + k * iv.width() / n;
  return xs;
}

/// Newton polish of a bracketed/approximate scalar root, kept inside [lo, hi].
inline double newton_polish_1d(const FieldSpec& field, double lambda, double p, double lo, double hi, double T,
                               const flow::Options& opt) {
  for (int it = 0; it < 4; ++it) {
    const auto e = poincare::eval_F(field, lambda, Vec{p}, T, opt);
    if (!e.completed() || e.value[0] == 0.0) break;
    const double d = e.d_p(0, 0);
    if (d == 0.0 || !std::isfinite(d)) break;
    const double next = p - e.value[0] / d;
    if (!(next >= lo && next <= hi)) break;
    const auto en = poincare::eval_F_value(field, lambda, Vec{next}, T, opt);
    if (!en.completed() || std::abs(en.value[0]) >= std::abs(e.value[0])) break;
    p = next;
  }
  return p;
}

inline void slice_1d(const ProblemSpec& spec, double lambda, std::vector<CloudPoint>& out, SliceDiagnostics& diag) {
  const FieldSpec& field = spec.field;
  const double T = spec.period;
  const flow::Options opt = flow_options(spec);
  const flow::Options fine = verify_options(spec);
  const std::vector<double> xs = linspace(spec.window.p[0], spec.numerics.grid);
  std::vector<Probe> pr(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    pr[i] = probe_1d(field, lambda, xs[i], T, opt);
    ++diag.seeds;
    if (pr[i].escaped) ++diag.escaped;
    if (!pr[i].ok && !pr[i].escaped) ++diag.eval_errors;
  }

  std::vector<double> candidates;
  for (std::size_t i = 0; i < xs.size(); ++i)
    if (pr[i].ok && pr[i].value == 0.0) candidates.push_back(xs[i]);

  // sign changes: bisect to width 1e-10, then Newton polish
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    if (!pr[i].ok || !pr[i + 1].ok || !(pr[i].value * pr[i + 1].value < 0.0)) continue;
    double a = xs[i], b = xs[i + 1], fa = pr[i].value;
    bool broken = false;
    while (b - a > 1e-10) {
      const double m = 0.5 * (a + b);
      if (m <= a || m >= b) break;
      const Probe pm = probe_1d(field, lambda, m, T, opt);
      if (!pm.ok) {
        broken = true;
        break;
      }
      if (pm.value == 0.0) {
        a = b = m;
        break;
      }
      if ((pm.value < 0.0) == (fa < 0.0)) {
        a = m;
        fa = pm.value;
      } else {
        b = m;
      }
    }
    if (broken) continue;
    candidates.push_back(newton_polish_1d(field, lambda, 0.5 * (a + b), xs[i], xs[i + 1], T, fine));
  }

  // even-order contacts: local minima of |F| without a sign change, golden-section search
  for (std::size_t i = 1; i + 1 < xs.size(); ++i) {
    if (!pr[i - 1].ok || !pr[i].ok || !pr[i + 1].ok || pr[i].value == 0.0) continue;
    if (pr[i - 1].value * pr[i].value <= 0.0 || pr[i].value * pr[i + 1].value <= 0.0) continue;
    const double v = std::abs(pr[i].value);
    if (v > std::abs(pr[i - 1].value) || v > std::abs(pr[i + 1].value)) continue;
    constexpr double kInvPhi = 0.6180339887498949;
    double a = xs[i - 1], b = xs[i + 1];
    double c = b - kInvPhi * (b - a), d = a + kInvPhi * (b - a);
    Probe pc = probe_1d(field, lambda, c, T, opt), pd = probe_1d(field, lambda, d, T, opt);
    bool broken = false;
    while (b - a > 1e-10) {
      if (!pc.ok || !pd.ok) {
        broken = true;
        break;
      }
      if (std::abs(pc.value) <= std::abs(pd.value)) {
        b = d;
        d = c;
        pd = pc;
        c = b - kInvPhi * (b - a);
        pc = probe_1d(field, lambda, c, T, opt);
      } else {
        a = c;
        c = d;
        pc = pd;
        d = a + kInvPhi * (b - a);
        pd = probe_1d(field, lambda, d, T, opt);
      }
    }
    if (!broken) candidates.push_back(0.5 * (a + b));
  }

  // at lambda = 0 the scalar flow is autonomous: starting points are exactly the zeros of g
  if (lambda == 0.0) {
    for (const Vec& z : local::find_zeros(field, spec.window, spec.numerics.grid).zeros) candidates.push_back(z[0]);
  }

  std::sort(candidates.begin(), candidates.end());
  double last = -std::numeric_limits<double>::infinity();
  for (double p : candidates) {
    if (p - last < local::kDedupeRadius) continue;
    if (!spec.window.p[0].contains(p)) continue;
    try {
      const auto e = poincare::eval_F_value(field, lambda, Vec{p}, T, fine);
      const double res = e.value.norm();
      if (e.completed() && res <= poincare::root_tolerance(Vec{p})) {
        out.push_back(CloudPoint{lambda, Vec{p}, res, Provenance::SliceScan});
        ++diag.found;
        last = p;
      } else {
        ++diag.rejected;
      }
    } catch (const NumericalError&) {
      ++diag.rejected;
    }
  }
}

/// Damped Newton on F(lambda, .) = 0 from one seed; nullopt on failure.
inline std::optional<CloudPoint> newton_2d(const ProblemSpec& spec, double lambda, Vec p, bool& escaped) {
  const FieldSpec& field = spec.field;
  const double T = spec.period;
  const flow::Options opt = flow_options(spec);
  escaped = false;
  try {
    for (int it = 0; it < 30; ++it) {
      const auto e = poincare::eval_F(field, lambda, p, T, opt);
      if (!e.completed()) {
        escaped = true;
        return std::nullopt;
      }
      const double r = e.value.norm();
      if (r <= poincare::root_tolerance(p)) return CloudPoint{lambda, p, r, Provenance::SliceScan};
      Vec step;
      if (!solve(e.d_p, -e.value, step)) return std::nullopt;
      double damping = 1.0;
      bool improved = false;
      for (int k = 0; k < 12; ++k, damping *= 0.5) {
        const Vec cand = p + damping * step;
        const auto ec = poincare::eval_F_value(field, lambda, cand, T, opt);
        if (ec.completed() && ec.value.norm() < r) {
          p = cand;
          improved = true;
          break;
        }
      }
      if (!improved) return std::nullopt;
      if (p.norm() > 1e6) return std::nullopt;
    }
  } catch (const NumericalError&) {
  }
  return std::nullopt;
}

inline void slice_2d(const ProblemSpec& spec, double lambda, std::vector<CloudPoint>& out, SliceDiagnostics& diag) {
  const int n = spec.numerics.grid;
  const Interval& wx = spec.window.p[0];
  const Interval& wy = spec.window.p[1];
  std::vector<CloudPoint> found;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Vec seed{wx.lo + (i + 0.5) * wx.width() / n, wy.lo + (j + 0.5) * wy.width() / n};
      ++diag.seeds;
      bool escaped = false;
      if (auto pt = newton_2d(spec, lambda, seed, escaped)) {
        if (spec.window.contains(pt->p)) found.push_back(*pt);
      } else if (escaped) {
        ++diag.escaped;
      }
    }
  std::sort(found.begin(), found.end(), point_less);
  for (const auto& c : found) {
    bool dup = false;
    for (const auto& k : out)
      if (k.lambda == c.lambda && distance(k.p, c.p) < local::kDedupeRadius) {
        dup = true;
        break;
      }
    if (!dup) {
      out.push_back(c);
      ++diag.found;
    }
  }
}

}  // namespace detail

/// Evenly spaced lambda values across the window, endpoints included.
inline std::vector<double> lambda_grid(const Window& w, int n) {
  if (n < 1) throw InputError("lambda grid must have at least one point");
  if (n == 1) return {0.5 * (w.lambda.lo + w.lambda.hi)};
  std::vector<double> out;
  for (int k = 0; k < n; ++k) {
    double v = k == n - 1 ? w.lambda.hi : w.lambda.lo + k * w.lambda.width() / (n - 1);
    if (std::abs(v) < 1e-15 * std::max(1.0, w.lambda.width())) v = 0.0;
    out.push_back(v);
  }
  return out;
}

inline SliceScan sample_slices(const ProblemSpec& spec, const std::vector<double>& lambdas) {
  for (double l : lambdas)
    if (!spec.window.lambda.contains(l)) throw InputError("lambda " + std::to_string(l) + " lies outside the window");
  std::vector<std::vector<CloudPoint>> per(lambdas.size());
  std::vector<SliceDiagnostics> diag(lambdas.size());
  parallel_for(lambdas.size(), [&](std::size_t i) {
    diag[i].lambda = lambdas[i];
    if (spec.dim == 1)
      detail::slice_1d(spec, lambdas[i], per[i], diag[i]);
    else
      detail::slice_2d(spec, lambdas[i], per[i], diag[i]);
  });
  SliceScan out;
  out.cloud.dim = spec.dim;
  out.cloud.window = spec.window;
  out.cloud.problem_hash = problem_hash(spec);
  for (auto& v : per) out.cloud.points.insert(out.cloud.points.end(), v.begin(), v.end());
  out.cloud.sort();
  out.slices = std::move(diag);
  return out;
}

// ---------------------------------------------------------------------------
// Continuation

struct ContinuationOptions {
  double step0 = 1e-3;
  double step_min = 1e-6;
  double step_max = 0.1;
  int max_steps = 2000;  // per orientation
};

struct BranchTrace {
  BranchCloud cloud;
  bool stalled = false;       // step underflow in some orientation
  std::string stall_message;
  int steps = 0;
};

namespace detail {

struct Tangent {
  double lam, p;
};

inline Tangent unit_tangent(const poincare::StartingMapEval& e) {
  double tl = -e.d_p(0, 0), tp = e.d_lambda[0];
  const double n = std::hypot(tl, tp);
  if (n == 0.0 || !std::isfinite(n)) throw SingularSystem("follow_branch: Jacobian [dF/dlambda, dF/dp] vanishes");
  return {tl / n, tp / n};
}

}  // namespace detail

/// Pseudo-arclength continuation of F = 0 through (0, p0), both orientations.
inline BranchTrace follow_branch(const ProblemSpec& spec, double p0, const ContinuationOptions& copt = {}) {
  if (spec.dim != 1) throw UnsupportedError("follow_branch: scalar problems only");
  const FieldSpec& field = spec.field;
  const double T = spec.period;
  const flow::Options opt = flow_options(spec);
  const Window& win = spec.window;

  BranchTrace trace;
  trace.cloud.dim = 1;
  trace.cloud.window = win;
  trace.cloud.problem_hash = problem_hash(spec);

  const auto e0 = poincare::eval_F(field, 0.0, Vec{p0}, T, opt);
  if (!e0.completed() || e0.value.norm() > poincare::root_tolerance(Vec{p0}))
    throw NumericalError("follow_branch: start point is not a starting point at lambda = 0");
  trace.cloud.points.push_back(CloudPoint{0.0, Vec{p0}, e0.value.norm(), Provenance::Continuation});
  detail::Tangent t0 = detail::unit_tangent(e0);
  // + orientation: the larger tangent component positive
  if ((std::abs(t0.lam) >= std::abs(t0.p) ? t0.lam : t0.p) < 0.0) t0 = {-t0.lam, -t0.p};

  for (int orientation : {+1, -1}) {
    double lam = 0.0, p = p0;
    detail::Tangent t{orientation * t0.lam, orientation * t0.p};
    double h = std::min(copt.step0, copt.step_max);
    int clean = 0;
    for (int step = 0; step < copt.max_steps; ++step) {
      const double lp = lam + h * t.lam, pp = p + h * t.p;
      double l = lp, q = pp;
      bool ok = false;
      poincare::StartingMapEval e;
      try {
        for (int it = 0; it < 8; ++it) {
          e = poincare::eval_F(field, l, Vec{q}, T, opt);
          if (!e.completed()) break;
          const double r = e.value[0];
          // [[F_lambda, F_p], [t_lambda, t_p]] (dl, dq) = -(F, t . (u - u_pred))
          const SmallMatrix J = SmallMatrix::of(e.d_lambda[0], e.d_p(0, 0), t.lam, t.p);
          const double arc = t.lam * (l - lp) + t.p * (q - pp);
          Vec d;
          if (!solve(J, Vec{-r, -arc}, d)) break;
          l += d[0];
          q += d[1];
          if (std::hypot(d[0], d[1]) <= 1e-12 * (1.0 + std::abs(q))) {
            e = poincare::eval_F(field, l, Vec{q}, T, opt);
            ok = e.completed() && std::abs(e.value[0]) <= poincare::root_tolerance(Vec{q});
            break;
          }
        }
        if (!ok && e.completed() && std::abs(e.value[0]) <= 1e-3 * poincare::root_tolerance(Vec{q})) ok = true;
      } catch (const NumericalError&) {
        ok = false;
      }
      if (ok && std::hypot(l - lam, q - p) > 2.0 * h) ok = false;  // jumped to another branch
      if (!ok) {
        h *= 0.5;
        clean = 0;
        if (h < copt.step_min) {
          trace.stalled = true;
          trace.stall_message = "step underflow near lambda = " + std::to_string(lam) + ", p = " + std::to_string(p);
          break;
        }
        continue;
      }
      ++trace.steps;
      if (!win.contains(l, Vec{q})) break;
      trace.cloud.points.push_back(CloudPoint{l, Vec{q}, std::abs(e.value[0]), Provenance::Continuation});
      detail::Tangent tn = detail::unit_tangent(e);
      if (tn.lam * t.lam + tn.p * t.p < 0.0) tn = {-tn.lam, -tn.p};
      t = tn;
      lam = l;
      p = q;
      if (++clean >= 4) {
        h = std::min(2.0 * h, copt.step_max);
        clean = 0;
      }
    }
  }
  trace.cloud.sort();
  return trace;
}

// ---------------------------------------------------------------------------
// Export

inline std::string format_field(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v == 0.0 ? 0.0 : v);
  return buf;
}

inline std::string to_csv(const BranchCloud& cloud) {
  std::string out = cloud.dim == 1 ? "lambda,p\n" : "lambda,x,y\n";
  for (const auto& pt : cloud.points) {
    out += format_field(pt.lambda);
    for (int i = 0; i < cloud.dim; ++i) {
      out += ',';
      out += format_field(pt.p[i]);
    }
    out += '\n';
  }
  return out;
}

inline void export_cloud(const BranchCloud& cloud, const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot open '" + path + "' for writing");
  const std::string text = to_csv(cloud);
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) throw Error("write failed for '" + path + "'");
}

/// Union of two clouds over the same problem, sorted.
inline BranchCloud merge(BranchCloud a, const BranchCloud& b) {
  a.points.insert(a.points.end(), b.points.begin(), b.points.end());
  a.sort();
  return a;
}

}  // namespace ejecta::atlas
