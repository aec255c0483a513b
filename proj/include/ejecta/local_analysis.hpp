#pragma once

// Zeros of g and their local classification: index, T-resonance, branch
// expansion of the starting-point set, ejecting verdict, multiplicity bound.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ejecta/errors.hpp"
#include "ejecta/field.hpp"
#include "ejecta/flow.hpp"
#include "ejecta/linalg.hpp"
#include "ejecta/poincare.hpp"
#include "ejecta/spectral.hpp"
#include "ejecta/window.hpp"

namespace ejecta::local {

inline constexpr double kZeroTol = 1e-12;
inline constexpr double kDedupeRadius = 1e-6;
inline constexpr double kMeanTol = 1e-10;

// ---------------------------------------------------------------------------
// Zeros of g

struct ZeroSearch {
  std::vector<Vec> zeros;
  bool close_pair_warning = false;
};

namespace detail {

inline bool try_g(const FieldSpec& field, const Vec& p, Vec& out) {
  try {
    out = field.g(p);
    return true;
  } catch (const NumericalError&) {
    return false;
  }
}

inline void dedupe_sorted(std::vector<Vec>& pts, double radius) {
  std::vector<Vec> kept;
  for (const Vec& p : pts) {
    bool dup = false;
    for (const Vec& q : kept)
      if (distance(p, q) < radius) {
        dup = true;
        break;
      }
    if (!dup) kept.push_back(p);
  }
  pts = std::move(kept);
  std::sort(pts.begin(), pts.end());
}

inline std::vector<Vec> zeros_1d(const FieldSpec& field, const Interval& win, int grid_n) {
  auto g = [&](double x) { return field.g(Vec{x})[0]; };
  auto gd = [&](double x) { return field.g_jacobian(Vec{x})(0, 0); };
  auto g2 = [&](double x) { return field.g_hessian(Vec{x}).component[0](0, 0); };

  const int n = grid_n;
  std::vector<double> xs(static_cast<std::size_t>(n + 1)), gv(xs.size());
  std::vector<bool> ok(xs.size());
  for (int k = 0; k <= n; ++k) {
    const double x = k == n ? win.hi : win.lo + k * (win.hi - win.lo) / n;
    xs[static_cast<std::size_t>(k)] = x;
    try {
      gv[static_cast<std::size_t>(k)] = g(x);
      ok[static_cast<std::size_t>(k)] = true;
    } catch (const NumericalError&) {
      ok[static_cast<std::size_t>(k)] = false;
    }
  }

  std::vector<Vec> roots;
  auto accept_root = [&](double r) {
    try {
      if (std::abs(g(r)) <= kZeroTol) roots.push_back(Vec{r});
    } catch (const NumericalError&) {
    }
  };

  for (int k = 0; k <= n; ++k) {
    const auto i = static_cast<std::size_t>(k);
    if (ok[i] && gv[i] == 0.0) roots.push_back(Vec{xs[i]});
  }
  // odd-order zeros: sign changes, bisection to machine precision, Newton polish
  for (int k = 0; k < n; ++k) {
    const auto i = static_cast<std::size_t>(k);
    if (!ok[i] || !ok[i + 1] || !(gv[i] * gv[i + 1] < 0.0)) continue;
    double a = xs[i], b = xs[i + 1], ga = gv[i];
    double root = std::numeric_limits<double>::quiet_NaN();
    try {
      for (int it = 0; it < 300; ++it) {
        const double m = 0.5 * (a + b);
        if (m <= a || m >= b) break;
        const double gm = g(m);
        if (gm == 0.0) {
          root = m;
          break;
        }
        if ((gm < 0.0) == (ga < 0.0)) {
          a = m;
          ga = gm;
        } else {
          b = m;
        }
      }
      if (std::isnan(root)) root = std::abs(g(a)) <= std::abs(g(b)) ? a : b;
      double gr = g(root);
      for (int it = 0; it < 5 && gr != 0.0; ++it) {
        const double d = gd(root);
        if (d == 0.0 || !std::isfinite(d)) break;
        const double cand = root - gr / d;
        if (!(cand >= xs[i] && cand <= xs[i + 1])) break;
        const double gc = g(cand);
        if (std::abs(gc) >= std::abs(gr)) break;
        root = cand;
        gr = gc;
      }
      accept_root(root);
    } catch (const NumericalError&) {
    }
  }
  // even-order zeros: local minima of |g| without sign change, Newton on g'
  for (int k = 1; k < n; ++k) {
    const auto i = static_cast<std::size_t>(k);
    if (!ok[i - 1] || !ok[i] || !ok[i + 1] || gv[i] == 0.0) continue;
    if (gv[i - 1] * gv[i] <= 0.0 || gv[i] * gv[i + 1] <= 0.0) continue;
    if (std::abs(gv[i]) > std::abs(gv[i - 1]) || std::abs(gv[i]) > std::abs(gv[i + 1])) continue;
    try {
      double x = xs[i];
      bool inside = true;
      for (int it = 0; it < 200; ++it) {
        const double d1 = gd(x);
        const double d2 = g2(x);
        if (d1 == 0.0 || d2 == 0.0 || !std::isfinite(d2)) break;
        const double step = d1 / d2;
        x -= step;
        if (!(x >= xs[i - 1] && x <= xs[i + 1])) {
          inside = false;
          break;
        }
        if (std::abs(step) <= 1e-15 * (1.0 + std::abs(x))) break;
      }
      if (inside) accept_root(x);
    } catch (const NumericalError&) {
    }
  }
  return roots;
}

inline std::vector<Vec> zeros_2d(const FieldSpec& field, const Window& win, int grid_n) {
  std::vector<Vec> roots;
  const Interval& wx = win.p[0];
  const Interval& wy = win.p[1];
  for (int i = 0; i < grid_n; ++i)
    for (int j = 0; j < grid_n; ++j) {
      Vec x{wx.lo + (i + 0.5) * wx.width() / grid_n, wy.lo + (j + 0.5) * wy.width() / grid_n};
      try {
        Vec gx = field.g(x);
        for (int it = 0; it < 200; ++it) {
          if (gx.norm() == 0.0) break;
          const SmallMatrix jac = field.g_jacobian(x);
          Vec step;
          const double fro2 = jac.frobenius() * jac.frobenius();
          if (fro2 == 0.0) break;
          const bool newton_ok = solve(jac, -gx, step) && std::isfinite(step.norm()) &&
                                 step.norm() <= 1e3 * (1.0 + x.norm());
          if (!newton_ok) {
            // least-norm step through the (numerically) rank-one Jacobian
            Vec jt_g{jac(0, 0) * gx[0] + jac(1, 0) * gx[1], jac(0, 1) * gx[0] + jac(1, 1) * gx[1]};
            step = (-1.0 / fro2) * jt_g;
          }
          x = x + step;
          if (x.norm() > 1e6) break;
          gx = field.g(x);
          if (step.norm() <= 1e-15 * (1.0 + x.norm())) break;
        }
        if (gx.norm() < kZeroTol && win.contains(x)) roots.push_back(x);
      } catch (const NumericalError&) {
      }
    }
  return roots;
}

}  // namespace detail

/// Zeros of g in the window, canonically sorted.
inline ZeroSearch find_zeros(const FieldSpec& field, const Window& window, int grid_n) {
  if (grid_n < 8) throw InputError("find_zeros: grid must be at least 8");
  ZeroSearch out;
  out.zeros = field.dim() == 1 ? detail::zeros_1d(field, window.p[0], grid_n)
                               : detail::zeros_2d(field, window, grid_n);
  detail::dedupe_sorted(out.zeros, kDedupeRadius);
  for (std::size_t i = 0; i < out.zeros.size(); ++i)
    for (std::size_t j = i + 1; j < out.zeros.size(); ++j)
      if (distance(out.zeros[i], out.zeros[j]) < 10.0 * kDedupeRadius) out.close_pair_warning = true;
  return out;
}

// ---------------------------------------------------------------------------
// Jets and resonance

struct JetData {
  Vec p0;
  SmallMatrix A;        // g'(p0)
  HessianTensor H;      // g''(p0)
  Vec f_mean;           // (1/T) int_0^T f(s, p0) ds
  Vec f_weighted;       // int_0^T e^{(T-s)A} f(s, p0) ds

  Vec H_vv(const Vec& v) const { return H.vv(v); }
};

inline JetData make_jet(const FieldSpec& field, const Vec& p0, double T, const flow::Options& opt = {}) {
  JetData j;
  j.p0 = p0;
  j.A = field.g_jacobian(p0);
  j.H = field.g_hessian(p0);
  j.f_mean = (1.0 / T) * poincare::weighted_forcing_integral(field, SmallMatrix::zero(field.dim()), p0, T, opt);
  j.f_weighted = poincare::eval_dlambda_closed_form(field, p0, T, opt);
  return j;
}

struct Resonance {
  bool resonant = false;
  std::complex<double> witness{};
};

inline Resonance classify_resonance(const SmallMatrix& a, double T, double eps = 1e-8) {
  const double omega = 2.0 * std::numbers::pi / T;
  for (const auto& mu : spectral::eigenvalues(a)) {
    const double n = std::round(mu.imag() / omega);
    if (std::abs(mu.real()) < eps && std::abs(mu.imag() - n * omega) < eps) return {true, mu};
  }
  return {};
}

// ---------------------------------------------------------------------------
// Local branch data

/// p'(0) = -(e^{TA} - I)^{-1} f_weighted at a non-resonant zero.
inline Vec branch_tangent(const JetData& jet, double T) {
  const SmallMatrix m = spectral::expm(jet.A, T) - SmallMatrix::identity(jet.A.dim());
  if (std::abs(m.det()) < 1e-12) throw SingularSystem("branch_tangent: e^{TA} - I is singular");
  Vec x;
  if (!solve(m, -jet.f_weighted, x)) throw SingularSystem("branch_tangent: e^{TA} - I is singular");
  return x;
}

/// lambda''(p0) = -g''(p0) / f_mean at a resonant scalar zero.
inline double branch_curvature(const JetData& jet, double T, double eps = 1e-8) {
  if (jet.A.dim() != 1) throw InputError("branch_curvature: scalar fields only");
  if (std::abs(spectral::expm(jet.A, T).e[0] - 1.0) >= eps)
    throw NumericalError("branch_curvature: zero is not T-resonant (lambda'(p0) != 0)");
  if (std::abs(jet.f_mean[0]) <= kMeanTol) throw DegenerateForcing("branch_curvature: forcing has zero mean at p0");
  return -jet.H_vv(Vec{1.0})[0] / jet.f_mean[0];
}

enum class SolutionCount { TwoSolutions, NoSolutions, Indeterminate };

inline const char* to_string(SolutionCount c) {
  switch (c) {
    case SolutionCount::TwoSolutions: return "TwoSolutions";
    case SolutionCount::NoSolutions: return "NoSolutions";
    case SolutionCount::Indeterminate: return "Indeterminate";
  }
  return "?";
}

struct LocalCount {
  SolutionCount verdict = SolutionCount::Indeterminate;
  bool geometrically_distinct = false;  // only claimed under the separated-variable assertion
};

/// Sign rule for small lambda > 0 near a resonant scalar zero.
inline LocalCount local_solution_count(const JetData& jet, double /*T*/, bool separated) {
  const double g2 = jet.H_vv(Vec{1.0})[0];
  const double mean = jet.f_mean[0];
  if (std::abs(g2) <= kZeroTol || std::abs(mean) <= kMeanTol) return {};
  if ((g2 > 0.0) == (mean > 0.0)) return {SolutionCount::NoSolutions, false};
  return {SolutionCount::TwoSolutions, separated};
}

// ---------------------------------------------------------------------------
// Planar second-order ejecting test

struct EjectingTest {
  bool ejecting = false;
  Vec v;                 // witness direction
  Vec integral;          // second-order integral for v
  Vec quadrature;        // same integral by adaptive Simpson of the general form
  std::string route;     // "full-kernel", "kernel" or "general"
  bool self_check_ok = true;
  double threshold = 0.0;
};

namespace detail {

template <class F>
Vec adaptive_simpson(F&& f, double a, double b, double abs_tol) {
  auto rec = [&](auto&& self, double lo, double hi, const Vec& flo, const Vec& fmid, const Vec& fhi, const Vec& whole,
                 double tol, int depth) -> Vec {
    const double mid = 0.5 * (lo + hi);
    const double lm = 0.5 * (lo + mid), rm = 0.5 * (mid + hi);
    const Vec flm = f(lm), frm = f(rm);
    const double h = hi - lo;
    const Vec left = (h / 12.0) * (flo + 4.0 * flm + fmid);
    const Vec right = (h / 12.0) * (fmid + 4.0 * frm + fhi);
    const Vec diff = left + right - whole;
    if (depth >= 40 || diff.max_abs() <= 15.0 * tol) return left + right + (1.0 / 15.0) * diff;
    return self(self, lo, mid, flo, flm, fmid, left, 0.5 * tol, depth + 1) +
           self(self, mid, hi, fmid, frm, fhi, right, 0.5 * tol, depth + 1);
  };
  const Vec fa = f(a), fm = f(0.5 * (a + b)), fb = f(b);
  const Vec whole = ((b - a) / 6.0) * (fa + 4.0 * fm + fb);
  return rec(rec, a, b, fa, fm, fb, whole, abs_tol, 0);
}

}  // namespace detail

/// int_0^T e^{(T-s)A} H[e^{sA}v, e^{sA}v] ds by adaptive Simpson.
inline Vec second_order_integral(const JetData& jet, const Vec& v, double T) {
  auto integrand = [&](double s) {
    const Vec w = spectral::expm(jet.A, s) * v;
    return spectral::expm(jet.A, T - s) * jet.H_vv(w);
  };
  double scale = 0.0;
  for (int k = 0; k <= 64; ++k) scale = std::max(scale, integrand(T * k / 64.0).max_abs());
  const double tol = std::max(1e-14 * T * scale, 1e-300);
  return detail::adaptive_simpson(integrand, 0.0, T, tol);
}

inline EjectingTest ejecting_test_2d(const JetData& jet, double T) {
  EjectingTest out;
  out.threshold = 1e-8 * (1.0 + jet.H.frobenius());
  auto agree = [](const Vec& a, const Vec& b) {
    const double scale = std::max(a.norm(), b.norm());
    return (a - b).norm() <= 1e-8 * scale || scale == 0.0;
  };
  const std::vector<Vec> probes{Vec{1.0, 0.0}, Vec{0.0, 1.0}, Vec{1.0, 1.0}};

  if (jet.A.frobenius() < 1e-10) {
    out.route = "full-kernel";
    for (const Vec& v : probes) {
      const Vec closed = T * jet.H_vv(v);
      const Vec quad = second_order_integral(jet, v, T);
      out.v = v;
      out.integral = closed;
      out.quadrature = quad;
      out.self_check_ok = agree(closed, quad);
      if (closed.norm() > out.threshold) {
        out.ejecting = out.self_check_ok;
        return out;
      }
    }
    return out;
  }
  if (const auto kernel = spectral::kernel_vector(jet.A, 1e-8)) {
    out.route = "kernel";
    out.v = kernel->v;
    out.integral = spectral::K_integral(jet.A, T) * jet.H_vv(out.v);
    out.quadrature = second_order_integral(jet, out.v, T);
    out.self_check_ok = agree(out.integral, out.quadrature);
    out.ejecting = out.self_check_ok && out.integral.norm() > out.threshold;
    return out;
  }
  // nonsingular resonant linearization: only the general integral is available
  out.route = "general";
  for (const Vec& v : probes) {
    const Vec quad = second_order_integral(jet, v, T);
    out.v = v;
    out.integral = quad;
    out.quadrature = quad;
    if (quad.norm() > out.threshold) {
      out.ejecting = true;
      return out;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Classification

enum class Justification { NonResonantRule, NonzeroIndex1D, SecondOrder2D, Unknown };

inline const char* to_string(Justification j) {
  switch (j) {
    case Justification::NonResonantRule: return "NonResonantRule";
    case Justification::NonzeroIndex1D: return "NonzeroIndex1D";
    case Justification::SecondOrder2D: return "SecondOrder2D";
    case Justification::Unknown: return "Unknown";
  }
  return "?";
}

struct TransversalBranch {
  Vec tangent;
};
struct TangentBranch {
  double lambda_dd = 0.0;
  LocalCount count;
};
struct Ejecting2D {
  Vec witness;
  Vec integral;
  std::string route;
};
struct Indeterminate {
  std::string reason;
};
using LocalVerdict = std::variant<TransversalBranch, TangentBranch, Ejecting2D, Indeterminate>;

struct ZeroClassification {
  Vec p0;
  std::optional<int> index;
  Resonance resonance;
  LocalVerdict local = Indeterminate{"not analysed"};
  bool ejecting = false;
  Justification justification = Justification::Unknown;
  Vec f_mean;
  std::vector<std::string> errors;
};

struct ClassifyOptions {
  int grid = 400;
  double resonance_eps = 1e-8;
  double rk_tol = 1e-10;
};

struct Classification {
  std::vector<ZeroClassification> zeros;
  bool close_pair_warning = false;
};

/// Isolation radius used for the index of zeros[i].
inline double isolation_radius(const std::vector<Vec>& zeros, std::size_t i) {
  double r = 0.1;
  for (std::size_t j = 0; j < zeros.size(); ++j)
    if (j != i) r = std::min(r, 0.4 * distance(zeros[i], zeros[j]));
  return r;
}

inline ZeroClassification classify_zero(const FieldSpec& field, double T, const std::vector<Vec>& zeros,
                                        std::size_t i, const ClassifyOptions& opt) {
  ZeroClassification z;
  z.p0 = zeros[i];
  const bool planar = field.dim() == 2;
  try {
    z.index = spectral::index_of_zero(field, z.p0, isolation_radius(zeros, i));
  } catch (const Error& e) {
    z.errors.emplace_back(e.what());
  }
  JetData jet;
  try {
    flow::Options fo;
    fo.tol = opt.rk_tol;
    jet = make_jet(field, z.p0, T, fo);
  } catch (const Error& e) {
    z.errors.emplace_back(e.what());
    z.local = Indeterminate{"jet evaluation failed"};
    return z;
  }
  z.f_mean = jet.f_mean;
  z.resonance = classify_resonance(jet.A, T, opt.resonance_eps);

  if (!z.resonance.resonant) {
    try {
      z.local = TransversalBranch{branch_tangent(jet, T)};
    } catch (const Error& e) {
      z.errors.emplace_back(e.what());
      z.local = Indeterminate{"singular linearization"};
    }
    z.ejecting = true;
    z.justification = Justification::NonResonantRule;
    return z;
  }

  if (!planar) {
    try {
      const double ldd = branch_curvature(jet, T, opt.resonance_eps);
      z.local = TangentBranch{ldd, local_solution_count(jet, T, field.separated())};
    } catch (const DegenerateForcing&) {
      z.local = Indeterminate{"forcing has zero mean at p0"};
    } catch (const Error& e) {
      z.errors.emplace_back(e.what());
      z.local = Indeterminate{e.what()};
    }
    if (z.index && *z.index != 0) {
      z.ejecting = true;
      z.justification = Justification::NonzeroIndex1D;
    }
    return z;
  }

  if (!z.index || *z.index == 0) {
    z.local = Indeterminate{z.index ? "index 0" : "index unavailable"};
    return z;
  }
  const EjectingTest test = ejecting_test_2d(jet, T);
  if (test.ejecting) {
    z.local = Ejecting2D{test.v, test.integral, test.route};
    z.ejecting = true;
    z.justification = Justification::SecondOrder2D;
  } else {
    z.local = Indeterminate{test.self_check_ok ? "second-order integral vanishes"
                                               : "second-order self-check disagreement"};
  }
  return z;
}

inline Classification classify(const FieldSpec& field, double T, const Window& window,
                               const ClassifyOptions& opt = {}) {
  const ZeroSearch search = find_zeros(field, window, opt.grid);
  Classification out;
  out.close_pair_warning = search.close_pair_warning;
  for (std::size_t i = 0; i < search.zeros.size(); ++i)
    out.zeros.push_back(classify_zero(field, T, search.zeros, i, opt));
  return out;
}

// ---------------------------------------------------------------------------
// Multiplicity

struct MultiplicityBound {
  int n = 0;
  std::vector<Vec> witnesses;   // the subset S of ejecting zeros
  bool no_extra_branch = false;
  int degree_bound = 0;         // |S| + 1 from the degree bookkeeping
  int local_bound = 0;          // sum of guaranteed local solution counts
};

/// Largest subset S of ejecting zeros with sum of indices != deg_W gives |S| + 1
/// solutions; combined with the local counts near each zero (max of the two).
inline MultiplicityBound multiplicity_bound(const std::vector<ZeroClassification>& zs, int deg_w) {
  std::vector<std::size_t> ejecting;
  for (std::size_t i = 0; i < zs.size(); ++i)
    if (zs[i].ejecting && zs[i].index) ejecting.push_back(i);
  if (ejecting.size() > 24) throw NumericalError("multiplicity_bound: too many ejecting zeros for exhaustive search");

  MultiplicityBound out;
  const std::uint32_t k = static_cast<std::uint32_t>(ejecting.size());
  int best_size = -1;
  std::uint32_t best_mask = 0;
  for (std::uint32_t mask = 0; mask < (1u << k); ++mask) {
    int sum = 0, size = 0;
    for (std::uint32_t b = 0; b < k; ++b)
      if (mask & (1u << b)) {
        sum += *zs[ejecting[b]].index;
        ++size;
      }
    if (sum != deg_w && size > best_size) {
      best_size = size;
      best_mask = mask;
    }
  }
  if (best_size < 0) {
    out.degree_bound = static_cast<int>(k);
    out.no_extra_branch = true;
    for (std::size_t i : ejecting) out.witnesses.push_back(zs[i].p0);
  } else {
    out.degree_bound = best_size + 1;
    for (std::uint32_t b = 0; b < k; ++b)
      if (best_mask & (1u << b)) out.witnesses.push_back(zs[ejecting[b]].p0);
  }

  for (const auto& z : zs) {
    if (const auto* tb = std::get_if<TangentBranch>(&z.local);
        tb && tb->count.verdict == SolutionCount::TwoSolutions) {
      out.local_bound += tb->count.geometrically_distinct ? 2 : 1;
    } else if (z.ejecting) {
      out.local_bound += 1;
    }
  }
  out.n = std::max(out.degree_bound, out.local_bound);
  return out;
}

}  // namespace ejecta::local

namespace ejecta::poincare {

/// dF/dlambda(0, p0) from jet data; identical to JetData::f_weighted.
inline Vec eval_dlambda_closed_form(const local::JetData& jet, const FieldSpec& field, double T,
                                    const flow::Options& opt = {}) {
  return weighted_forcing_integral(field, jet.A, jet.p0, T, opt);
}

}  // namespace ejecta::poincare
