#pragma once

// Command implementations behind the `ejecta` executable. Every command writes
// its report to a stream and returns the process exit code:
// 0 success, 1 numerical or check failure, 2 usage or problem-file error.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ejecta/atlas.hpp"
#include "ejecta/bundled.hpp"
#include "ejecta/errors.hpp"
#include "ejecta/fit.hpp"
#include "ejecta/local_analysis.hpp"
#include "ejecta/problem.hpp"
#include "ejecta/spectral.hpp"

namespace ejecta::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kUsage = 2 };

struct CommandOptions {
  std::string out_path;        // CSV path (sample, branch) or output directory (reproduce)
  int lambda_grid = 21;
  std::optional<double> from;  // branch start p0
  atlas::ContinuationOptions continuation{1e-3, 1e-6, 0.005, 2000};
};

// ---------------------------------------------------------------------------
// Formatting

inline std::string fmt(double v, int digits = 10) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v == 0.0 ? 0.0 : v);
  std::string s = buf;
  // 1e-06 -> 1e-6
  if (const auto e = s.find('e'); e != std::string::npos) {
    const std::size_t digits_at = e + 2;
    while (digits_at + 1 < s.size() && s[digits_at] == '0') s.erase(digits_at, 1);
    if (s[e + 1] == '+') s.erase(e + 1, 1);
  }
  return s;
}

inline std::string fmt_fixed(double v, int decimals = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s = buf;
  // "-0.000000" reads as a sign error in reports
  if (s.find_first_not_of("-0.") == std::string::npos && s[0] == '-') s.erase(0, 1);
  return s;
}

inline std::string fmt_point(const Vec& p, int digits = 10) {
  if (p.dim() == 1) return fmt(p[0], digits);
  return "(" + fmt(p[0], digits) + ", " + fmt(p[1], digits) + ")";
}

inline std::string fmt_index(const std::optional<int>& i) {
  if (!i) return "?";
  return *i > 0 ? "+" + std::to_string(*i) : std::to_string(*i);
}

inline std::string fmt_interval(const Interval& iv) { return "[" + fmt(iv.lo) + ", " + fmt(iv.hi) + "]"; }

inline std::string fmt_window(const Window& w) {
  std::string s = "lambda = " + fmt_interval(w.lambda);
  if (w.dim == 1) return s + ", p = " + fmt_interval(w.p[0]);
  return s + ", x = " + fmt_interval(w.p[0]) + ", y = " + fmt_interval(w.p[1]);
}

inline std::string describe_local(const local::LocalVerdict& v) {
  if (const auto* tb = std::get_if<local::TransversalBranch>(&v))
    return "TransversalBranch, tangent " + fmt_point(tb->tangent);
  if (const auto* tg = std::get_if<local::TangentBranch>(&v)) {
    std::string s = "TangentBranch, lambda'' = " + fmt(tg->lambda_dd) + ", " + local::to_string(tg->count.verdict);
    if (tg->count.geometrically_distinct) s += " (geometrically distinct)";
    return s;
  }
  if (const auto* ej = std::get_if<local::Ejecting2D>(&v))
    return "Ejecting2D, witness " + fmt_point(ej->witness) + ", integral " + fmt_point(ej->integral) +
           ", |integral| = " + fmt(ej->integral.norm()) + " [" + ej->route + "]";
  return "Indeterminate (" + std::get<local::Indeterminate>(v).reason + ")";
}

// ---------------------------------------------------------------------------
// Shared analysis pieces

inline local::ClassifyOptions classify_options(const ProblemSpec& spec) {
  return {spec.numerics.grid, spec.numerics.resonance_eps, spec.numerics.rk_tol};
}

/// deg(g, window): sign rule in 1-D, winding number of the window boundary in 2-D.
inline int window_degree(const ProblemSpec& spec) {
  try {
    if (spec.dim == 1) {
      auto g = [&](double x) { return spec.field.g(Vec{x})[0]; };
      return spectral::degree_1d(g, spec.window.p[0].lo, spec.window.p[0].hi).value;
    }
    auto g = [&](const Vec& p) { return spec.field.g(p); };
    const spectral::Rect r{spec.window.p[0].lo, spec.window.p[0].hi, spec.window.p[1].lo, spec.window.p[1].hi};
    return spectral::degree_2d_winding(g, r, 256).value;
  } catch (const BoundaryZero& e) {
    throw BoundaryZero(std::string(e.what()) + "; enlarge or shift the p-window so g has no zero on its boundary");
  }
}

/// Default branch start: the zero of g closest to the origin.
inline double default_branch_start(const ProblemSpec& spec) {
  const auto zs = local::find_zeros(spec.field, spec.window, spec.numerics.grid).zeros;
  if (zs.empty()) throw NumericalError("branch: g has no zero in the window; pass --from");
  const Vec* best = &zs.front();
  for (const Vec& z : zs)
    if (std::abs(z[0]) < std::abs((*best)[0])) best = &z;
  return (*best)[0];
}

// ---------------------------------------------------------------------------
// Commands

inline int cmd_zeros(const ProblemSpec& spec, std::ostream& out) {
  const auto search = local::find_zeros(spec.field, spec.window, spec.numerics.grid);
  out << "problem " << spec.id << ": zeros of g in " << fmt_window(spec.window) << "\n";
  out << "count = " << search.zeros.size() << "\n";
  if (search.close_pair_warning) out << "warning: two zeros closer than 1e-5; index may be unreliable\n";
  int status = kOk;
  for (std::size_t i = 0; i < search.zeros.size(); ++i) {
    const Vec& p = search.zeros[i];
    std::string idx;
    try {
      idx = fmt_index(spectral::index_of_zero(spec.field, p, local::isolation_radius(search.zeros, i)));
    } catch (const Error& e) {
      idx = std::string("? (") + e.what() + ")";
      status = kFailure;
    }
    out << "p = " << fmt_point(p) << "  |g(p)| = " << fmt(spec.field.g(p).norm(), 3) << "  index = " << idx << "\n";
  }
  return status;
}

inline int print_classification(const ProblemSpec& spec, const local::Classification& cls, std::ostream& out) {
  int status = kOk;
  out << "problem " << spec.id << ": " << cls.zeros.size() << " zero(s) of g in " << fmt_window(spec.window) << "\n";
  if (cls.close_pair_warning) out << "warning: two zeros closer than 1e-5\n";
  for (const auto& z : cls.zeros) {
    out << "p0 = " << fmt_point(z.p0) << " | index = " << fmt_index(z.index) << " | "
        << (z.resonance.resonant ? "Resonant" : "NonResonant") << " | " << describe_local(z.local) << " | ";
    if (z.ejecting)
      out << "ejecting (" << local::to_string(z.justification) << ")\n";
    else
      out << "ejecting unknown\n";
    for (const auto& e : z.errors) {
      out << "  error: " << e << "\n";
      status = kFailure;
    }
  }
  return status;
}

inline int cmd_classify(const ProblemSpec& spec, std::ostream& out) {
  const auto cls = local::classify(spec.field, spec.period, spec.window, classify_options(spec));
  return print_classification(spec, cls, out);
}

inline int cmd_multiplicity(const ProblemSpec& spec, std::ostream& out) {
  const int deg = window_degree(spec);
  const auto cls = local::classify(spec.field, spec.period, spec.window, classify_options(spec));
  const auto mb = local::multiplicity_bound(cls.zeros, deg);
  out << "problem " << spec.id << ": multiplicity for small lambda > 0\n";
  out << "deg(g, window) = " << deg << "\n";
  int ejecting = 0;
  for (const auto& z : cls.zeros) {
    out << "zero " << fmt_point(z.p0) << ": index " << fmt_index(z.index) << ", "
        << (z.ejecting ? std::string("ejecting (") + local::to_string(z.justification) + ")" : "not known ejecting")
        << "\n";
    ejecting += z.ejecting ? 1 : 0;
  }
  out << "ejecting zeros = " << ejecting << "\n";
  out << "degree bound = " << mb.degree_bound << (mb.no_extra_branch ? " (NoExtraBranch)" : "") << "\n";
  out << "local bound = " << mb.local_bound << "\n";
  out << "n = " << mb.n << "\n";
  out << "witnesses =";
  for (const Vec& w : mb.witnesses) out << " " << fmt_point(w);
  out << "\n";
  out << "assumed, not verified: no unbounded connected set of T-pairs meets lambda = 0 in the window\n";
  if (spec.separated) out << "assumed, not verified: separated variables and minimal period T (separated = true)\n";
  return kOk;
}

inline int cmd_sample(const ProblemSpec& spec, const CommandOptions& opt, std::ostream& out) {
  const auto scan = atlas::sample_slices(spec, atlas::lambda_grid(spec.window, opt.lambda_grid));
  const std::string path = opt.out_path.empty() ? spec.id + "_slices.csv" : opt.out_path;
  atlas::export_cloud(scan.cloud, path);
  int seeds = 0;
  for (const auto& s : scan.slices) seeds += s.seeds;
  out << "problem " << spec.id << ": " << scan.slices.size() << " slice(s), " << seeds << " seed(s), "
      << scan.total_escaped() << " escaped\n";
  out << "points = " << scan.cloud.points.size() << "\n";
  out << "wrote " << path << "\n";
  return kOk;
}

inline int cmd_branch(const ProblemSpec& spec, const CommandOptions& opt, std::ostream& out) {
  const double p0 = opt.from ? *opt.from : default_branch_start(spec);
  const auto trace = atlas::follow_branch(spec, p0, opt.continuation);
  const std::string path = opt.out_path.empty() ? spec.id + "_branch.csv" : opt.out_path;
  atlas::export_cloud(trace.cloud, path);
  double lo = 0.0, hi = 0.0;
  for (const auto& pt : trace.cloud.points) {
    lo = std::min(lo, pt.lambda);
    hi = std::max(hi, pt.lambda);
  }
  out << "problem " << spec.id << ": branch from (0, " << fmt(p0) << ")\n";
  out << "points = " << trace.cloud.points.size() << ", lambda range [" << fmt(lo) << ", " << fmt(hi) << "]\n";
  if (trace.stalled) out << "stalled: " << trace.stall_message << "\n";
  out << "wrote " << path << "\n";
  return trace.stalled ? kFailure : kOk;
}

// ---------------------------------------------------------------------------
// Reproduction of the bundled examples

struct Check {
  std::string key;
  std::string value;
  std::string expected;
  bool pass = false;

  std::string line() const { return key + " = " + value + " (expected " + expected + "): " + (pass ? "PASS" : "FAIL"); }
};

struct Reproduction {
  std::string id;
  std::vector<std::string> lines;  // report lines in order; checks are also collected below
  std::vector<Check> checks;
  atlas::BranchCloud cloud;

  void note(const std::string& s) { lines.push_back(s); }
  void check(Check c) {
    lines.push_back(c.line());
    checks.push_back(std::move(c));
  }
  void check_near(const std::string& key, double value, double expected, double tol, int decimals = 6) {
    check({key, fmt_fixed(value, decimals), fmt(expected) + " ± " + fmt(tol, 2),
           std::isfinite(value) && std::abs(value - expected) <= tol});
  }
  void check_int(const std::string& key, long value, long expected) {
    check({key, std::to_string(value), std::to_string(expected), value == expected});
  }
  void check_text(const std::string& key, const std::string& value, const std::string& expected) {
    check({key, value, expected, value == expected});
  }
  bool passed() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
  std::string report() const {
    std::string s;
    for (const auto& l : lines) s += l + "\n";
    int failed = 0;
    for (const auto& c : checks) failed += c.pass ? 0 : 1;
    s += "checks = " + std::to_string(checks.size()) + ", failed = " + std::to_string(failed) + "\n";
    return s;
  }
};

inline const local::ZeroClassification* zero_near(const local::Classification& cls, const Vec& p) {
  for (const auto& z : cls.zeros)
    if (distance(z.p0, p) < 1e-6) return &z;
  return nullptr;
}

inline std::string resonance_name(const local::ZeroClassification& z) {
  return z.resonance.resonant ? "Resonant" : "NonResonant";
}

inline std::string local_name(const local::ZeroClassification& z) {
  static const char* names[] = {"TransversalBranch", "TangentBranch", "Ejecting2D", "Indeterminate"};
  return names[z.local.index()];
}

inline std::string zero_list(const std::vector<Vec>& zs) {
  std::string s = "{";
  for (std::size_t i = 0; i < zs.size(); ++i) s += (i ? ", " : "") + fmt_point(zs[i], 8);
  return s + "}";
}

inline bool same_points(const std::vector<Vec>& a, const std::vector<Vec>& b, double tol) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].dim() != b[i].dim() || distance(a[i], b[i]) > tol) return false;
  return true;
}

/// Points of a cloud on one lambda slice within |p| <= radius.
inline std::vector<Vec> slice_points(const atlas::BranchCloud& cloud, double lambda, double radius) {
  std::vector<Vec> out;
  for (const auto& pt : cloud.points)
    if (pt.provenance == atlas::Provenance::SliceScan && pt.lambda == lambda && pt.p.norm() <= radius &&
        (out.empty() || distance(out.back(), pt.p) >= local::kDedupeRadius))
      out.push_back(pt.p);
  return out;
}

inline atlas::BranchTrace trace_or_note(Reproduction& r, const ProblemSpec& spec, double p0,
                                        const CommandOptions& opt) {
  try {
    auto t = atlas::follow_branch(spec, p0, opt.continuation);
    r.note("branch from (0, " + fmt(p0) + "): " + std::to_string(t.cloud.points.size()) + " points" +
           (t.stalled ? ", stalled" : ""));
    return t;
  } catch (const NumericalError& e) {
    r.note("branch from (0, " + fmt(p0) + "): not traced (" + e.what() + ")");
    return {};
  }
}

inline void check_zero_set(Reproduction& r, const local::Classification& cls, const std::vector<Vec>& expected) {
  std::vector<Vec> got;
  for (const auto& z : cls.zeros) got.push_back(z.p0);
  r.check({"zeros", zero_list(got), zero_list(expected), same_points(got, expected, 1e-8)});
}

inline void check_zero(Reproduction& r, const local::Classification& cls, const Vec& p, const std::string& resonance,
                       std::optional<int> index) {
  const auto* z = zero_near(cls, p);
  const std::string tag = "zero " + fmt_point(p);
  if (!z) {
    r.check({tag, "missing", "present", false});
    return;
  }
  r.check_text(tag + " resonance", resonance_name(*z), resonance);
  if (index) r.check_text(tag + " index", fmt_index(z->index), fmt_index(index));
}

/// Slope dp/dlambda at 0 from a cubic fit of continuation points with |lambda| <= half_width.
inline std::optional<double> continuation_slope(const atlas::BranchCloud& c, double half_width) {
  std::vector<double> xs, ys;
  for (const auto& pt : c.points)
    if (std::abs(pt.lambda) <= half_width) {
      xs.push_back(pt.lambda);
      ys.push_back(pt.p[0]);
    }
  if (xs.size() < 6) return std::nullopt;
  return polyfit(xs, ys, 3)[1];
}

inline Reproduction reproduce(const std::string& id, const CommandOptions& opt = {}) {
  const ProblemSpec spec = bundled::load(id);
  Reproduction r;
  r.id = id;
  r.note("example " + id);
  r.note("dim = " + std::to_string(spec.dim) + ", period = " + spec.period_text);
  for (std::size_t i = 0; i < spec.g_text.size(); ++i) r.note("g[" + std::to_string(i) + "] = " + spec.g_text[i]);
  for (std::size_t i = 0; i < spec.f_text.size(); ++i) r.note("f[" + std::to_string(i) + "] = " + spec.f_text[i]);
  r.note("window: " + fmt_window(spec.window));

  const double T = spec.period;
  const auto cls = local::classify(spec.field, T, spec.window, classify_options(spec));
  for (const auto& z : cls.zeros) {
    std::string row = "classification " + fmt_point(z.p0) + ": index " + fmt_index(z.index) + ", " +
                      resonance_name(z) + ", " + describe_local(z.local) + ", " +
                      (z.ejecting ? std::string("ejecting (") + local::to_string(z.justification) + ")"
                                  : std::string("ejecting unknown"));
    r.note(row);
    for (const auto& e : z.errors) r.note("  error: " + e);
  }

  const int slice_count = spec.dim == 1 ? 11 : 5;
  std::vector<double> lambdas = atlas::lambda_grid(spec.window, slice_count);
  auto add_slices = [&](const std::vector<double>& ls) {
    auto scan = atlas::sample_slices(spec, ls);
    r.cloud = r.cloud.points.empty() ? scan.cloud : atlas::merge(r.cloud, scan.cloud);
    int escaped = scan.total_escaped();
    r.note("slices: " + std::to_string(ls.size()) + " lambda value(s), " + std::to_string(scan.cloud.points.size()) +
           " point(s), " + std::to_string(escaped) + " escaped seed(s)");
  };
  auto add_trace = [&](const atlas::BranchTrace& t) {
    if (!t.cloud.points.empty()) r.cloud = r.cloud.points.empty() ? t.cloud : atlas::merge(r.cloud, t.cloud);
  };
  r.cloud.dim = spec.dim;
  r.cloud.window = spec.window;
  r.cloud.problem_hash = atlas::problem_hash(spec);

  auto multiplicity = [&]() {
    const int deg = window_degree(spec);
    r.note("deg(g, window) = " + std::to_string(deg));
    return local::multiplicity_bound(cls.zeros, deg);
  };

  if (id == "exNTse") {
    check_zero_set(r, cls, {Vec{-1.0}, Vec{0.0}});
    check_zero(r, cls, Vec{0.0}, "NonResonant", 1);
    check_zero(r, cls, Vec{-1.0}, "NonResonant", -1);
    const auto j0 = local::make_jet(spec.field, Vec{0.0}, T);
    const auto j1 = local::make_jet(spec.field, Vec{-1.0}, T);
    r.check_near("p'(0) at p0=0", local::branch_tangent(j0, T)[0], -0.5, 1e-6);
    r.check_near("p'(0) at p0=-1", local::branch_tangent(j1, T)[0], -0.8, 1e-6);
    r.check_int("n", multiplicity().n, 2);
    add_slices(lambdas);
    add_trace(trace_or_note(r, spec, 0.0, opt));
    add_trace(trace_or_note(r, spec, -1.0, opt));
  } else if (id == "exsimp") {
    check_zero_set(r, cls, {Vec{0.0}});
    check_zero(r, cls, Vec{0.0}, "NonResonant", 1);
    const auto j0 = local::make_jet(spec.field, Vec{0.0}, T);
    r.check_near("p'(0)", local::branch_tangent(j0, T)[0], -1.5, 1e-6);
    r.check_int("n", multiplicity().n, 1);
    add_slices(lambdas);
    const auto t = trace_or_note(r, spec, 0.0, opt);
    add_trace(t);
    const auto slope = continuation_slope(t.cloud, 0.02);
    r.check_near("continuation slope dp/dlambda", slope.value_or(std::nan("")), -1.5, 1e-4);
  } else if (id == "extang") {
    check_zero_set(r, cls, {Vec{0.0}});
    check_zero(r, cls, Vec{0.0}, "Resonant", 1);
    add_slices(lambdas);
    const auto at0 = slice_points(r.cloud, 0.0, 10.0);
    r.check({"lambda=0 slice", zero_list(at0), "{0}", same_points(at0, {Vec{0.0}}, 1e-8)});
    const auto t = trace_or_note(r, spec, 0.0, opt);
    add_trace(t);
    std::vector<double> ps, ls;
    for (const auto& pt : t.cloud.points)
      if (std::abs(pt.p[0]) <= 0.05) {
        ps.push_back(pt.p[0]);
        ls.push_back(pt.lambda);
      }
    if (ps.size() >= 5) {
      const auto c = polyfit(ps, ls, 2);
      r.check({"quadratic fit |c1|", fmt(std::abs(c[1]), 6), "< 0.001", std::abs(c[1]) < 1e-3});
      // the sign of a round-off sized coefficient says nothing, so require it above fit noise
      r.check({"quadratic fit c2", fmt(c[2], 6), "> 1e-9", c[2] > 1e-9});
      const auto c3 = polyfit(ps, ls, 3);
      r.check({"cubic fit |c1|", fmt(std::abs(c3[1]), 6), "< 0.001", std::abs(c3[1]) < 1e-3});
    } else {
      r.check({"tangency fit points", std::to_string(ps.size()), ">= 5", false});
    }
  } else if (id == "exnasty") {
    check_zero_set(r, cls, {Vec{-1.0}, Vec{0.0}});
    check_zero(r, cls, Vec{0.0}, "Resonant", 0);
    check_zero(r, cls, Vec{-1.0}, "NonResonant", 1);
    if (const auto* z = zero_near(cls, Vec{0.0})) {
      r.check_text("zero 0 local", local_name(*z), "Indeterminate");
      r.check_text("zero 0 ejecting", z->ejecting ? "yes" : "unknown", "unknown");
    }
    if (const auto* z = zero_near(cls, Vec{-1.0})) r.check_text("zero -1 ejecting", z->ejecting ? "yes" : "unknown", "yes");
    add_slices(lambdas);
    add_trace(trace_or_note(r, spec, -1.0, opt));
  } else if (id == "ex2tang") {
    check_zero_set(r, cls, {Vec{-1.0}, Vec{0.0}, Vec{1.0}});
    check_zero(r, cls, Vec{0.0}, "Resonant", 1);
    check_zero(r, cls, Vec{1.0}, "Resonant", 0);
    check_zero(r, cls, Vec{-1.0}, "Resonant", 0);
    const double expected[] = {0.0, -4.0, 4.0};
    const double at[] = {0.0, 1.0, -1.0};
    for (int k = 0; k < 3; ++k) {
      const auto j = local::make_jet(spec.field, Vec{at[k]}, T);
      r.check_near("lambda''(" + fmt(at[k]) + ")", local::branch_curvature(j, T), expected[k], 1e-9, 9);
    }
    // nonzero curvature comes with index 0
    bool consistent = true;
    for (const auto& z : cls.zeros)
      if (const auto* tb = std::get_if<local::TangentBranch>(&z.local); tb && tb->lambda_dd != 0.0)
        consistent = consistent && z.index && *z.index == 0;
    r.check_text("nonzero curvature implies index 0", consistent ? "yes" : "no", "yes");
    r.check_int("n", multiplicity().n, 3);
    add_slices(lambdas);
    for (double p0 : {-1.0, 0.0, 1.0}) add_trace(trace_or_note(r, spec, p0, opt));
  } else if (id == "remnoso-agree" || id == "remnoso-disagree") {
    const bool agree = id == "remnoso-agree";
    check_zero_set(r, cls, {Vec{0.0}});
    if (const auto* z = zero_near(cls, Vec{0.0})) {
      const auto* tb = std::get_if<local::TangentBranch>(&z->local);
      r.check_text("local count", tb ? local::to_string(tb->count.verdict) : local_name(*z),
                   agree ? "NoSolutions" : "TwoSolutions");
    }
    add_slices(lambdas);
    const std::vector<double> probe{0.01, 0.02, 0.05};
    add_slices(probe);
    for (double l : probe) {
      const auto pts = slice_points(r.cloud, l, 0.2);
      r.check_int("starting points with |p| <= 0.2 at lambda=" + fmt(l), static_cast<long>(pts.size()), agree ? 0 : 2);
    }
  } else if (id == "ex3d") {
    check_zero_set(r, cls, {Vec{0.0, 0.0}});
    check_zero(r, cls, Vec{0.0, 0.0}, "Resonant", 1);
    auto g = [&](const Vec& p) { return spec.field.g(p); };
    const int winding = spectral::degree_2d_winding(g, spectral::Rect{-0.1, 0.1, -0.1, 0.1}, 64).value;
    r.check_int("winding index at (0, 0)", winding, 1);
    if (const auto* z = zero_near(cls, Vec{0.0, 0.0})) r.check_text("zero (0, 0) local", local_name(*z), "Ejecting2D");
    const auto jet = local::make_jet(spec.field, Vec{0.0, 0.0}, T);
    const auto test = local::ejecting_test_2d(jet, T);
    r.note("ejecting test route = " + test.route + ", witness " + fmt_point(test.v));
    const double oracle = 2.0 * std::expm1(T);
    const double mag = test.integral.norm();
    r.check({"|integral|", fmt(mag, 12), fmt(oracle, 12) + " ± 1e-6 relative", std::abs(mag - oracle) <= 1e-6 * oracle});
    const double rel = (test.integral - test.quadrature).norm() / std::max(mag, 1e-300);
    r.check({"closed form vs quadrature", fmt(rel, 3), "<= 1e-8 relative", rel <= 1e-8});
    add_slices(lambdas);
  } else {
    throw InputError("unknown example id '" + id + "'");
  }
  return r;
}

inline std::string known_ids() {
  std::string s;
  for (const auto& id : bundled::ids()) s += (s.empty() ? "" : ", ") + id;
  return s;
}

inline int cmd_reproduce(const std::string& id, const CommandOptions& opt, std::ostream& out, std::ostream& err) {
  if (!bundled::find(id)) {
    err << "unknown example id '" << id << "'; known ids: " << known_ids() << "\n";
    return kUsage;
  }
  const Reproduction r = reproduce(id, opt);
  const std::string dir = opt.out_path.empty() ? "." : opt.out_path;
  const std::string csv = dir + "/" + id + "_cloud.csv";
  const std::string report_path = dir + "/" + id + "_report.txt";
  atlas::export_cloud(r.cloud, csv);
  const std::string report = r.report();
  std::ofstream f(report_path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot open '" + report_path + "' for writing");
  f << report;
  out << report;
  if (!r.passed()) {
    err << "failed checks:\n";
    for (const auto& c : r.checks)
      if (!c.pass) err << "  " << c.line() << "\n";
    return kFailure;
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// Dispatch

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"zeros", "classify", "sample", "branch", "multiplicity", "reproduce"};
  return names;
}

/// Loads a problem file; a bundled id is accepted when no such file exists.
inline ProblemSpec load_target(const std::string& target) {
  std::ifstream probe(target);
  if (!probe && bundled::find(target)) return bundled::load(target);
  return load_problem(target);
}

inline int run(const std::string& command, const std::string& target, const CommandOptions& opt, std::ostream& out,
               std::ostream& err) {
  try {
    if (command == "reproduce") return cmd_reproduce(target, opt, out, err);
    const ProblemSpec spec = load_target(target);
    if (command == "zeros") return cmd_zeros(spec, out);
    if (command == "classify") return cmd_classify(spec, out);
    if (command == "sample") return cmd_sample(spec, opt, out);
    if (command == "branch") return cmd_branch(spec, opt, out);
    if (command == "multiplicity") return cmd_multiplicity(spec, out);
    err << "unknown command '" << command << "'\n";
    return kUsage;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
}

}  // namespace ejecta::cli
