#pragma once

// Closed-form linear algebra for 1x1 and 2x2 matrices and the topological
// degree of scalar and planar fields.

#include <cmath>
#include <complex>
#include <limits>
#include <array>
#include <algorithm>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "ejecta/errors.hpp"
#include "ejecta/field.hpp"
#include "ejecta/linalg.hpp"

namespace ejecta::spectral {

/// Discriminant |tr^2/4 - det| below which expm switches to the defective branch.
inline constexpr double kDefectiveThreshold = 1e-12;

inline std::vector<std::complex<double>> eigenvalues(const SmallMatrix& a) {
  if (a.n == 1) return {std::complex<double>(a.e[0], 0.0)};
  const double mu = 0.5 * a.trace();
  const double half_diff = 0.5 * (a(0, 0) - a(1, 1));
  // tr^2/4 - det written without cancellation between the diagonal terms
  const double disc = half_diff * half_diff + a(0, 1) * a(1, 0);
  if (disc >= 0.0) {
    const double r = std::sqrt(disc);
    const double q = mu + std::copysign(r, mu);
    if (q == 0.0) return {{0.0, 0.0}, {0.0, 0.0}};
    const double other = a.det() / q;
    return {{std::max(q, other), 0.0}, {std::min(q, other), 0.0}};
  }
  const double im = std::sqrt(-disc);
  return {{mu, im}, {mu, -im}};
}

/// e^{tA} in closed form. For dim 2, A = mu I + B with B traceless, so B^2 = disc I.
inline SmallMatrix expm(const SmallMatrix& a, double t) {
  if (a.n == 1) return SmallMatrix::scalar(std::exp(t * a.e[0]));
  const double mu = 0.5 * a.trace();
  SmallMatrix b = a - mu * SmallMatrix::identity(2);
  const double disc = b(0, 0) * b(0, 0) + b(0, 1) * b(1, 0);
  double c = 0.0;  // coefficient of I
  double s = 0.0;  // coefficient of B
  if (std::abs(disc) < kDefectiveThreshold) {
    // truncated series of cosh/sinh in t^2 disc; exact for disc == 0
    const double z = t * t * disc;
    c = 1.0 + z / 2.0 + z * z / 24.0;
    s = t * (1.0 + z / 6.0 + z * z / 120.0);
  } else if (disc > 0.0) {
    const double w = std::sqrt(disc);
    c = std::cosh(t * w);
    s = std::sinh(t * w) / w;
  } else {
    const double w = std::sqrt(-disc);
    c = std::cos(t * w);
    s = std::sin(t * w) / w;
  }
  const double scale = std::exp(mu * t);
  return scale * (c * SmallMatrix::identity(2) + s * b);
}

/// K(A) = int_0^T e^{uA} du.
inline SmallMatrix K_integral(const SmallMatrix& a, double T) {
  const double norm2 = a.frobenius() * a.frobenius();
  const bool invertible = a.n == 1 ? a.e[0] != 0.0 : std::abs(a.det()) > 1e-6 * norm2;
  if (invertible) {
    if (a.n == 1) return SmallMatrix::scalar(std::expm1(T * a.e[0]) / a.e[0]);
    const SmallMatrix rhs = expm(a, T) - SmallMatrix::identity(2);
    const double d = a.det();
    const SmallMatrix inv = SmallMatrix::of(a(1, 1) / d, -a(0, 1) / d, -a(1, 0) / d, a(0, 0) / d);
    return inv * rhs;
  }
  // composite Simpson with panel doubling
  auto simpson = [&](int panels) {
    const double h = T / panels;
    SmallMatrix acc = expm(a, 0.0) + expm(a, T);
    for (int k = 1; k < panels; ++k) acc = acc + ((k % 2) ? 4.0 : 2.0) * expm(a, k * h);
    return (h / 3.0) * acc;
  };
  int panels = 2;
  SmallMatrix prev = simpson(panels);
  for (int iter = 0; iter < 24; ++iter) {
    panels *= 2;
    SmallMatrix next = simpson(panels);
    if ((next - prev).max_abs() <= 1e-12 * std::max(next.max_abs(), 1e-300)) return next;
    prev = next;
  }
  return prev;
}

struct KernelVector {
  Vec v;
  bool full_kernel = false;
};

/// Unit vector v with |Av| small relative to ||A||, or nullopt if A is well conditioned.
inline std::optional<KernelVector> kernel_vector(const SmallMatrix& a, double eps) {
  if (a.max_abs() == 0.0) {
    Vec v(a.n);
    v[0] = 1.0;
    return KernelVector{v, true};
  }
  if (a.n == 1) return std::nullopt;
  // singular values from A^T A
  const double p = a(0, 0) * a(0, 0) + a(1, 0) * a(1, 0);
  const double q = a(0, 0) * a(0, 1) + a(1, 0) * a(1, 1);
  const double r = a(0, 1) * a(0, 1) + a(1, 1) * a(1, 1);
  const double half = 0.5 * (p - r);
  const double big = 0.5 * (p + r) + std::hypot(half, q);
  const double sigma_max = std::sqrt(big);
  const double sigma_min = std::abs(a.det()) / sigma_max;
  if (sigma_min > eps * sigma_max) return std::nullopt;
  // eigenvector of A^T A for the small eigenvalue
  const double small = (p * r - q * q) / big;
  Vec v1{q, small - p};
  Vec v2{small - r, q};
  Vec v = v1.norm() >= v2.norm() ? v1 : v2;
  if (v.norm() == 0.0) v = p <= r ? Vec{1.0, 0.0} : Vec{0.0, 1.0};
  v = (1.0 / v.norm()) * v;
  const int lead = std::abs(v[0]) >= std::abs(v[1]) ? 0 : 1;
  if (v[lead] < 0.0) v = -v;
  return KernelVector{v, false};
}

// ---------------------------------------------------------------------------
// Degree

struct DegreeReport {
  int value = 0;
  double boundary_min_norm = 0.0;
  int refinement_depth = 0;
};

struct Rect {
  double x0, x1, y0, y1;
};

template <class G>
DegreeReport degree_1d(G&& g, double a, double b) {
  const double ga = g(a);
  const double gb = g(b);
  const double m = std::min(std::abs(ga), std::abs(gb));
  if (m < 1e-12) throw BoundaryZero("degree_1d: field vanishes at an interval endpoint");
  auto sign = [](double v) { return v > 0.0 ? 1 : -1; };
  return DegreeReport{(sign(gb) - sign(ga)) / 2, m, 0};
}

/// Winding number of g along the counter-clockwise boundary of rect.
template <class G>
DegreeReport degree_2d_winding(G&& g, const Rect& rect, int n0) {
  constexpr double kMaxStep = std::numbers::pi / 2.0;
  constexpr int kMaxDepth = 20;
  const std::array<Vec, 5> corners{Vec{rect.x0, rect.y0}, Vec{rect.x1, rect.y0}, Vec{rect.x1, rect.y1},
                                   Vec{rect.x0, rect.y1}, Vec{rect.x0, rect.y0}};
  const int per_side = std::max(1, n0 / 4);

  double min_norm = std::numeric_limits<double>::infinity();
  int max_depth = 0;
  auto sample = [&](const Vec& p) {
    const Vec v = g(p);
    const double nv = v.norm();
    min_norm = std::min(min_norm, nv);
    if (nv < 1e-10) throw BoundaryZero("degree_2d_winding: field vanishes on the boundary");
    return std::atan2(v[1], v[0]);
  };
  auto wrap = [](double d) {
    while (d > std::numbers::pi) d -= 2.0 * std::numbers::pi;
    while (d <= -std::numbers::pi) d += 2.0 * std::numbers::pi;
    return d;
  };

  // segment [pa, pb] with known angles; bisect while the increment is too large
  auto segment = [&](auto&& self, const Vec& pa, double aa, const Vec& pb, double ab, int depth) -> double {
    const double d = wrap(ab - aa);
    if (std::abs(d) < kMaxStep) {
      max_depth = std::max(max_depth, depth);
      return d;
    }
    if (depth >= kMaxDepth) throw NonConvergent("degree_2d_winding: refinement depth exceeded");
    const Vec pm = 0.5 * (pa + pb);
    const double am = sample(pm);
    return self(self, pa, aa, pm, am, depth + 1) + self(self, pm, am, pb, ab, depth + 1);
  };

  double total = 0.0;
  for (int side = 0; side < 4; ++side) {
    const Vec& a = corners[static_cast<std::size_t>(side)];
    const Vec& b = corners[static_cast<std::size_t>(side + 1)];
    Vec prev = a;
    double prev_angle = sample(a);
    for (int k = 1; k <= per_side; ++k) {
      const double s = static_cast<double>(k) / per_side;
      const Vec p = k == per_side ? b : a + s * (b - a);
      const double angle = sample(p);
      total += segment(segment, prev, prev_angle, p, angle, 0);
      prev = p;
      prev_angle = angle;
    }
  }
  const double raw = total / (2.0 * std::numbers::pi);
  const double rounded = std::round(raw);
  if (std::abs(raw - rounded) >= 0.25) throw NonConvergent("degree_2d_winding: non-integer winding");
  return DegreeReport{static_cast<int>(rounded), min_norm, max_depth};
}

/// Index of an isolated zero p0; the caller guarantees no other zero within 2 * radius.
inline int index_of_zero(const FieldSpec& field, const Vec& p0, double radius) {
  if (field.dim() == 1) {
    auto g = [&](double x) { return field.g(Vec{x})[0]; };
    return degree_1d(g, p0[0] - radius, p0[0] + radius).value;
  }
  const Rect square{p0[0] - radius, p0[0] + radius, p0[1] - radius, p0[1] + radius};
  auto g = [&](const Vec& p) { return field.g(p); };
  const double d = field.g_jacobian(p0).det();
  if (std::abs(d) > 1e-9) {
    const int by_sign = d > 0.0 ? 1 : -1;
    int by_winding = by_sign;
    try {
      by_winding = degree_2d_winding(g, square, 64).value;
    } catch (const NumericalError&) {
      return by_sign;
    }
    if (by_winding != by_sign)
      throw NumericalError("index_of_zero: sign of det g' (" + std::to_string(by_sign) +
                           ") disagrees with winding number (" + std::to_string(by_winding) + ")");
    return by_sign;
  }
  return degree_2d_winding(g, square, 64).value;
}

}  // namespace ejecta::spectral
