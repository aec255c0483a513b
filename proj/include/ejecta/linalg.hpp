#pragma once

// Fixed-capacity vectors and matrices for dimensions 1 and 2.

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <initializer_list>

namespace ejecta {

struct Vec {
  std::array<double, 2> e{};
  int n = 1;

  Vec() = default;
  explicit Vec(int dim) : n(dim) { assert(dim == 1 || dim == 2); }
  Vec(std::initializer_list<double> values) : n(static_cast<int>(values.size())) {
    assert(n == 1 || n == 2);
    std::copy(values.begin(), values.end(), e.begin());
  }

  int dim() const { return n; }
  double& operator[](int i) { return e[static_cast<std::size_t>(i)]; }
  double operator[](int i) const { return e[static_cast<std::size_t>(i)]; }

  double norm() const { return n == 1 ? std::abs(e[0]) : std::hypot(e[0], e[1]); }
  double max_abs() const { return n == 1 ? std::abs(e[0]) : std::max(std::abs(e[0]), std::abs(e[1])); }

  friend Vec operator+(Vec a, const Vec& b) {
    for (int i = 0; i < a.n; ++i) a[i] += b[i];
    return a;
  }
  friend Vec operator-(Vec a, const Vec& b) {
    for (int i = 0; i < a.n; ++i) a[i] -= b[i];
    return a;
  }
  friend Vec operator*(double s, Vec a) {
    for (int i = 0; i < a.n; ++i) a[i] *= s;
    return a;
  }
  friend Vec operator-(Vec a) { return -1.0 * a; }
  friend bool operator==(const Vec& a, const Vec& b) {
    if (a.n != b.n) return false;
    for (int i = 0; i < a.n; ++i)
      if (a[i] != b[i]) return false;
    return true;
  }
  /// Lexicographic order, used for canonical sorting of points.
  friend bool operator<(const Vec& a, const Vec& b) {
    for (int i = 0; i < std::min(a.n, b.n); ++i) {
      if (a[i] < b[i]) return true;
      if (b[i] < a[i]) return false;
    }
    return a.n < b.n;
  }
};

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (int i = 0; i < a.n; ++i) s += a[i] * b[i];
  return s;
}

inline double distance(const Vec& a, const Vec& b) { return (a - b).norm(); }

/// Row-major dim x dim matrix, dim in {1, 2}.
struct SmallMatrix {
  std::array<double, 4> e{};
  int n = 1;

  SmallMatrix() = default;
  explicit SmallMatrix(int dim) : n(dim) { assert(dim == 1 || dim == 2); }
  static SmallMatrix scalar(double a) {
    SmallMatrix m(1);
    m.e[0] = a;
    return m;
  }
  static SmallMatrix of(double a, double b, double c, double d) {
    SmallMatrix m(2);
    m.e = {a, b, c, d};
    return m;
  }
  static SmallMatrix identity(int dim) {
    SmallMatrix m(dim);
    for (int i = 0; i < dim; ++i) m(i, i) = 1.0;
    return m;
  }
  static SmallMatrix zero(int dim) { return SmallMatrix(dim); }

  int dim() const { return n; }
  double& operator()(int i, int j) { return e[static_cast<std::size_t>(i * n + j)]; }
  double operator()(int i, int j) const { return e[static_cast<std::size_t>(i * n + j)]; }

  double trace() const { return n == 1 ? e[0] : e[0] + e[3]; }
  double det() const { return n == 1 ? e[0] : e[0] * e[3] - e[1] * e[2]; }
  double frobenius() const {
    double s = 0.0;
    for (int i = 0; i < n * n; ++i) s += e[static_cast<std::size_t>(i)] * e[static_cast<std::size_t>(i)];
    return std::sqrt(s);
  }
  double max_abs() const {
    double m = 0.0;
    for (int i = 0; i < n * n; ++i) m = std::max(m, std::abs(e[static_cast<std::size_t>(i)]));
    return m;
  }

  friend SmallMatrix operator+(SmallMatrix a, const SmallMatrix& b) {
    for (int i = 0; i < a.n * a.n; ++i) a.e[static_cast<std::size_t>(i)] += b.e[static_cast<std::size_t>(i)];
    return a;
  }
  friend SmallMatrix operator-(SmallMatrix a, const SmallMatrix& b) {
    for (int i = 0; i < a.n * a.n; ++i) a.e[static_cast<std::size_t>(i)] -= b.e[static_cast<std::size_t>(i)];
    return a;
  }
  friend SmallMatrix operator*(double s, SmallMatrix a) {
    for (int i = 0; i < a.n * a.n; ++i) a.e[static_cast<std::size_t>(i)] *= s;
    return a;
  }
  friend SmallMatrix operator*(const SmallMatrix& a, const SmallMatrix& b) {
    SmallMatrix c(a.n);
    for (int i = 0; i < a.n; ++i)
      for (int j = 0; j < a.n; ++j) {
        double s = 0.0;
        for (int k = 0; k < a.n; ++k) s += a(i, k) * b(k, j);
        c(i, j) = s;
      }
    return c;
  }
  friend Vec operator*(const SmallMatrix& a, const Vec& v) {
    Vec r(a.n);
    for (int i = 0; i < a.n; ++i) {
      double s = 0.0;
      for (int k = 0; k < a.n; ++k) s += a(i, k) * v[k];
      r[i] = s;
    }
    return r;
  }
};

/// Direct solve of a 1x1 or 2x2 system by Cramer's rule. Returns false if det == 0.
inline bool solve(const SmallMatrix& a, const Vec& b, Vec& x) {
  const double d = a.det();
  if (d == 0.0 || !std::isfinite(d)) return false;
  x = Vec(a.n);
  if (a.n == 1) {
    x[0] = b[0] / d;
  } else {
    x[0] = (b[0] * a(1, 1) - a(0, 1) * b[1]) / d;
    x[1] = (a(0, 0) * b[1] - b[0] * a(1, 0)) / d;
  }
  return true;
}

}  // namespace ejecta
