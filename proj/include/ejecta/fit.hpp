#pragma once

// Least-squares polynomial fits used by branch diagnostics.

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ejecta/errors.hpp"

namespace ejecta {

/// Coefficients c[0..degree] of sum c_k x^k minimizing the squared residual.
/// Normal equations on centred-free monomials; fine for the short, well-scaled
/// ranges used here.
inline std::vector<double> polyfit(const std::vector<double>& x, const std::vector<double>& y, int degree) {
  const std::size_t m = static_cast<std::size_t>(degree) + 1;
  if (x.size() != y.size() || x.size() < m) throw NumericalError("polyfit: not enough points");
  // scale x to [-1, 1] for conditioning
  double s = 0.0;
  for (double v : x) s = std::max(s, std::abs(v));
  if (s == 0.0) s = 1.0;
  std::vector<std::vector<double>> a(m, std::vector<double>(m + 1, 0.0));
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::vector<double> pw(m);
    pw[0] = 1.0;
    for (std::size_t k = 1; k < m; ++k) pw[k] = pw[k - 1] * (x[i] / s);
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t c = 0; c < m; ++c) a[r][c] += pw[r] * pw[c];
      a[r][m] += pw[r] * y[i];
    }
  }
  for (std::size_t col = 0; col < m; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < m; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (a[piv][col] == 0.0) throw NumericalError("polyfit: singular normal equations");
    std::swap(a[piv], a[col]);
    for (std::size_t r = 0; r < m; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c <= m; ++c) a[r][c] -= f * a[col][c];
    }
  }
  std::vector<double> coef(m);
  double scale = 1.0;
  for (std::size_t k = 0; k < m; ++k) {
    coef[k] = a[k][m] / a[k][k] / scale;
    scale *= s;
  }
  return coef;
}

}  // namespace ejecta
