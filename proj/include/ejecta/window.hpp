#pragma once

#include <array>

#include "ejecta/linalg.hpp"

namespace ejecta {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double v) const { return v >= lo && v <= hi; }
  double width() const { return hi - lo; }
};

/// Analysis window: a lambda range and one p-range per coordinate.
struct Window {
  Interval lambda;
  std::array<Interval, 2> p{};
  int dim = 1;

  bool contains(const Vec& q) const {
    for (int i = 0; i < dim; ++i)
      if (!p[static_cast<std::size_t>(i)].contains(q[i])) return false;
    return true;
  }
  bool contains(double lam, const Vec& q) const { return lambda.contains(lam) && contains(q); }
};

}  // namespace ejecta
