#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "ejecta/bundled.hpp"
#include "ejecta/errors.hpp"
#include "ejecta/local_analysis.hpp"
#include "ejecta/spectral.hpp"

using namespace ejecta;
using spectral::Rect;

namespace {

constexpr double kT = 2.0 * std::numbers::pi;

// Truncated Taylor series for e^{tA}; fine for ||tA|| of order one.
SmallMatrix expm_series(const SmallMatrix& a, double t, int terms = 30) {
  SmallMatrix sum = SmallMatrix::identity(a.n);
  SmallMatrix term = SmallMatrix::identity(a.n);
  for (int k = 1; k < terms; ++k) {
    term = (t / k) * (term * a);
    sum = sum + term;
  }
  return sum;
}

void expect_matrix_near(const SmallMatrix& got, const SmallMatrix& want, double tol) {
  ASSERT_EQ(got.n, want.n);
  for (int i = 0; i < got.n; ++i)
    for (int j = 0; j < got.n; ++j) EXPECT_NEAR(got(i, j), want(i, j), tol) << "(" << i << "," << j << ")";
}

std::vector<std::complex<double>> sorted(std::vector<std::complex<double>> v) {
  std::sort(v.begin(), v.end(), [](auto a, auto b) { return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag(); });
  return v;
}

}  // namespace

TEST(Eigenvalues, Examples) {
  auto e = sorted(spectral::eigenvalues(SmallMatrix::of(0, 0, 0, 1)));
  EXPECT_EQ(e[0], std::complex<double>(0, 0));
  EXPECT_EQ(e[1], std::complex<double>(1, 0));
  e = spectral::eigenvalues(SmallMatrix::identity(2));
  EXPECT_EQ(e[0], std::complex<double>(1, 0));
  EXPECT_EQ(e[1], std::complex<double>(1, 0));
  e = sorted(spectral::eigenvalues(SmallMatrix::of(0, -1, 1, 0)));
  EXPECT_NEAR(std::abs(e[0] - std::complex<double>(0, -1)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(e[1] - std::complex<double>(0, 1)), 0.0, 1e-15);
  e = spectral::eigenvalues(SmallMatrix::scalar(-2.5));
  ASSERT_EQ(e.size(), 1u);
  EXPECT_EQ(e[0], std::complex<double>(-2.5, 0));
}

TEST(Eigenvalues, StableForWidelySeparatedRoots) {
  // roots 1e8 and 1e-8: the naive formula loses the small one entirely
  const auto e = sorted(spectral::eigenvalues(SmallMatrix::of(1e8, 0.0, 0.0, 1e-8) + SmallMatrix::of(0, 1, 0, 0)));
  EXPECT_NEAR(e[0].real(), 1e-8, 1e-20);
  EXPECT_NEAR(e[1].real(), 1e8, 1e-6);
}

TEST(Expm, Examples) {
  expect_matrix_near(spectral::expm(SmallMatrix::zero(2), 3.7), SmallMatrix::identity(2), 0.0);
  const SmallMatrix rot = SmallMatrix::of(0, -1, 1, 0);
  const double t = std::numbers::pi / 2;
  expect_matrix_near(spectral::expm(rot, t), expm_series(rot, t), 1e-14);
  expect_matrix_near(spectral::expm(rot, t), SmallMatrix::of(0, -1, 1, 0), 1e-15);
  for (double s : {-1.0, 0.5, kT})
    expect_matrix_near(spectral::expm(SmallMatrix::of(0, 0, 0, 1), s), SmallMatrix::of(1, 0, 0, std::exp(s)),
                       1e-15 * std::exp(std::abs(s)));
  EXPECT_DOUBLE_EQ(spectral::expm(SmallMatrix::scalar(0.5), kT)(0, 0), std::exp(0.5 * kT));
}

TEST(Expm, AllBranchesMatchSeries) {
  const SmallMatrix cases[] = {
      SmallMatrix::of(0.3, 1.0, 0.2, -0.4),   // real distinct
      SmallMatrix::of(0.1, -2.0, 1.5, 0.2),   // complex pair
      SmallMatrix::of(0.5, 1.0, 0.0, 0.5),    // defective
      SmallMatrix::of(-0.2, 0.0, 0.0, -0.2),  // scalar multiple of identity
  };
  for (const auto& a : cases)
    for (double t : {0.3, 1.0, -0.7}) expect_matrix_near(spectral::expm(a, t), expm_series(a, t, 40), 1e-13);
}

TEST(Expm, GroupPropertyOnRandomMatrices) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> entry(-1.0, 1.0), time(-3.0, 3.0);
  for (int n = 0; n < 100; ++n) {
    const SmallMatrix a = SmallMatrix::of(entry(rng), entry(rng), entry(rng), entry(rng));
    const double t = time(rng), s = time(rng);
    const SmallMatrix lhs = spectral::expm(a, t) * spectral::expm(a, s);
    const SmallMatrix rhs = spectral::expm(a, t + s);
    const double scale = std::max(1.0, rhs.max_abs());
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) EXPECT_NEAR(lhs(i, j), rhs(i, j), 1e-12 * scale) << "sample " << n;
  }
}

TEST(KIntegral, Examples) {
  expect_matrix_near(spectral::K_integral(SmallMatrix::zero(2), kT), kT * SmallMatrix::identity(2), 1e-12 * kT);
  const SmallMatrix k = spectral::K_integral(SmallMatrix::of(0, 0, 0, 1), kT);
  EXPECT_NEAR(k(0, 0), kT, 1e-12 * kT);
  EXPECT_NEAR(k(1, 1), std::expm1(kT), 1e-11 * std::expm1(kT));
  EXPECT_NEAR(k(0, 1), 0.0, 1e-12);
  EXPECT_NEAR(k(1, 0), 0.0, 1e-12);
  EXPECT_NEAR(spectral::K_integral(SmallMatrix::scalar(1.0), kT)(0, 0), std::expm1(kT), 1e-12 * std::expm1(kT));
}

TEST(KIntegral, DerivativeInTIsExponential) {
  const SmallMatrix cases[] = {SmallMatrix::of(0.3, 1.0, 0.2, -0.4), SmallMatrix::of(0, 0, 0, 1),
                               SmallMatrix::of(0, 1, 0, 0), SmallMatrix::scalar(0.0), SmallMatrix::scalar(-0.8)};
  const double h = 1e-5;
  for (const auto& a : cases) {
    for (double T : {1.0, kT}) {
      const SmallMatrix fd =
          (1.0 / (2 * h)) * (spectral::K_integral(a, T + h) - spectral::K_integral(a, T - h));
      const SmallMatrix ex = spectral::expm(a, T);
      for (int i = 0; i < a.n; ++i)
        for (int j = 0; j < a.n; ++j)
          EXPECT_NEAR(fd(i, j), ex(i, j), 1e-6 * std::max(1.0, std::abs(ex(i, j))));
    }
  }
}

TEST(KernelVector, Examples) {
  const auto k = spectral::kernel_vector(SmallMatrix::of(0, 0, 0, 1), 1e-8);
  ASSERT_TRUE(k.has_value());
  EXPECT_FALSE(k->full_kernel);
  EXPECT_NEAR(k->v[0], 1.0, 1e-15);
  EXPECT_NEAR(k->v[1], 0.0, 1e-15);

  const auto z = spectral::kernel_vector(SmallMatrix::zero(2), 1e-8);
  ASSERT_TRUE(z.has_value());
  EXPECT_TRUE(z->full_kernel);
  EXPECT_EQ(z->v[0], 1.0);
  EXPECT_EQ(z->v[1], 0.0);

  EXPECT_FALSE(spectral::kernel_vector(SmallMatrix::identity(2), 1e-8).has_value());
}

TEST(KernelVector, RandomRankOneMatrices) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int n = 0; n < 50; ++n) {
    const double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
    const SmallMatrix m = SmallMatrix::of(a * c, a * d, b * c, b * d);  // (a,b)^T (c,d)
    const auto k = spectral::kernel_vector(m, 1e-8);
    ASSERT_TRUE(k.has_value());
    EXPECT_NEAR(k->v.norm(), 1.0, 1e-14);
    EXPECT_LE((m * k->v).norm(), 1e-8 * m.frobenius());
  }
}

TEST(Degree1D, Examples) {
  auto g1 = [](double x) { return (x + x * x) / (1 + x * x); };
  EXPECT_EQ(spectral::degree_1d(g1, -2.0, 1.0).value, 0);
  EXPECT_EQ(spectral::degree_1d([](double x) { return x; }, -1.0, 1.0).value, 1);
  EXPECT_EQ(spectral::degree_1d([](double x) { return -x; }, -1.0, 1.0).value, -1);
  EXPECT_EQ(spectral::degree_1d([](double x) { return x * x; }, -1.0, 1.0).value, 0);
  const auto r = spectral::degree_1d([](double x) { return x; }, -1.0, 2.0);
  EXPECT_EQ(r.boundary_min_norm, 1.0);
}

TEST(Degree1D, BoundaryZero) {
  EXPECT_THROW(spectral::degree_1d([](double x) { return x - 1.0; }, -1.0, 1.0), BoundaryZero);
}

TEST(Degree2D, Examples) {
  const Rect unit{-1, 1, -1, 1};
  EXPECT_EQ(spectral::degree_2d_winding([](const Vec& p) { return p; }, unit, 64).value, 1);
  EXPECT_EQ(spectral::degree_2d_winding([](const Vec& p) { return Vec{p[0], -p[1]}; }, unit, 64).value, -1);
  EXPECT_EQ(spectral::degree_2d_winding(
                [](const Vec& p) { return Vec{p[0] * p[0] - p[1] * p[1], 2 * p[0] * p[1]}; }, unit, 64)
                .value,
            2);
  EXPECT_EQ(spectral::degree_2d_winding(
                [](const Vec& p) { return Vec{p[0] * p[0] * p[0], p[1] + p[0] * p[0]}; }, unit, 64)
                .value,
            1);
  // no zero inside
  EXPECT_EQ(spectral::degree_2d_winding([](const Vec& p) { return Vec{p[0] + 5.0, p[1]}; }, unit, 64).value, 0);
}

TEST(Degree2D, ReportIsAdmissible) {
  const auto r = spectral::degree_2d_winding([](const Vec& p) { return p; }, Rect{-1, 1, -1, 1}, 64);
  EXPECT_NEAR(r.boundary_min_norm, 1.0, 1e-15);
  EXPECT_GE(r.refinement_depth, 0);
}

TEST(Degree2D, InvariantUnderSamplingDensity) {
  auto z3 = [](const Vec& p) {
    const std::complex<double> z(p[0] - 0.1, p[1] + 0.2);
    const std::complex<double> w = z * z * z - std::complex<double>(0.3, 0.1);
    return Vec{w.real(), w.imag()};
  };
  auto ex3d = [](const Vec& p) { return Vec{p[0] * p[0] * p[0], p[1] + p[0] * p[0]}; };
  auto pair = [](const Vec& p) { return Vec{p[0] * p[0] - p[1] * p[1] - 0.1, p[0] * p[1] + 0.05}; };  // two simple zeros
  const Rect r{-1, 1.2, -0.9, 1.1};
  for (int n0 : {64, 256, 1024}) {
    EXPECT_EQ(spectral::degree_2d_winding(z3, r, n0).value, 3) << n0;
    EXPECT_EQ(spectral::degree_2d_winding(ex3d, r, n0).value, 1) << n0;
    EXPECT_EQ(spectral::degree_2d_winding(pair, r, n0).value, 2) << n0;
  }
}

TEST(Degree2D, CoarseSamplingIsRefined) {
  // winding 5 needs increments below pi/2, so 4 samples per side must be refined
  auto z5 = [](const Vec& p) {
    const std::complex<double> z(p[0], p[1]);
    const std::complex<double> w = z * z * z * z * z;
    return Vec{w.real(), w.imag()};
  };
  const auto r = spectral::degree_2d_winding(z5, Rect{-1, 1, -1, 1}, 4);
  EXPECT_EQ(r.value, 5);
  EXPECT_GT(r.refinement_depth, 0);
}

TEST(Degree2D, BoundaryZero) {
  EXPECT_THROW(spectral::degree_2d_winding([](const Vec& p) { return Vec{p[0] - 1.0, p[1]}; }, Rect{-1, 1, -1, 1}, 64),
               BoundaryZero);
}

TEST(IndexOfZero, Examples) {
  const FieldSpec nt = bundled::load("exNTse").field;
  EXPECT_EQ(spectral::index_of_zero(nt, Vec{0.0}, 0.25), 1);
  EXPECT_EQ(spectral::index_of_zero(nt, Vec{-1.0}, 0.25), -1);
  const FieldSpec tang = bundled::load("ex2tang").field;
  EXPECT_EQ(spectral::index_of_zero(tang, Vec{1.0}, 0.25), 0);
  EXPECT_EQ(spectral::index_of_zero(tang, Vec{-1.0}, 0.25), 0);
  EXPECT_EQ(spectral::index_of_zero(tang, Vec{0.0}, 0.25), 1);
  EXPECT_EQ(spectral::index_of_zero(bundled::load("ex3d").field, Vec{0.0, 0.0}, 0.5), 1);
  const FieldSpec saddle = FieldSpec::parse(2, {"x", "-y"}, {"0", "0"});
  EXPECT_EQ(spectral::index_of_zero(saddle, Vec{0.0, 0.0}, 0.5), -1);
}

TEST(IndexOfZero, AdditivityOnBundledOneDimensionalExamples) {
  int checked = 0;
  for (const auto& id : bundled::ids()) {
    const ProblemSpec spec = bundled::load(id);
    if (spec.dim != 1) continue;
    const auto& iv = spec.window.p[0];
    auto g = [&](double x) { return spec.field.g(Vec{x})[0]; };
    const int degree = spectral::degree_1d(g, iv.lo, iv.hi).value;
    const auto zs = local::find_zeros(spec.field, spec.window, spec.numerics.grid).zeros;
    int sum = 0;
    for (std::size_t i = 0; i < zs.size(); ++i)
      sum += spectral::index_of_zero(spec.field, zs[i], local::isolation_radius(zs, i));
    EXPECT_EQ(degree, sum) << id;
    ++checked;
  }
  EXPECT_GE(checked, 5);
}
