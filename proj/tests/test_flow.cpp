#include <cmath>
#include <cstring>
#include <numbers>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "ejecta/field.hpp"
#include "ejecta/flow.hpp"
#include "ejecta/spectral.hpp"
#include "properties.hpp"

using namespace ejecta;

namespace {

constexpr double kT = 2.0 * std::numbers::pi;

FieldSpec scalar(const std::string& g, const std::string& f = "0") { return FieldSpec::parse(1, {g}, {f}); }

using props::random_polynomial_field;

}  // namespace

TEST(Integrate, EquilibriumIsPreserved) {
  const auto r = flow::integrate(scalar("x/(1+x^2)"), 0.0, Vec{0.0}, kT);
  ASSERT_TRUE(r.completed());
  EXPECT_EQ(r.terminal_state[0], 0.0);
  const auto r2 = flow::integrate(scalar("(x+x^2)/(1+x^2)"), 0.0, Vec{-1.0}, kT);
  ASSERT_TRUE(r2.completed());
  EXPECT_EQ(r2.terminal_state[0], -1.0);
}

TEST(Integrate, ExponentialGrowth) {
  flow::Options opt;
  const auto r = flow::integrate(scalar("x"), 0.0, Vec{1.0}, 1.0, opt);
  ASSERT_TRUE(r.completed());
  EXPECT_NEAR(r.terminal_state[0], std::numbers::e, 10 * opt.tol);
  EXPECT_GT(r.stats.steps, 0);
}

TEST(Integrate, ForcedLinearEquation) {
  // x' = -x + lambda sin t from 0: x(t) = lambda (sin t - cos t + e^{-t}) / 2
  const double lambda = 0.3, t1 = 3.0;
  const auto r = flow::integrate(scalar("-x", "sin(t)"), lambda, Vec{0.0}, t1);
  ASSERT_TRUE(r.completed());
  EXPECT_NEAR(r.terminal_state[0], lambda * (std::sin(t1) - std::cos(t1) + std::exp(-t1)) / 2, 1e-9);
}

TEST(Integrate, EscapeIsReportedWithTime) {
  // x' = x^2, x(0) = 1 blows up at t = 1
  const auto r = flow::integrate(scalar("x^2"), 0.0, Vec{1.0}, 2.0);
  EXPECT_EQ(r.status, flow::Status::Escaped);
  EXPECT_GT(r.event_norm, 1e6);
  EXPECT_NEAR(r.event_time, 1.0, 1e-5);
  EXPECT_LT(r.event_time, 1.0);
}

TEST(Integrate, StepFailureOnPersistentNonFiniteRhs) {
  auto rhs = [](double t, std::span<const double> y, std::span<double> dy) {
    dy[0] = t < 0.5 ? y[0] : std::nan("");
  };
  const auto r = flow::integrate_ode(rhs, {1.0}, 0.0, 1.0, flow::Options{}, 1);
  EXPECT_EQ(r.status, flow::Status::StepFailure);
  EXPECT_NEAR(r.event_time, 0.5, 1e-6);
}

TEST(Integrate, LandsExactlyOnFinalTime) {
  // linear growth is integrated exactly, so any overshoot would show up
  const auto r = flow::integrate(scalar("1"), 0.0, Vec{0.0}, kT);
  ASSERT_TRUE(r.completed());
  EXPECT_NEAR(r.terminal_state[0], kT, 1e-13);
}

TEST(Integrate, GroupProperty) {
  std::mt19937_64 rng(11);
  int compared = 0;
  for (int n = 0; n < 10; ++n) {
    const FieldSpec field = random_polynomial_field(rng, 2);
    const double lambda = 0.4;
    auto rhs = [&](double t, std::span<const double> y, std::span<double> dy) {
      const auto b = expr::Bindings::txy(t, y[0], y[1]);
      Vec g, f;
      field.g_into(b, g);
      field.f_into(b, f);
      dy[0] = g[0] + lambda * f[0];
      dy[1] = g[1] + lambda * f[1];
    };
    flow::Options opt;
    const double T = 1.0;
    const auto whole = flow::integrate_ode(rhs, {0.1, -0.2}, 0.0, T, opt, 2);
    if (whole.status != flow::Status::Completed) continue;
    const auto half = flow::integrate_ode(rhs, {0.1, -0.2}, 0.0, T / 2, opt, 2);
    const auto rest = flow::integrate_ode(rhs, half.y, T / 2, T, opt, 2);
    for (int i = 0; i < 2; ++i) EXPECT_NEAR(rest.y[i], whole.y[i], 10 * opt.tol * (1 + std::abs(whole.y[i])));
    ++compared;
  }
  EXPECT_GE(compared, 5);
}

TEST(Integrate, Deterministic) {
  std::mt19937_64 rng(5);
  const FieldSpec field = random_polynomial_field(rng, 2);
  const auto a = flow::integrate_with_variations(field, 0.2, Vec{0.1, 0.2}, 1.0, {Vec{1.0, 0.0}}, {}, true);
  const auto b = flow::integrate_with_variations(field, 0.2, Vec{0.1, 0.2}, 1.0, {Vec{1.0, 0.0}}, {}, true);
  auto same = [](double x, double y) { return std::memcmp(&x, &y, sizeof x) == 0; };
  for (int i = 0; i < 2; ++i) {
    EXPECT_TRUE(same(a.terminal_state[i], b.terminal_state[i]));
    EXPECT_TRUE(same(a.second_variation_vv[0][i], b.second_variation_vv[0][i]));
    for (int j = 0; j < 2; ++j) EXPECT_TRUE(same(a.first_variation(i, j), b.first_variation(i, j)));
  }
  EXPECT_EQ(a.stats.steps, b.stats.steps);
}

TEST(Variations, FirstVariationAtZeroIsMatrixExponential) {
  flow::Options opt;
  const FieldSpec f1 = scalar("(x+x^2)/(1+x^2)", "sin(t)");
  for (double p0 : {0.0, -1.0}) {
    const auto r = flow::integrate_with_variations(f1, 0.0, Vec{p0}, kT, {Vec{1.0}}, opt);
    const auto ex = spectral::expm(f1.g_jacobian(Vec{p0}), kT);
    EXPECT_NEAR(r.first_variation(0, 0), ex(0, 0), 100 * opt.tol * std::max(1.0, std::abs(ex(0, 0))));
  }
  const FieldSpec f2 = FieldSpec::parse(2, {"x^3", "y + x^2"}, {"sin(t) + 1", "sin(t) + 1"});
  const auto r = flow::integrate_with_variations(f2, 0.0, Vec{0.0, 0.0}, kT, {Vec{1.0, 0.0}}, opt);
  const auto ex = spectral::expm(f2.g_jacobian(Vec{0.0, 0.0}), kT);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      EXPECT_NEAR(r.first_variation(i, j), ex(i, j), 100 * opt.tol * std::max(1.0, std::abs(ex(i, j))));
}

TEST(Variations, ResonantScalarZeroHasUnitVariation) {
  const auto r = flow::integrate_with_variations(scalar("x^3/(1+x^2)", "1+sin(t)"), 0.0, Vec{0.0}, kT, {Vec{1.0}});
  EXPECT_NEAR(r.first_variation(0, 0), 1.0, 1e-10);
}

TEST(Variations, SecondVariationOfPlanarExample) {
  // beta_2' = beta_2 + 2 along v = (1, 0), so beta_2(T) = 2 (e^T - 1)
  const FieldSpec f2 = FieldSpec::parse(2, {"x^3", "y + x^2"}, {"sin(t) + 1", "sin(t) + 1"});
  const auto r = flow::integrate_with_variations(f2, 0.0, Vec{0.0, 0.0}, kT, {Vec{1.0, 0.0}, Vec{0.0, 1.0}});
  const double oracle = 2.0 * std::expm1(kT);
  EXPECT_NEAR(r.second_variation_vv[0][1], oracle, 1e-6 * oracle);
  EXPECT_NEAR(r.second_variation_vv[0][0], 0.0, 1e-9);
  // along (0, 1) the quadratic part of g vanishes identically
  EXPECT_NEAR(r.second_variation_vv[1].norm(), 0.0, 1e-9);
}

TEST(Variations, LambdaSensitivityMatchesFiniteDifference) {
  const FieldSpec field = scalar("x/(1+x^2)", "1+cos(x+t)");
  const double lambda = 0.1, h = 1e-5;
  flow::Options tight;
  tight.tol = 1e-13;
  const auto r = flow::integrate_with_variations(field, lambda, Vec{0.2}, kT, {}, tight, true);
  const double fd = (flow::integrate(field, lambda + h, Vec{0.2}, kT, tight).terminal_state[0] -
                     flow::integrate(field, lambda - h, Vec{0.2}, kT, tight).terminal_state[0]) /
                    (2 * h);
  EXPECT_NEAR(r.lambda_sensitivity[0], fd, 1e-5 * std::abs(fd));
}

TEST(Variations, MatchFiniteDifferencesOnRandomPolynomialFields) {
  const props::VariationResult r = props::flow_variations(2024, 50);
  EXPECT_EQ(r.fields, 50);
  EXPECT_GT(r.first.compared, 100);
  EXPECT_GT(r.second.compared, 50);
  EXPECT_EQ(r.first.failures, 0) << r.first.first_failure;
  EXPECT_EQ(r.second.failures, 0) << r.second.first_failure;
}
