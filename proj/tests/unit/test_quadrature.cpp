#include <gsl/gsl_integration.h>
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fcs/errors.hpp"
#include "fcs/quadrature.hpp"

using namespace fcs;

namespace {

struct GslFn {
  std::function<double(double)> f;
  static double call(double x, void* p) { return static_cast<GslFn*>(p)->f(x); }
};

// PV int_a^b g(x) / (x - w) dx with QAWC, plus int_b^inf g(x) / (x - w) dx with QAGIU.
double gsl_pv(const std::function<double(double)>& g, double a, double b, double w, bool tail) {
  gsl_integration_workspace* ws = gsl_integration_workspace_alloc(2000);
  GslFn fn{g};
  gsl_function f{&GslFn::call, &fn};
  double r = 0.0, err = 0.0;
  gsl_integration_qawc(&f, a, b, w, 1e-13, 1e-12, 2000, ws, &r, &err);
  if (tail) {
    GslFn tfn{[&](double x) { return g(x) / (x - w); }};
    gsl_function tf{&GslFn::call, &tfn};
    double t = 0.0;
    gsl_integration_qagiu(&tf, b, 1e-14, 1e-12, 2000, ws, &t, &err);
    r += t;
  }
  gsl_integration_workspace_free(ws);
  return r;
}

}  // namespace

TEST(Integrate, PolynomialAndKink) {
  const QuadratureParams q;
  EXPECT_NEAR(integrate([](double x) { return x * x; }, 0.0, 3.0, {}, q).value, 9.0, 1e-13);
  EXPECT_NEAR(integrate([](double x) { return std::abs(x - 0.3); }, -1.0, 1.0, {0.3}, q).value, 0.5 * (1.3 * 1.3 + 0.7 * 0.7),
              1e-13);
  const auto c = integrate_complex([](double x) { return std::exp(cplx(0.0, x)); }, 0.0, std::numbers::pi, {}, q);
  EXPECT_NEAR(c.real(), 0.0, 1e-13);
  EXPECT_NEAR(c.imag(), 2.0, 1e-13);
}

TEST(Integrate, UnresolvableIntegrandRaises) {
  QuadratureParams q;
  q.max_level = 2;
  try {
    integrate([](double x) { return std::sin(1e4 * x); }, 0.0, 1.0, {}, q);
    ADD_FAILURE() << "expected QuadratureNotConverged";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::QuadratureNotConverged);
  }
}

TEST(PrincipalValue, ConstantOnSymmetricWindowVanishes) {
  const double w = 0.7, lam = 2.0;
  const auto g = EffectiveDensity::custom([=](double x) { return std::abs(x - w) <= lam ? 3.0 : 0.0; }, w - lam, w + lam,
                                          {w - lam, w + lam});
  EXPECT_NEAR(principal_value(g, w, {}), 0.0, 1e-12);
}

TEST(PrincipalValue, EvenDensityAtCentreVanishes) {
  const auto g = EffectiveDensity::custom([](double x) { return std::exp(-x * x); }, -12.0, 12.0);
  EXPECT_NEAR(principal_value(g, 0.0, {}), 0.0, 1e-13);
}

TEST(PrincipalValue, MatchesGslOnOneSidedDensity) {
  const auto fn = [](double x) { return x > 0.0 ? x * std::exp(-x) : 0.0; };
  const auto g = EffectiveDensity::custom(fn, 0.0, 60.0, {0.0});
  const double ref = gsl_pv(fn, 0.0, 60.0, 1.0, true);
  EXPECT_NEAR(principal_value(g, 1.0, {}), ref, 1e-8);
}

TEST(PrincipalValue, MatchesGslOnThermalOhmic) {
  const ReservoirSpec r{"x", 1.3, CMat(), SpectralDensity{OhmicDensity{0.5, 1.0, 5.0}}, 0.0};
  const EffectiveDensity g = effective_density(r);
  for (double w : {-1.0, -0.3, 0.0, 0.8, 2.0}) {
    const double ref = gsl_pv([&](double x) { return g(x); }, g.lower(), g.upper(), w, false);
    EXPECT_NEAR(principal_value(g, w, {}), ref, 1e-8) << w;
  }
}

TEST(PrincipalValue, MatchesGslAcrossFlatEdges) {
  const ReservoirSpec r{"x", 0.8, CMat(), SpectralDensity{FlatDensity{1.0, 0.2, 3.0}}, 0.0};
  const EffectiveDensity g = effective_density(r);
  for (double w : {-1.0, 1.0, 2.5}) {
    const double ref = gsl_pv([&](double x) { return g(x); }, -3.0, 3.0, w, false);
    EXPECT_NEAR(principal_value(g, w, {}), ref, 1e-8) << w;
  }
}
