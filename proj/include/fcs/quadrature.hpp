#pragma once

#include <functional>
#include <vector>

#include "fcs/model.hpp"

namespace fcs {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;  // difference between the last two refinements
  int panels = 0;
};

// Composite Gauss-Legendre over [a, b] split at breakpoints; panels double until two levels agree.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const std::vector<double>& breakpoints, const QuadratureParams& q);

// Same scheme for complex integrands.
std::complex<double> integrate_complex(const std::function<std::complex<double>(double)>& f, double a, double b,
                                       const std::vector<double>& breakpoints, const QuadratureParams& q);

// PV int G(x)/(x - w) dx over the support of G.
double principal_value(const EffectiveDensity& g, double omega, const QuadratureParams& q);

}  // namespace fcs
