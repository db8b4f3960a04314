#include "fcs/quadrature.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <sstream>

#include "fcs/errors.hpp"

namespace fcs {

namespace {

using Rule = boost::math::quadrature::gauss<double, 20>;

template <class T, class F>
T panel(const F& f, double a, double b) {
  const auto& x = Rule::abscissa();
  const auto& w = Rule::weights();
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  T sum{};
  for (std::size_t i = 0; i < x.size(); ++i) {
    // 20 is even, so every abscissa is nonzero and appears as a +/- pair.
    sum += w[i] * (f(c + h * x[i]) + f(c - h * x[i]));
  }
  return h * sum;
}

std::vector<double> segments(double a, double b, const std::vector<double>& breakpoints) {
  std::vector<double> s{a};
  for (double x : breakpoints)
    if (x > a && x < b) s.push_back(x);
  s.push_back(b);
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

template <class T, class F>
T uniform(const F& f, double a, double b, int panels) {
  const double h = (b - a) / panels;
  T sum{};
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    sum += panel<T>(f, lo, (p + 1 == panels) ? b : lo + h);
  }
  return sum;
}

// Each segment doubles its own panel count until two levels agree; converged segments stop costing evaluations.
// Segment i must satisfy |diff_i| <= max(abs_tol / n, rel_tol * max(|S_i|, |S| / n)), which sums to the global target.
template <class T, class F>
std::pair<T, double> refine(const F& f, double a, double b, const std::vector<double>& breakpoints,
                            const QuadratureParams& q, int& panels_out) {
  if (!(b > a)) return {T{}, 0.0};
  const auto seg = segments(a, b, breakpoints);
  const std::size_t n = seg.size() - 1;
  const int base = std::max(1, q.base_panels);
  std::vector<T> prev(n), cur(n);
  std::vector<int> per(n, base);
  std::vector<char> done(n, 0);
  for (std::size_t i = 0; i < n; ++i) prev[i] = uniform<T>(f, seg[i], seg[i + 1], base);
  double err = 0.0;
  for (int level = 1; level <= q.max_level; ++level) {
    T total{};
    for (std::size_t i = 0; i < n; ++i) {
      if (!done[i]) {
        per[i] *= 2;
        cur[i] = uniform<T>(f, seg[i], seg[i + 1], per[i]);
      }
      total += cur[i];
    }
    const double share = std::abs(total) / static_cast<double>(n);
    bool all = true;
    err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double diff = std::abs(cur[i] - prev[i]);
      if (!done[i]) {
        const double tol = std::max(q.abs_tol / static_cast<double>(n), q.rel_tol * std::max(std::abs(cur[i]), share));
        if (diff <= tol) done[i] = 1;
        else all = false;
      }
      err += diff;
      prev[i] = cur[i];
    }
    if (all) {
      panels_out = 0;
      for (int p : per) panels_out += p;
      return {total, err};
    }
  }
  std::ostringstream os;
  os.precision(6);
  os << "quadrature on [" << a << ", " << b << "] did not converge after " << q.max_level << " refinements";
  fail(ErrorCode::QuadratureNotConverged, os.str());
}

}  // namespace

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const std::vector<double>& breakpoints, const QuadratureParams& q) {
  QuadratureResult r;
  const auto [v, e] = refine<double>(f, a, b, breakpoints, q, r.panels);
  r.value = v;
  r.error = e;
  return r;
}

std::complex<double> integrate_complex(const std::function<std::complex<double>(double)>& f, double a, double b,
                                       const std::vector<double>& breakpoints, const QuadratureParams& q) {
  int panels = 0;
  return refine<std::complex<double>>(f, a, b, breakpoints, q, panels).first;
}

double principal_value(const EffectiveDensity& g, double omega, const QuadratureParams& q) {
  const double lo = g.lower();
  const double up = g.upper();
  const auto tail = [&](double x) { return g(x) / (x - omega); };
  if (!(omega > lo && omega < up)) return integrate(tail, lo, up, g.breakpoints(), q).value;

  // Symmetric window around the pole: PV int_{w-L}^{w+L} G/(x-w) = int_0^L (G(w+u) - G(w-u))/u du.
  // The window stays clear of w = 0, where G can be singular; the tails integrate across it on exact breakpoints.
  double half = std::min(omega - lo, up - omega);
  if (omega != 0.0) half = std::min(half, 0.5 * std::abs(omega));
  std::vector<double> ubreaks;
  for (double x : g.breakpoints()) {
    const double u = std::abs(x - omega);
    if (u > 0.0 && u < half) ubreaks.push_back(u);
  }
  const auto odd = [&](double u) { return (omega == 0.0 ? g.odd(u) : g(omega + u) - g(omega - u)) / u; };
  double value = integrate(odd, 0.0, half, ubreaks, q).value;

  // Geometric breakpoints keep the 1/(x-w) growth near the window resolved.
  std::vector<double> tb = g.breakpoints();
  for (double r = 2.0 * half; r < up - lo; r *= 2.0) {
    tb.push_back(omega + r);
    tb.push_back(omega - r);
  }
  value += integrate(tail, lo, omega - half, tb, q).value;
  value += integrate(tail, omega + half, up, tb, q).value;
  return value;
}

}  // namespace fcs
