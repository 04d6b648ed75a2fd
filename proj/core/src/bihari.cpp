#include <algorithm>
#include <cmath>

#include "kou/analysis.hpp"
#include "kou/equilibria.hpp"
#include "kou/quadrature.hpp"

namespace kou {

namespace {

const GaussLegendre& panel_rule() {
  static const GaussLegendre rule(12);
  return rule;
}

// Integral of 1/(2 phi_inv) over [a, b], 0 < a <= b <= x0.
double envelope_segment(const BihariEnvelope& env, double a, double b) {
  if (b <= a) return 0.0;
  return gl_integrate([&env](double z) { return 1.0 / (2.0 * env.phi_inv(z)); }, a, b, panel_rule());
}

}  // namespace

double BihariEnvelope::phi(double y) const { return A * std::pow(y, 1.0 / p) + C * y; }

double BihariEnvelope::phi_inv(double x) const {
  if (x <= 0.0) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  if (A > 0.0) hi += std::pow(x / A, p);
  if (C > 0.0) hi += x / C;
  for (int it = 0; it < 200 && (hi - lo) > tol * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (phi(mid) < x ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double BihariEnvelope::psi(double z) const {
  if (z >= x0) return 0.0;
  if (z < z_tab.back())
    throw InvalidParameter("envelope tabulation does not reach the requested level");
  // z_tab is decreasing; find the first tabulated level at or below z.
  const auto it = std::lower_bound(z_tab.begin(), z_tab.end(), z, std::greater<double>());
  const auto idx = static_cast<std::size_t>(it - z_tab.begin());
  if (idx == 0) return envelope_segment(*this, z, x0);
  return psi_tab[idx - 1] + envelope_segment(*this, z, z_tab[idx - 1]);
}

double BihariEnvelope::psi_inv(double t) const {
  if (t <= 0.0) return x0;
  if (t >= psi_tab.back()) return z_tab.back();
  const auto it = std::upper_bound(psi_tab.begin(), psi_tab.end(), t);
  const auto idx = static_cast<std::size_t>(it - psi_tab.begin());  // psi_tab[idx-1] <= t < psi_tab[idx]
  double hi = z_tab[idx - 1];
  double lo = z_tab[idx];
  for (int iter = 0; iter < 200 && (hi - lo) > tol * hi; ++iter) {
    const double mid = 0.5 * (lo + hi);
    (psi(mid) > t ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

BihariEnvelope make_envelope(double A, double C, double p, double x0, double tol) {
  if (!(A >= 0.0) || !(C >= 0.0) || A + C <= 0.0)
    throw InvalidParameter("envelope needs A >= 0, C >= 0, not both zero");
  if (!(p > 1.0)) throw InvalidParameter("envelope exponent p must exceed 1");
  if (!(x0 > 0.0)) throw InvalidParameter("envelope initial level must be positive");
  if (!(tol > 0.0 && tol <= 1e-6)) throw InvalidParameter("envelope tolerance out of range");

  BihariEnvelope env;
  env.A = A;
  env.C = C;
  env.p = p;
  env.x0 = x0;
  env.tol = tol;

  // Log-spaced levels from x0 down 18 decades; fine enough that the per-panel
  // quadrature resolves 1/(2 phi_inv) to rounding.
  constexpr int kDecades = 18;
  constexpr int kPerDecade = 40;
  const int n = kDecades * kPerDecade;
  env.z_tab.resize(static_cast<std::size_t>(n) + 1);
  env.psi_tab.resize(static_cast<std::size_t>(n) + 1);
  env.z_tab[0] = x0;
  env.psi_tab[0] = 0.0;
  const double step = -std::log(10.0) / kPerDecade;
  for (int i = 1; i <= n; ++i) {
    env.z_tab[static_cast<std::size_t>(i)] = x0 * std::exp(step * i);
    env.psi_tab[static_cast<std::size_t>(i)] =
        env.psi_tab[static_cast<std::size_t>(i) - 1] +
        envelope_segment(env, env.z_tab[static_cast<std::size_t>(i)], env.z_tab[static_cast<std::size_t>(i) - 1]);
  }
  return env;
}

}  // namespace kou
