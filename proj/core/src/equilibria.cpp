#include "kou/equilibria.hpp"

#include <cmath>

#include "kou/quadrature.hpp"

namespace kou {

namespace {

// log of the inverse integrand envelope: <r>^alpha - poly_order*log(1+r).
double envelope_log(double alpha, double poly_order, double r) {
  return std::pow(v_bracket(r), alpha) - poly_order * std::log1p(r);
}

// Truncation radius for integrands r^poly_order * exp(-<r>^alpha): the envelope
// at the cut exceeds its minimum by 50 nats, so the relative tail is < 1e-20.
double auto_vmax(double alpha, double poly_order) {
  double g_min = envelope_log(alpha, poly_order, 0.0);
  double r_min = 0.0;
  for (double r = 1e-3; r < 1e9; r *= 1.25) {
    double g = envelope_log(alpha, poly_order, r);
    if (g < g_min) {
      g_min = g;
      r_min = r;
    }
  }
  double v = std::max(1.0, r_min);
  while (envelope_log(alpha, poly_order, v) < g_min + 50.0) v *= 1.25;
  return v;
}

// integral of f(r) r^{d-1} exp(-<r>^alpha) dr over (0, V), V from the moment order.
double radial_integral(const Equilibrium& eq, double poly_order, const std::function<double(double)>& f) {
  const double v_max = eq.quad.v_max > 0.0 ? eq.quad.v_max : auto_vmax(eq.alpha, poly_order + eq.dim - 1);
  auto g = [&](double r) {
    return f(r) * std::pow(r, eq.dim - 1) * std::exp(-std::pow(v_bracket(r), eq.alpha));
  };
  return integrate_adaptive(g, v_max, eq.quad.rel_tol, eq.quad.nodes);
}

}  // namespace

double sphere_surface(int n) {
  return 2.0 * std::pow(M_PI, 0.5 * n) / std::tgamma(0.5 * n);
}

Equilibrium build_equilibrium(double alpha, int dim, QuadConfig quad) {
  if (alpha <= 0.0) throw InvalidParameter("build_equilibrium: alpha must be positive");
  if (dim < 1) throw InvalidParameter("build_equilibrium: dim must be at least 1");
  Equilibrium eq;
  eq.alpha = alpha;
  eq.dim = dim;
  eq.quad = quad;
  eq.z_alpha = sphere_surface(dim) * radial_integral(eq, 0.0, [](double) { return 1.0; });
  return eq;
}

double density_radial(const Equilibrium& eq, double r) {
  return std::exp(-std::pow(v_bracket(r), eq.alpha)) / eq.z_alpha;
}

double density(const Equilibrium& eq, std::span<const double> v) {
  double r_sq = 0.0;
  for (double c : v) r_sq += c * c;
  return density_radial(eq, std::sqrt(r_sq));
}

double moment_abs(const Equilibrium& eq, int m) {
  if (m < 0) throw InvalidParameter("moment_abs: negative order");
  double raw = sphere_surface(eq.dim) * radial_integral(eq, m, [m](double r) { return std::pow(r, m); });
  return raw / eq.z_alpha;
}

double moment_weighted(const Equilibrium& eq, double sigma) {
  double poly = std::max(0.0, sigma);
  double raw = sphere_surface(eq.dim) *
               radial_integral(eq, poly, [&](double r) { return std::pow(v_bracket(r), sigma); });
  return raw / eq.z_alpha;
}

double moment_v1_sq_vsq_sq(const Equilibrium& eq) {
  // v_1^2 |v|^4 averages over the sphere to |v|^6 / d.
  return moment_abs(eq, 6) / eq.dim;
}

void f_to_h(const Equilibrium& eq, std::span<const double> v_nodes, std::span<double> values) {
  for (size_t i = 0; i < values.size(); ++i) values[i] /= density_radial(eq, std::abs(v_nodes[i]));
}

void h_to_f(const Equilibrium& eq, std::span<const double> v_nodes, std::span<double> values) {
  for (size_t i = 0; i < values.size(); ++i) values[i] *= density_radial(eq, std::abs(v_nodes[i]));
}

}  // namespace kou
