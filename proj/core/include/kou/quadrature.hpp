#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

namespace kou {

/// Thrown when successive quadrature refinements fail to agree.
struct QuadratureFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Gauss-Legendre rule on [-1, 1]. Nodes are symmetric, weights positive.
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit GaussLegendre(int n);
};

/// Integrates f over [a, b] with an n-point Gauss-Legendre rule.
double gl_integrate(const std::function<double(double)>& f, double a, double b, const GaussLegendre& rule);

/// Composite rule over the panel edges [e0, e1], [e1, e2], ...
double gl_integrate_panels(const std::function<double(double)>& f, const std::vector<double>& edges,
                           const GaussLegendre& rule);

/// Geometric panel edges for [0, v_max]: unit-scale panels near 0, doubling outward.
/// Suits integrands that vary on an O(1) scale near the origin and decay in the tail.
std::vector<double> geometric_edges(double v_max);

/// Composite integral over [0, v_max] with node doubling until two successive
/// estimates agree to rel_tol (relative to the magnitude of the finer one).
/// Starts at n_start nodes per panel, doubles up to n_cap.
/// Throws QuadratureFailure if agreement is never reached.
double integrate_adaptive(const std::function<double(double)>& f, double v_max, double rel_tol,
                          int n_start = 32, int n_cap = 512);

}  // namespace kou
