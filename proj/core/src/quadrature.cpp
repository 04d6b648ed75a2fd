#include "kou/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace kou {

GaussLegendre::GaussLegendre(int n) {
  if (n < 2) throw std::invalid_argument("GaussLegendre: need at least 2 nodes");
  nodes.resize(n);
  weights.resize(n);
  // Newton iteration on Legendre P_n from the Chebyshev-like initial guess.
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    double w = 2.0 / ((1.0 - x * x) * pp * pp);
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
}

namespace {

const GaussLegendre& cached_rule(int n) {
  static std::map<int, GaussLegendre> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, GaussLegendre(n)).first;
  return it->second;
}

}  // namespace

double gl_integrate(const std::function<double(double)>& f, double a, double b, const GaussLegendre& rule) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double s = 0.0;
  for (size_t i = 0; i < rule.nodes.size(); ++i) s += rule.weights[i] * f(c + h * rule.nodes[i]);
  return s * h;
}

double gl_integrate_panels(const std::function<double(double)>& f, const std::vector<double>& edges,
                           const GaussLegendre& rule) {
  double s = 0.0;
  for (size_t j = 0; j + 1 < edges.size(); ++j) s += gl_integrate(f, edges[j], edges[j + 1], rule);
  return s;
}

std::vector<double> geometric_edges(double v_max) {
  std::vector<double> edges{0.0};
  double e = 1.0;
  while (e < v_max) {
    edges.push_back(std::min(e, v_max));
    e *= 2.0;
  }
  if (edges.back() != v_max) edges.push_back(v_max);
  return edges;
}

double integrate_adaptive(const std::function<double(double)>& f, double v_max, double rel_tol, int n_start,
                          int n_cap) {
  const auto edges = geometric_edges(v_max);
  double prev = gl_integrate_panels(f, edges, cached_rule(n_start));
  for (int n = 2 * n_start; n <= n_cap; n *= 2) {
    double cur = gl_integrate_panels(f, edges, cached_rule(n));
    double scale = std::max(std::abs(cur), std::abs(prev));
    if (scale == 0.0 || std::abs(cur - prev) <= rel_tol * scale) return cur;
    prev = cur;
  }
  throw QuadratureFailure("integrate_adaptive: refinements did not converge");
}

}  // namespace kou
