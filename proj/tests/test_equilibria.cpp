// Quadrature and equilibrium-measure oracles.
//
// The frozen values below are closed forms for the alpha = 2 measure
// exp(-(1+v^2))/Z, a Gaussian with variance 1/2 per component:
//   E[v^2] = 1/2,  E[v^4] = 3/4,  E[v^6] = 15/8,  Z = sqrt(pi) e^{-1} (d = 1).
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <vector>

#include "kou/equilibria.hpp"
#include "kou/quadrature.hpp"

using namespace kou;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("gauss-legendre rule integrates polynomials exactly") {
  GaussLegendre rule(8);
  REQUIRE(rule.nodes.size() == 8);
  REQUIRE(rule.weights.size() == 8);
  double wsum = 0.0;
  for (size_t i = 0; i < rule.nodes.size(); ++i) {
    CHECK(rule.weights[i] > 0.0);
    CHECK(rule.nodes[i] == doctest::Approx(-rule.nodes[rule.nodes.size() - 1 - i]).epsilon(1e-14));
    wsum += rule.weights[i];
  }
  CHECK(wsum == doctest::Approx(2.0).epsilon(1e-14));

  // 8 nodes are exact through degree 15.
  auto f = [](double x) { return x * x * x * x * x; };
  CHECK(gl_integrate(f, 0.0, 1.0, rule) == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
  auto g = [](double x) { return 3.0 * x * x - 1.0; };
  CHECK(gl_integrate(g, -1.0, 1.0, rule) == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
}

TEST_CASE("geometric panels cover [0, v_max] monotonically") {
  auto edges = geometric_edges(100.0);
  REQUIRE(edges.size() >= 3);
  CHECK(edges.front() == 0.0);
  CHECK(edges.back() == doctest::Approx(100.0).epsilon(1e-14));
  for (size_t i = 1; i < edges.size(); ++i) CHECK(edges[i] > edges[i - 1]);

  GaussLegendre rule(16);
  auto f = [](double x) { return std::exp(-x); };
  CHECK(gl_integrate_panels(f, edges, rule) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("adaptive integration reaches the requested tolerance") {
  auto f = [](double x) { return std::exp(-x); };
  CHECK(integrate_adaptive(f, 40.0, 1e-12) == doctest::Approx(1.0 - std::exp(-40.0)).epsilon(1e-12));
  // A genuinely rough integrand must trip the refinement cap, not silently converge.
  auto noisy = [](double x) { return std::cos(1.0 / (x + 1e-9)); };
  CHECK_THROWS_AS(integrate_adaptive(noisy, 1.0, 1e-14, 4, 8), QuadratureFailure);
}

TEST_CASE("gaussian equilibrium normalization and moments") {
  Equilibrium eq = build_equilibrium(2.0, 1);
  CHECK(eq.z_alpha == doctest::Approx(std::sqrt(kPi) * std::exp(-1.0)).epsilon(1e-12));
  CHECK(moment_abs(eq, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(moment_abs(eq, 2) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(moment_abs(eq, 4) == doctest::Approx(0.75).epsilon(1e-10));
  CHECK(moment_abs(eq, 6) == doctest::Approx(15.0 / 8.0).epsilon(1e-10));
  CHECK(moment_v1_sq_vsq_sq(eq) == doctest::Approx(15.0 / 8.0).epsilon(1e-10));
  // E[(1+v^2)] = 1 + 1/2.
  CHECK(moment_weighted(eq, 2.0) == doctest::Approx(1.5).epsilon(1e-10));
  CHECK(moment_weighted(eq, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(eq.regime() == TailRegime::Superlinear);
}

TEST_CASE("gaussian equilibrium in two dimensions") {
  Equilibrium eq = build_equilibrium(2.0, 2);
  CHECK(eq.z_alpha == doctest::Approx(kPi * std::exp(-1.0)).epsilon(1e-12));
  CHECK(moment_abs(eq, 0) == doctest::Approx(1.0).epsilon(1e-12));
  // E|v|^2 = d/2; E v_1^2 |v|^4 = E v1^6 + 2 E v1^4 v2^2 + E v1^2 v2^4 = 15/8 + 3/4 + 3/8 = 3.
  CHECK(moment_abs(eq, 2) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(moment_v1_sq_vsq_sq(eq) == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("subexponential equilibrium is normalized with finite moments") {
  Equilibrium eq = build_equilibrium(0.5, 1);
  CHECK(eq.regime() == TailRegime::Sublinear);
  CHECK(moment_abs(eq, 0) == doctest::Approx(1.0).epsilon(1e-10));
  double m2 = moment_abs(eq, 2);
  double m4 = moment_abs(eq, 4);
  CHECK(m2 > 0.0);
  CHECK(m4 > m2 * m2);  // Jensen
  // Decaying weights average below 1, growing ones above.
  CHECK(moment_weighted(eq, -1.0) < 1.0);
  CHECK(moment_weighted(eq, 1.0) > 1.0);
  CHECK(build_equilibrium(1.0, 1).regime() == TailRegime::Linear);
}

TEST_CASE("invalid equilibrium parameters are rejected") {
  CHECK_THROWS_AS(build_equilibrium(0.0, 1), InvalidParameter);
  CHECK_THROWS_AS(build_equilibrium(-1.0, 1), InvalidParameter);
  CHECK_THROWS_AS(build_equilibrium(2.0, 0), InvalidParameter);
}

TEST_CASE("density accessors agree and normalize") {
  Equilibrium eq = build_equilibrium(1.5, 1);
  double v = 0.7;
  CHECK(density(eq, std::span<const double>(&v, 1)) == doctest::Approx(density_radial(eq, 0.7)).epsilon(1e-14));
  CHECK(density_radial(eq, 0.0) == doctest::Approx(std::exp(-1.0) / eq.z_alpha).epsilon(1e-14));
  // Radial density integrates to 1 over the line.
  double total = integrate_adaptive([&](double r) { return 2.0 * density_radial(eq, r); }, 200.0, 1e-10);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("sphere surface measures") {
  CHECK(sphere_surface(1) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(sphere_surface(2) == doctest::Approx(2.0 * kPi).epsilon(1e-14));
  CHECK(sphere_surface(3) == doctest::Approx(4.0 * kPi).epsilon(1e-14));
}

TEST_CASE("f/h change of variables round-trips") {
  Equilibrium eq = build_equilibrium(2.0, 1);
  std::vector<double> nodes = {-2.0, -0.3, 0.0, 1.1, 4.0};
  std::vector<double> vals = {1.0, -0.5, 2.0, 0.25, 1e-3};
  std::vector<double> orig = vals;
  f_to_h(eq, nodes, vals);
  // h = f / gamma at each node.
  for (size_t i = 0; i < vals.size(); ++i) {
    CHECK(vals[i] == doctest::Approx(orig[i] / density_radial(eq, std::abs(nodes[i]))).epsilon(1e-12));
  }
  h_to_f(eq, nodes, vals);
  for (size_t i = 0; i < vals.size(); ++i) CHECK(vals[i] == doctest::Approx(orig[i]).epsilon(1e-12));
}
