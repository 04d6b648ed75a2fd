// Spectral state, datum library, norm evaluation, and the mode propagator.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>

#include <Eigen/Dense>

#include "kou/discretization.hpp"
#include "kou/equilibria.hpp"
#include "kou/solver.hpp"

using namespace kou;

namespace {
Equilibrium gaussian() { return build_equilibrium(2.0, 1); }

Discretization hermite(const Equilibrium& eq, int n, int xim, double dt,
                       Scheme scheme = Scheme::EigenExponential) {
  return build_discretization(eq, Basis::Hermite, n, xim, dt, scheme);
}

double mode_mass(const Discretization& disc, const Field& f) {
  if (disc.basis == Basis::Hermite) return std::abs(f.col(0)(0));
  std::complex<double> m = 0.0;
  for (int i = 0; i < disc.size; ++i) m += disc.weights[i] * f.col(0)(i);
  return std::abs(m);
}

double conj_symmetry_defect(const Field& f) {
  double worst = 0.0;
  for (int xi = 1; xi <= f.xi_max; ++xi)
    worst = std::max(worst, (f.col(-xi) - f.col(xi).conjugate()).cwiseAbs().maxCoeff());
  return worst;
}
}  // namespace

TEST_CASE("datum library produces real zero-mass fields") {
  Equilibrium eq = gaussian();
  Discretization hd = hermite(eq, 16, 3, 0.01);
  Discretization gd = build_discretization(eq, Basis::Grid, 64, 3, 0.01);

  for (const Discretization& disc : {hd, gd}) {
    Field a = hermite_mode_datum(eq, disc, 1, 2, 0.7);
    Field b = spatial_cosine_datum(eq, disc, 2, 1.3);
    Field c = separable_datum(eq, disc, 1, 1, 1.0);
    Field d = random_smooth_datum(eq, disc, 42, 1.0);
    for (const Field& f : {a, b, c, d}) {
      CHECK(conj_symmetry_defect(f) == 0.0);
      CHECK(mode_mass(disc, f) <= 1e-12);
      CHECK(f.coeff.cwiseAbs().maxCoeff() > 0.0);
    }
  }

  CHECK_THROWS_AS(hermite_mode_datum(eq, hd, 0, 0, 1.0), InvalidParameter);
  CHECK_THROWS_AS(hermite_mode_datum(eq, hd, 5, 1, 1.0), InvalidParameter);
  CHECK_THROWS_AS(hermite_mode_datum(eq, hd, 1, 99, 1.0), InvalidParameter);
  CHECK_THROWS_AS(spatial_cosine_datum(eq, hd, 0, 1.0), InvalidParameter);
  CHECK_THROWS_AS(separable_datum(eq, gd, 4, 1, 1.0), InvalidParameter);
}

TEST_CASE("random datum is reproducible by seed") {
  Equilibrium eq = gaussian();
  Discretization disc = hermite(eq, 16, 3, 0.01);
  Field a = random_smooth_datum(eq, disc, 123, 1.0);
  Field b = random_smooth_datum(eq, disc, 123, 1.0);
  Field c = random_smooth_datum(eq, disc, 124, 1.0);
  CHECK((a.coeff - b.coeff).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.coeff - c.coeff).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("hermite polynomial profiles satisfy the variance-1/2 recurrence") {
  std::vector<double> pts = {-1.5, 0.0, 0.4, 2.0};
  Eigen::MatrixXd p = hermite_poly_values(pts, 4);
  for (int i = 0; i < 4; ++i) {
    const double v = pts[i];
    CHECK(p(i, 0) == 1.0);
    CHECK(p(i, 1) == doctest::Approx(v * std::sqrt(2.0)).epsilon(1e-14));
    // h_2 = (2 v^2 - 1)/sqrt(2) for variance 1/2.
    CHECK(p(i, 2) == doctest::Approx((2.0 * v * v - 1.0) / std::sqrt(2.0)).epsilon(1e-13));
  }
}

TEST_CASE("single velocity mode decays at its eigenvalue exactly") {
  Equilibrium eq = gaussian();
  Discretization disc = hermite(eq, 12, 1, 0.01);
  ModePropagator prop(eq, DomainSpec{}, disc);
  CHECK(prop.scheme_used() == Scheme::EigenExponential);

  const int k = 3;
  Field f = hermite_mode_datum(eq, disc, 0, k, 1.0);
  NormEvaluator norms(eq, disc, 0.0);
  const double x0 = norms(f).l2_sq;
  for (int j = 1; j <= 1000; ++j) {
    prop.advance(f);
    if (j % 100 == 0) {
      const double expected = x0 * std::exp(-2.0 * k * f.time);
      CHECK(norms(f).l2_sq == doctest::Approx(expected).epsilon(1e-11));
    }
  }
}

TEST_CASE("propagation preserves conjugate symmetry bitwise and conserves mass") {
  Equilibrium eq = gaussian();

  Discretization hd = hermite(eq, 24, 3, 0.01);
  ModePropagator hp(eq, DomainSpec{}, hd);
  Field f = random_smooth_datum(eq, hd, 9, 1.0);
  for (int j = 0; j < 200; ++j) hp.advance(f);
  CHECK(conj_symmetry_defect(f) == 0.0);
  CHECK(mode_mass(hd, f) == 0.0);  // diagonal step fixes the constant mode exactly

  Discretization gd = build_discretization(eq, Basis::Grid, 96, 2, 0.01);
  ModePropagator gp(eq, DomainSpec{}, gd);
  Field g = random_smooth_datum(eq, gd, 9, 1.0);
  const double scale = g.coeff.cwiseAbs().maxCoeff();
  for (int j = 0; j < 200; ++j) gp.advance(g);
  CHECK(conj_symmetry_defect(g) == 0.0);
  CHECK(mode_mass(gd, g) <= 1e-10 * scale);
}

TEST_CASE("norm evaluator ties the dual residual norm to the dissipation functional") {
  // For states of the evolution the residual is the generator image, whose dual
  // norm against the same operator collapses to the Dirichlet form.
  Equilibrium eq = gaussian();
  for (Basis basis : {Basis::Hermite, Basis::Grid}) {
    Discretization disc = basis == Basis::Hermite ? hermite(eq, 24, 2, 0.01)
                                                  : build_discretization(eq, Basis::Grid, 128, 2, 0.01);
    NormEvaluator norms(eq, disc, 0.0);
    Field f = random_smooth_datum(eq, disc, 31, 1.0);
    Norms n = norms(f);
    CHECK(n.l2_sq > 0.0);
    CHECK(n.gradv_sq > 0.0);
    CHECK(n.hminus1_sq == doctest::Approx(n.gradv_sq).epsilon(1e-9));
    CHECK(n.hminus1_l2_sq <= n.gradv_sq * 1.05);
    // sigma = 0 weight is the plain norm.
    CHECK(n.weighted_sq == doctest::Approx(n.l2_sq).epsilon(1e-9));
  }
}

TEST_CASE("pure transport is an isometry") {
  Equilibrium eq = gaussian();
  Discretization disc = hermite(eq, 24, 2, 0.01);
  Eigen::MatrixXd v = vmult_matrix(eq, disc);
  std::vector<Eigen::MatrixXcd> gens;
  for (int xi = 0; xi <= 2; ++xi)
    gens.push_back(std::complex<double>(0.0, -double(xi)) * v.cast<std::complex<double>>());
  ModePropagator prop(std::move(gens), DomainSpec{}, disc);
  CHECK(prop.scheme_used() == Scheme::EigenExponential);

  NormEvaluator norms(eq, disc, 0.0);
  Field f = random_smooth_datum(eq, disc, 5, 1.0);
  const double x0 = norms(f).l2_sq;
  for (int j = 0; j < 100; ++j) prop.advance(f);
  CHECK(norms(f).l2_sq == doctest::Approx(x0).epsilon(1e-11));

  CHECK_THROWS_AS(ModePropagator(std::vector<Eigen::MatrixXcd>(1), DomainSpec{}, disc), InvalidParameter);
}

TEST_CASE("ill-conditioned eigenbasis falls back to implicit midpoint") {
  Equilibrium eq = gaussian();
  Discretization disc = hermite(eq, 2, 1, 0.01);
  Eigen::MatrixXcd benign = Eigen::MatrixXcd::Zero(2, 2);
  benign(1, 1) = -1.0;
  Eigen::MatrixXcd defective = Eigen::MatrixXcd::Zero(2, 2);
  defective(0, 1) = 1.0;
  defective(1, 0) = 1e-30;
  ModePropagator prop({benign, defective}, DomainSpec{}, disc);
  CHECK(prop.scheme_used() == Scheme::ImplicitMidpoint);
  REQUIRE(prop.flags().size() == 1);
  CHECK(prop.flags()[0].find("implicit midpoint") != std::string::npos);
}

TEST_CASE("implicit midpoint converges at second order") {
  Equilibrium eq = gaussian();
  const int k = 2;
  auto final_error = [&](double dt) {
    Discretization disc = hermite(eq, 8, 1, dt, Scheme::ImplicitMidpoint);
    ModePropagator prop(eq, DomainSpec{}, disc);
    Field f = hermite_mode_datum(eq, disc, 0, k, 1.0);
    NormEvaluator norms(eq, disc, 0.0);
    const long n = std::lround(1.0 / dt);
    for (long j = 0; j < n; ++j) prop.advance(f);
    return std::abs(norms(f).l2_sq - std::exp(-2.0 * k * 1.0));
  };
  const double e1 = final_error(0.01);
  const double e2 = final_error(0.005);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.25));
}

TEST_CASE("spatial density extracts the constant-in-v component per mode") {
  Equilibrium eq = gaussian();
  for (Basis basis : {Basis::Hermite, Basis::Grid}) {
    Discretization disc = basis == Basis::Hermite ? hermite(eq, 16, 3, 0.01)
                                                  : build_discretization(eq, Basis::Grid, 64, 3, 0.01);
    Field f = spatial_cosine_datum(eq, disc, 2, 1.0);
    Eigen::VectorXcd rho = spatial_density(f);
    REQUIRE(rho.size() == 7);
    CHECK(std::abs(rho(3 + 2) - 0.5) <= 1e-12);
    CHECK(std::abs(rho(3 - 2) - 0.5) <= 1e-12);
    CHECK(std::abs(rho(3)) <= 1e-14);
    CHECK(std::abs(rho(3 + 1)) <= 1e-14);
  }
}

TEST_CASE("simulate records the full horizon with metadata") {
  Equilibrium eq = gaussian();
  Discretization disc = hermite(eq, 16, 2, 0.01);
  ModePropagator prop(eq, DomainSpec{}, disc);
  Field f = separable_datum(eq, disc, 1, 1, 1.0);
  DecayTrace trace = simulate(prop, eq, f, 1.0, 10, 2.0, "separable:xi=1,k=1", 0);

  REQUIRE(trace.samples.size() == 11);
  CHECK(trace.samples.front().t == 0.0);
  CHECK(trace.samples.back().t == doctest::Approx(1.0).epsilon(1e-12));
  for (size_t i = 1; i < trace.samples.size(); ++i) {
    CHECK(trace.samples[i].t > trace.samples[i - 1].t);
    CHECK(trace.samples[i].l2_sq < trace.samples[i - 1].l2_sq);
  }
  CHECK(trace.density_history.size() == trace.samples.size());
  CHECK(trace.density_history[0].size() == 5);
  CHECK(trace.meta.alpha == 2.0);
  CHECK(trace.meta.basis == Basis::Hermite);
  CHECK(trace.meta.sigma == 2.0);
  CHECK(trace.meta.datum == "separable:xi=1,k=1");
  CHECK(trace.meta.flags.empty());

  CHECK_THROWS_AS(simulate(prop, eq, f, 0.0, 10), InvalidParameter);
  CHECK_THROWS_AS(simulate(prop, eq, f, 1.0, 0), InvalidParameter);
}

TEST_CASE("hermite and grid integrate the same flow") {
  Equilibrium eq = gaussian();
  DomainSpec dom;

  Discretization hd = hermite(eq, 32, 1, 0.01);
  ModePropagator hp(eq, dom, hd);
  DecayTrace ht = simulate(hp, eq, separable_datum(eq, hd, 1, 1, 1.0), 2.0, 50);

  Discretization gd = build_discretization(eq, Basis::Grid, 256, 1, 0.01);
  ModePropagator gp(eq, dom, gd);
  DecayTrace gt = simulate(gp, eq, separable_datum(eq, gd, 1, 1, 1.0), 2.0, 50);

  REQUIRE(ht.samples.size() == gt.samples.size());
  for (size_t i = 0; i < ht.samples.size(); ++i) {
    CHECK(gt.samples[i].l2_sq == doctest::Approx(ht.samples[i].l2_sq).epsilon(0.05));
    CHECK(gt.samples[i].gradv_sq == doctest::Approx(ht.samples[i].gradv_sq).epsilon(0.10));
  }
}
