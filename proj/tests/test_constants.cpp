// Estimate-chain constants against closed forms.
//
// Reference configuration throughout: alpha = 2, d = 1, L = tau = 2 pi. There
//   C_L = 8 sqrt(2) pi,  d_alpha = 31/4,  P = 1,
//   kappa = 2 (1 + 62 sqrt(2) pi),  lambda_main = 1/(1 + 62 sqrt(2) pi),
//   lambda_alternate = 1/(62 (1 + sqrt 2)).
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "json.hpp"
#include "kou/constants.hpp"
#include "kou/discretization.hpp"
#include "kou/equilibria.hpp"

using namespace kou;

namespace {
const DomainSpec kBench{};  // L = tau = 2 pi, dim 1

Equilibrium gaussian() { return build_equilibrium(2.0, 1); }
}  // namespace

TEST_CASE("trace constant closed forms") {
  CHECK(lions_constant(kBench) == doctest::Approx(8.0 * std::sqrt(2.0) * M_PI).epsilon(1e-13));

  DomainSpec dom;
  dom.L = 1.0;
  dom.tau = 0.5;
  dom.dim = 2;
  CHECK(lions_constant(dom) == doctest::Approx(48.0 * M_PI).epsilon(1e-13));

  DomainSpec bad;
  bad.L = 0.0;
  CHECK_THROWS_AS(lions_constant(bad), InvalidParameter);
}

TEST_CASE("moment aggregate at the reference configuration") {
  Equilibrium eq = gaussian();
  // 2 (15/8 + 2 * 3/4 + 1/2) = 31/4.
  CHECK(d_alpha(eq, kBench) == doctest::Approx(7.75).epsilon(1e-9));
}

TEST_CASE("poincare constant: gaussian closed form and regime guards") {
  Equilibrium eq = gaussian();
  CHECK(poincare_constant(eq, 64) == 1.0);
  CHECK_THROWS_AS(poincare_constant(eq, 4), InvalidParameter);
  Equilibrium sub = build_equilibrium(0.5, 1);
  CHECK_THROWS_AS(poincare_constant(sub, 64), RegimeError);
  CHECK_THROWS_AS(weighted_poincare(eq, 64), RegimeError);
}

TEST_CASE("poincare constant for a superquadratic tail is resolution-stable") {
  Equilibrium eq = build_equilibrium(3.0, 1);
  double p = poincare_constant(eq, 64);
  CHECK(p > 0.0);
  CHECK(p < 5.0);
}

TEST_CASE("weighted poincare constant carries a certificate") {
  Equilibrium eq = build_equilibrium(0.5, 1);
  WeightedPoincare wp = weighted_poincare(eq, 64);
  CHECK(wp.constant > 0.0);
  CHECK(wp.eigenvalue * wp.constant == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(wp.rayleigh_residual <= 1e-8);

  // Witness inequality: every zero-average function obeys
  //   integral <v>^{2(alpha-1)} z^2 dgamma <= P * integral |z'|^2 dgamma.
  Discretization disc =
      build_discretization(eq, Basis::Grid, 256, 1, 0.01, Scheme::EigenExponential, 0.0, 0.08);
  Eigen::MatrixXd s = diffusion_matrix(eq, disc);
  Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(disc.weights.data(), 256);
  const double mass = w.sum();
  std::mt19937_64 rng(7);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd z(256);
    for (int i = 0; i < 256; ++i) z(i) = gauss(rng);
    z.array() -= w.dot(z) / mass;
    double weighted = 0.0;
    for (int i = 0; i < 256; ++i) {
      const double g = std::pow(v_bracket(std::abs(disc.nodes[i])), 2.0 * (eq.alpha - 1.0));
      weighted += w(i) * g * z(i) * z(i);
    }
    const double dirichlet = -z.dot(w.asDiagonal() * (s * z));
    CHECK(dirichlet > 0.0);
    CHECK(weighted <= wp.constant * dirichlet * 1.05);
  }
}

TEST_CASE("estimate chain aggregate and rate forms at the reference configuration") {
  Equilibrium eq = gaussian();
  const double chain = 2.0 * (1.0 + 62.0 * std::sqrt(2.0) * M_PI);
  CHECK(kappa_alpha(eq, kBench, 1.0) == doctest::Approx(chain).epsilon(1e-12));
  CHECK_THROWS_AS(kappa_alpha(eq, kBench, 0.0), InvalidParameter);

  LambdaRates lr = lambda_rates(eq, kBench);
  CHECK(lr.main == doctest::Approx(1.0 / (1.0 + 62.0 * std::sqrt(2.0) * M_PI)).epsilon(1e-12));
  CHECK(lr.alternate == doctest::Approx(1.0 / (62.0 * (1.0 + std::sqrt(2.0)))).epsilon(1e-12));
  CHECK(lr.discrepant);

  Equilibrium sub = build_equilibrium(0.5, 1);
  CHECK_THROWS_AS(lambda_rates(sub, kBench, 1.0), RegimeError);
}

TEST_CASE("twisted-norm rate closed forms") {
  const double s3 = std::sqrt(3.0);
  DmsRate tuned = dms_rate(1.0, 1.0, 0.5 * (1.0 + s3));
  CHECK(tuned.delta == doctest::Approx(0.5 * (2.0 - s3)).epsilon(1e-14));
  CHECK(tuned.lambda == doctest::Approx(1.0 / (12.0 + 6.0 * s3)).epsilon(1e-14));
  CHECK(tuned.C == doctest::Approx((1.0 + tuned.delta) / (1.0 - tuned.delta)).epsilon(1e-14));

  DmsRate untuned = dms_rate(1.0, 1.0, std::sqrt(2.0));
  CHECK(untuned.lambda == doctest::Approx(1.0 / 24.0).epsilon(1e-14));

  CHECK_THROWS_AS(dms_rate(0.0, 1.0, 1.0), InvalidParameter);
  CHECK_THROWS_AS(dms_rate(1.0, 1.0, -2.0), InvalidParameter);
}

TEST_CASE("algebraic-decay constants are internally consistent") {
  Equilibrium eq = build_equilibrium(0.5, 1);
  const double p = 2.0, h0w = 2.0, w = 3.0, x0 = 1.5, pa = 4.0;
  SubexpConstants sc = subexp_constants(eq, kBench, p, h0w, w, x0, pa);
  CHECK(sc.sigma == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(sc.C == doctest::Approx(1.0 + lions_constant(kBench) * d_alpha(eq, kBench)).epsilon(1e-12));
  CHECK(sc.A ==
        doctest::Approx(sc.C * std::sqrt(pa) * std::sqrt(kBench.tau * w) * std::sqrt(h0w)).epsilon(1e-12));
  // y0 inverts phi(y) = A sqrt(y) + C y at x0.
  CHECK(sc.A * std::sqrt(sc.y0) + sc.C * sc.y0 == doctest::Approx(x0).epsilon(1e-9));
  CHECK(sc.A0 == doctest::Approx(sc.A + sc.C * std::sqrt(sc.y0)).epsilon(1e-12));
  CHECK(sc.K >= 1.0);
  CHECK(sc.p_alpha == pa);

  CHECK_THROWS_AS(subexp_constants(eq, kBench, 1.0, h0w, w, x0, pa), InvalidParameter);
  CHECK_THROWS_AS(subexp_constants(eq, kBench, p, h0w, 0.0, x0, pa), InvalidParameter);
  CHECK_THROWS_AS(subexp_constants(gaussian(), kBench, p, h0w, w, x0, pa), RegimeError);
}

TEST_CASE("constants report at the reference configuration") {
  ConstantsReport rep = constants_report(gaussian(), kBench);
  REQUIRE(rep.find("lions") != nullptr);
  REQUIRE(rep.find("d_alpha") != nullptr);
  REQUIRE(rep.find("poincare") != nullptr);
  REQUIRE(rep.find("kappa") != nullptr);
  REQUIRE(rep.find("lambda_main") != nullptr);
  REQUIRE(rep.find("lambda_alternate") != nullptr);
  CHECK(rep.find("poincare")->value == 1.0);
  CHECK(rep.find("lambda_main")->value ==
        doctest::Approx(1.0 / (1.0 + 62.0 * std::sqrt(2.0) * M_PI)).epsilon(1e-12));

  // Reference literals appear only for this configuration.
  REQUIRE(rep.find("rate_reference") != nullptr);
  CHECK(rep.find("rate_reference")->value == doctest::Approx(1.0 / (8.0 * std::sqrt(3.0))).epsilon(1e-14));
  CHECK(rep.find("rate_reference")->provenance == Provenance::External);
  CHECK(rep.find("prefactor_reference")->value ==
        doctest::Approx(std::exp(M_PI / (8.0 * std::sqrt(3.0)))).epsilon(1e-14));
  REQUIRE(rep.find("dms_lambda") != nullptr);
  CHECK(rep.find("dms_lambda")->value == doctest::Approx(1.0 / (12.0 + 6.0 * std::sqrt(3.0))).epsilon(1e-12));
  CHECK(rep.find("mode_gap_reference")->value == 0.4);

  bool rate_flag = false, prefactor_flag = false;
  for (const auto& f : rep.flags) {
    if (f.find("rate forms disagree") != std::string::npos) rate_flag = true;
    if (f.find("two prefactor forms") != std::string::npos) prefactor_flag = true;
  }
  CHECK(rate_flag);
  CHECK(prefactor_flag);

  auto parsed = nlohmann::json::parse(rep.to_json());
  CHECK(parsed.contains("entries"));
  CHECK(parsed["inputs"]["alpha"].get<double>() == 2.0);
  CHECK(rep.to_text().find("lions") != std::string::npos);
}

TEST_CASE("constants report away from the reference configuration") {
  DomainSpec dom;
  dom.L = 4.0 * M_PI;
  dom.tau = 2.0 * M_PI;
  ConstantsReport rep = constants_report(gaussian(), dom);
  CHECK(rep.find("lambda_main") != nullptr);
  CHECK(rep.find("rate_reference") == nullptr);
  CHECK(rep.find("dms_lambda") == nullptr);
}

TEST_CASE("constants report in the algebraic regime") {
  Equilibrium eq = build_equilibrium(0.5, 1);
  ConstantsReport rep = constants_report(eq, kBench);
  REQUIRE(rep.find("weighted_poincare") != nullptr);
  CHECK(rep.find("weighted_poincare")->value > 0.0);
  CHECK(rep.find("weighted_poincare")->provenance == Provenance::Eigenvalue);
  // Default exponent schedule p = 2 - alpha makes sigma = 2 identically.
  CHECK(rep.find("sigma")->value == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(rep.find("decay_prefactor")->value >= 1.0);
  CHECK(rep.find("lambda_main") == nullptr);
  CHECK(rep.find("rate_reference") == nullptr);
}

TEST_CASE("provenance labels") {
  CHECK(to_string(Provenance::ClosedForm) == "closed-form");
  CHECK(to_string(Provenance::Quadrature) == "quadrature");
  CHECK(to_string(Provenance::Eigenvalue) == "eigenvalue");
  CHECK(to_string(Provenance::External) == "external");
}
