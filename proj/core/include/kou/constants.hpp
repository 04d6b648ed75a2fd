#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kou/equilibria.hpp"

namespace kou {

struct RegimeError : std::domain_error {
  using std::domain_error::domain_error;
};
struct EigenFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Space-time slab parameters: torus side L, averaging window tau, window start t0.
struct DomainSpec {
  double L = 2.0 * M_PI;
  double tau = 2.0 * M_PI;
  int dim = 1;
  double t0 = 0.0;

  bool tau_exceeds_L() const { return !(tau < L); }
};

enum class Provenance { ClosedForm, Quadrature, Eigenvalue, External };

std::string to_string(Provenance p);

struct ConstantEntry {
  std::string name;
  double value = 0.0;
  std::string anchor;  ///< defining formula or source note; never empty
  Provenance provenance = Provenance::ClosedForm;
};

/// Every constant of the estimate chain with its defining anchor and provenance.
struct ConstantsReport {
  double alpha = 0.0;
  int dim = 1;
  DomainSpec domain;
  std::vector<ConstantEntry> entries;
  std::vector<std::string> flags;

  const ConstantEntry* find(const std::string& name) const;
  std::string to_json() const;
  std::string to_text() const;
};

/// C_L = 4 |S^d| sqrt(d L^2 + tau^2)/tau, |S^d| the unit sphere in R^{d+1}.
double lions_constant(const DomainSpec& dom);

/// d_alpha = 2(||v_1|v|^2||^2 + (1 + L^2/4pi^2)|||v|^2||^2 + d^2 L^2/4pi^2 ||v||^2), norms in L^2(gamma).
double d_alpha(const Equilibrium& eq, const DomainSpec& dom);

/// Reciprocal of the smallest positive eigenvalue of the discretized -Delta_alpha
/// (alpha >= 1). Resolution-gated: two resolutions must agree to 1%.
double poincare_constant(const Equilibrium& eq, int basis_size);

/// Weighted variant for alpha in (0,1): smallest generalized eigenvalue of
/// (-Delta_alpha, multiplication by <v>^{2(alpha-1)}) restricted to the zero-average
/// subspace; returns its reciprocal. The decaying weight is the one the estimate
/// chain actually uses. Certificate data (minimizer Rayleigh identity) is exposed.
struct WeightedPoincare {
  double constant = 0.0;      ///< P_alpha
  double eigenvalue = 0.0;    ///< 1/P_alpha
  double rayleigh_residual = 0.0;
};
WeightedPoincare weighted_poincare(const Equilibrium& eq, int basis_size);
double weighted_poincare_constant(const Equilibrium& eq, int basis_size);

/// kappa_alpha = (1 + C_L d_alpha)(P_alpha + 1).
double kappa_alpha(const Equilibrium& eq, const DomainSpec& dom, double p_alpha);

/// The two exponential-rate evaluations for alpha >= 1. They disagree (flagged when
/// more than 1% apart); `main` (= 2/kappa_alpha) is the value verifications use.
struct LambdaRates {
  double main = 0.0;       ///< 2 / kappa_alpha
  double alternate = 0.0;  ///< reciprocal form: 1/l = (1/tau)(tau + sqrt(dL^2+tau^2)) * 2 d_alpha |S^{d-1}| (P+1)
  bool discrepant = false; ///< relative gap above 1%
};
LambdaRates lambda_rates(const Equilibrium& eq, const DomainSpec& dom, double p_alpha);
LambdaRates lambda_rates(const Equilibrium& eq, const DomainSpec& dom);

/// Algebraic-decay constants for alpha in (0,1).
///   sigma = 2(1-alpha)/(p-1),   C = 1 + C_L d_alpha,
///   A  = C P^{1/p} (tau W)^{1-1/p} (weighted h0 norm)^{1-1/p},
///   A0 = A + C y0^{1-1/p} with y0 = phi^{-1}(x0), phi(y) = A y^{1/p} + C y,
///   K  = max{1, (2(p-1))^{1/(1-p)} (C P^{1/p} (tau W)^{1-1/p} + C^{1/p})}.
/// x0 is the plain squared L^2 norm of the initial datum.
struct SubexpConstants {
  double sigma = 0.0;
  double C = 0.0;
  double A = 0.0;
  double A0 = 0.0;
  double K = 0.0;
  double y0 = 0.0;
  double p_alpha = 0.0;  ///< the weighted Poincare constant used
};
SubexpConstants subexp_constants(const Equilibrium& eq, const DomainSpec& dom, double p, double h0_weighted_sq,
                                 double W, double x0, std::optional<double> p_alpha = std::nullopt);

/// Twisted-norm hypocoercivity constants:
///   delta = min{1, lambda_m, lambda_m lambda_M / ((1+lambda_M) C_M^2)}/2,
///   lambda = 2 delta lambda_M / (3 (1+lambda_M)),  C = (1+delta)/(1-delta).
struct DmsRate {
  double delta = 0.0;
  double lambda = 0.0;
  double C = 0.0;
};
DmsRate dms_rate(double lambda_m, double lambda_M, double c_m);

/// Assembles the report for the given configuration (everything derivable from
/// (eq, dom) plus the benchmark literals where applicable).
ConstantsReport constants_report(const Equilibrium& eq, const DomainSpec& dom, int basis_size = 64);

}  // namespace kou
