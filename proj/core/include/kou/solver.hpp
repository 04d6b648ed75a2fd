#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "kou/constants.hpp"
#include "kou/discretization.hpp"
#include "kou/equilibria.hpp"

namespace kou {

struct IntegrationFailure : std::runtime_error {
  double t;
  explicit IntegrationFailure(const std::string& msg, double when) : std::runtime_error(msg), t(when) {}
};

/// Spectral state: one velocity-coefficient column per spatial Fourier mode
/// xi = -xi_max..xi_max (column index xi + xi_max). Real fields keep the conjugate
/// symmetry a_{-xi} = conj(a_{xi}) exactly; the propagator preserves it by evolving
/// negative modes through the conjugated positive-mode operator.
struct Field {
  Eigen::MatrixXcd coeff;  // size x (2 xi_max + 1)
  Discretization disc;
  int xi_max = 0;
  double time = 0.0;

  Eigen::MatrixXcd::ColXpr col(int xi) { return coeff.col(xi + xi_max); }
  Eigen::MatrixXcd::ConstColXpr col(int xi) const { return coeff.col(xi + xi_max); }
};

Field field_zero(const Discretization& disc);

/// Initial-datum library. All generators produce real fields (conjugate-symmetric
/// coefficients) with zero total mass, so every run starts inside the decay regime.
Field hermite_mode_datum(const Equilibrium& eq, const Discretization& disc, int xi, int k, double amplitude);
Field spatial_cosine_datum(const Equilibrium& eq, const Discretization& disc, int xi, double amplitude);
Field separable_datum(const Equilibrium& eq, const Discretization& disc, int xi, int k, double amplitude);
Field random_smooth_datum(const Equilibrium& eq, const Discretization& disc, unsigned long long seed,
                          double amplitude);

/// Variance-1/2 orthonormal Hermite polynomial values (profile functions of v usable
/// under any equilibrium; eigenfunctions only at alpha = 2).
Eigen::MatrixXd hermite_poly_values(const std::vector<double>& points, int n);

struct Norms {
  double l2_sq = 0.0;
  double gradv_sq = 0.0;       ///< Dirichlet form of the generator (dissipation functional)
  double weighted_sq = 0.0;    ///< L^2 with polynomial weight <v>^sigma
  double hminus1_sq = 0.0;     ///< dual seminorm of the residual, Dirichlet-form value + squared mean
  double hminus1_l2_sq = 0.0;  ///< variant measuring the potential in L^2 instead
};

/// Precomputes the Gram data needed to evaluate all norms of a field; reusable
/// across every sample of a trajectory.
class NormEvaluator {
 public:
  NormEvaluator(const Equilibrium& eq, const Discretization& disc, double sigma);
  Norms operator()(const Field& f) const;
  double sigma() const { return sigma_; }

 private:
  Basis basis_;
  double sigma_ = 0.0;
  Eigen::VectorXd w_;           // discrete masses (grid) or ones (Hermite)
  Eigen::VectorXd weight_pow_;  // <v_i>^sigma on grid nodes
  Eigen::MatrixXd gram_;        // Hermite weighted Gram matrix
  Eigen::MatrixXd s_;           // diffusion matrix
  Eigen::MatrixXd reg_;         // symmetrized -S plus rank-one kernel regularization
  Eigen::LDLT<Eigen::MatrixXd> solve_;
  double mass_total_ = 1.0;
};

/// Constant-in-v component per Fourier mode, xi = -xi_max..xi_max.
Eigen::VectorXcd spatial_density(const Field& f);

struct Sample {
  double t = 0.0, l2_sq = 0.0, gradv_sq = 0.0, hminus1_sq = 0.0, weighted_sq = 0.0;
};

struct TraceMetadata {
  double alpha = 2.0;
  int dim = 1;
  DomainSpec domain;
  Basis basis = Basis::Hermite;
  int size = 0;
  int xi_max = 0;
  double dt = 0.0;
  Scheme scheme = Scheme::EigenExponential;
  double v_max = 0.0;
  double sigma = 0.0;
  std::string datum;
  unsigned long long seed = 0;
  std::vector<std::string> flags;
};

struct DecayTrace {
  TraceMetadata meta;
  std::vector<Sample> samples;
  /// Spatial density coefficients per sample (xi = -xi_max..xi_max), kept for the
  /// space-time checks that need the density's history on a window.
  std::vector<std::vector<std::complex<double>>> density_history;
};

/// Per-mode time stepping data for xi = 0..xi_max; negative modes reuse the
/// conjugated operators. Eigen-exponential propagators are exact per step; when the
/// eigendecomposition is ill-conditioned the build falls back to implicit midpoint
/// (second order, unconditionally contractive) and flags it.
class ModePropagator {
 public:
  ModePropagator(const Equilibrium& eq, const DomainSpec& dom, const Discretization& disc);
  /// Custom generator set (index = xi, 0..xi_max); used for stripped-down dynamics.
  ModePropagator(std::vector<Eigen::MatrixXcd> generators, const DomainSpec& dom, const Discretization& disc);

  void advance(Field& f) const;
  const Discretization& disc() const { return disc_; }
  const DomainSpec& domain() const { return dom_; }
  Scheme scheme_used() const { return scheme_used_; }
  const std::vector<std::string>& flags() const { return flags_; }
  double dt() const { return disc_.dt; }

 private:
  void build(const std::vector<Eigen::MatrixXcd>& gens);
  Discretization disc_;
  DomainSpec dom_;
  Scheme scheme_used_ = Scheme::EigenExponential;
  std::vector<std::string> flags_;
  std::vector<Eigen::MatrixXcd> exp_;                          // dense step matrices (exponential path)
  std::vector<Eigen::PartialPivLU<Eigen::MatrixXcd>> lu_;      // midpoint solve per mode
  std::vector<Eigen::MatrixXcd> rhs_;                          // midpoint right factor per mode
};

Field step(const ModePropagator& prop, const Field& f);

/// Integrates to time T recording norms every record_stride steps (plus the final
/// step). sigma selects the weighted-norm exponent recorded in the trace.
DecayTrace simulate(const ModePropagator& prop, const Equilibrium& eq, const Field& h0, double T,
                    int record_stride, double sigma = 0.0, const std::string& datum_name = "custom",
                    unsigned long long seed = 0);

}  // namespace kou
