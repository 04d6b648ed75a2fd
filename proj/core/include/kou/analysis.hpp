#pragma once

#include <string>
#include <vector>

#include "kou/solver.hpp"

namespace kou {

struct DataIntegrityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class NormColumn { L2, GradV, HMinus1, Weighted };

/// One verified inequality: lhs(t) <= rhs(t) sampled over window starts, with the
/// worst relative margin and the tolerance class that was applied.
struct BoundCheck {
  std::string name;
  double t_lo = 0.0, t_hi = 0.0;    // range of window starts examined
  std::vector<double> window_t;     // window start per sample
  std::vector<double> lhs, rhs;
  double tol_rel = 1e-6;            // 1e-6 arithmetic bounds, 1e-2 discretization-mediated
  double margin = 0.0;              // min over samples of (rhs - lhs)/rhs
  bool pass = false;
  std::string anchor;
  std::vector<std::string> flags;
};

std::string checks_to_json(const std::vector<BoundCheck>& checks);
std::string checks_to_text(const std::vector<BoundCheck>& checks);

/// (1/tau) integral over [t, t+tau] of the selected column, trapezoidal on the
/// piecewise-linear interpolant of the samples.
double time_average(const DecayTrace& trace, double t, double tau, NormColumn col = NormColumn::L2);

/// Time-averaged L^2 below x0 e^{-lambda t}, every window start on the sample grid.
/// Horizons shorter than 3/lambda are flagged (bound untested), not failed.
BoundCheck verify_theorem1(const DecayTrace& trace, double lambda, double tau);

/// Pointwise L^2 below e^{lambda tau} x0 e^{-lambda t}; valid for t < tau through
/// the monotonicity of the L^2 norm, which is validated first.
BoundCheck verify_corollary1(const DecayTrace& trace, double lambda, double tau);

/// Windowed L^2 below kappa times the windowed velocity-gradient norm.
BoundCheck verify_gen_poincare(const DecayTrace& trace, double kappa);

/// Residual dual seminorm below the velocity-gradient norm at every sample.
BoundCheck verify_transport_duality(const DecayTrace& trace);

/// Space-time dual norm of the density gradient below d_alpha times the kinetic
/// terms, evaluated spectrally (cosine in t, Fourier in x) on sliding windows.
BoundCheck verify_averaging_lemma(const DecayTrace& trace, const DomainSpec& dom);

struct FitResult {
  double rate = 0.0;  ///< decay rate (log-linear fit) or signed slope (log-log fit)
  double r2 = 0.0;
};

/// Least-squares slope of log(time-averaged L^2) over the tail; returns -slope.
FitResult fit_decay_rate(const DecayTrace& trace, double tail_fraction);

/// Slope of log(time-averaged L^2) against log(1+t) over the tail (algebraic decay
/// exponent; negative for decaying traces).
FitResult fit_loglog_exponent(const DecayTrace& trace, double tail_fraction);

/// Comparison-ODE envelope x' <= -2 phi^{-1}(x), phi(y) = A y^{1/p} + C y:
/// psi(z) = int_z^{x0} dz'/(2 phi^{-1}(z')) strictly decreasing in z, x(t) <= psi^{-1}(t).
struct BihariEnvelope {
  double A = 0.0, C = 0.0, p = 2.0, x0 = 1.0;
  double tol = 1e-12;
  std::vector<double> z_tab, psi_tab;  // z decreasing from x0, psi increasing from 0

  double phi(double y) const;
  double phi_inv(double x) const;  // monotone bisection to tol
  double psi(double z) const;      // quadrature accumulated on the tabulation
  double psi_inv(double t) const;  // monotone bisection against psi()
};

BihariEnvelope make_envelope(double A, double C, double p, double x0, double tol = 1e-12);

/// Both algebraic-decay checks: the psi^{-1} envelope and the explicit
/// K (1+t)^{-sigma/(2(1-alpha))} bound against the recorded weighted initial norm.
std::vector<BoundCheck> verify_theorem2(const DecayTrace& trace, const BihariEnvelope& envelope, double K,
                                        double sigma);

struct SweepRow {
  double alpha = 0.0;
  double p = 0.0;
  double sigma = 0.0;
  double envelope_exponent = 0.0;  // sigma/(2(1-alpha)) = 1/(1-alpha) on the schedule
  double fitted_rate = 0.0;
  double ell = 0.0;                // 2 x0^{p-1} A0^{-p}
  double theorem2_margin = 0.0;
};

struct SweepReport {
  std::vector<SweepRow> rows;
  double reference_alpha = 1.0;
  double reference_rate = 0.0;  // fitted rate of the exponential-regime run
  std::string to_csv() const;
};

struct SweepConfig {
  int grid_size = 192;
  double v_max = 0.0;  // 0: shared truncation from the fattest-tailed alpha
  int xi_max = 2;
  double dt = 0.05;
  double T = 240.0;
  int stride = 10;
  double amplitude = 1.0;
  int basis_size = 64;  // weighted-constant eigensolve baseline
};

/// Runs the shared-datum family across alphas in (0,1) plus the alpha = 1 reference
/// and tabulates rates, envelope exponents, and margins; exponent schedule p = 2 - alpha.
SweepReport alpha_limit_sweep(const std::vector<double>& alphas, const DomainSpec& dom,
                              const SweepConfig& cfg = {});

}  // namespace kou
