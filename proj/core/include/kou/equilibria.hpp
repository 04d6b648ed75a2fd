#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace kou {

struct InvalidParameter : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Quadrature configuration for equilibrium integrals.
struct QuadConfig {
  int nodes = 32;        ///< starting Gauss-Legendre nodes per panel
  double v_max = 0.0;    ///< truncation radius; 0 selects it from the tail bound
  double rel_tol = 1e-12;
};

enum class TailRegime { Sublinear, Linear, Superlinear };

/// The velocity equilibrium exp(-<v>^alpha)/Z_alpha on R^d, <v> = sqrt(1+|v|^2).
/// Immutable after construction; all integrals share the cached truncation radius.
struct Equilibrium {
  double alpha = 2.0;
  int dim = 1;
  double z_alpha = 0.0;  ///< normalization: integral of exp(-<v>^alpha) over R^d
  QuadConfig quad;

  TailRegime regime() const {
    return alpha < 1.0 ? TailRegime::Sublinear : (alpha == 1.0 ? TailRegime::Linear : TailRegime::Superlinear);
  }
};

/// Builds the equilibrium, computing Z_alpha by adaptive quadrature.
/// Throws InvalidParameter for alpha <= 0 or dim < 1, QuadratureFailure on non-convergence.
Equilibrium build_equilibrium(double alpha, int dim, QuadConfig quad = {});

/// <v> = sqrt(1 + |v|^2) for the radial coordinate r = |v|.
inline double v_bracket(double r) { return std::sqrt(1.0 + r * r); }

/// Normalized density at velocity v (given componentwise).
double density(const Equilibrium& eq, std::span<const double> v);

/// Radial convenience overload: density at |v| = r.
double density_radial(const Equilibrium& eq, double r);

/// Moments of gamma_alpha. |v|^m for even m via radial reduction.
double moment_abs(const Equilibrium& eq, int m);

/// Weighted moment: integral of <v>^sigma d gamma_alpha (sigma real, may be negative).
double moment_weighted(const Equilibrium& eq, double sigma);

/// The component moment ||v_1 |v|^2||^2 = integral of v_1^2 |v|^4, via angular average.
double moment_v1_sq_vsq_sq(const Equilibrium& eq);

/// Surface measure of the unit sphere S^{n-1} in R^n.
double sphere_surface(int n);

/// Pointwise change of variables between the phase-space density f and h = f/gamma.
/// Values are taken at the velocity nodes supplied alongside.
void f_to_h(const Equilibrium& eq, std::span<const double> v_nodes, std::span<double> values);
void h_to_f(const Equilibrium& eq, std::span<const double> v_nodes, std::span<double> values);

}  // namespace kou
