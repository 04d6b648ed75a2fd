#pragma once

#include <Eigen/Dense>
#include <complex>

#include "kou/constants.hpp"
#include "kou/equilibria.hpp"

namespace kou {

enum class Basis { Hermite, Grid };
enum class Scheme { EigenExponential, ImplicitMidpoint };

std::string to_string(Basis b);
std::string to_string(Scheme s);
Basis basis_from_string(const std::string& name);
Scheme scheme_from_string(const std::string& name);

/// Velocity-basis and mode-range description. Hermite is valid only at alpha = 2
/// (where the diffusion operator is diagonal); the weighted grid covers every alpha > 0.
struct Discretization {
  Basis basis = Basis::Hermite;
  int size = 64;           ///< Hermite truncation N or grid point count M
  int xi_max = 8;          ///< Fourier modes xi in {-xi_max..xi_max}
  double dt = 0.01;
  Scheme scheme = Scheme::EigenExponential;

  // Grid data (cell-centered, graded toward the origin). Empty for Hermite.
  double v_max = 0.0;
  double grading = 0.0;            ///< sinh grading strength c (0 = uniform)
  std::vector<double> nodes;       ///< cell centers v_i
  std::vector<double> edges;       ///< cell edges, size+1 entries
  std::vector<double> weights;     ///< w_i = gamma(v_i) * cell width (L^2_gamma quadrature)
};

/// Truncation radius for the grid: equilibrium tail mass beyond it is below ~1e-13.
double grid_auto_vmax(const Equilibrium& eq);

/// Builds the discretization. For the grid, v_max = 0 selects grid_auto_vmax and the
/// sinh grading is solved so the center cell width is about center_dx.
Discretization build_discretization(const Equilibrium& eq, Basis basis, int size, int xi_max, double dt,
                                    Scheme scheme = Scheme::EigenExponential, double v_max = 0.0,
                                    double center_dx = 0.08);

/// The diffusion part: Hermite path is diag(0,-1,...,-(N-1)); grid path is the
/// divergence-form second-order stencil with zero-flux ends, exactly self-adjoint
/// w.r.t. `weights`. At alpha = 2 the grid operator carries the same unit-gap
/// normalization as the Hermite diagonal so the two bases integrate the same flow.
Eigen::MatrixXd diffusion_matrix(const Equilibrium& eq, const Discretization& disc);

/// Velocity multiplication: symmetric tridiagonal ladder (Hermite, variance 1/2)
/// or diag(v_i) (grid).
Eigen::MatrixXd vmult_matrix(const Equilibrium& eq, const Discretization& disc);

/// One Fourier mode of the generator: matrix = diffusion - i*(2 pi xi / L)*vmult,
/// with the discrete inner product weights realizing L^2_gamma.
struct ModeOperator {
  int xi = 0;
  double kappa = 0.0;  ///< 2 pi xi / L
  Eigen::MatrixXcd matrix;
  Eigen::VectorXd weights;
  Basis basis = Basis::Hermite;
};
ModeOperator assemble_mode_operator(const Equilibrium& eq, const DomainSpec& dom, const Discretization& disc,
                                    int xi);

/// Gram matrix of <v>^sigma between basis elements: Hermite path integrates
/// <v>^sigma h_j h_k dgamma by panel quadrature; grid path is diag(w_i <v_i>^sigma).
Eigen::MatrixXd weighted_gram(const Equilibrium& eq, const Discretization& disc, double sigma);

/// Orthonormal-Hermite values scaled by sqrt(gamma): psi_k(v) = h_k(v) sqrt(gamma(v)),
/// columns k = 0..n-1, rows the evaluation points. Overflow-safe recurrence.
Eigen::MatrixXd hermite_sqrtgamma_values(const Equilibrium& eq, const std::vector<double>& points, int n);

}  // namespace kou
