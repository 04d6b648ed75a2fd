#include "kou/discretization.hpp"

#include <cmath>

#include "kou/quadrature.hpp"

namespace kou {

namespace {

double envelope_log(const Equilibrium& eq, double r) {
  return std::pow(v_bracket(r), eq.alpha) - (eq.dim - 1) * std::log1p(r);
}

}  // namespace

std::string to_string(Basis b) { return b == Basis::Hermite ? "hermite" : "grid"; }
std::string to_string(Scheme s) { return s == Scheme::EigenExponential ? "eigen-exponential" : "implicit-midpoint"; }

Basis basis_from_string(const std::string& name) {
  if (name == "hermite") return Basis::Hermite;
  if (name == "grid") return Basis::Grid;
  throw InvalidParameter("unknown basis '" + name + "' (expected hermite or grid)");
}

Scheme scheme_from_string(const std::string& name) {
  if (name == "eigen-exponential") return Scheme::EigenExponential;
  if (name == "implicit-midpoint") return Scheme::ImplicitMidpoint;
  throw InvalidParameter("unknown scheme '" + name + "' (expected eigen-exponential or implicit-midpoint)");
}

double grid_auto_vmax(const Equilibrium& eq) {
  double g_min = envelope_log(eq, 0.0);
  for (double r = 1e-3; r < 1e9; r *= 1.25) g_min = std::min(g_min, envelope_log(eq, r));
  double v = 1.0;
  while (envelope_log(eq, v) < g_min + 32.0) v *= 1.25;
  return v;
}

Discretization build_discretization(const Equilibrium& eq, Basis basis, int size, int xi_max, double dt,
                                    Scheme scheme, double v_max, double center_dx) {
  if (xi_max < 1) throw InvalidParameter("build_discretization: xi_max must be at least 1");
  if (dt <= 0.0) throw InvalidParameter("build_discretization: dt must be positive");
  Discretization disc;
  disc.basis = basis;
  disc.size = size;
  disc.xi_max = xi_max;
  disc.dt = dt;
  disc.scheme = scheme;

  if (basis == Basis::Hermite) {
    if (eq.alpha != 2.0) throw InvalidParameter("Hermite basis requires alpha = 2");
    if (size < 2) throw InvalidParameter("Hermite basis requires at least 2 modes");
    return disc;
  }

  if (size < 16) throw InvalidParameter("grid basis requires at least 16 points");
  const int m = size;
  disc.v_max = v_max > 0.0 ? v_max : grid_auto_vmax(eq);

  // sinh grading: cell edges V sinh(c u)/sinh(c) on uniform u in [-1, 1]. The grading
  // strength is solved so the center cell width comes out near center_dx.
  const double du = 2.0 / m;
  double c = 0.0;
  auto center_width = [&](double cc) { return 2.0 * disc.v_max * std::sinh(cc * du / 2.0) / std::sinh(cc); };
  if (disc.v_max * du > center_dx) {
    double lo = 1e-8, hi = 60.0;
    for (int it = 0; it < 200; ++it) {
      c = 0.5 * (lo + hi);
      (center_width(c) > center_dx ? lo : hi) = c;
    }
  }
  disc.grading = c;

  auto map_u = [&](double u) {
    return c == 0.0 ? disc.v_max * u : disc.v_max * std::sinh(c * u) / std::sinh(c);
  };
  disc.edges.resize(m + 1);
  disc.nodes.resize(m);
  disc.weights.resize(m);
  for (int j = 0; j <= m; ++j) disc.edges[j] = map_u(-1.0 + j * du);
  for (int i = 0; i < m; ++i) {
    disc.nodes[i] = map_u(-1.0 + (i + 0.5) * du);
    disc.weights[i] = density_radial(eq, std::abs(disc.nodes[i])) * (disc.edges[i + 1] - disc.edges[i]);
    if (!std::isfinite(disc.weights[i]) || disc.weights[i] <= 0.0)
      throw InvalidParameter("build_discretization: non-finite grid weights");
  }
  return disc;
}

Eigen::MatrixXd diffusion_matrix(const Equilibrium& eq, const Discretization& disc) {
  const int n = disc.size;
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
  if (disc.basis == Basis::Hermite) {
    for (int k = 0; k < n; ++k) s(k, k) = -static_cast<double>(k);
    return s;
  }
  // Divergence form gamma^{-1} d/dv (gamma d/dv) with zero-flux ends. The edge
  // coefficient t = gamma(edge)/delta is shared by the two adjacent rows, which makes
  // self-adjointness w.r.t. the cell weights exact in floating point.
  const double scale = eq.alpha == 2.0 ? 0.5 : 1.0;  // unit-gap normalization at the quadratic exponent
  for (int i = 0; i + 1 < n; ++i) {
    const double delta = disc.nodes[i + 1] - disc.nodes[i];
    const double t = density_radial(eq, std::abs(disc.edges[i + 1])) / delta;
    const double up = scale * t / disc.weights[i];
    const double dn = scale * t / disc.weights[i + 1];
    s(i, i + 1) += up;
    s(i, i) -= up;
    s(i + 1, i) += dn;
    s(i + 1, i + 1) -= dn;
  }
  return s;
}

Eigen::MatrixXd vmult_matrix(const Equilibrium& eq, const Discretization& disc) {
  const int n = disc.size;
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
  if (disc.basis == Basis::Hermite) {
    for (int k = 0; k + 1 < n; ++k) {
      const double c = std::sqrt(0.5 * (k + 1));  // variance-1/2 ladder
      b(k, k + 1) = c;
      b(k + 1, k) = c;
    }
    return b;
  }
  (void)eq;
  for (int i = 0; i < n; ++i) b(i, i) = disc.nodes[i];
  return b;
}

ModeOperator assemble_mode_operator(const Equilibrium& eq, const DomainSpec& dom, const Discretization& disc,
                                    int xi) {
  ModeOperator op;
  op.xi = xi;
  op.kappa = 2.0 * M_PI * xi / dom.L;
  op.basis = disc.basis;
  const Eigen::MatrixXd s = diffusion_matrix(eq, disc);
  const Eigen::MatrixXd b = vmult_matrix(eq, disc);
  op.matrix = s.cast<std::complex<double>>() - std::complex<double>(0.0, op.kappa) * b.cast<std::complex<double>>();
  if (disc.basis == Basis::Hermite)
    op.weights = Eigen::VectorXd::Ones(disc.size);
  else
    op.weights = Eigen::Map<const Eigen::VectorXd>(disc.weights.data(), disc.size);
  if (!op.matrix.allFinite()) throw InvalidParameter("assemble_mode_operator: non-finite entries");
  return op;
}

Eigen::MatrixXd hermite_sqrtgamma_values(const Equilibrium& eq, const std::vector<double>& points, int n) {
  if (eq.alpha != 2.0) throw InvalidParameter("hermite_sqrtgamma_values: alpha must be 2");
  const int np = static_cast<int>(points.size());
  Eigen::MatrixXd psi(np, n);
  const double inv_sqrt_z = 1.0 / std::sqrt(eq.z_alpha);
  for (int i = 0; i < np; ++i) {
    const double v = points[i];
    psi(i, 0) = std::exp(-0.5 * (1.0 + v * v)) * inv_sqrt_z;
    if (n > 1) psi(i, 1) = v * psi(i, 0) / std::sqrt(0.5);
    for (int k = 1; k + 1 < n; ++k)
      psi(i, k + 1) = (v * psi(i, k) - std::sqrt(0.5 * k) * psi(i, k - 1)) / std::sqrt(0.5 * (k + 1));
  }
  return psi;
}

Eigen::MatrixXd weighted_gram(const Equilibrium& eq, const Discretization& disc, double sigma) {
  const int n = disc.size;
  if (disc.basis == Basis::Grid) {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) g(i, i) = disc.weights[i] * std::pow(v_bracket(std::abs(disc.nodes[i])), sigma);
    return g;
  }
  // Hermite path: composite Gauss-Legendre over symmetric geometric panels wide
  // enough for the highest oscillator state plus the polynomial weight.
  const double v_q = std::sqrt(2.0 * n) * 0.75 + 10.0;
  auto edges_half = geometric_edges(v_q);
  std::vector<double> edges;
  for (auto it = edges_half.rbegin(); it != edges_half.rend(); ++it) edges.push_back(-*it);
  for (size_t j = 1; j < edges_half.size(); ++j) edges.push_back(edges_half[j]);

  auto assemble = [&](int npp) {
    GaussLegendre rule(npp);
    std::vector<double> pts, wts;
    for (size_t j = 0; j + 1 < edges.size(); ++j) {
      const double c = 0.5 * (edges[j] + edges[j + 1]), h = 0.5 * (edges[j + 1] - edges[j]);
      for (size_t q = 0; q < rule.nodes.size(); ++q) {
        pts.push_back(c + h * rule.nodes[q]);
        wts.push_back(h * rule.weights[q]);
      }
    }
    const Eigen::MatrixXd psi = hermite_sqrtgamma_values(eq, pts, n);
    Eigen::VectorXd w(pts.size());
    for (size_t q = 0; q < pts.size(); ++q)
      w(q) = wts[q] * std::pow(v_bracket(std::abs(pts[q])), sigma);
    Eigen::MatrixXd g = psi.transpose() * w.asDiagonal() * psi;
    return Eigen::MatrixXd(0.5 * (g + g.transpose()));
  };
  Eigen::MatrixXd g = assemble(96);
  Eigen::MatrixXd g2 = assemble(160);
  if ((g - g2).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, g2.cwiseAbs().maxCoeff()))
    throw QuadratureFailure("weighted_gram: panel refinement did not converge");
  return g2;
}

}  // namespace kou
