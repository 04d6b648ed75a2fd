#include "kou/solver.hpp"

#include <cmath>
#include <random>

namespace kou {

namespace {

constexpr double kCondLimit = 1e8;

/// Gaussian draws via Box-Muller on the raw 64-bit stream; fixed algorithm so seeds
/// reproduce across standard library implementations.
class GaussianStream {
 public:
  explicit GaussianStream(unsigned long long seed) : gen_(seed) {}
  double next() {
    if (have_) {
      have_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 == 0.0) u1 = std::ldexp(static_cast<double>(gen_()), -64);
    const double u2 = std::ldexp(static_cast<double>(gen_()), -64);
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * M_PI * u2);
    have_ = true;
    return r * std::cos(2.0 * M_PI * u2);
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_ = false;
};

Eigen::VectorXd masses(const Discretization& disc) {
  if (disc.basis == Basis::Hermite) return Eigen::VectorXd::Ones(disc.size);
  return Eigen::Map<const Eigen::VectorXd>(disc.weights.data(), disc.size);
}

/// Profile of the k-th datum shape in the coefficient space of the basis: the unit
/// coefficient vector for Hermite, polynomial values on the nodes for the grid.
Eigen::VectorXd datum_profile(const Discretization& disc, int k) {
  if (disc.basis == Basis::Hermite) {
    if (k >= disc.size) throw InvalidParameter("datum: Hermite index beyond truncation");
    return Eigen::VectorXd::Unit(disc.size, k);
  }
  return hermite_poly_values(disc.nodes, k + 1).col(k);
}

void subtract_mass(const Discretization& disc, Field& f) {
  const Eigen::VectorXd w = masses(disc);
  if (disc.basis == Basis::Hermite) {
    f.col(0)(0) = 0.0;
    return;
  }
  const std::complex<double> mean =
      (w.cast<std::complex<double>>().array() * f.col(0).array()).sum() / w.sum();
  f.col(0).array() -= mean;
}

void set_real_mode(Field& f, int xi, const Eigen::VectorXcd& profile) {
  if (xi == 0) {
    f.col(0) += profile;
  } else {
    f.col(xi) += 0.5 * profile;
    f.col(-xi) += 0.5 * profile.conjugate();
  }
}

}  // namespace

Eigen::MatrixXd hermite_poly_values(const std::vector<double>& points, int n) {
  const int np = static_cast<int>(points.size());
  Eigen::MatrixXd p(np, n);
  for (int i = 0; i < np; ++i) {
    const double v = points[i];
    p(i, 0) = 1.0;
    if (n > 1) p(i, 1) = v / std::sqrt(0.5);
    for (int k = 1; k + 1 < n; ++k)
      p(i, k + 1) = (v * p(i, k) - std::sqrt(0.5 * k) * p(i, k - 1)) / std::sqrt(0.5 * (k + 1));
  }
  return p;
}

Field field_zero(const Discretization& disc) {
  Field f;
  f.disc = disc;
  f.xi_max = disc.xi_max;
  f.coeff = Eigen::MatrixXcd::Zero(disc.size, 2 * disc.xi_max + 1);
  return f;
}

Field hermite_mode_datum(const Equilibrium& eq, const Discretization& disc, int xi, int k, double amplitude) {
  (void)eq;
  if (std::abs(xi) > disc.xi_max) throw InvalidParameter("datum: |xi| beyond truncation");
  if (k < 0 || (k == 0 && xi == 0)) throw InvalidParameter("datum: constant mode carries mass");
  Field f = field_zero(disc);
  set_real_mode(f, std::abs(xi), amplitude * datum_profile(disc, k).cast<std::complex<double>>());
  subtract_mass(disc, f);
  return f;
}

Field spatial_cosine_datum(const Equilibrium& eq, const Discretization& disc, int xi, double amplitude) {
  (void)eq;
  if (xi == 0 || std::abs(xi) > disc.xi_max)
    throw InvalidParameter("datum: cosine mode must satisfy 1 <= |xi| <= xi_max");
  Field f = field_zero(disc);
  set_real_mode(f, std::abs(xi), amplitude * datum_profile(disc, 0).cast<std::complex<double>>());
  return f;
}

Field separable_datum(const Equilibrium& eq, const Discretization& disc, int xi, int k, double amplitude) {
  (void)eq;
  if (xi == 0 || std::abs(xi) > disc.xi_max)
    throw InvalidParameter("datum: separable mode must satisfy 1 <= |xi| <= xi_max");
  Field f = field_zero(disc);
  set_real_mode(f, std::abs(xi), amplitude * datum_profile(disc, k).cast<std::complex<double>>());
  return f;
}

Field random_smooth_datum(const Equilibrium& eq, const Discretization& disc, unsigned long long seed,
                          double amplitude) {
  (void)eq;
  Field f = field_zero(disc);
  GaussianStream g(seed);
  const int kmax = std::min(8, disc.size);
  const int xmax = std::min(3, disc.xi_max);
  const Eigen::MatrixXd profiles =
      disc.basis == Basis::Hermite ? Eigen::MatrixXd(Eigen::MatrixXd::Identity(disc.size, kmax))
                                   : Eigen::MatrixXd(hermite_poly_values(disc.nodes, kmax));
  for (int xi = 0; xi <= xmax; ++xi)
    for (int k = 0; k < kmax; ++k) {
      const double decay = std::exp(-0.5 * (k + std::abs(xi)));
      const double re = g.next() * decay, im = g.next() * decay;
      const std::complex<double> c = xi == 0 ? std::complex<double>(re, 0.0)
                                             : std::complex<double>(re, im);
      set_real_mode(f, xi, amplitude * c * profiles.col(k).cast<std::complex<double>>());
    }
  subtract_mass(disc, f);
  return f;
}

NormEvaluator::NormEvaluator(const Equilibrium& eq, const Discretization& disc, double sigma)
    : basis_(disc.basis), sigma_(sigma), w_(masses(disc)), s_(diffusion_matrix(eq, disc)) {
  if (basis_ == Basis::Hermite) {
    gram_ = weighted_gram(eq, disc, sigma);
    return;
  }
  weight_pow_.resize(disc.size);
  for (int i = 0; i < disc.size; ++i) weight_pow_(i) = std::pow(v_bracket(std::abs(disc.nodes[i])), sigma);
  mass_total_ = w_.sum();
  const Eigen::VectorXd sw = w_.cwiseSqrt();
  const int n = disc.size;
  reg_.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) reg_(i, j) = -s_(i, j) * sw(i) / sw(j);
  reg_ = 0.5 * (reg_ + reg_.transpose()).eval();
  const Eigen::VectorXd q = sw / sw.norm();
  reg_ += q * q.transpose();
  solve_.compute(reg_);
  if (solve_.info() != Eigen::Success) throw EigenFailure("norms: potential solve factorization failed");
}

Norms NormEvaluator::operator()(const Field& f) const {
  Norms out;
  const int modes = static_cast<int>(f.coeff.cols());
  if (basis_ == Basis::Hermite) {
    const int n = static_cast<int>(f.coeff.rows());
    for (int m = 0; m < modes; ++m) {
      const Eigen::VectorXd ar = f.coeff.col(m).real(), ai = f.coeff.col(m).imag();
      out.l2_sq += ar.squaredNorm() + ai.squaredNorm();
      out.weighted_sq += ar.dot(gram_ * ar) + ai.dot(gram_ * ai);
      for (int k = 1; k < n; ++k) {
        const double ak = ar(k) * ar(k) + ai(k) * ai(k);
        out.gradv_sq += k * ak;
        out.hminus1_sq += k * ak;       // |z_k|^2/k with z_k = -k a_k
        out.hminus1_l2_sq += ak;        // |z_k|^2/k^2
      }
    }
    return out;
  }
  const Eigen::VectorXd sw = w_.cwiseSqrt();
  for (int m = 0; m < modes; ++m) {
    const Eigen::VectorXd ar = f.coeff.col(m).real(), ai = f.coeff.col(m).imag();
    out.l2_sq += (w_.array() * (ar.array().square() + ai.array().square())).sum();
    out.weighted_sq += (w_.array() * weight_pow_.array() * (ar.array().square() + ai.array().square())).sum();
    const Eigen::VectorXd zr = s_ * ar, zi = s_ * ai;
    out.gradv_sq -= (w_.array() * (ar.array() * zr.array() + ai.array() * zi.array())).sum();
    const double mr = (w_.array() * zr.array()).sum() / mass_total_;
    const double mi = (w_.array() * zi.array()).sum() / mass_total_;
    // solve -Delta w = z - mean in symmetrized coordinates; kernel regularized away
    const Eigen::VectorXd r_re = sw.array() * (zr.array() - mr);
    const Eigen::VectorXd r_im = sw.array() * (zi.array() - mi);
    const Eigen::VectorXd y_re = solve_.solve(r_re);
    const Eigen::VectorXd y_im = solve_.solve(r_im);
    const double mean_sq = (mr * mr + mi * mi) * mass_total_;
    out.hminus1_sq += y_re.dot(r_re) + y_im.dot(r_im) + mean_sq;
    out.hminus1_l2_sq += y_re.squaredNorm() + y_im.squaredNorm() + mean_sq;
  }
  return out;
}

Eigen::VectorXcd spatial_density(const Field& f) {
  const int modes = static_cast<int>(f.coeff.cols());
  Eigen::VectorXcd rho(modes);
  if (f.disc.basis == Basis::Hermite) {
    rho = f.coeff.row(0).transpose();
  } else {
    const Eigen::VectorXd w = masses(f.disc);
    const double total = w.sum();
    for (int m = 0; m < modes; ++m)
      rho(m) = (w.cast<std::complex<double>>().array() * f.coeff.col(m).array()).sum() / total;
  }
  return rho;
}

ModePropagator::ModePropagator(const Equilibrium& eq, const DomainSpec& dom, const Discretization& disc)
    : disc_(disc), dom_(dom) {
  std::vector<Eigen::MatrixXcd> gens;
  for (int xi = 0; xi <= disc.xi_max; ++xi) gens.push_back(assemble_mode_operator(eq, dom, disc, xi).matrix);
  build(gens);
}

ModePropagator::ModePropagator(std::vector<Eigen::MatrixXcd> generators, const DomainSpec& dom,
                               const Discretization& disc)
    : disc_(disc), dom_(dom) {
  if (static_cast<int>(generators.size()) != disc.xi_max + 1)
    throw InvalidParameter("propagator: need one generator per mode 0..xi_max");
  build(generators);
}

void ModePropagator::build(const std::vector<Eigen::MatrixXcd>& gens) {
  const int n = disc_.size;
  scheme_used_ = disc_.scheme;
  // Symmetrized coordinates keep the eigenproblem well conditioned on the grid; the
  // similarity scaling is folded back into the stored step matrix.
  Eigen::VectorXd sw = masses(disc_).cwiseSqrt();
  if (scheme_used_ == Scheme::EigenExponential) {
    exp_.clear();
    bool ok = true;
    for (const auto& gen : gens) {
      Eigen::MatrixXcd m = gen;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) *= sw(i) / sw(j);
      // Diagonal generators (velocity-only modes) get an exactly diagonal step,
      // free of eigenvector rounding dirt that slow modes would amplify.
      bool diagonal = true;
      for (int i = 0; i < n && diagonal; ++i)
        for (int j = 0; j < n; ++j)
          if (i != j && gen(i, j) != 0.0) {
            diagonal = false;
            break;
          }
      if (diagonal) {
        Eigen::MatrixXcd stepm = Eigen::MatrixXcd::Zero(n, n);
        for (int i = 0; i < n; ++i) stepm(i, i) = std::exp(gen(i, i) * disc_.dt);
        exp_.push_back(std::move(stepm));
        continue;
      }
      Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m);
      if (es.info() != Eigen::Success) {
        ok = false;
        break;
      }
      const Eigen::MatrixXcd& vec = es.eigenvectors();
      Eigen::PartialPivLU<Eigen::MatrixXcd> lu(vec);
      const Eigen::MatrixXcd vinv = lu.solve(Eigen::MatrixXcd::Identity(n, n));
      const double cond = vec.cwiseAbs().colwise().sum().maxCoeff() * vinv.cwiseAbs().colwise().sum().maxCoeff();
      if (!(cond < kCondLimit)) {
        ok = false;
        break;
      }
      Eigen::VectorXcd phase(n);
      for (int i = 0; i < n; ++i) phase(i) = std::exp(es.eigenvalues()(i) * disc_.dt);
      Eigen::MatrixXcd stepm = vec * phase.asDiagonal() * vinv;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) stepm(i, j) *= sw(j) / sw(i);
      exp_.push_back(std::move(stepm));
    }
    if (ok) return;
    scheme_used_ = Scheme::ImplicitMidpoint;
    flags_.push_back("eigen-exponential build ill-conditioned; fell back to implicit midpoint");
    exp_.clear();
  }
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
  for (const auto& gen : gens) {
    lu_.emplace_back(id - 0.5 * disc_.dt * gen);
    rhs_.push_back(id + 0.5 * disc_.dt * gen);
  }
}

void ModePropagator::advance(Field& f) const {
  const int xim = f.xi_max;
  for (int xi = 0; xi <= xim; ++xi) {
    if (scheme_used_ == Scheme::EigenExponential) {
      f.col(xi) = (exp_[xi] * f.col(xi)).eval();
      if (xi > 0) f.col(-xi) = (exp_[xi] * f.col(-xi).conjugate()).conjugate().eval();
    } else {
      f.col(xi) = lu_[xi].solve(rhs_[xi] * f.col(xi)).eval();
      if (xi > 0) f.col(-xi) = lu_[xi].solve(rhs_[xi] * f.col(-xi).conjugate()).conjugate().eval();
    }
  }
  f.time += disc_.dt;
}

Field step(const ModePropagator& prop, const Field& f) {
  Field out = f;
  prop.advance(out);
  return out;
}

DecayTrace simulate(const ModePropagator& prop, const Equilibrium& eq, const Field& h0, double T,
                    int record_stride, double sigma, const std::string& datum_name, unsigned long long seed) {
  if (record_stride < 1) throw InvalidParameter("simulate: record_stride must be positive");
  if (!(T > 0.0)) throw InvalidParameter("simulate: horizon must be positive");
  const Discretization& disc = prop.disc();
  NormEvaluator eval(eq, disc, sigma);

  DecayTrace trace;
  trace.meta.alpha = eq.alpha;
  trace.meta.dim = eq.dim;
  trace.meta.domain = prop.domain();
  trace.meta.basis = disc.basis;
  trace.meta.size = disc.size;
  trace.meta.xi_max = disc.xi_max;
  trace.meta.dt = disc.dt;
  trace.meta.scheme = prop.scheme_used();
  trace.meta.v_max = disc.v_max;
  trace.meta.sigma = sigma;
  trace.meta.datum = datum_name;
  trace.meta.seed = seed;
  trace.meta.flags = prop.flags();

  Field f = h0;
  f.time = 0.0;
  const long nsteps = std::lround(T / disc.dt);
  auto record = [&](const Field& g) {
    const Norms n = eval(g);
    if (!std::isfinite(n.l2_sq) || !std::isfinite(n.gradv_sq) || !std::isfinite(n.hminus1_sq) ||
        !std::isfinite(n.weighted_sq))
      throw IntegrationFailure("simulate: non-finite norms", g.time);
    trace.samples.push_back({g.time, n.l2_sq, n.gradv_sq, n.hminus1_sq, n.weighted_sq});
    const Eigen::VectorXcd rho = spatial_density(g);
    trace.density_history.emplace_back(rho.data(), rho.data() + rho.size());
  };
  record(f);
  for (long j = 1; j <= nsteps; ++j) {
    prop.advance(f);
    if (j % record_stride == 0 || j == nsteps) record(f);
  }
  return trace;
}

}  // namespace kou
