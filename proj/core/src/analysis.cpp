#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>

#include "json.hpp"
#include "kou/analysis.hpp"

namespace kou {

namespace {

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

double column_value(const Sample& s, NormColumn col) {
  switch (col) {
    case NormColumn::L2: return s.l2_sq;
    case NormColumn::GradV: return s.gradv_sq;
    case NormColumn::HMinus1: return s.hminus1_sq;
    case NormColumn::Weighted: return s.weighted_sq;
  }
  return 0.0;
}

double relative_margin(double lhs, double rhs) {
  return (rhs - lhs) / std::max(std::abs(rhs), 1e-300);
}

void finalize(BoundCheck& c) {
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < c.lhs.size(); ++i) worst = std::min(worst, relative_margin(c.lhs[i], c.rhs[i]));
  c.margin = c.lhs.empty() ? 0.0 : worst;
  c.pass = c.margin >= -c.tol_rel;
  if (!c.window_t.empty()) {
    c.t_lo = c.window_t.front();
    c.t_hi = c.window_t.back();
  }
}

// Integral of the piecewise-linear interpolant of the column over [a, b].
double integrate_column(const DecayTrace& tr, double a, double b, NormColumn col) {
  const auto& s = tr.samples;
  if (s.size() < 2) throw DataIntegrityError("trace has too few samples to integrate");
  const double slack = 1e-9 * std::max(1.0, std::abs(b));
  if (a < s.front().t - slack || b > s.back().t + slack)
    throw InvalidParameter("averaging window extends beyond the trace");
  a = std::max(a, s.front().t);
  b = std::min(b, s.back().t);
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < s.size(); ++k) {
    const double lo = std::max(a, s[k].t);
    const double hi = std::min(b, s[k + 1].t);
    if (hi <= lo) continue;
    const double dt = s[k + 1].t - s[k].t;
    const double v0 = column_value(s[k], col);
    const double v1 = column_value(s[k + 1], col);
    auto value_at = [&](double x) {
      const double u = (x - s[k].t) / dt;
      return (1.0 - u) * v0 + u * v1;
    };
    acc += 0.5 * (value_at(lo) + value_at(hi)) * (hi - lo);
  }
  return acc;
}

// Window starts on the sample grid with a full window ahead of them.
std::vector<std::size_t> window_starts(const DecayTrace& tr, double tau) {
  if (!(tau > 0.0)) throw InvalidParameter("window length must be positive");
  std::vector<std::size_t> starts;
  const double t_end = tr.samples.back().t;
  for (std::size_t j = 0; j < tr.samples.size(); ++j)
    if (tr.samples[j].t + tau <= t_end + 1e-9 * std::max(1.0, t_end)) starts.push_back(j);
  if (starts.empty()) throw InvalidParameter("trace horizon is shorter than the averaging window");
  return starts;
}

}  // namespace

double time_average(const DecayTrace& trace, double t, double tau, NormColumn col) {
  if (!(tau > 0.0)) throw InvalidParameter("window length must be positive");
  return integrate_column(trace, t, t + tau, col) / tau;
}

BoundCheck verify_theorem1(const DecayTrace& trace, double lambda, double tau) {
  if (trace.meta.alpha < 1.0) throw RegimeError("exponential time-average decay requires alpha >= 1");
  if (!(lambda >= 0.0)) throw InvalidParameter("decay rate must be non-negative");
  if (trace.samples.empty()) throw DataIntegrityError("empty trace");
  const double x0 = trace.samples.front().l2_sq;
  if (!(x0 > 0.0)) throw DataIntegrityError("initial norm must be positive");

  BoundCheck c;
  c.name = "time-average-decay";
  c.anchor = "slab average of ||h||^2 below ||h0||^2 exp(-lambda t)";
  c.tol_rel = 1e-2;
  for (std::size_t j : window_starts(trace, tau)) {
    const double t = trace.samples[j].t;
    c.window_t.push_back(t);
    c.lhs.push_back(time_average(trace, t, tau, NormColumn::L2));
    c.rhs.push_back(x0 * std::exp(-lambda * t));
  }
  if (lambda > 0.0 && trace.samples.back().t < 3.0 / lambda)
    c.flags.push_back("horizon shorter than 3/lambda: decay regime barely exercised");
  finalize(c);
  return c;
}

BoundCheck verify_corollary1(const DecayTrace& trace, double lambda, double tau) {
  if (trace.meta.alpha < 1.0) throw RegimeError("exponential pointwise decay requires alpha >= 1");
  if (!(lambda >= 0.0)) throw InvalidParameter("decay rate must be non-negative");
  if (trace.samples.size() < 2) throw DataIntegrityError("trace has too few samples");
  const auto& s = trace.samples;
  for (std::size_t j = 0; j + 1 < s.size(); ++j)
    if (s[j + 1].l2_sq > s[j].l2_sq * (1.0 + 1e-10) + 1e-300)
      throw DataIntegrityError("L^2 norm grows along the trace: integration artifact");

  const double x0 = s.front().l2_sq;
  BoundCheck c;
  c.name = "pointwise-decay";
  c.anchor = "||h(t)||^2 below exp(lambda tau) ||h0||^2 exp(-lambda t), via norm monotonicity";
  c.tol_rel = 1e-2;
  const double prefactor = std::exp(lambda * tau) * x0;
  for (const Sample& sample : s) {
    c.window_t.push_back(sample.t);
    c.lhs.push_back(sample.l2_sq);
    c.rhs.push_back(prefactor * std::exp(-lambda * sample.t));
  }
  finalize(c);
  return c;
}

BoundCheck verify_gen_poincare(const DecayTrace& trace, double kappa) {
  if (trace.meta.alpha < 1.0) throw RegimeError("slab inequality requires alpha >= 1");
  if (!(kappa > 0.0)) throw InvalidParameter("kappa must be positive");
  const double tau = trace.meta.domain.tau;

  BoundCheck c;
  c.name = "slab-poincare";
  c.anchor = "slab ||h||^2 below kappa times the slab dissipation";
  c.tol_rel = 1e-2;
  for (std::size_t j : window_starts(trace, tau)) {
    const double t = trace.samples[j].t;
    c.window_t.push_back(t);
    c.lhs.push_back(time_average(trace, t, tau, NormColumn::L2));
    c.rhs.push_back(kappa * time_average(trace, t, tau, NormColumn::GradV));
  }
  finalize(c);
  return c;
}

BoundCheck verify_transport_duality(const DecayTrace& trace) {
  if (trace.samples.empty()) throw DataIntegrityError("empty trace");
  BoundCheck c;
  c.name = "residual-duality";
  c.anchor = "dual seminorm of the residual below the dissipation at every sample";
  c.tol_rel = 1e-6;
  for (const Sample& s : trace.samples) {
    c.window_t.push_back(s.t);
    c.lhs.push_back(s.hminus1_sq);
    c.rhs.push_back(s.gradv_sq);
  }
  finalize(c);
  return c;
}

BoundCheck verify_averaging_lemma(const DecayTrace& trace, const DomainSpec& dom) {
  const auto& s = trace.samples;
  if (trace.density_history.size() != s.size())
    throw DataIntegrityError("density history does not cover the trace");
  const int n_modes = 2 * trace.meta.xi_max + 1;
  for (const auto& rho : trace.density_history)
    if (static_cast<int>(rho.size()) != n_modes) throw DataIntegrityError("density history has the wrong mode count");

  const Equilibrium eq = build_equilibrium(trace.meta.alpha, trace.meta.dim);
  const double da = d_alpha(eq, dom);
  const double tau = dom.tau;
  const double L = dom.L;

  const std::vector<std::size_t> starts = window_starts(trace, tau);
  const std::size_t stride = std::max<std::size_t>(1, starts.size() / 32);

  BoundCheck c;
  c.name = "density-averaging";
  c.anchor = "windowed density fluctuation in the dual space-time norm below d_alpha times the kinetic terms";
  c.tol_rel = 1e-2;

  for (std::size_t idx = 0; idx < starts.size(); idx += stride) {
    const std::size_t j0 = starts[idx];
    const double t0 = s[j0].t;
    const double t1 = t0 + tau;

    // Window nodes: samples inside [t0, t1] plus an interpolated endpoint when the
    // window does not end on a sample.
    std::vector<double> times;
    std::vector<std::vector<std::complex<double>>> rho;  // per node, xi = -xi_max..xi_max
    std::vector<double> kinetic;                         // (l2 - ||rho||^2) + hminus1 per node
    std::size_t j = j0;
    while (j < s.size() && s[j].t <= t1 + 1e-9 * std::max(1.0, t1)) {
      times.push_back(s[j].t);
      rho.push_back(trace.density_history[j]);
      double rho_l2 = 0.0;
      for (const auto& z : trace.density_history[j]) rho_l2 += std::norm(z);
      kinetic.push_back(s[j].l2_sq - rho_l2 + s[j].hminus1_sq);
      ++j;
    }
    if (times.size() < 2) continue;
    if (t1 - times.back() > 1e-9 * std::max(1.0, t1)) {
      const std::size_t k = j - 1;  // s[k].t < t1 < s[k+1].t
      const double u = (t1 - s[k].t) / (s[k + 1].t - s[k].t);
      std::vector<std::complex<double>> interp(static_cast<std::size_t>(n_modes));
      double rho_l2 = 0.0;
      for (int m = 0; m < n_modes; ++m) {
        interp[static_cast<std::size_t>(m)] = (1.0 - u) * trace.density_history[k][static_cast<std::size_t>(m)] +
                                              u * trace.density_history[k + 1][static_cast<std::size_t>(m)];
        rho_l2 += std::norm(interp[static_cast<std::size_t>(m)]);
      }
      const auto lerp = [&](double a, double b) { return (1.0 - u) * a + u * b; };
      times.push_back(t1);
      rho.push_back(std::move(interp));
      kinetic.push_back(lerp(s[k].l2_sq, s[k + 1].l2_sq) - rho_l2 + lerp(s[k].hminus1_sq, s[k + 1].hminus1_sq));
    }

    const std::size_t n_pts = times.size();
    // Cosine modes the sample grid can resolve; the omitted tail only lowers the lhs.
    const int m_max = std::max<int>(8, static_cast<int>(n_pts / 4));
    const int m_cap = std::min(m_max, 128);

    double lhs = 0.0;
    for (int xi = -trace.meta.xi_max; xi <= trace.meta.xi_max; ++xi) {
      const std::size_t col = static_cast<std::size_t>(xi + trace.meta.xi_max);
      const double nu = std::pow(2.0 * M_PI * xi / L, 2);
      for (int m = 0; m <= m_cap; ++m) {
        if (m == 0 && xi == 0) continue;
        const double mu = std::pow(m * M_PI / tau, 2);
        std::complex<double> coef = 0.0;
        for (std::size_t k2 = 0; k2 + 1 < n_pts; ++k2) {
          const double h = times[k2 + 1] - times[k2];
          const double c0 = std::cos(m * M_PI * (times[k2] - t0) / tau);
          const double c1 = std::cos(m * M_PI * (times[k2 + 1] - t0) / tau);
          coef += 0.5 * h * (rho[k2][col] * c0 + rho[k2 + 1][col] * c1);
        }
        coef *= (m == 0 ? 1.0 : 2.0) / tau;
        const double weight = (m == 0 ? tau : 0.5 * tau);
        lhs += weight * std::norm(coef) / (mu + nu);
      }
    }

    double rhs_int = 0.0;
    for (std::size_t k2 = 0; k2 + 1 < n_pts; ++k2)
      rhs_int += 0.5 * (times[k2 + 1] - times[k2]) * (kinetic[k2] + kinetic[k2 + 1]);

    c.window_t.push_back(t0);
    c.lhs.push_back(lhs);
    c.rhs.push_back(da * rhs_int);
  }
  if (c.window_t.empty()) throw DataIntegrityError("no usable averaging windows on the trace");
  finalize(c);
  return c;
}

namespace {

FitResult least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw InvalidParameter("degenerate fit window: no spread in the abscissa");
  const double slope = sxy / sxx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - my - slope * (x[i] - mx);
    ss_res += r * r;
  }
  FitResult out;
  out.rate = slope;
  out.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return out;
}

FitResult fit_tail(const DecayTrace& trace, double tail_fraction, bool log_abscissa) {
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0))
    throw InvalidParameter("tail fraction must lie in (0, 1]");
  const double tau = trace.meta.domain.tau;
  const std::vector<std::size_t> starts = window_starts(trace, tau);
  const double t_first = trace.samples[starts.front()].t;
  const double t_last = trace.samples[starts.back()].t;
  const double t_cut = t_first + (1.0 - tail_fraction) * (t_last - t_first);

  std::vector<double> xs, ys;
  for (std::size_t j : starts) {
    const double t = trace.samples[j].t;
    if (t < t_cut) continue;
    const double avg = time_average(trace, t, tau, NormColumn::L2);
    if (!(avg > 0.0)) throw DataIntegrityError("nonpositive windowed norm in the fit tail");
    xs.push_back(log_abscissa ? std::log1p(t) : t);
    ys.push_back(std::log(avg));
  }
  if (xs.size() < 20) throw InvalidParameter("degenerate fit window: fewer than 20 usable samples");
  return least_squares(xs, ys);
}

}  // namespace

FitResult fit_decay_rate(const DecayTrace& trace, double tail_fraction) {
  FitResult r = fit_tail(trace, tail_fraction, false);
  r.rate = -r.rate;
  return r;
}

FitResult fit_loglog_exponent(const DecayTrace& trace, double tail_fraction) {
  return fit_tail(trace, tail_fraction, true);
}

std::vector<BoundCheck> verify_theorem2(const DecayTrace& trace, const BihariEnvelope& envelope, double K,
                                        double sigma) {
  if (!(trace.meta.alpha > 0.0 && trace.meta.alpha < 1.0))
    throw RegimeError("algebraic-decay checks require alpha in (0, 1)");
  if (std::abs(trace.meta.sigma - sigma) > 1e-12 * std::max(1.0, std::abs(sigma)))
    throw DataIntegrityError("trace recorded a different weighted-norm exponent");
  if (!(K > 0.0)) throw InvalidParameter("decay prefactor must be positive");
  const double w0 = trace.samples.front().weighted_sq;
  if (!(w0 > 0.0)) throw DataIntegrityError("initial weighted norm must be positive");

  const double tau = trace.meta.domain.tau;
  const double exponent = sigma / (2.0 * (1.0 - trace.meta.alpha));
  const std::vector<std::size_t> starts = window_starts(trace, tau);
  const std::size_t stride = std::max<std::size_t>(1, starts.size() / 400);

  BoundCheck env_check;
  env_check.name = "comparison-envelope";
  env_check.anchor = "slab average of ||h||^2 below the comparison-ODE envelope psi^{-1}(t)";
  env_check.tol_rel = 1e-2;
  BoundCheck alg_check;
  alg_check.name = "algebraic-decay";
  alg_check.anchor = "slab average of ||h||^2 below K (1+t)^{-sigma/(2(1-alpha))} times the weighted initial norm";
  alg_check.tol_rel = 1e-2;

  for (std::size_t idx = 0; idx < starts.size(); idx += stride) {
    const double t = trace.samples[starts[idx]].t;
    const double avg = time_average(trace, t, tau, NormColumn::L2);
    env_check.window_t.push_back(t);
    env_check.lhs.push_back(avg);
    env_check.rhs.push_back(envelope.psi_inv(t));
    alg_check.window_t.push_back(t);
    alg_check.lhs.push_back(avg);
    alg_check.rhs.push_back(K * std::pow(1.0 + t, -exponent) * w0);
  }
  finalize(env_check);
  finalize(alg_check);
  return {env_check, alg_check};
}

SweepReport alpha_limit_sweep(const std::vector<double>& alphas, const DomainSpec& dom, const SweepConfig& cfg) {
  if (alphas.empty()) throw InvalidParameter("sweep needs at least one alpha");
  for (double a : alphas)
    if (!(a > 0.0 && a < 1.0)) throw InvalidParameter("sweep alphas must lie in (0, 1)");
  if (cfg.grid_size < 16 || cfg.xi_max < 1 || !(cfg.dt > 0.0) || !(cfg.T > 0.0) || cfg.stride < 1)
    throw InvalidParameter("invalid sweep configuration");

  double v_max = cfg.v_max;
  if (v_max == 0.0) {
    const double alpha_min = *std::min_element(alphas.begin(), alphas.end());
    v_max = grid_auto_vmax(build_equilibrium(alpha_min, dom.dim));
  }

  auto run_trace = [&](const Equilibrium& eq, double sigma) {
    const Discretization disc = build_discretization(eq, Basis::Grid, cfg.grid_size, cfg.xi_max, cfg.dt,
                                                     Scheme::EigenExponential, v_max);
    const Field h0 = separable_datum(eq, disc, 1, 1, cfg.amplitude);
    const ModePropagator prop(eq, dom, disc);
    return simulate(prop, eq, h0, cfg.T, cfg.stride, sigma, "separable:xi=1,k=1");
  };

  SweepReport report;
  for (double alpha : alphas) {
    const Equilibrium eq = build_equilibrium(alpha, dom.dim);
    const double p = 2.0 - alpha;
    const double sigma = 2.0 * (1.0 - alpha) / (p - 1.0);  // = 2 on this schedule
    const DecayTrace trace = run_trace(eq, sigma);

    const double w_first = trace.samples.front().weighted_sq;
    if (!(w_first > 0.0)) throw DataIntegrityError("initial weighted norm must be positive");
    double growth = 1.0;
    for (const Sample& s : trace.samples) growth = std::max(growth, s.weighted_sq / w_first);
    const double W = 2.0 * (1.0 + moment_weighted(eq, sigma)) * growth;

    const double x0 = trace.samples.front().l2_sq;
    const double p_alpha = weighted_poincare_constant(eq, cfg.basis_size);
    const SubexpConstants sc = subexp_constants(eq, dom, p, w_first, W, x0, p_alpha);
    const BihariEnvelope env = make_envelope(sc.A, sc.C, p, x0);
    const std::vector<BoundCheck> checks = verify_theorem2(trace, env, sc.K, sigma);

    SweepRow row;
    row.alpha = alpha;
    row.p = p;
    row.sigma = sigma;
    row.envelope_exponent = sigma / (2.0 * (1.0 - alpha));
    row.fitted_rate = fit_decay_rate(trace, 0.5).rate;
    row.ell = 2.0 * std::pow(x0, p - 1.0) * std::pow(sc.A0, -p);
    row.theorem2_margin = std::min(checks[0].margin, checks[1].margin);
    report.rows.push_back(row);
  }

  const Equilibrium eq_ref = build_equilibrium(1.0, dom.dim);
  const DecayTrace ref = run_trace(eq_ref, 0.0);
  report.reference_alpha = 1.0;
  report.reference_rate = fit_decay_rate(ref, 0.5).rate;
  return report;
}

std::string SweepReport::to_csv() const {
  std::string out = "alpha,p,sigma,envelope_exponent,fitted_rate,ell,theorem2_margin\n";
  for (const SweepRow& r : rows) {
    out += fmt(r.alpha) + "," + fmt(r.p) + "," + fmt(r.sigma) + "," + fmt(r.envelope_exponent) + "," +
           fmt(r.fitted_rate) + "," + fmt(r.ell) + "," + fmt(r.theorem2_margin) + "\n";
  }
  out += fmt(reference_alpha) + ",,,," + fmt(reference_rate) + ",,\n";
  return out;
}

std::string checks_to_json(const std::vector<BoundCheck>& checks) {
  nlohmann::json root = nlohmann::json::array();
  for (const BoundCheck& c : checks) {
    nlohmann::json j;
    j["name"] = c.name;
    j["window"] = {{"t_lo", c.t_lo}, {"t_hi", c.t_hi}};
    j["tol_rel"] = c.tol_rel;
    j["margin"] = c.margin;
    j["pass"] = c.pass;
    j["anchor"] = c.anchor;
    j["flags"] = c.flags;
    j["samples"] = {{"t", c.window_t}, {"lhs", c.lhs}, {"rhs", c.rhs}};
    root.push_back(std::move(j));
  }
  return root.dump(2) + "\n";
}

std::string checks_to_text(const std::vector<BoundCheck>& checks) {
  std::string out;
  for (const BoundCheck& c : checks) {
    char line[256];
    std::snprintf(line, sizeof(line), "[%s] %-24s margin=% .6e  tol=%.0e  windows=%zu\n",
                  c.pass ? "PASS" : "FAIL", c.name.c_str(), c.margin, c.tol_rel, c.window_t.size());
    out += line;
    out += "       " + c.anchor + "\n";
    for (const std::string& f : c.flags) out += "       note: " + f + "\n";
  }
  return out;
}

}  // namespace kou
