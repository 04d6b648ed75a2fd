// Command-line driver: reproducible experiments over the kinetic decay toolkit.
// Precedence for every setting: flag > KOU_OUTDIR (output directory only) >
// config-file subcommand section > config-file global section > built-in default.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "kou/analysis.hpp"
#include "kou/constants.hpp"
#include "kou/quadrature.hpp"
#include "kou/rates.hpp"
#include "kou/trace_io.hpp"

namespace {

namespace fs = std::filesystem;

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

struct Options {
  double alpha = 2.0;
  int dim = 1;
  double L = 2.0 * M_PI;
  double tau = 2.0 * M_PI;
  std::string basis = "auto";  // auto | hermite | grid
  int size = 0;                // 0: 64 Hermite modes or 192 grid cells
  int xi_max = 8;
  double dt = 0.01;
  double T = 200.0;
  int stride = 20;
  double v_max = 0.0;  // grid truncation; 0 = automatic tail bound
  std::string datum = "random";
  int datum_xi = 1;
  int datum_k = 1;
  unsigned long long seed = 1;
  double amplitude = 1.0;
  double sigma = -1.0;  // weighted-norm exponent; -1 = regime default
  double p = 0.0;       // algebraic-decay exponent; 0 = schedule default 2 - alpha
  double W = 0.0;       // weighted-growth constant; 0 = empirical estimate
  double lambda = 0.0;  // decay rate for verify; 0 = certified chain value
  int basis_size = 64;  // eigensolve baseline resolution
  std::string alphas = "0.6,0.8,0.9,0.95";
  std::string output = "kou-out";
};

using FieldSetter = std::function<void(const std::string&)>;
struct BoundField {
  FieldSetter set;
  CLI::Option* opt = nullptr;
};
using FieldMap = std::map<std::string, BoundField>;

template <class T>
T parse_value(const std::string& s, const std::string& key);

template <>
double parse_value<double>(const std::string& s, const std::string& key) {
  std::size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size()) throw kou::InvalidParameter("config value for '" + key + "' is not a number: " + s);
  return v;
}
template <>
int parse_value<int>(const std::string& s, const std::string& key) {
  std::size_t pos = 0;
  const int v = std::stoi(s, &pos);
  if (pos != s.size()) throw kou::InvalidParameter("config value for '" + key + "' is not an integer: " + s);
  return v;
}
template <>
unsigned long long parse_value<unsigned long long>(const std::string& s, const std::string& key) {
  std::size_t pos = 0;
  const unsigned long long v = std::stoull(s, &pos);
  if (pos != s.size()) throw kou::InvalidParameter("config value for '" + key + "' is not an integer: " + s);
  return v;
}
template <>
std::string parse_value<std::string>(const std::string& s, const std::string&) {
  return s;
}

// Not named `bind`: unqualified calls with std::map arguments would resolve to
// std::bind through ADL and silently register nothing.
template <class T>
void bind_field(CLI::App* sub, FieldMap& fields, const std::string& key, T& target, const std::string& desc) {
  CLI::Option* opt = sub->add_option("--" + key, target, desc);
  fields[key] = {[&target, key](const std::string& s) { target = parse_value<T>(s, key); }, opt};
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Line-oriented `key = value` file with [section] headers; '#' starts a comment.
// Keys before any header land in the "global" section.
std::map<std::string, std::map<std::string, std::string>> parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw kou::InvalidParameter("cannot read config file: " + path);
  std::map<std::string, std::map<std::string, std::string>> sections;
  std::string section = "global";
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw kou::InvalidParameter("config line " + std::to_string(lineno) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw kou::InvalidParameter("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw kou::InvalidParameter("config line " + std::to_string(lineno) + ": empty key");
    sections[section][key] = value;
  }
  return sections;
}

void apply_section(const std::map<std::string, std::string>& kv, FieldMap& fields) {
  for (const auto& [key, value] : kv) {
    const auto it = fields.find(key);
    if (it == fields.end()) throw kou::InvalidParameter("unknown config key: " + key);
    if (it->second.opt->count() == 0) it->second.set(value);
  }
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw kou::IoError("cannot write " + path.string());
  out << content;
  if (!out) throw kou::IoError("write failed: " + path.string());
}

// The resolved configuration doubles as a rerun recipe: feeding it back through
// --config reproduces the outputs byte for byte.
void write_resolved(const fs::path& dir, const std::string& command, const Options& o) {
  std::ostringstream out;
  out << "# kou " << kou::kVersion << " resolved configuration\n[" << command << "]\n";
  out << "alpha = " << fmt(o.alpha) << "\n";
  out << "alphas = " << o.alphas << "\n";
  out << "amplitude = " << fmt(o.amplitude) << "\n";
  out << "basis = " << o.basis << "\n";
  out << "basis_size = " << o.basis_size << "\n";
  out << "datum = " << o.datum << "\n";
  out << "datum_k = " << o.datum_k << "\n";
  out << "datum_xi = " << o.datum_xi << "\n";
  out << "dim = " << o.dim << "\n";
  out << "dt = " << fmt(o.dt) << "\n";
  out << "L = " << fmt(o.L) << "\n";
  out << "lambda = " << fmt(o.lambda) << "\n";
  out << "output = " << o.output << "\n";
  out << "p = " << fmt(o.p) << "\n";
  out << "seed = " << o.seed << "\n";
  out << "sigma = " << fmt(o.sigma) << "\n";
  out << "size = " << o.size << "\n";
  out << "stride = " << o.stride << "\n";
  out << "T = " << fmt(o.T) << "\n";
  out << "tau = " << fmt(o.tau) << "\n";
  out << "v_max = " << fmt(o.v_max) << "\n";
  out << "W = " << fmt(o.W) << "\n";
  out << "xi_max = " << o.xi_max << "\n";
  write_text(dir / "resolved.ini", out.str());
  write_text(dir / "version.txt", std::string("kou ") + kou::kVersion + "\n");
}

kou::DomainSpec domain_of(const Options& o) {
  kou::DomainSpec dom;
  dom.L = o.L;
  dom.tau = o.tau;
  dom.dim = o.dim;
  return dom;
}

kou::Basis pick_basis(const Options& o) {
  if (o.basis == "auto") return o.alpha == 2.0 ? kou::Basis::Hermite : kou::Basis::Grid;
  return kou::basis_from_string(o.basis);
}

kou::Discretization make_disc(const kou::Equilibrium& eq, const Options& o) {
  const kou::Basis basis = pick_basis(o);
  const int size = o.size > 0 ? o.size : (basis == kou::Basis::Hermite ? 64 : 192);
  return kou::build_discretization(eq, basis, size, o.xi_max, o.dt, kou::Scheme::EigenExponential, o.v_max);
}

kou::Field make_datum(const kou::Equilibrium& eq, const kou::Discretization& disc, const Options& o) {
  if (o.datum == "random") return kou::random_smooth_datum(eq, disc, o.seed, o.amplitude);
  if (o.datum == "hermite") return kou::hermite_mode_datum(eq, disc, o.datum_xi, o.datum_k, o.amplitude);
  if (o.datum == "cosine") return kou::spatial_cosine_datum(eq, disc, o.datum_xi, o.amplitude);
  if (o.datum == "separable") return kou::separable_datum(eq, disc, o.datum_xi, o.datum_k, o.amplitude);
  throw kou::InvalidParameter("unknown datum '" + o.datum + "' (random, hermite, cosine, separable)");
}

std::string datum_label(const Options& o) {
  if (o.datum == "random") return "random(seed=" + std::to_string(o.seed) + ")";
  if (o.datum == "cosine") return "cosine(xi=" + std::to_string(o.datum_xi) + ")";
  return o.datum + "(xi=" + std::to_string(o.datum_xi) + ",k=" + std::to_string(o.datum_k) + ")";
}

double default_sigma(const Options& o, double p) {
  if (o.sigma >= 0.0) return o.sigma;
  return o.alpha < 1.0 ? 2.0 * (1.0 - o.alpha) / (p - 1.0) : 0.0;
}

kou::DecayTrace run_simulation(const kou::Equilibrium& eq, const Options& o, double sigma) {
  const kou::Discretization disc = make_disc(eq, o);
  const kou::Field h0 = make_datum(eq, disc, o);
  const kou::ModePropagator prop(eq, domain_of(o), disc);
  return kou::simulate(prop, eq, h0, o.T, o.stride, sigma, datum_label(o), o.seed);
}

int run_constants(const Options& o, const fs::path& dir) {
  const kou::Equilibrium eq = kou::build_equilibrium(o.alpha, o.dim);
  const kou::ConstantsReport report = kou::constants_report(eq, domain_of(o), o.basis_size);
  write_text(dir / "constants.json", report.to_json());
  write_text(dir / "constants.txt", report.to_text());
  return 0;
}

int run_simulate(const Options& o, const fs::path& dir) {
  const kou::Equilibrium eq = kou::build_equilibrium(o.alpha, o.dim);
  const double p = o.p > 0.0 ? o.p : 2.0 - o.alpha;
  const kou::DecayTrace trace = run_simulation(eq, o, default_sigma(o, p));
  write_text(dir / "trace.csv", kou::trace_to_csv(trace));
  write_text(dir / "trace.json", kou::trace_to_json(trace));
  kou::write_plot_files(trace, dir.string(), "plot_");
  return 0;
}

int run_verify(const Options& o, const fs::path& dir) {
  const kou::Equilibrium eq = kou::build_equilibrium(o.alpha, o.dim);
  const kou::DomainSpec dom = domain_of(o);
  std::vector<kou::BoundCheck> checks;

  if (o.alpha >= 1.0) {
    const kou::DecayTrace trace = run_simulation(eq, o, 0.0);
    const double p_alpha = o.alpha == 2.0 ? 1.0 : kou::poincare_constant(eq, o.basis_size);
    const double lambda = o.lambda > 0.0 ? o.lambda : kou::lambda_rates(eq, dom, p_alpha).main;
    const double kappa = kou::kappa_alpha(eq, dom, p_alpha);
    checks.push_back(kou::verify_theorem1(trace, lambda, o.tau));
    checks.push_back(kou::verify_corollary1(trace, lambda, o.tau));
    checks.push_back(kou::verify_gen_poincare(trace, kappa));
    checks.push_back(kou::verify_transport_duality(trace));
    checks.push_back(kou::verify_averaging_lemma(trace, dom));
  } else {
    const double p = o.p > 0.0 ? o.p : 2.0 - o.alpha;
    const double sigma = default_sigma(o, p);
    const kou::DecayTrace trace = run_simulation(eq, o, sigma);
    const double w0 = trace.samples.front().weighted_sq;
    double W = o.W;
    if (W <= 0.0) {
      double growth = 1.0;
      for (const kou::Sample& s : trace.samples) growth = std::max(growth, s.weighted_sq / w0);
      W = 2.0 * (1.0 + kou::moment_weighted(eq, sigma)) * growth;
    }
    const double p_alpha = kou::weighted_poincare_constant(eq, o.basis_size);
    const kou::SubexpConstants sc =
        kou::subexp_constants(eq, dom, p, w0, W, trace.samples.front().l2_sq, p_alpha);
    const kou::BihariEnvelope env = kou::make_envelope(sc.A, sc.C, p, trace.samples.front().l2_sq);
    for (kou::BoundCheck& c : kou::verify_theorem2(trace, env, sc.K, sigma)) checks.push_back(std::move(c));
    checks.push_back(kou::verify_transport_duality(trace));
    checks.push_back(kou::verify_averaging_lemma(trace, dom));
  }

  write_text(dir / "checks.json", kou::checks_to_json(checks));
  write_text(dir / "checks.txt", kou::checks_to_text(checks));
  const bool all_pass = std::all_of(checks.begin(), checks.end(), [](const kou::BoundCheck& c) { return c.pass; });
  return all_pass ? 0 : 1;
}

int run_compare(const Options& o, const fs::path& dir) {
  const kou::Equilibrium eq = kou::build_equilibrium(o.alpha, o.dim);
  const kou::BenchmarkTable table = kou::benchmark_table(eq, domain_of(o), o.basis_size, o.xi_max);
  write_text(dir / "table.csv", table.to_csv());
  write_text(dir / "table.json", table.to_json());
  write_text(dir / "table.txt", table.to_text());
  return 0;
}

int run_sweep(const Options& o, const fs::path& dir) {
  std::vector<double> alphas;
  std::stringstream ss(o.alphas);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (!tok.empty()) alphas.push_back(parse_value<double>(tok, "alphas"));
  }
  kou::SweepConfig cfg;
  if (o.size > 0) cfg.grid_size = o.size;
  cfg.xi_max = std::min(o.xi_max, 2);
  cfg.dt = o.dt;
  cfg.T = o.T;
  cfg.stride = o.stride;
  cfg.amplitude = o.amplitude;
  cfg.v_max = o.v_max;
  cfg.basis_size = o.basis_size;
  const kou::SweepReport report = kou::alpha_limit_sweep(alphas, domain_of(o), cfg);
  write_text(dir / "sweep.csv", report.to_csv());
  const bool all_pass = std::all_of(report.rows.begin(), report.rows.end(),
                                    [](const kou::SweepRow& r) { return r.theorem2_margin >= -1e-2; });
  return all_pass ? 0 : 1;
}

void write_error_record(const fs::path& dir, const std::string& kind, const std::string& message, int code) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) return;  // nothing writable; stderr already carries the message
  nlohmann::json j;
  j["error"] = kind;
  j["message"] = message;
  j["exit_code"] = code;
  std::ofstream out(dir / "error.json", std::ios::binary);
  out << j.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kinetic Ornstein-Uhlenbeck decay toolkit"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "key = value configuration file with [subcommand] sections");

  Options opt;
  std::map<CLI::App*, FieldMap> bound;
  auto add_common = [&](const std::string& name, const std::string& desc) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->add_option("--config", config_path, "key = value configuration file with [subcommand] sections");
    FieldMap& f = bound[sub];
    bind_field(sub, f, "alpha", opt.alpha, "equilibrium tail exponent (> 0)");
    bind_field(sub, f, "dim", opt.dim, "velocity dimension");
    bind_field(sub, f, "L", opt.L, "torus side length");
    bind_field(sub, f, "tau", opt.tau, "averaging window length");
    bind_field(sub, f, "basis", opt.basis, "velocity basis: auto, hermite, grid");
    bind_field(sub, f, "size", opt.size, "basis size (0 = default for the basis)");
    bind_field(sub, f, "xi_max", opt.xi_max, "spatial Fourier cutoff");
    bind_field(sub, f, "dt", opt.dt, "time step");
    bind_field(sub, f, "T", opt.T, "integration horizon");
    bind_field(sub, f, "stride", opt.stride, "steps between recorded samples");
    bind_field(sub, f, "v_max", opt.v_max, "grid velocity truncation (0 = automatic)");
    bind_field(sub, f, "datum", opt.datum, "initial datum: random, hermite, cosine, separable");
    bind_field(sub, f, "datum_xi", opt.datum_xi, "spatial mode of the datum");
    bind_field(sub, f, "datum_k", opt.datum_k, "velocity mode of the datum");
    bind_field(sub, f, "seed", opt.seed, "random datum seed");
    bind_field(sub, f, "amplitude", opt.amplitude, "datum amplitude");
    bind_field(sub, f, "sigma", opt.sigma, "weighted-norm exponent (-1 = regime default)");
    bind_field(sub, f, "p", opt.p, "algebraic-decay exponent (0 = 2 - alpha)");
    bind_field(sub, f, "W", opt.W, "weighted-growth constant (0 = empirical estimate)");
    bind_field(sub, f, "lambda", opt.lambda, "decay rate to verify (0 = certified chain value)");
    bind_field(sub, f, "basis_size", opt.basis_size, "eigensolve baseline resolution");
    bind_field(sub, f, "alphas", opt.alphas, "comma-separated sweep exponents in (0,1)");
    bind_field(sub, f, "output", opt.output, "output directory");
    return sub;
  };

  CLI::App* c_constants = add_common("constants", "evaluate the full constant chain");
  CLI::App* c_simulate = add_common("simulate", "integrate a mode-resolved trajectory");
  CLI::App* c_verify = add_common("verify", "run the decay-estimate checks on a fresh trajectory");
  CLI::App* c_compare = add_common("compare", "method-comparison rate table");
  CLI::App* c_sweep = add_common("sweep-alpha", "algebraic-decay sweep toward the exponential regime");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  fs::path outdir;
  try {
    if (!config_path.empty()) {
      auto sections = parse_config_file(config_path);
      FieldMap& fields = bound[sub];
      const auto glob = sections.find("global");
      if (glob != sections.end()) apply_section(glob->second, fields);
      const auto sec = sections.find(sub->get_name());
      if (sec != sections.end()) apply_section(sec->second, fields);
    }
    if (const char* env = std::getenv("KOU_OUTDIR"); env && *env && bound[sub]["output"].opt->count() == 0)
      opt.output = env;

    outdir = opt.output;
    fs::create_directories(outdir);
    write_resolved(outdir, sub->get_name(), opt);

    if (sub == c_constants) return run_constants(opt, outdir);
    if (sub == c_simulate) return run_simulate(opt, outdir);
    if (sub == c_verify) return run_verify(opt, outdir);
    if (sub == c_compare) return run_compare(opt, outdir);
    if (sub == c_sweep) return run_sweep(opt, outdir);
    return 2;
  } catch (const kou::InvalidParameter& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    write_error_record(outdir.empty() ? fs::path(opt.output) : outdir, "invalid-parameter", e.what(), 2);
    return 2;
  } catch (const kou::RegimeError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    write_error_record(outdir.empty() ? fs::path(opt.output) : outdir, "regime-error", e.what(), 2);
    return 2;
  } catch (const kou::IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    write_error_record(outdir.empty() ? fs::path(opt.output) : outdir, "io-error", e.what(), 2);
    return 2;
  } catch (const kou::QuadratureFailure& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    write_error_record(outdir, "quadrature-failure", e.what(), 3);
    return 3;
  } catch (const kou::EigenFailure& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    write_error_record(outdir, "eigen-failure", e.what(), 3);
    return 3;
  } catch (const kou::IntegrationFailure& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    write_error_record(outdir, "integration-failure", e.what(), 3);
    return 3;
  } catch (const kou::DataIntegrityError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    write_error_record(outdir, "data-integrity", e.what(), 3);
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "failure: %s\n", e.what());
    write_error_record(outdir, "unexpected", e.what(), 3);
    return 3;
  }
}
