#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kou/discretization.hpp"

namespace kou {

/// Real decay rate of one spatial Fourier mode of the generator: minus the largest
/// real part of the truncated spectrum, restricted for xi = 0 to the complement of
/// the conserved constants. Basis: Hermite at alpha = 2, otherwise the graded grid.
double mode_spectral_gap(const Equilibrium& eq, const DomainSpec& dom, int xi, int basis_size);

struct GlobalMu {
  double mu = 0.0;
  int minimizing_xi = 0;
  bool boundary = false;     ///< the unrestricted minimum sits at the mode cutoff
  std::vector<double> gaps;  ///< per xi = 0..xi_max (gap(-xi) = gap(xi))
};

/// Minimum mode gap over the interior modes |xi| < xi_max. Resolution-gated:
/// basis_size and its double must agree to 1% or EigenFailure is thrown. The
/// boundary flag marks a cutoff-attained minimum (untrustworthy truncation).
GlobalMu global_mu(const Equilibrium& eq, const DomainSpec& dom, int xi_max, int basis_size);

enum class RateProvenance { Computed, External, Literal };
std::string to_string(RateProvenance p);

struct ComparisonRow {
  std::string method;
  double rate = 0.0;
  std::optional<double> prefactor;
  RateProvenance provenance = RateProvenance::Computed;
  std::string anchor;  ///< mandatory for non-computed rows
};

struct BenchmarkTable {
  std::vector<ComparisonRow> rows;
  std::vector<std::string> flags;

  const ComparisonRow* find(const std::string& method) const;
  std::string to_csv() const;
  std::string to_json() const;
  std::string to_text() const;
};

/// Side-by-side decay-rate table across methods. Literature rows (literal and
/// external values) appear only on the reference configuration alpha = 2, d = 1,
/// L = tau = 2pi; computed rows cover any configuration their method supports.
BenchmarkTable benchmark_table(const Equilibrium& eq, const DomainSpec& dom, int basis_size = 64,
                               int xi_max = 8);

}  // namespace kou
