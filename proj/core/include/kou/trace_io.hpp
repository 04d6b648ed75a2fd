#pragma once

#include <string>

#include "kou/solver.hpp"

namespace kou {

inline constexpr const char* kVersion = "1.0.0";

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// CSV layout is stable: one header line "t,l2_sq,gradv_sq,hminus1_sq,weighted_sq"
/// followed by %.17g rows, so reruns of identical configurations are byte-identical.
std::string trace_to_csv(const DecayTrace& trace);
DecayTrace trace_from_csv(const std::string& text);  // samples + columns only

std::string trace_to_json(const DecayTrace& trace);

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

/// One two-column (t value) file per norm, named <prefix><column>.dat.
void write_plot_files(const DecayTrace& trace, const std::string& directory, const std::string& prefix);

}  // namespace kou
