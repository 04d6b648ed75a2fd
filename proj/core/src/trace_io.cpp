#include "kou/trace_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace kou {

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

constexpr const char* kHeader = "t,l2_sq,gradv_sq,hminus1_sq,weighted_sq";

}  // namespace

std::string trace_to_csv(const DecayTrace& trace) {
  std::ostringstream os;
  os << kHeader << "\n";
  for (const Sample& s : trace.samples)
    os << fmt(s.t) << "," << fmt(s.l2_sq) << "," << fmt(s.gradv_sq) << "," << fmt(s.hminus1_sq) << ","
       << fmt(s.weighted_sq) << "\n";
  return os.str();
}

DecayTrace trace_from_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != kHeader)
    throw IoError("trace CSV: missing or unexpected header line");
  DecayTrace trace;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    Sample s;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf", &s.t, &s.l2_sq, &s.gradv_sq, &s.hminus1_sq,
                    &s.weighted_sq) != 5)
      throw IoError("trace CSV: malformed row '" + line + "'");
    trace.samples.push_back(s);
  }
  return trace;
}

std::string trace_to_json(const DecayTrace& trace) {
  nlohmann::json j;
  j["version"] = kVersion;
  j["metadata"] = {{"alpha", trace.meta.alpha},
                   {"dim", trace.meta.dim},
                   {"L", trace.meta.domain.L},
                   {"tau", trace.meta.domain.tau},
                   {"t0", trace.meta.domain.t0},
                   {"basis", to_string(trace.meta.basis)},
                   {"size", trace.meta.size},
                   {"xi_max", trace.meta.xi_max},
                   {"dt", trace.meta.dt},
                   {"scheme", to_string(trace.meta.scheme)},
                   {"v_max", trace.meta.v_max},
                   {"sigma", trace.meta.sigma},
                   {"datum", trace.meta.datum},
                   {"seed", trace.meta.seed},
                   {"flags", trace.meta.flags}};
  auto column = [&](auto pick) {
    nlohmann::json arr = nlohmann::json::array();
    for (const Sample& s : trace.samples) arr.push_back(pick(s));
    return arr;
  };
  j["samples"] = {{"t", column([](const Sample& s) { return s.t; })},
                  {"l2_sq", column([](const Sample& s) { return s.l2_sq; })},
                  {"gradv_sq", column([](const Sample& s) { return s.gradv_sq; })},
                  {"hminus1_sq", column([](const Sample& s) { return s.hminus1_sq; })},
                  {"weighted_sq", column([](const Sample& s) { return s.weighted_sq; })}};
  return j.dump(2) + "\n";
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path);
  os << content;
  if (!os) throw IoError("write failed: " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open for reading: " + path);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

void write_plot_files(const DecayTrace& trace, const std::string& directory, const std::string& prefix) {
  std::filesystem::create_directories(directory);
  const struct {
    const char* name;
    double Sample::* member;
  } columns[] = {{"l2_sq", &Sample::l2_sq},
                 {"gradv_sq", &Sample::gradv_sq},
                 {"hminus1_sq", &Sample::hminus1_sq},
                 {"weighted_sq", &Sample::weighted_sq}};
  for (const auto& col : columns) {
    std::ostringstream os;
    for (const Sample& s : trace.samples) os << fmt(s.t) << " " << fmt(s.*col.member) << "\n";
    write_file((std::filesystem::path(directory) / (prefix + col.name + ".dat")).string(), os.str());
  }
}

}  // namespace kou
