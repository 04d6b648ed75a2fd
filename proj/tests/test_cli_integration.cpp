// End-to-end driver checks: artifacts, reruns, precedence, exit codes.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(KOU_BIN) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("kou_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

const std::string kFastSim =
    "--alpha 2 --size 16 --xi_max 2 --dt 0.02 --T 2 --stride 5 --datum cosine --datum_xi 1";

}  // namespace

TEST_CASE("constants run writes the full artifact set") {
  const fs::path out = scratch("constants");
  CHECK(run("constants --alpha 2 --basis_size 16 --output " + out.string()) == 0);

  auto j = nlohmann::json::parse(slurp(out / "constants.json"));
  CHECK(j["entries"].is_array());
  CHECK(j["inputs"]["alpha"].get<double>() == 2.0);
  CHECK(slurp(out / "constants.txt").find("lions") != std::string::npos);
  CHECK(slurp(out / "version.txt") == "kou 1.0.0\n");

  const std::string resolved = slurp(out / "resolved.ini");
  CHECK(resolved.find("[constants]") != std::string::npos);
  CHECK(resolved.find("alpha = 2\n") != std::string::npos);
  CHECK(resolved.find("basis_size = 16\n") != std::string::npos);
}

TEST_CASE("identical simulate configurations are byte-identical") {
  const fs::path a = scratch("sim_a"), b = scratch("sim_b"), c = scratch("sim_c");
  REQUIRE(run("simulate " + kFastSim + " --output " + a.string()) == 0);
  REQUIRE(run("simulate " + kFastSim + " --output " + b.string()) == 0);

  const std::string trace = slurp(a / "trace.csv");
  CHECK(trace == slurp(b / "trace.csv"));
  CHECK(trace.rfind("t,l2_sq,gradv_sq,hminus1_sq,weighted_sq\n", 0) == 0);
  CHECK(fs::exists(a / "trace.json"));
  CHECK(fs::exists(a / "plot_l2_sq.dat"));
  CHECK(fs::exists(a / "plot_weighted_sq.dat"));

  // The resolved configuration is a rerun recipe; the output flag outranks
  // the output key recorded inside it.
  REQUIRE(run("simulate --config " + (a / "resolved.ini").string() + " --output " + c.string()) == 0);
  CHECK(slurp(c / "trace.csv") == trace);
}

TEST_CASE("config precedence: flag over section over global") {
  const fs::path dir = scratch("precedence");
  const fs::path cfg = dir / "cfg.ini";
  spit(cfg,
       "# shared settings\n"
       "[global]\n"
       "dt = 0.04\n"
       "size = 12\n"
       "[simulate]\n"
       "dt = 0.02\n");
  const std::string base = "simulate --config " + cfg.string() +
                           " --alpha 2 --xi_max 1 --T 1 --stride 5 --datum cosine --datum_xi 1";

  const fs::path p1 = dir / "p1";
  REQUIRE(run(base + " --output " + p1.string()) == 0);
  const std::string r1 = slurp(p1 / "resolved.ini");
  CHECK(r1.find("dt = 0.02\n") != std::string::npos);   // section beats global
  CHECK(r1.find("size = 12\n") != std::string::npos);   // global fills the rest

  const fs::path p2 = dir / "p2";
  REQUIRE(run(base + " --dt 0.01 --output " + p2.string()) == 0);
  CHECK(slurp(p2 / "resolved.ini").find("dt = 0.01\n") != std::string::npos);  // flag beats section
}

TEST_CASE("output directory env var applies only without the flag") {
  const fs::path envdir = scratch("env_out"), flagdir = scratch("flag_out");
  REQUIRE(::setenv("KOU_OUTDIR", envdir.string().c_str(), 1) == 0);
  CHECK(run("constants --alpha 2 --basis_size 16") == 0);
  CHECK(fs::exists(envdir / "constants.json"));

  fs::remove(envdir / "constants.json");
  CHECK(run("constants --alpha 2 --basis_size 16 --output " + flagdir.string()) == 0);
  CHECK(fs::exists(flagdir / "constants.json"));
  CHECK_FALSE(fs::exists(envdir / "constants.json"));
  REQUIRE(::unsetenv("KOU_OUTDIR") == 0);
}

TEST_CASE("verify exits zero on certified rate, one on an inflated rate") {
  const fs::path good = scratch("verify_good");
  CHECK(run("verify --alpha 2 --size 24 --xi_max 3 --dt 0.02 --T 40 --stride 10 --seed 3 --output " +
            good.string()) == 0);
  auto jg = nlohmann::json::parse(slurp(good / "checks.json"));
  for (const auto& c : jg) CHECK(c["pass"].get<bool>());

  // Verdicts are pure functions of the inputs: a rerun reproduces them byte for byte.
  const fs::path again = scratch("verify_again");
  CHECK(run("verify --alpha 2 --size 24 --xi_max 3 --dt 0.02 --T 40 --stride 10 --seed 3 --output " +
            again.string()) == 0);
  CHECK(slurp(again / "checks.json") == slurp(good / "checks.json"));

  const fs::path bad = scratch("verify_bad");
  CHECK(run("verify --alpha 2 --lambda 5 --size 24 --xi_max 3 --dt 0.02 --T 40 --stride 10 --seed 3 "
            "--output " + bad.string()) == 1);
  auto jb = nlohmann::json::parse(slurp(bad / "checks.json"));
  bool failed_rate_check = false;
  for (const auto& c : jb)
    if (!c["pass"].get<bool>()) failed_rate_check = true;
  CHECK(failed_rate_check);
  CHECK(slurp(bad / "checks.txt").find("[FAIL]") != std::string::npos);
}

TEST_CASE("compare run writes the rate table") {
  const fs::path out = scratch("compare");
  CHECK(run("compare --alpha 2 --basis_size 16 --xi_max 2 --output " + out.string()) == 0);
  CHECK(slurp(out / "table.csv").rfind("method,rate,prefactor,provenance\n", 0) == 0);
  auto j = nlohmann::json::parse(slurp(out / "table.json"));
  CHECK(j["rows"].size() >= 3);
}

TEST_CASE("configuration errors exit two and leave an error record") {
  const fs::path dir = scratch("errors");
  const fs::path cfg = dir / "bad.ini";
  spit(cfg, "nonsense = 1\n");

  const fs::path e1 = dir / "bad_key";
  CHECK(run("constants --config " + cfg.string() + " --output " + e1.string()) == 2);
  auto j1 = nlohmann::json::parse(slurp(e1 / "error.json"));
  CHECK(j1["error"] == "invalid-parameter");
  CHECK(j1["exit_code"].get<int>() == 2);

  const fs::path e2 = dir / "bad_alpha";
  CHECK(run("constants --alpha -1 --output " + e2.string()) == 2);
  CHECK(nlohmann::json::parse(slurp(e2 / "error.json"))["error"] == "invalid-parameter");

  CHECK(run("frobnicate") == 2);
}
