#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

Result run(const std::string& args) {
  const std::string cmd = std::string(STPNET_CLI_PATH) + " " + args + " 2>/dev/null";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  while (const std::size_t got = std::fread(buf.data(), 1, buf.size(), pipe)) {
    r.out.append(buf.data(), got);
  }
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("stpnet_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

const std::string kReferenceConfig = std::string(STPNET_SOURCE_DIR) + "/paper.toml";

}  // namespace

TEST_CASE("cli: usage errors exit 2") {
  CHECK(run("").code == 2);
  CHECK(run("frobnicate").code == 2);
  CHECK(run("simulate --no-such-flag").code == 2);
  CHECK(run("simulate --config /nonexistent/file.toml --seed 1").code == 2);
  CHECK(run("--help").code == 0);
  const auto dir = scratch("usage");
  // Stochastic subcommands refuse to run without a seed.
  CHECK(run("simulate --n 10 --horizon 0.1 --output " + dir.string()).code == 2);
  CHECK(run("simulate --init 1 --seed 1 --output " + dir.string()).code == 2);
  CHECK(run("convergence --seed 1 --n-list 10,20 --output " + dir.string()).code == 2);
}

TEST_CASE("cli: config errors and numerical errors") {
  const auto dir = scratch("errors");
  {
    std::ofstream f(dir / "bad_a.toml");
    f << "[rate]\na = 1.5\n";
  }
  CHECK(run("validate --config " + (dir / "bad_a.toml").string()).code == 2);
  {
    std::ofstream f(dir / "typo.toml");
    f << "[model]\nalhpa = 1\n";
  }
  CHECK(run("validate --config " + (dir / "typo.toml").string()).code == 2);
  {
    std::ofstream f(dir / "weak.toml");
    f << "[model]\nalpha = 1.0\n";
  }
  // No stable upper equilibrium to start from.
  CHECK(run("memory --seed 1 --config " + (dir / "weak.toml").string() + " --output " +
            (dir / "out").string())
            .code == 3);
}

TEST_CASE("cli: validate and equilibria") {
  const auto v = run("validate --config " + kReferenceConfig);
  CHECK(v.code == 0);
  CHECK(v.out.find("0.99796") != std::string::npos);

  const auto dir = scratch("equilibria");
  const auto e = run("equilibria --config " + kReferenceConfig + " --output " + dir.string());
  REQUIRE(e.code == 0);
  const auto j = nlohmann::json::parse(slurp(dir / "equilibria.json"));
  CHECK(nlohmann::json::parse(e.out) == j);
  REQUIRE(j["count"] == 3);
  CHECK(j["equilibria"][0]["stability"] == "stable");
  CHECK(j["equilibria"][1]["stability"] == "saddle");
  CHECK(j["equilibria"][2]["stability"] == "stable");
  CHECK(fs::exists(dir / "resolved_config.toml"));
}

TEST_CASE("cli: simulate is reproducible byte for byte") {
  const auto a = scratch("sim_a");
  const auto b = scratch("sim_b");
  const std::string args = "simulate --n 1000 --init 2,1 --horizon 5 --seed 7 --output ";
  // Same output directory both times: the resolved config records it.
  REQUIRE(run(args + a.string()).code == 0);
  fs::copy(a, b, fs::copy_options::recursive);
  REQUIRE(run(args + a.string()).code == 0);
  for (const char* name : {"trajectory.csv", "events.csv", "summary.json", "resolved_config.toml"}) {
    CAPTURE(name);
    REQUIRE(fs::exists(a / name));
    CHECK(slurp(a / name) == slurp(b / name));
  }
  // The resolved config reproduces the run.
  const auto c = scratch("sim_c");
  REQUIRE(run("simulate --config " + (a / "resolved_config.toml").string() + " --output " +
              c.string())
              .code == 0);
  CHECK(slurp(a / "trajectory.csv") == slurp(c / "trajectory.csv"));

  const auto d = scratch("sim_d");
  REQUIRE(run("simulate --n 1000 --init 2,1 --horizon 5 --seed 8 --output " + d.string()).code ==
          0);
  CHECK(slurp(a / "trajectory.csv") != slurp(d / "trajectory.csv"));
}

TEST_CASE("cli: deterministic subcommands write their outputs") {
  const auto dir = scratch("det");
  CHECK(run("limit-ode --init 2,1 --horizon 2 --grid 5 --output " + dir.string()).code == 0);
  CHECK(slurp(dir / "limit.csv").rfind("t,u,r\n", 0) == 0);
  CHECK(run("nullclines --output " + dir.string()).code == 0);
  CHECK(fs::exists(dir / "nullclines.csv"));
  CHECK(run("bifurcation --output " + dir.string()).code == 0);
  const auto j = nlohmann::json::parse(slurp(dir / "bifurcation.json"));
  CHECK(j.contains("kappa_c"));
}
