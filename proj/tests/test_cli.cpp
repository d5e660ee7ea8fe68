#include <doctest.h>

#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include <json.hpp>

#include "sps/cli.hpp"

using namespace sps;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("sps_cli_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

nlohmann::json load(const fs::path& path) { return nlohmann::json::parse(slurp(path)); }

void write(const fs::path& path, const std::string& text) { std::ofstream(path) << text; }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors") {
  CHECK(run({"solve", "--p", "2.5", "--eps", "1"}).code == exit_usage);
  const Run r = run({"solve", "--p", "7", "--eps", "1"});
  CHECK(r.code == exit_usage);
  CHECK(r.err.find("3 < p < 6") != std::string::npos);
  CHECK(run({"solve", "--p", "4"}).code == exit_usage);
  CHECK(run({"solve", "--p", "4", "--eps", "1", "--lambda", "1"}).code == exit_usage);
  CHECK(run({"solve", "--p", "4", "--eps", "-1"}).code == exit_usage);
  CHECK(run({"solve", "--p", "4", "--eps", "1", "--grid-n", "4"}).code == exit_usage);
  CHECK(run({"sweep", "--p", "4", "--eps-list", "1,0.5"}).code == exit_usage);
  CHECK(run({"bogus"}).code == exit_usage);
  CHECK(run({}).code == exit_usage);
  CHECK(run({"--version"}).code == exit_ok);
}

TEST_CASE("solve, verify and corrupt") {
  const fs::path dir = scratch_dir("solve");
  const fs::path sol = dir / "sol.json";
  const Run solved = run({"solve", "--p", "4", "--eps", "1", "--out", sol.string()});
  REQUIRE(solved.code == exit_ok);
  CHECK(solved.out.find("converged") != std::string::npos);
  const nlohmann::json doc = load(sol);
  for (const char* key : {"nehari", "pohozaev", "manifold", "ode_sup"}) {
    CHECK(doc["residuals"][key].get<double>() < doc["config"]["tol"].get<double>());
  }
  CHECK(doc["version"] == "0.3.0");
  CHECK(doc["config"]["p"] == 4.0);

  CHECK(run({"verify", sol.string()}).code == exit_ok);

  nlohmann::json bad = doc;
  for (auto& x : bad["u"]) x = x.get<double>() * 1.1;
  write(dir / "bad.json", bad.dump());
  const Run corrupted = run({"verify", (dir / "bad.json").string()});
  CHECK(corrupted.code == exit_verification);
  CHECK(corrupted.err.find("identity violated") != std::string::npos);

  nlohmann::json empty = doc;
  for (auto& x : empty["u"]) x = 0.0;
  write(dir / "empty.json", empty.dump());
  const Run zero = run({"verify", (dir / "empty.json").string()});
  CHECK(zero.code == exit_verification);
  CHECK(zero.err.find("empty solution") != std::string::npos);

  write(dir / "trunc.json", slurp(sol).substr(0, 200));
  const Run trunc = run({"verify", (dir / "trunc.json").string()});
  CHECK(trunc.code == exit_usage);
  CHECK(trunc.err.find("byte") != std::string::npos);

  nlohmann::json missing = doc;
  missing.erase("params");
  write(dir / "missing.json", missing.dump());
  const Run miss = run({"verify", (dir / "missing.json").string()});
  CHECK(miss.code == exit_usage);
  CHECK(miss.err.find("params") != std::string::npos);

  fs::remove_all(dir);
}

TEST_CASE("lambda sets eps") {
  const fs::path dir = scratch_dir("lambda");
  const fs::path sol = dir / "s.json";
  REQUIRE(run({"solve", "--p", "4", "--lambda", "4", "--out", sol.string()}).code == exit_ok);
  const nlohmann::json doc = load(sol);
  CHECK(doc["params"]["eps"].get<double>() == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(doc["params"]["lambda"].get<double>() == 4.0);
  fs::remove_all(dir);
}

TEST_CASE("non-convergence still writes the artifact") {
  const fs::path dir = scratch_dir("maxit");
  const fs::path sol = dir / "s.json";
  const Run r = run({"solve", "--p", "4", "--eps", "1", "--max-iters", "2", "--out", sol.string()});
  CHECK(r.code == exit_not_converged);
  REQUIRE(fs::exists(sol));
  CHECK(load(sol)["converged"] == false);
  fs::remove_all(dir);
}

TEST_CASE("config file and overrides") {
  const fs::path dir = scratch_dir("config");
  const fs::path cfg = dir / "cfg.json";
  write(cfg, R"({"p": 4, "eps": 1, "grid_n": 2001, "max_iters": 3})");
  const fs::path sol = dir / "s.json";
  CHECK(run({"solve", "--config", cfg.string(), "--out", sol.string()}).code == exit_not_converged);
  CHECK(load(sol)["grid"]["n"] == 2001);
  CHECK(run({"solve", "--config", cfg.string(), "--max-iters", "500", "--out", sol.string()}).code == exit_ok);
  CHECK(load(sol)["config"]["max_iters"] == 500);

  write(dir / "unknown.json", R"({"p": 4, "colour": 1})");
  const Run unknown = run({"solve", "--config", (dir / "unknown.json").string()});
  CHECK(unknown.code == exit_usage);
  CHECK(unknown.err.find("colour") != std::string::npos);

  write(dir / "typed.json", R"({"p": "four"})");
  CHECK(run({"solve", "--config", (dir / "typed.json").string()}).code == exit_usage);

  ::setenv("SPS_LAB_CONFIG", cfg.string().c_str(), 1);
  CHECK(run({"solve", "--max-iters", "500", "--out", sol.string()}).code == exit_ok);
  ::unsetenv("SPS_LAB_CONFIG");
  fs::remove_all(dir);
}

TEST_CASE("sweep, report and determinism") {
  const fs::path dir = scratch_dir("sweep");
  const std::vector<std::string> args{"sweep", "--p", "4", "--eps-list", "1,0.3,0.1,0.03,0.01,0", "--grid-n",
                                      "2001"};
  auto with_out = [&](const fs::path& out) {
    std::vector<std::string> a = args;
    a.push_back("--out");
    a.push_back(out.string());
    return a;
  };
  // the output path is part of the echoed config, so both runs write to the same place
  CHECK(run(with_out(dir / "a.csv")).code == exit_ok);
  const std::string csv1 = slurp(dir / "a.csv"), json1 = slurp(dir / "a.json");
  CHECK(run(with_out(dir / "a.csv")).code == exit_ok);
  CHECK(slurp(dir / "a.csv") == csv1);
  CHECK(slurp(dir / "a.json") == json1);

  const std::string csv = slurp(dir / "a.csv");
  CHECK(csv.rfind("eps,lambda,m_eps,gap,eps_times_B,t_proj,e_dist,decay_rate\n", 0) == 0);
  const nlohmann::json summary = load(dir / "a.json");
  CHECK(summary.contains("m_inf"));
  CHECK(summary.contains("slope"));
  CHECK(summary["config"]["grid_n"] == 2001);

  const Run rep = run({"report", (dir / "a.csv").string(), "--svg", (dir / "out").string(), "--out",
                       (dir / "summary.txt").string()});
  CHECK(rep.code == exit_ok);
  CHECK(fs::exists(dir / "out" / "gap_vs_eps.svg"));
  CHECK(fs::exists(dir / "out" / "e_dist_vs_eps.svg"));
  CHECK(fs::file_size(dir / "summary.txt") > 0);

  write(dir / "broken.csv", "eps,lambda,m_eps,gap,eps_times_B,t_proj,e_dist,decay_rate\n1,1,2,3\n");
  const Run broken = run({"report", (dir / "broken.csv").string()});
  CHECK(broken.code == exit_usage);
  CHECK(broken.err.find("line 2") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("lambda list appends the limit") {
  const fs::path dir = scratch_dir("lambdalist");
  const Run r = run({"sweep", "--p", "4", "--lambda-list", "1,4,16", "--grid-n", "2001", "--jobs", "2",
                     "--no-continuation", "--out", (dir / "s.csv").string()});
  CHECK(r.code != exit_usage);
  const std::string csv = slurp(dir / "s.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
  CHECK(csv.find("\n0,,") != std::string::npos);
  fs::remove_all(dir);
}

}
