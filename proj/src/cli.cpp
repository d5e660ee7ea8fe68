#include "sps/cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>

#include "sps/asymptotics.hpp"
#include "sps/io.hpp"
#include "sps/solver.hpp"

namespace sps {

using nlohmann::json;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::optional<double> p, eps, lambda;
  std::vector<double> eps_list, lambda_list;
  int grid_n = GridSpec{}.n;
  double rmax = GridSpec{}.r_max;
  double stretch = GridSpec{}.stretch;
  double tol = SolverConfig{}.tol_residual;
  int max_iters = SolverConfig{}.max_iters;
  int jobs = 1;
  bool continuation = true;
  double init_amplitude = GaussianInit{}.amplitude;
  double init_width = GaussianInit{}.width;
  std::string init_file;
  std::string out;
  std::string svg;

  json to_json() const {
    json j{{"grid_n", grid_n},   {"rmax", rmax},           {"stretch", stretch},
           {"tol", tol},         {"max_iters", max_iters}, {"jobs", jobs},
           {"continuation", continuation},
           {"init_amplitude", init_amplitude},
           {"init_width", init_width}};
    if (p) j["p"] = *p;
    if (eps) j["eps"] = *eps;
    if (lambda) j["lambda"] = *lambda;
    if (!eps_list.empty()) j["eps_list"] = eps_list;
    if (!lambda_list.empty()) j["lambda_list"] = lambda_list;
    if (!init_file.empty()) j["init_file"] = init_file;
    if (!out.empty()) j["out"] = out;
    if (!svg.empty()) j["svg"] = svg;
    return j;
  }
};

template <class T>
T typed(const json& value, const std::string& key, const std::string& source) {
  try {
    return value.get<T>();
  } catch (const json::exception&) {
    throw ParseError(fmt::format("{}: key '{}' has the wrong type", source, key));
  }
}

void apply_file(RunConfig& cfg, const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ParseError(fmt::format("{}: cannot open config file", path));
  json doc;
  try {
    doc = json::parse(is);
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("{}: byte {}: {}", path, e.byte, e.what()));
  }
  if (!doc.is_object()) throw ParseError(fmt::format("{}: config must be a JSON object", path));
  for (const auto& [key, value] : doc.items()) {
    if (key == "p") cfg.p = typed<double>(value, key, path);
    else if (key == "eps") cfg.eps = typed<double>(value, key, path);
    else if (key == "lambda") cfg.lambda = typed<double>(value, key, path);
    else if (key == "eps_list") cfg.eps_list = typed<std::vector<double>>(value, key, path);
    else if (key == "lambda_list") cfg.lambda_list = typed<std::vector<double>>(value, key, path);
    else if (key == "grid_n") cfg.grid_n = typed<int>(value, key, path);
    else if (key == "rmax") cfg.rmax = typed<double>(value, key, path);
    else if (key == "stretch") cfg.stretch = typed<double>(value, key, path);
    else if (key == "tol") cfg.tol = typed<double>(value, key, path);
    else if (key == "max_iters") cfg.max_iters = typed<int>(value, key, path);
    else if (key == "jobs") cfg.jobs = typed<int>(value, key, path);
    else if (key == "continuation") cfg.continuation = typed<bool>(value, key, path);
    else if (key == "init_amplitude") cfg.init_amplitude = typed<double>(value, key, path);
    else if (key == "init_width") cfg.init_width = typed<double>(value, key, path);
    else if (key == "init_file") cfg.init_file = typed<std::string>(value, key, path);
    else if (key == "out") cfg.out = typed<std::string>(value, key, path);
    else if (key == "svg") cfg.svg = typed<std::string>(value, key, path);
    else throw ParseError(fmt::format("{}: unknown key '{}'", path, key));
  }
}

// Values given on the command line, kept apart so they can override the file.
struct Flags {
  double p = 0, eps = 0, lambda = 0, rmax = 0, stretch = 0, tol = 0;
  int grid_n = 0, max_iters = 0, jobs = 0;
  std::vector<double> eps_list, lambda_list;
  std::string out, svg, config, init_file;
  bool no_continuation = false;
  std::map<std::string, CLI::Option*> options;

  void attach(CLI::App& app) {
    options["p"] = app.add_option("--p", p, "nonlinearity exponent, 3 < p < 6");
    options["eps"] = app.add_option("--eps", eps, "mass coefficient eps >= 0");
    options["lambda"] = app.add_option("--lambda", lambda, "Coulomb coupling lambda > 0 (sets eps)");
    options["eps_list"] = app.add_option("--eps-list", eps_list, "descending eps values ending at 0")->delimiter(',');
    options["lambda_list"] =
        app.add_option("--lambda-list", lambda_list, "increasing lambda values (0 is appended to eps)")
            ->delimiter(',');
    options["grid_n"] = app.add_option("--grid-n", grid_n, "grid nodes");
    options["rmax"] = app.add_option("--rmax", rmax, "truncation radius");
    options["stretch"] = app.add_option("--stretch", stretch, "outer/inner spacing ratio (1 = uniform)");
    options["tol"] = app.add_option("--tol", tol, "residual tolerance");
    options["max_iters"] = app.add_option("--max-iters", max_iters, "descent iteration cap");
    options["jobs"] = app.add_option("--jobs", jobs, "worker threads for independent sweep rows");
    options["out"] = app.add_option("--out", out, "output path");
    options["svg"] = app.add_option("--svg", svg, "directory for SVG charts");
    options["config"] = app.add_option("--config", config, "JSON config file");
    options["init_file"] = app.add_option("--init", init_file, "initial profile (solution JSON or r,value CSV)");
    options["no_continuation"] = app.add_flag("--no-continuation", no_continuation,
                                              "solve sweep rows independently (allows --jobs)");
  }

  bool given(const char* key) const { return options.at(key)->count() > 0; }

  void apply(RunConfig& cfg) const {
    if (given("p")) cfg.p = p;
    if (given("eps")) cfg.eps = eps;
    if (given("lambda")) cfg.lambda = lambda;
    if (given("eps_list")) cfg.eps_list = eps_list;
    if (given("lambda_list")) cfg.lambda_list = lambda_list;
    if (given("grid_n")) cfg.grid_n = grid_n;
    if (given("rmax")) cfg.rmax = rmax;
    if (given("stretch")) cfg.stretch = stretch;
    if (given("tol")) cfg.tol = tol;
    if (given("max_iters")) cfg.max_iters = max_iters;
    if (given("jobs")) cfg.jobs = jobs;
    if (given("out")) cfg.out = out;
    if (given("svg")) cfg.svg = svg;
    if (given("init_file")) cfg.init_file = init_file;
    if (no_continuation) cfg.continuation = false;
  }
};

RunConfig resolve(const Flags& flags) {
  RunConfig cfg;
  std::string path = flags.config;
  if (path.empty()) {
    if (const char* env = std::getenv("SPS_LAB_CONFIG")) path = env;
  }
  if (!path.empty()) apply_file(cfg, path);
  flags.apply(cfg);
  return cfg;
}

void ensure_parent(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
}

RadialFunction load_profile(const std::string& path) {
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv") {
    std::ifstream is(path);
    if (!is) throw ParseError(fmt::format("{}: cannot open", path));
    try {
      return read_csv(is);
    } catch (const ParseError& e) {
      throw ParseError(fmt::format("{}: {}", path, e.what()));
    }
  }
  return read_solution(path).u;
}

SolverConfig solver_config(const RunConfig& cfg) {
  SolverConfig sc;
  sc.grid = GridSpec{cfg.grid_n, cfg.rmax, cfg.stretch};
  sc.tol_residual = cfg.tol;
  sc.max_iters = cfg.max_iters;
  if (!cfg.init_file.empty()) {
    sc.init = ProfileInit{load_profile(cfg.init_file)};
  } else {
    sc.init = GaussianInit{cfg.init_amplitude, cfg.init_width};
  }
  try {
    sc.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return sc;
}

double require_p(const RunConfig& cfg) {
  if (!cfg.p) throw UsageError("--p is required (3 < p < 6)");
  try {
    require_exponent(*cfg.p);
  } catch (const std::invalid_argument& e) {
    throw UsageError(fmt::format("{}; valid range is 3 < p < 6", e.what()));
  }
  return *cfg.p;
}

void print_residuals(std::ostream& out, const Residuals& r) {
  out << fmt::format("  {:<10} {:>12.3e}\n  {:<10} {:>12.3e}\n  {:<10} {:>12.3e}\n  {:<10} {:>12.3e}\n", "nehari",
                     r.nehari, "pohozaev", r.pohozaev, "manifold", r.manifold, "ode_sup", r.ode_sup);
}

int cmd_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const double p = require_p(cfg);
  if (cfg.eps.has_value() == cfg.lambda.has_value()) throw UsageError("give exactly one of --eps and --lambda");
  ProblemParams params;
  try {
    params = cfg.eps ? ProblemParams::from_eps(p, *cfg.eps) : ProblemParams::from_lambda(p, *cfg.lambda);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const SolverConfig sc = solver_config(cfg);
  const std::string path = cfg.out.empty() ? "solution.json" : cfg.out;

  int code = exit_ok;
  Solution sol = [&] {
    try {
      return ground_state(params, sc);
    } catch (const NotConverged& e) {
      err << e.what() << '\n';
      code = exit_not_converged;
      return e.best();
    }
  }();
  ensure_parent(path);
  write_solution(path, sol, cfg.to_json());
  out << fmt::format("p = {}  eps = {}\n", params.p, params.eps);
  out << fmt::format("m = {:.12g}\n", sol.m);
  out << "residuals (relative):\n";
  print_residuals(out, sol.residuals);
  out << fmt::format("iterations: {} ({})\n", sol.iters, sol.converged ? "converged" : "not converged");
  out << fmt::format("min M(u) over iterates: {:.6g}\n", sol.min_m_functional);
  out << fmt::format("wrote {}\n", path);
  return code;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const double p = require_p(cfg);
  if (cfg.eps_list.empty() == cfg.lambda_list.empty()) {
    throw UsageError("give exactly one of --eps-list and --lambda-list");
  }
  std::vector<double> eps_list = cfg.eps_list;
  if (!cfg.lambda_list.empty()) {
    try {
      for (double lambda : cfg.lambda_list) eps_list.push_back(eps_of_lambda(lambda, p));
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    eps_list.push_back(0.0);
  }
  if (eps_list.back() != 0.0 || !std::is_sorted(eps_list.rbegin(), eps_list.rend()) ||
      std::adjacent_find(eps_list.begin(), eps_list.end()) != eps_list.end()) {
    throw UsageError("eps list must be strictly decreasing and end at 0");
  }
  if (cfg.jobs < 1) throw UsageError("--jobs must be >= 1");
  const SolverConfig sc = solver_config(cfg);
  SweepOptions options;
  options.continuation = cfg.continuation;
  options.jobs = cfg.jobs;

  const SweepReport report = sweep(p, eps_list, sc, options);
  const std::filesystem::path csv = cfg.out.empty() ? "sweep.csv" : cfg.out;
  ensure_parent(csv);
  {
    std::ofstream os(csv);
    if (!os) throw std::runtime_error(fmt::format("cannot write {}", csv.string()));
    write_sweep_csv(os, report);
  }
  std::filesystem::path json_path = csv;
  json_path.replace_extension(".json");
  {
    std::ofstream os(json_path);
    if (!os) throw std::runtime_error(fmt::format("cannot write {}", json_path.string()));
    os << sweep_to_json(report, cfg.to_json()).dump(1) << '\n';
  }
  if (!cfg.svg.empty()) write_sweep_svgs(cfg.svg, report);
  out << sweep_summary(report);
  out << fmt::format("wrote {} and {}\n", csv.string(), json_path.string());
  if (report.partial || !report.checks.all_converged) {
    err << "sweep incomplete: some rows did not converge\n";
    return exit_not_converged;
  }
  if (!report.checks.all()) {
    err << "sweep invariant violated\n";
    return exit_verification;
  }
  return exit_ok;
}

int cmd_verify(const RunConfig& cfg, const std::string& path, bool tol_given, std::ostream& out,
               std::ostream& err) {
  const Solution sol = read_solution(path);
  const VerifyReport report = verify(sol, tol_given ? cfg.tol : 1e-6);
  out << fmt::format("{}: p = {}  eps = {}  n = {}\n", path, sol.params.p, sol.params.eps, sol.u.grid().size());
  if (report.empty) {
    err << "empty solution\n";
    return exit_verification;
  }
  out << fmt::format("m = {:.12g}\nresiduals (relative, tol {:.1e}):\n", energy(effective_breakdown(report.bd, sol.params), sol.params.eps), report.tol);
  print_residuals(out, report.residuals);
  if (!report.passed) {
    err << "identity violated\n";
    return exit_verification;
  }
  out << "ok\n";
  return exit_ok;
}

int cmd_report(const RunConfig& cfg, const std::string& path, std::ostream& out) {
  std::ifstream is(path);
  if (!is) throw ParseError(fmt::format("{}: cannot open", path));
  SweepReport report;
  try {
    report = read_sweep_csv(is);
  } catch (const ParseError& e) {
    throw ParseError(fmt::format("{}: {}", path, e.what()));
  }
  const std::filesystem::path dir =
      cfg.svg.empty() ? std::filesystem::path(path).parent_path() / "charts" : std::filesystem::path(cfg.svg);
  const auto written = write_sweep_svgs(dir, report);
  const std::string summary = sweep_summary(report);
  out << summary;
  if (!cfg.out.empty()) {
    ensure_parent(cfg.out);
    std::ofstream os(cfg.out);
    if (!os) throw std::runtime_error(fmt::format("cannot write {}", cfg.out));
    os << summary;
  }
  for (const auto& w : written) out << fmt::format("wrote {}\n", w.string());
  return exit_ok;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{fmt::format("sps_lab {}: radial ground states of the Schrodinger-Poisson-Slater equation", version()),
               "sps_lab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", version());

  Flags solve_flags, sweep_flags, verify_flags, report_flags;
  CLI::App* solve = app.add_subcommand("solve", "compute one ground state");
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "ground states along a descending eps list");
  CLI::App* verify_cmd = app.add_subcommand("verify", "recheck the identities of a solution file");
  CLI::App* report = app.add_subcommand("report", "charts and summary of a sweep CSV");
  solve_flags.attach(*solve);
  sweep_flags.attach(*sweep_cmd);
  verify_flags.attach(*verify_cmd);
  report_flags.attach(*report);
  std::string verify_path, report_path;
  verify_cmd->add_option("solution", verify_path, "solution JSON")->required();
  report->add_option("sweep", report_path, "sweep CSV")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return exit_usage;
  }

  try {
    if (solve->parsed()) return cmd_solve(resolve(solve_flags), out, err);
    if (sweep_cmd->parsed()) return cmd_sweep(resolve(sweep_flags), out, err);
    if (verify_cmd->parsed()) {
      return cmd_verify(resolve(verify_flags), verify_path, verify_flags.given("tol"), out, err);
    }
    return cmd_report(resolve(report_flags), report_path, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return exit_usage;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return exit_usage;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << '\n';
    return exit_usage;
  } catch (const SolverError& e) {
    err << e.what() << '\n';
    return exit_not_converged;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  }
}

}  // namespace sps
