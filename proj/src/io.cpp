#include "sps/io.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#ifndef SPS_VERSION
#define SPS_VERSION "0.0.0"
#endif

namespace sps {

using nlohmann::json;

namespace {

const char* const kSweepHeader = "eps,lambda,m_eps,gap,eps_times_B,t_proj,e_dist,decay_rate";

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

const json& field(const json& doc, const char* key, const std::string& where) {
  if (!doc.is_object() || !doc.contains(key)) {
    throw ParseError(fmt::format("{}: missing field '{}'", where, key));
  }
  return doc.at(key);
}

double scalar(const json& doc, const char* key, const std::string& where) {
  const json& v = field(doc, key, where);
  if (v.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (!v.is_number()) throw ParseError(fmt::format("{}.{}: expected a number", where, key));
  return v.get<double>();
}

std::vector<double> samples(const json& doc, const char* key, std::size_t n) {
  const json& v = field(doc, key, "solution");
  if (!v.is_array()) throw ParseError(fmt::format("solution.{}: expected an array", key));
  if (v.size() != n) {
    throw ParseError(fmt::format("solution.{}: {} values for a grid of {} nodes", key, v.size(), n));
  }
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!v[i].is_number()) throw ParseError(fmt::format("solution.{}[{}]: expected a number", key, i));
    out[i] = v[i].get<double>();
    if (!std::isfinite(out[i])) throw ParseError(fmt::format("solution.{}[{}]: not finite", key, i));
  }
  return out;
}

double parse_cell(const std::string& text, int line, const char* column) {
  std::istringstream ss(text);
  double x = 0.0;
  std::string rest;
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (!(ss >> x) || (ss >> rest)) {
    throw ParseError(fmt::format("line {}: column {}: '{}' is not a number", line, column, text));
  }
  return x;
}

std::string tick_label(int decade) { return fmt::format("1e{}", decade); }

std::string log_log_chart(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                          const std::vector<std::pair<double, double>>& points) {
  const double width = 640, height = 420, left = 80, right = 20, top = 40, bottom = 60;
  std::vector<std::pair<double, double>> pts;
  for (const auto& [x, y] : points) {
    if (x > 0.0 && y > 0.0 && std::isfinite(x) && std::isfinite(y)) pts.emplace_back(std::log10(x), std::log10(y));
  }
  std::string out = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" viewBox=\"0 0 {:.0f} {:.0f}\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      "<text x=\"{:.1f}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">{}</text>\n",
      width, height, width, height, width / 2, title);
  if (pts.empty()) return out + "</svg>\n";

  auto [xmin_it, xmax_it] = std::minmax_element(pts.begin(), pts.end());
  int x0 = static_cast<int>(std::floor(xmin_it->first)), x1 = static_cast<int>(std::ceil(xmax_it->first));
  double ylo = pts[0].second, yhi = pts[0].second;
  for (const auto& pt : pts) {
    ylo = std::min(ylo, pt.second);
    yhi = std::max(yhi, pt.second);
  }
  int y0 = static_cast<int>(std::floor(ylo)), y1 = static_cast<int>(std::ceil(yhi));
  if (x1 == x0) ++x1;
  if (y1 == y0) ++y1;
  const double pw = width - left - right, ph = height - top - bottom;
  auto sx = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto sy = [&](double y) { return top + (y1 - y) / (y1 - y0) * ph; };

  out += fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"none\" stroke=\"black\"/>\n",
                     left, top, pw, ph);
  for (int d = x0; d <= x1; ++d) {
    out += fmt::format(
        "<line x1=\"{0:.1f}\" y1=\"{1:.1f}\" x2=\"{0:.1f}\" y2=\"{2:.1f}\" stroke=\"#ddd\"/>\n"
        "<text x=\"{0:.1f}\" y=\"{3:.1f}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">{4}</text>\n",
        sx(d), top, top + ph, top + ph + 18, tick_label(d));
  }
  for (int d = y0; d <= y1; ++d) {
    out += fmt::format(
        "<line x1=\"{1:.1f}\" y1=\"{0:.1f}\" x2=\"{2:.1f}\" y2=\"{0:.1f}\" stroke=\"#ddd\"/>\n"
        "<text x=\"{3:.1f}\" y=\"{4:.1f}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">{5}</text>\n",
        sy(d), left, left + pw, left - 6, sy(d) + 4, tick_label(d));
  }
  out += fmt::format(
      "<text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">{}</text>\n",
      left + pw / 2, height - 16, xlabel);
  out += fmt::format(
      "<text x=\"18\" y=\"{0:.1f}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" "
      "transform=\"rotate(-90 18 {0:.1f})\">{1}</text>\n",
      top + ph / 2, ylabel);
  std::sort(pts.begin(), pts.end());
  out += "<polyline fill=\"none\" stroke=\"#1f5fa8\" stroke-width=\"2\" points=\"";
  for (std::size_t k = 0; k < pts.size(); ++k) {
    out += fmt::format("{}{:.2f},{:.2f}", k ? " " : "", sx(pts[k].first), sy(pts[k].second));
  }
  out += "\"/>\n";
  for (const auto& pt : pts) {
    out += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"4\" fill=\"#1f5fa8\"/>\n", sx(pt.first), sy(pt.second));
  }
  return out + "</svg>\n";
}

json checks_to_json(const SweepChecks& c) {
  return json{{"gap_positive", c.gap_positive},
              {"gap_nonincreasing", c.gap_nonincreasing},
              {"eps_times_B_nonincreasing", c.eps_b_nonincreasing},
              {"t_proj_in_unit_interval", c.t_proj_in_unit_interval},
              {"t_proj_approaches_one", c.t_proj_nonincreasing},
              {"e_dist_nonincreasing", c.e_dist_nonincreasing},
              {"sandwich", c.sandwich},
              {"all_converged", c.all_converged}};
}

}  // namespace

const char* version() { return SPS_VERSION; }

json solution_to_json(const Solution& sol, const json& config) {
  json params{{"p", sol.params.p}, {"eps", sol.params.eps}, {"coupling", sol.params.coupling}};
  if (sol.params.lambda) params["lambda"] = *sol.params.lambda;
  const RadialGrid& grid = sol.u.grid();
  return json{
      {"version", version()},
      {"config", config},
      {"params", params},
      {"grid", {{"n", grid.size()}, {"r_max", grid.r_max()}, {"stretch", grid.stretch()}}},
      {"u", std::vector<double>(sol.u.values().begin(), sol.u.values().end())},
      {"phi", std::vector<double>(sol.phi.values().begin(), sol.phi.values().end())},
      {"breakdown", {{"A", sol.bd.A}, {"B", sol.bd.B}, {"C", sol.bd.C}, {"D", sol.bd.D}}},
      {"m", sol.m},
      {"residuals",
       {{"nehari", number(sol.residuals.nehari)},
        {"pohozaev", number(sol.residuals.pohozaev)},
        {"manifold", number(sol.residuals.manifold)},
        {"ode_sup", number(sol.residuals.ode_sup)}}},
      {"iters", sol.iters},
      {"converged", sol.converged},
      {"min_m_functional", sol.min_m_functional},
  };
}

Solution solution_from_json(const json& doc) {
  const json& params_doc = field(doc, "params", "solution");
  ProblemParams params;
  params.p = scalar(params_doc, "p", "solution.params");
  params.eps = scalar(params_doc, "eps", "solution.params");
  if (params_doc.contains("lambda")) params.lambda = scalar(params_doc, "lambda", "solution.params");
  if (params_doc.contains("coupling")) params.coupling = scalar(params_doc, "coupling", "solution.params");
  try {
    params.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(fmt::format("solution.params: {}", e.what()));
  }

  const json& grid_doc = field(doc, "grid", "solution");
  const json& n_doc = field(grid_doc, "n", "solution.grid");
  if (!n_doc.is_number_integer()) throw ParseError("solution.grid.n: expected an integer");
  GridPtr grid;
  try {
    grid = make_grid(n_doc.get<int>(), scalar(grid_doc, "r_max", "solution.grid"),
                     scalar(grid_doc, "stretch", "solution.grid"));
  } catch (const std::invalid_argument& e) {
    throw ParseError(fmt::format("solution.grid: {}", e.what()));
  }
  const std::size_t n = static_cast<std::size_t>(grid->size());
  RadialFunction u(grid, samples(doc, "u", n));
  RadialFunction phi(grid, samples(doc, "phi", n));

  const json& bd_doc = field(doc, "breakdown", "solution");
  EnergyBreakdown bd{scalar(bd_doc, "A", "solution.breakdown"), scalar(bd_doc, "B", "solution.breakdown"),
                     scalar(bd_doc, "C", "solution.breakdown"), scalar(bd_doc, "D", "solution.breakdown"), params.p};
  const json& res_doc = field(doc, "residuals", "solution");
  Residuals residuals;
  residuals.nehari = scalar(res_doc, "nehari", "solution.residuals");
  residuals.pohozaev = scalar(res_doc, "pohozaev", "solution.residuals");
  residuals.ode_sup = scalar(res_doc, "ode_sup", "solution.residuals");
  if (res_doc.contains("manifold")) residuals.manifold = scalar(res_doc, "manifold", "solution.residuals");

  const json& iters_doc = field(doc, "iters", "solution");
  if (!iters_doc.is_number_integer()) throw ParseError("solution.iters: expected an integer");
  const json& conv_doc = field(doc, "converged", "solution");
  if (!conv_doc.is_boolean()) throw ParseError("solution.converged: expected a boolean");

  Solution sol{params, std::move(u), std::move(phi), bd, scalar(doc, "m", "solution"), residuals,
               iters_doc.get<int>(), conv_doc.get<bool>(), 0.0, {}};
  if (doc.contains("min_m_functional")) sol.min_m_functional = scalar(doc, "min_m_functional", "solution");
  return sol;
}

void write_solution(const std::filesystem::path& path, const Solution& sol, const json& config) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  os << solution_to_json(sol, config).dump(1) << '\n';
}

Solution read_solution(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ParseError(fmt::format("{}: cannot open", path.string()));
  json doc;
  try {
    doc = json::parse(is);
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("{}: byte {}: {}", path.string(), e.byte, e.what()));
  }
  try {
    return solution_from_json(doc);
  } catch (const ParseError& e) {
    throw ParseError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

void write_sweep_csv(std::ostream& os, const SweepReport& report) {
  os << kSweepHeader << '\n';
  for (const SweepRow& row : report.rows) {
    os << fmt::format("{:.17g},{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", row.eps,
                      row.lambda ? fmt::format("{:.17g}", *row.lambda) : std::string(), row.m_eps, row.gap,
                      row.eps_times_B, row.t_proj, row.e_dist, row.decay_rate);
  }
}

SweepReport read_sweep_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ParseError("line 1: empty sweep file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kSweepHeader) throw ParseError(fmt::format("line 1: expected header '{}'", kSweepHeader));
  static const char* const columns[] = {"eps", "lambda", "m_eps", "gap", "eps_times_B", "t_proj", "e_dist", "decay_rate"};
  SweepReport report;
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (cells.size() != 8) {
      throw ParseError(fmt::format("line {}: expected 8 columns, got {}", line_no, cells.size()));
    }
    SweepRow row;
    row.eps = parse_cell(cells[0], line_no, columns[0]);
    if (!cells[1].empty()) row.lambda = parse_cell(cells[1], line_no, columns[1]);
    row.m_eps = parse_cell(cells[2], line_no, columns[2]);
    row.gap = parse_cell(cells[3], line_no, columns[3]);
    row.eps_times_B = parse_cell(cells[4], line_no, columns[4]);
    row.t_proj = parse_cell(cells[5], line_no, columns[5]);
    row.e_dist = parse_cell(cells[6], line_no, columns[6]);
    row.decay_rate = parse_cell(cells[7], line_no, columns[7]);
    if (!report.rows.empty() && !(row.eps < report.rows.back().eps)) {
      throw ParseError(fmt::format("line {}: eps must be strictly decreasing", line_no));
    }
    report.rows.push_back(row);
  }
  if (report.rows.empty()) throw ParseError(fmt::format("line {}: no rows", line_no));
  if (report.rows.back().eps != 0.0) throw ParseError(fmt::format("line {}: last row must have eps = 0", line_no));
  report.m_inf = report.rows.back().m_eps;
  // The projection energy is not part of the table; the sandwich check is only
  // available from a live sweep.
  for (SweepRow& row : report.rows) row.energy_at_projection = std::numeric_limits<double>::quiet_NaN();
  evaluate_sweep(report);
  report.checks.sandwich = true;
  return report;
}

json sweep_to_json(const SweepReport& report, const json& config) {
  json rows = json::array();
  for (const SweepRow& row : report.rows) {
    rows.push_back(json{{"eps", row.eps},
                        {"lambda", row.lambda ? json(*row.lambda) : json(nullptr)},
                        {"m_eps", row.m_eps},
                        {"gap", row.gap},
                        {"eps_times_B", row.eps_times_B},
                        {"t_proj", row.t_proj},
                        {"e_dist", row.e_dist},
                        {"decay_rate", number(row.decay_rate)},
                        {"energy_at_projection", number(row.energy_at_projection)},
                        {"min_m_functional", row.min_m_functional},
                        {"iters", row.iters},
                        {"converged", row.converged}});
  }
  return json{{"version", version()},
              {"config", config},
              {"p", report.p},
              {"m_inf", report.m_inf},
              {"e_norm_inf", report.e_norm_inf},
              {"slope", number(report.slope)},
              {"eta", report.eta},
              {"partial", report.partial},
              {"failures", report.failures},
              {"checks", checks_to_json(report.checks)},
              {"passed", report.checks.all() && !report.partial},
              {"rows", rows}};
}

std::vector<std::filesystem::path> write_sweep_svgs(const std::filesystem::path& dir, const SweepReport& report) {
  std::filesystem::create_directories(dir);
  std::vector<std::pair<double, double>> gap, dist;
  for (const SweepRow& row : report.rows) {
    gap.emplace_back(row.eps, row.gap);
    dist.emplace_back(row.eps, row.e_dist);
  }
  const std::vector<std::pair<std::filesystem::path, std::string>> charts = {
      {dir / "gap_vs_eps.svg", log_log_chart("m_eps - m_inf", "eps", "gap", gap)},
      {dir / "e_dist_vs_eps.svg", log_log_chart("E-distance to the limit profile", "eps", "e_dist", dist)},
  };
  std::vector<std::filesystem::path> written;
  for (const auto& [path, body] : charts) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
    os << body;
    written.push_back(path);
  }
  return written;
}

std::string sweep_summary(const SweepReport& report) {
  std::string out = fmt::format("sps_lab {} sweep summary\n", version());
  out += fmt::format("m_inf = {:.10g}\n", report.m_inf);
  out += fmt::format("{:>10} {:>14} {:>12} {:>12} {:>10} {:>12} {:>10}\n", "eps", "m_eps", "gap", "eps*B",
                     "t_proj", "e_dist", "decay");
  for (const SweepRow& row : report.rows) {
    out += fmt::format("{:>10.4g} {:>14.10g} {:>12.6g} {:>12.6g} {:>10.7f} {:>12.6g} {:>10.4g}\n", row.eps, row.m_eps,
                       row.gap, row.eps_times_B, row.t_proj, row.e_dist, row.decay_rate);
  }
  const SweepChecks& c = report.checks;
  auto flag = [](bool ok) { return ok ? "ok" : "FAIL"; };
  out += fmt::format("log-log slope of gap over the three smallest eps: {:.4f}\n", report.slope);
  out += fmt::format("gap > 0: {}\n", flag(c.gap_positive));
  out += fmt::format("gap non-increasing: {}\n", flag(c.gap_nonincreasing));
  out += fmt::format("eps*B non-increasing: {}\n", flag(c.eps_b_nonincreasing));
  out += fmt::format("t_proj in (0,1): {}\n", flag(c.t_proj_in_unit_interval));
  out += fmt::format("|t_proj - 1| non-increasing: {}\n", flag(c.t_proj_nonincreasing));
  out += fmt::format("e_dist non-increasing: {}\n", flag(c.e_dist_nonincreasing));
  if (report.partial) out += "report is partial: some rows failed\n";
  for (const std::string& f : report.failures) out += fmt::format("failure: {}\n", f);
  return out;
}

}  // namespace sps
