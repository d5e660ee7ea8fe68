#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "sps/asymptotics.hpp"
#include "sps/solver.hpp"

namespace sps {

/// Library version, embedded in every artifact.
const char* version();

/// Solution document: params, grid, u, phi, breakdown, m, residuals, iters,
/// converged, plus the resolved run config under "config".
nlohmann::json solution_to_json(const Solution& sol, const nlohmann::json& config = nlohmann::json::object());
/// Throws ParseError naming the first missing or malformed field.
Solution solution_from_json(const nlohmann::json& doc);

void write_solution(const std::filesystem::path& path, const Solution& sol,
                    const nlohmann::json& config = nlohmann::json::object());
Solution read_solution(const std::filesystem::path& path);

/// Header eps,lambda,m_eps,gap,eps_times_B,t_proj,e_dist,decay_rate; lambda is
/// empty for eps = 0. 17 significant digits.
void write_sweep_csv(std::ostream& os, const SweepReport& report);
/// Rows only; m_inf is taken from the eps = 0 row and the checks recomputed.
SweepReport read_sweep_csv(std::istream& is);

/// m_inf, fitted slope, eta, checks and failures.
nlohmann::json sweep_to_json(const SweepReport& report, const nlohmann::json& config = nlohmann::json::object());

/// gap vs eps and e_dist vs eps on log-log axes. Returns the written paths.
std::vector<std::filesystem::path> write_sweep_svgs(const std::filesystem::path& dir, const SweepReport& report);

/// Plain-text summary of the sweep diagnostics.
std::string sweep_summary(const SweepReport& report);

}  // namespace sps
