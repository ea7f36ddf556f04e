#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "stpnet/experiments.hpp"
#include "stpnet/limit_analysis.hpp"
#include "stpnet/limit_ode.hpp"
#include "stpnet/limit_process.hpp"
#include "stpnet/particle.hpp"

namespace stpnet {

/// Decimal with 17 significant digits ("%.17g"), enough to round-trip.
std::string format_double(double v);

/// `t,mean_u,mean_r`, plus `u_0..u_{N-1},r_0..r_{N-1}` when snapshots exist.
std::string trajectory_csv(const Trajectory& traj);
/// `time,neuron,r_before,u_before`.
std::string events_csv(const std::vector<Event>& events);
/// `t,u,r`.
std::string limit_trajectory_csv(const LimitTrajectory& traj);
/// `u,r_nullcline_r,r_nullcline_u`.
std::string nullclines_csv(const Nullclines& nc);
/// `t,r` on the grid; spikes go to spikes_csv.
std::string limit_process_csv(const LimitProcessPath& path);
/// `time`.
std::string spikes_csv(const LimitProcessPath& path);
/// `kappa,roots`.
std::string bifurcation_csv(const BifurcationScan& scan);
/// One row per report row.
std::string report_rows_csv(const ExperimentReport& report);

nlohmann::json equilibria_json(const ModelParams& params, const std::vector<Equilibrium>& eqs);
nlohmann::json bifurcation_json(const BifurcationScan& scan);
nlohmann::json diagnostics_json(const Diagnostics& d);

/// wall_seconds is written only when include_timing is set, so reports are
/// byte-identical across reruns by default.
nlohmann::json report_to_json(const ExperimentReport& report, bool include_timing = false);
ExperimentReport report_from_json(const nlohmann::json& j);

/// Pretty-printed JSON followed by a newline.
std::string dump_json(const nlohmann::json& j);

/// Writes the whole file; throws NumericalError naming the path on failure.
void write_text_file(const std::filesystem::path& path, const std::string& content);

void write_trajectory(const Trajectory& traj, const std::filesystem::path& path);
void write_trajectory(const LimitTrajectory& traj, const std::filesystem::path& path);
void write_report(const ExperimentReport& report, const std::filesystem::path& path,
                  bool include_timing = false);

}  // namespace stpnet
