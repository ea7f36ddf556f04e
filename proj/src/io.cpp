#include "stpnet/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "stpnet/error.hpp"

namespace stpnet {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trajectory_csv(const Trajectory& traj) {
  const bool snapshots = !traj.u_snapshots.empty();
  std::ostringstream out;
  out << "t,mean_u,mean_r";
  if (snapshots) {
    for (std::size_t i = 0; i < traj.n; ++i) out << ",u_" << i;
    for (std::size_t i = 0; i < traj.n; ++i) out << ",r_" << i;
  }
  out << '\n';
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    out << format_double(traj.times[k]) << ',' << format_double(traj.mean_u[k]) << ','
        << format_double(traj.mean_r[k]);
    if (snapshots) {
      for (const double v : traj.u_snapshots[k]) out << ',' << format_double(v);
      for (const double v : traj.r_snapshots[k]) out << ',' << format_double(v);
    }
    out << '\n';
  }
  return out.str();
}

std::string events_csv(const std::vector<Event>& events) {
  std::ostringstream out;
  out << "time,neuron,r_before,u_before\n";
  for (const auto& e : events) {
    out << format_double(e.time) << ',' << e.neuron << ',' << format_double(e.r_before) << ','
        << format_double(e.u_before) << '\n';
  }
  return out.str();
}

std::string limit_trajectory_csv(const LimitTrajectory& traj) {
  std::ostringstream out;
  out << "t,u,r\n";
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    out << format_double(traj.times[k]) << ',' << format_double(traj.u[k]) << ','
        << format_double(traj.r[k]) << '\n';
  }
  return out.str();
}

std::string nullclines_csv(const Nullclines& nc) {
  std::ostringstream out;
  out << "u,r_nullcline_r,r_nullcline_u\n";
  for (std::size_t k = 0; k < nc.u.size(); ++k) {
    out << format_double(nc.u[k]) << ',' << format_double(nc.r_nullcline_r[k]) << ','
        << format_double(nc.r_nullcline_u[k]) << '\n';
  }
  return out.str();
}

std::string limit_process_csv(const LimitProcessPath& path) {
  std::ostringstream out;
  out << "t,r\n";
  for (std::size_t k = 0; k < path.times.size(); ++k) {
    out << format_double(path.times[k]) << ',' << format_double(path.r[k]) << '\n';
  }
  return out.str();
}

std::string spikes_csv(const LimitProcessPath& path) {
  std::ostringstream out;
  out << "time\n";
  for (const double t : path.spike_times) out << format_double(t) << '\n';
  return out.str();
}

std::string bifurcation_csv(const BifurcationScan& scan) {
  std::ostringstream out;
  out << "kappa,roots\n";
  for (std::size_t k = 0; k < scan.kappas.size(); ++k) {
    out << format_double(scan.kappas[k]) << ',' << scan.root_counts[k] << '\n';
  }
  return out.str();
}

namespace {

template <class T>
std::string opt_cell(const std::optional<T>& v) {
  if (!v) return "";
  if constexpr (std::is_floating_point_v<T>) {
    return format_double(*v);
  } else {
    return std::to_string(*v);
  }
}

}  // namespace

std::string report_rows_csv(const ExperimentReport& report) {
  std::ostringstream out;
  out << "n,replicas,mean,std_error,successes,probability,wilson_lo,wilson_hi,median,q1,q3,"
         "threshold\n";
  for (const auto& r : report.rows) {
    out << format_double(r.n) << ',' << r.replicas << ',' << opt_cell(r.mean) << ','
        << opt_cell(r.std_error) << ',' << opt_cell(r.successes) << ','
        << opt_cell(r.probability) << ',' << opt_cell(r.wilson_lo) << ','
        << opt_cell(r.wilson_hi) << ',' << opt_cell(r.median) << ',' << opt_cell(r.q1) << ','
        << opt_cell(r.q3) << ',' << opt_cell(r.threshold) << '\n';
  }
  return out.str();
}

nlohmann::json equilibria_json(const ModelParams& params, const std::vector<Equilibrium>& eqs) {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& e : eqs) {
    list.push_back({
        {"u", e.u_star},
        {"r", e.r_star},
        {"residual_r", e.residual_r},
        {"residual_u", e.residual_u},
        {"g_slope", e.g_slope},
        {"jacobian",
         {{e.jacobian[0][0], e.jacobian[0][1]}, {e.jacobian[1][0], e.jacobian[1][1]}}},
        {"eigenvalues",
         {{{"re", e.eigenvalues[0].real()}, {"im", e.eigenvalues[0].imag()}},
          {{"re", e.eigenvalues[1].real()}, {"im", e.eigenvalues[1].imag()}}}},
        {"stability", to_string(e.stability)},
    });
  }
  return {{"kappa", params.kappa()}, {"count", eqs.size()}, {"equilibria", list}};
}

nlohmann::json bifurcation_json(const BifurcationScan& scan) {
  nlohmann::json j{{"kappas", scan.kappas}, {"root_counts", scan.root_counts}};
  if (scan.kappa_c) {
    j["kappa_c"] = *scan.kappa_c;
    j["bracket"] = {scan.bracket_lo, scan.bracket_hi};
  } else {
    j["kappa_c"] = nullptr;
  }
  return j;
}

nlohmann::json diagnostics_json(const Diagnostics& d) {
  return {{"kappa", d.kappa},
          {"K", d.sup_rate},
          {"lipschitz", d.lipschitz},
          {"phi_prime_0", d.derivative_at_zero},
          {"D", d.D},
          {"kappa_at_least_D", d.kappa_at_least_D},
          {"rate_nondecreasing", d.rate_nondecreasing},
          {"rate_strictly_positive", d.rate_strictly_positive},
          {"root_count", d.root_count},
          {"root_count_at_D", d.root_count_at_D},
          {"three_root_structure", d.three_root_structure}};
}

namespace {

template <class T>
void put_opt(nlohmann::json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

template <class T>
std::optional<T> get_opt(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<T>();
}

}  // namespace

nlohmann::json report_to_json(const ExperimentReport& report, bool include_timing) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    nlohmann::json row{{"n", r.n}, {"replicas", r.replicas}};
    put_opt(row, "mean", r.mean);
    put_opt(row, "std_error", r.std_error);
    put_opt(row, "successes", r.successes);
    put_opt(row, "probability", r.probability);
    put_opt(row, "wilson_lo", r.wilson_lo);
    put_opt(row, "wilson_hi", r.wilson_hi);
    put_opt(row, "median", r.median);
    put_opt(row, "q1", r.q1);
    put_opt(row, "q3", r.q3);
    put_opt(row, "threshold", r.threshold);
    rows.push_back(row);
  }
  nlohmann::json j{{"name", report.name},
                   {"master_seed", report.master_seed},
                   {"config", report.config},
                   {"rows", rows},
                   {"degenerate_fit", report.degenerate_fit},
                   {"checks", report.checks},
                   {"values", report.values}};
  if (report.fit) {
    j["fit"] = {{"slope", report.fit->slope},
                {"intercept", report.fit->intercept},
                {"ci_lo", report.fit->ci_lo},
                {"ci_hi", report.fit->ci_hi}};
  } else {
    j["fit"] = nullptr;
  }
  if (include_timing && report.wall_seconds) j["wall_seconds"] = *report.wall_seconds;
  return j;
}

ExperimentReport report_from_json(const nlohmann::json& j) {
  ExperimentReport r;
  r.name = j.at("name").get<std::string>();
  r.master_seed = j.at("master_seed").get<std::uint64_t>();
  r.config = j.at("config");
  for (const auto& row : j.at("rows")) {
    ReportRow x;
    x.n = row.at("n").get<double>();
    x.replicas = row.at("replicas").get<std::size_t>();
    x.mean = get_opt<double>(row, "mean");
    x.std_error = get_opt<double>(row, "std_error");
    x.successes = get_opt<std::size_t>(row, "successes");
    x.probability = get_opt<double>(row, "probability");
    x.wilson_lo = get_opt<double>(row, "wilson_lo");
    x.wilson_hi = get_opt<double>(row, "wilson_hi");
    x.median = get_opt<double>(row, "median");
    x.q1 = get_opt<double>(row, "q1");
    x.q3 = get_opt<double>(row, "q3");
    x.threshold = get_opt<double>(row, "threshold");
    r.rows.push_back(x);
  }
  r.degenerate_fit = j.at("degenerate_fit").get<bool>();
  r.checks = j.at("checks").get<std::map<std::string, bool>>();
  r.values = j.at("values").get<std::map<std::string, double>>();
  if (!j.at("fit").is_null()) {
    const auto& f = j.at("fit");
    r.fit = SlopeFit{f.at("slope").get<double>(), f.at("intercept").get<double>(),
                     f.at("ci_lo").get<double>(), f.at("ci_hi").get<double>()};
  }
  r.wall_seconds = get_opt<double>(j, "wall_seconds");
  return r;
}

std::string dump_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw NumericalError("cannot open '" + path.string() + "' for writing");
  out << content;
  out.flush();
  if (!out) throw NumericalError("failed writing '" + path.string() + "'");
}

void write_trajectory(const Trajectory& traj, const std::filesystem::path& path) {
  write_text_file(path, trajectory_csv(traj));
}

void write_trajectory(const LimitTrajectory& traj, const std::filesystem::path& path) {
  write_text_file(path, limit_trajectory_csv(traj));
}

void write_report(const ExperimentReport& report, const std::filesystem::path& path,
                  bool include_timing) {
  write_text_file(path, dump_json(report_to_json(report, include_timing)));
}

}  // namespace stpnet
