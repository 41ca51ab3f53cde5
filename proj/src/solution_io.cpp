#include "armada/solution_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace armada {

namespace {

using nlohmann::json;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.15g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  return out;
}

json segments_to_json(const PhaseSpline& s) {
  json arr = json::array();
  for (const auto& seg : s.segments())
    arr.push_back({seg.duration, seg.u0, seg.du0, seg.u1, seg.du1});
  return arr;
}

PhaseSpline spline_from_json(const json& arr) {
  std::vector<HermiteSegment> segs;
  segs.reserve(arr.size());
  for (const auto& e : arr)
    segs.push_back({e[0].get<double>(), e[1].get<double>(), e[2].get<double>(),
                    e[3].get<double>(), e[4].get<double>()});
  return PhaseSpline(std::move(segs));
}

json pose_to_json(const PoseSpec& p) {
  return {{"position", {p.position.x(), p.position.y(), p.position.z()}},
          {"rpy", {p.rpy.x(), p.rpy.y(), p.rpy.z()}}};
}

PoseSpec pose_from_json(const json& j) {
  PoseSpec p;
  for (int i = 0; i < 3; ++i) {
    p.position[i] = j.at("position")[i].get<double>();
    p.rpy[i] = j.at("rpy")[i].get<double>();
  }
  return p;
}

}  // namespace

void write_solution_csv(const std::string& path, const OcpSolution& sol, double rate_hz) {
  auto out = open_out(path);
  const int zeta = sol.arm_count();
  out << "# t, base position xyz [m], base roll/pitch/yaw [rad], thruster force xyz "
         "(body frame) [N], then per arm: tool position xyz [m], contact force xyz [N], "
         "contact flag (0/1)\n";
  out << "t,base_x,base_y,base_z,roll,pitch,yaw,thrust_x,thrust_y,thrust_z";
  for (int a = 0; a < zeta; ++a) {
    out << ",ee" << a << "_x,ee" << a << "_y,ee" << a << "_z";
    out << ",f" << a << "_x,f" << a << "_y,f" << a << "_z,contact" << a;
  }
  out << "\n";
  for (double t : sol.base_pos[0].sample_times(rate_hz)) {
    const Eigen::Vector3d d = sol.base_position(t), e = sol.base_rpy(t), u = sol.thruster_body(t);
    out << num(t);
    for (int i = 0; i < 3; ++i) out << ',' << num(d[i]);
    for (int i = 0; i < 3; ++i) out << ',' << num(e[i]);
    for (int i = 0; i < 3; ++i) out << ',' << num(u[i]);
    for (int a = 0; a < zeta; ++a) {
      const Eigen::Vector3d p = sol.ee_position(a, t), f = sol.contact_force(a, t);
      for (int i = 0; i < 3; ++i) out << ',' << num(p[i]);
      for (int i = 0; i < 3; ++i) out << ',' << num(f[i]);
      out << ',' << (sol.schedule.in_contact(a, t) ? 1 : 0);
    }
    out << "\n";
  }
}

void write_solution_json(const std::string& path, const OcpSolution& sol) {
  const auto& c = sol.config;
  json j;
  j["duration"] = c.duration;
  j["has_thrusters"] = sol.has_thrusters;
  j["config"] = {{"start", pose_to_json(c.start)},
                 {"goal", pose_to_json(c.goal)},
                 {"duration", c.duration},
                 {"contact_phases", c.contact_phases},
                 {"thruster_segments", c.thruster_segments},
                 {"polys", c.polys},
                 {"defect_nodes", c.defect_nodes},
                 {"path_nodes", c.path_nodes},
                 {"clearance", c.clearance},
                 {"swing_lift", c.swing_lift},
                 {"thrusters", c.thrusters},
                 {"start_in_contact", c.start_in_contact},
                 {"approach_duration", c.approach_duration}};

  json arms = json::array();
  for (int a = 0; a < sol.schedule.arm_count(); ++a) {
    const auto& tl = sol.schedule.timeline(a);
    arms.push_back({{"first", tl.first == PhaseKind::Contact ? "contact" : "swing"},
                    {"durations", tl.durations}});
  }
  j["schedule"] = {{"horizon", sol.schedule.horizon()}, {"arms", arms}};

  auto triple = [](const std::array<PhaseSpline, 3>& ch) {
    return json{segments_to_json(ch[0]), segments_to_json(ch[1]), segments_to_json(ch[2])};
  };
  j["base_pos"] = triple(sol.base_pos);
  j["base_euler"] = triple(sol.base_euler);
  j["thruster"] = triple(sol.thruster);
  j["ee"] = json::array();
  j["force"] = json::array();
  for (int a = 0; a < sol.arm_count(); ++a) {
    j["ee"].push_back(triple(sol.ee[a]));
    j["force"].push_back(triple(sol.force[a]));
  }

  const auto& st = sol.stats;
  j["stats"] = {{"converged", st.converged},
                {"outer_iterations", st.outer_iterations},
                {"inner_iterations", st.inner_iterations},
                {"cost", st.cost},
                {"max_eq_violation", st.max_eq_violation},
                {"max_ineq_violation", st.max_ineq_violation},
                {"stationarity", st.stationarity},
                {"wall_seconds", st.wall_seconds}};
  open_out(path) << j.dump(2) << "\n";
}

OcpSolution load_solution_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  json j;
  in >> j;

  OcpSolution sol;
  const auto& c = j.at("config");
  sol.config.start = pose_from_json(c.at("start"));
  sol.config.goal = pose_from_json(c.at("goal"));
  sol.config.duration = c.at("duration").get<double>();
  sol.config.contact_phases = c.at("contact_phases").get<int>();
  sol.config.thruster_segments = c.at("thruster_segments").get<int>();
  sol.config.polys = c.at("polys").get<int>();
  sol.config.defect_nodes = c.at("defect_nodes").get<int>();
  sol.config.path_nodes = c.at("path_nodes").get<int>();
  sol.config.clearance = c.at("clearance").get<double>();
  sol.config.swing_lift = c.at("swing_lift").get<double>();
  sol.config.thrusters = c.at("thrusters").get<bool>();
  sol.config.start_in_contact = c.at("start_in_contact").get<bool>();
  sol.config.approach_duration = c.at("approach_duration").get<double>();
  sol.has_thrusters = j.at("has_thrusters").get<bool>();

  std::vector<ArmTimeline> tls;
  for (const auto& a : j.at("schedule").at("arms")) {
    ArmTimeline tl;
    tl.first = a.at("first").get<std::string>() == "contact" ? PhaseKind::Contact : PhaseKind::Swing;
    tl.durations = a.at("durations").get<std::vector<double>>();
    tls.push_back(std::move(tl));
  }
  sol.schedule = ContactSchedule(std::move(tls), j.at("schedule").at("horizon").get<double>());

  auto triple = [](const json& arr, std::array<PhaseSpline, 3>& ch) {
    for (int i = 0; i < 3; ++i) ch[i] = spline_from_json(arr[i]);
  };
  triple(j.at("base_pos"), sol.base_pos);
  triple(j.at("base_euler"), sol.base_euler);
  triple(j.at("thruster"), sol.thruster);
  const int zeta = static_cast<int>(j.at("ee").size());
  sol.ee.resize(zeta);
  sol.force.resize(zeta);
  for (int a = 0; a < zeta; ++a) {
    triple(j.at("ee")[a], sol.ee[a]);
    triple(j.at("force")[a], sol.force[a]);
  }

  const auto& st = j.at("stats");
  sol.stats.converged = st.at("converged").get<bool>();
  sol.stats.outer_iterations = st.at("outer_iterations").get<int>();
  sol.stats.inner_iterations = st.at("inner_iterations").get<int>();
  sol.stats.cost = st.at("cost").get<double>();
  sol.stats.max_eq_violation = st.at("max_eq_violation").get<double>();
  sol.stats.max_ineq_violation = st.at("max_ineq_violation").get<double>();
  sol.stats.stationarity = st.at("stationarity").get<double>();
  sol.stats.wall_seconds = st.at("wall_seconds").get<double>();
  return sol;
}

void write_report_json(const std::string& path, const OcpSolution& sol) {
  const auto& st = sol.stats;
  const Eigen::Vector3d disp = sol.base_position(sol.duration()) - sol.base_position(0.0);
  json j;
  j["converged"] = st.converged;
  j["cost"] = st.cost;
  j["outer_iterations"] = st.outer_iterations;
  j["inner_iterations"] = st.inner_iterations;
  j["max_eq_violation"] = st.max_eq_violation;
  j["max_ineq_violation"] = st.max_ineq_violation;
  j["stationarity"] = st.stationarity;
  j["wall_seconds"] = st.wall_seconds;
  j["displacement"] = {disp.x(), disp.y(), disp.z()};
  j["x_displacement"] = disp.x();
  j["peak_contact_force"] = peak_contact_force(sol);
  j["max_single_swing_displacement"] = max_single_swing_displacement(sol);
  json slices = json::object();
  for (const auto& [name, r] : sol.slice_report) slices[name] = r;
  j["slice_residuals"] = slices;
  open_out(path) << j.dump(2) << "\n";
}

namespace {

// C1 interpolating cubic through (t_k, y_k) with Catmull-Rom knot rates.
PhaseSpline interpolating_spline(const std::vector<double>& t, const std::vector<double>& y) {
  const int n = static_cast<int>(t.size());
  std::vector<double> m(n);
  for (int k = 0; k < n; ++k) {
    const int lo = std::max(0, k - 1), hi = std::min(n - 1, k + 1);
    m[k] = (y[hi] - y[lo]) / (t[hi] - t[lo]);
  }
  std::vector<HermiteSegment> segs;
  segs.reserve(n - 1);
  for (int k = 0; k + 1 < n; ++k)
    segs.push_back({t[k + 1] - t[k], y[k], m[k], y[k + 1], m[k + 1]});
  return PhaseSpline(std::move(segs));
}

}  // namespace

OcpSolution load_solution_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  int zeta = -1;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line[0] == 't') continue;
    std::vector<double> row;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      const std::size_t comma = line.find(',', pos);
      const std::string cell = line.substr(pos, comma == std::string::npos ? comma : comma - pos);
      row.push_back(std::stod(cell));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (zeta < 0) {
      if (row.size() < 10 || (row.size() - 10) % 7 != 0)
        throw std::runtime_error("solution csv: unexpected column count");
      zeta = static_cast<int>((row.size() - 10) / 7);
    } else if (row.size() != rows.front().size()) {
      throw std::runtime_error("solution csv: ragged rows");
    }
    rows.push_back(std::move(row));
  }
  if (rows.size() < 2) throw std::runtime_error("solution csv: need at least two samples");

  const int n = static_cast<int>(rows.size());
  std::vector<double> t(n);
  for (int k = 0; k < n; ++k) t[k] = rows[k][0];

  auto column = [&](int c) {
    std::vector<double> y(n);
    for (int k = 0; k < n; ++k) y[k] = rows[k][c];
    return y;
  };

  OcpSolution sol;
  sol.config.duration = t.back();
  for (int i = 0; i < 3; ++i) {
    sol.base_pos[i] = interpolating_spline(t, column(1 + i));
    sol.base_euler[i] = interpolating_spline(t, column(4 + i));
    sol.thruster[i] = interpolating_spline(t, column(7 + i));
  }
  sol.ee.resize(zeta);
  sol.force.resize(zeta);
  std::vector<ArmTimeline> tls(zeta);
  for (int a = 0; a < zeta; ++a) {
    const int base = 10 + 7 * a;
    for (int i = 0; i < 3; ++i) {
      sol.ee[a][i] = interpolating_spline(t, column(base + i));
      sol.force[a][i] = interpolating_spline(t, column(base + 3 + i));
    }
    tls[a].first = rows[0][base + 6] > 0.5 ? PhaseKind::Contact : PhaseKind::Swing;
    double prev_boundary = 0.0;
    for (int k = 1; k < n; ++k) {
      if ((rows[k][base + 6] > 0.5) != (rows[k - 1][base + 6] > 0.5)) {
        tls[a].durations.push_back(t[k] - prev_boundary);
        prev_boundary = t[k];
      }
    }
    tls[a].durations.push_back(t.back() - prev_boundary);
  }
  sol.schedule = ContactSchedule(std::move(tls), t.back());
  for (int i = 0; i < 3; ++i) {
    for (const auto& seg : sol.thruster[i].segments())
      if (std::abs(seg.u0) > 0.0 || std::abs(seg.u1) > 0.0) sol.has_thrusters = true;
  }
  return sol;
}

void write_phases_csv(const std::string& path, const OcpSolution& sol) {
  auto out = open_out(path);
  out << "arm,phase,kind,start,end\n";
  for (int a = 0; a < sol.schedule.arm_count(); ++a) {
    const auto b = sol.schedule.boundaries(a);
    for (std::size_t p = 0; p + 1 < b.size(); ++p) {
      const char* kind =
          sol.schedule.timeline(a).kind(static_cast<int>(p)) == PhaseKind::Contact ? "contact"
                                                                                   : "swing";
      out << a << ',' << p << ',' << kind << ',' << num(b[p]) << ',' << num(b[p + 1]) << "\n";
    }
  }
}

void write_tracking_csv(const std::string& path, const TrackingReport& rep) {
  auto out = open_out(path);
  const int zeta = rep.trace.empty() ? 0 : static_cast<int>(rep.trace.front().ee_error.size());
  out << "# t, planned base xyz [m], simulated base xyz [m], base error norm [m], per-arm "
         "tool error norms [m]\n";
  out << "t,ref_x,ref_y,ref_z,sim_x,sim_y,sim_z,base_error";
  for (int a = 0; a < zeta; ++a) out << ",ee" << a << "_error";
  out << "\n";
  for (const auto& s : rep.trace) {
    out << num(s.t);
    for (int i = 0; i < 3; ++i) out << ',' << num(s.base_ref[i]);
    for (int i = 0; i < 3; ++i) out << ',' << num(s.base_sim[i]);
    out << ',' << num(s.base_error);
    for (int a = 0; a < zeta; ++a) out << ',' << num(s.ee_error[a]);
    out << "\n";
  }
}

void write_tracking_report_json(const std::string& path, const TrackingReport& rep) {
  json j;
  j["controller"] = rep.controller;
  j["mean_base_error"] = rep.mean_base_error;
  j["max_base_error"] = rep.max_base_error;
  j["final_base_error"] = rep.final_base_error;
  j["mean_ee_error"] = rep.mean_ee_error;
  j["max_ee_error"] = rep.max_ee_error;
  j["mean_attitude_error"] = rep.mean_attitude_error;
  j["samples"] = rep.trace.size();
  open_out(path) << j.dump(2) << "\n";
}

}  // namespace armada
