#pragma once

#include <string>

#include "armada/controllers.hpp"
#include "armada/ocp_solution.hpp"

namespace armada {

/// Writes an inclusive uniform sampling of the solution. Column layout (one
/// documenting comment line, then a header row, then data):
///   t,
///   base_x, base_y, base_z, roll, pitch, yaw,
///   thrust_x, thrust_y, thrust_z,
///   per arm a: ee{a}_x, ee{a}_y, ee{a}_z, f{a}_x, f{a}_y, f{a}_z, contact{a}
/// Values carry 15 significant digits so a reload matches within 1e-9.
void write_solution_csv(const std::string& path, const OcpSolution& sol, double rate_hz = 100.0);

/// Full spline serialization: config, optimized schedule and every Hermite
/// segment of every channel. load_solution_json rebuilds an OcpSolution whose
/// samplers reproduce the original within numeric round-trip error.
void write_solution_json(const std::string& path, const OcpSolution& sol);
OcpSolution load_solution_json(const std::string& path);

/// Solver outcome summary: convergence, residuals, cost, wall time, overall
/// displacement and the per-slice worst residuals.
void write_report_json(const std::string& path, const OcpSolution& sol);

/// Rebuilds a playable solution from the sampled CSV: channels become C1
/// interpolating cubics through every sample (exact at the sample instants),
/// the schedule comes from the contact flags. Spline-free metadata (solver
/// stats, config) is not recovered.
OcpSolution load_solution_csv(const std::string& path);

/// Phase boundaries per arm: arm, phase, kind, start, end.
void write_phases_csv(const std::string& path, const OcpSolution& sol);

/// Tracking trace at the control rate: t, reference base, simulated base,
/// base error and per-arm tool errors.
void write_tracking_csv(const std::string& path, const TrackingReport& rep);
void write_tracking_report_json(const std::string& path, const TrackingReport& rep);

}  // namespace armada
