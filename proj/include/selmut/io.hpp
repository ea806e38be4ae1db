#pragma once

#include <string>
#include <vector>

#include "selmut/analysis.hpp"
#include "selmut/check_report.hpp"
#include "selmut/lattice.hpp"

namespace selmut {

// Writes content through a temporary file in the target directory followed
// by an atomic rename, creating parent directories as needed.
void atomic_write(const std::string& path, const std::string& content);

// CSV with header  time,trait,value,space,K  — one row per node per stored
// time, every number in round-trip (%.17g) form.  Limit solves carry K = 0.
std::string trajectory_csv(const Trajectory& traj);
void write_trajectory_csv(const std::string& path, const Trajectory& traj);

// Rebuilds a trajectory from its CSV form.  The window is inferred from the
// trait column and the scaling from the K column; slopes are recomputed.
// The certified tail bound is not persisted and reads back as 0.
Trajectory read_trajectory_csv(const std::string& path);

// CSV with header  K,log_K,delta_K,h_K,sup_error,max_slope,runtime_seconds.
std::string convergence_csv(const std::vector<ConvergenceRecord>& records);
void write_convergence_csv(const std::string& path,
                           const std::vector<ConvergenceRecord>& records);
std::vector<ConvergenceRecord> read_convergence_csv(const std::string& path);

// JSON array of check reports, each object carrying exactly the fields
// check_id, passed, worst_margin, worst_location, tolerance.  Infinite
// margins are clamped to +-DBL_MAX on write (JSON has no infinities).
std::string reports_json(const std::vector<CheckReport>& reports);
void write_reports_json(const std::string& path, const std::vector<CheckReport>& reports);
std::vector<CheckReport> reports_from_json(const std::string& text);

}  // namespace selmut
