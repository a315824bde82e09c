#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mcirc/analysis.hpp"
#include "mcirc/config.hpp"
#include "mcirc/coupled_solver.hpp"
#include "mcirc/hrf.hpp"
#include "mcirc/ppe_flux.hpp"

namespace mcirc {

inline constexpr const char* kVersion = "0.1.0";

/// Meshes and derived coefficients for one configuration.
struct Scenario {
  TetMesh full;    ///< labeled root mesh
  TetMesh tissue;  ///< microcirculation part, B tagged
  TetMesh artery;  ///< empty when the mesh has no artery elements
  CompartmentTable table;
  DerivedVesselFields derived;
};

/// Generated or loaded root mesh. A plain box is all tissue with B on its
/// whole outer surface; sphere_in_box makes everything outside the ball artery.
TetMesh build_mesh(const RunConfig& cfg);
Scenario build_scenario(const RunConfig& cfg);
HrfSeries build_hrf(const RunConfig& cfg);

/// Configured total, or theta * Q.
double influx_total(const RunConfig& cfg);

RobinSpec robin_spec(const RunConfig& cfg);
PressureField solve_pressure(const RunConfig& cfg, const Scenario& sc);
/// Absent when flux_mode = none.
std::optional<BoundaryFlux> build_flux(const RunConfig& cfg, const Scenario& sc);

SourceSpec build_source(const RunConfig& cfg, const Scenario& sc, const SimState& init);

/// Steps at which full fields are kept: multiples of the cadence plus the
/// steps for t = 0.25 s and t = 5 s.
std::set<std::size_t> snapshot_steps(const RunConfig& cfg);
/// Step index of time t, or nothing when t is not on the grid within [0, T].
std::optional<std::size_t> step_at(const RunConfig& cfg, double t);

struct Simulation {
  SimState final_state;
  std::vector<RoiSpec> rois;
  std::vector<RoiTimeSeries> series;
};

/// Runs the configured experiment, reporting every state to `sink`.
Simulation simulate(const RunConfig& cfg, const Scenario& sc, const StateSink& sink = {});

struct RoiSummary {
  RoiSpec roi;
  double background = 0.0;
  double tbv_025 = 0.0, tbv_5 = 0.0;
  double dbv_025 = 0.0, dbv_5 = 0.0;
  double diam_tbv = 0.0, diam_dbv = 0.0;
  std::vector<ProfileBin> tbv_profile_025, dbv_profile_025, tbv_profile_5, dbv_profile_5;
};

/// Compares the t = 0.25 s and t = 5 s states inside each ROI. Both the TBV
/// and the DBV perturbation are measured against the ROI-mean background TBV.
std::vector<RoiSummary> summarize(const TetMesh& tissue, const SparseMatrix& mass,
                                  const std::vector<RoiSpec>& rois, const SimState& s025,
                                  const SimState& s5, std::size_t n_bins = 14);

/// Subcommand bodies. Each writes into `out` and a manifest.json.
void command_mesh_gen(const RunConfig& cfg, const std::filesystem::path& out);
void command_derive(const RunConfig& cfg, const std::filesystem::path& out, std::ostream* log);
void command_hrf(const RunConfig& cfg, const std::filesystem::path& out);
void command_ppe(const RunConfig& cfg, const std::filesystem::path& out, std::ostream* log);
void command_run(const RunConfig& cfg, const std::filesystem::path& out, std::ostream* log);
/// Reads a run directory (manifest.json, mesh.msh, field snapshots).
void command_analyze(const std::filesystem::path& run_dir, const std::filesystem::path& out,
                     std::ostream* log);

}  // namespace mcirc
