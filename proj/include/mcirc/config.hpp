#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mcirc/analysis.hpp"
#include "mcirc/coupled_solver.hpp"
#include "mcirc/vasculature.hpp"

namespace mcirc {

enum class MeshShape { kBox, kSphereInBox };
enum class FluxMode { kNone, kPrescribed, kPpe };

struct MeshConfig {
  std::filesystem::path file;  ///< overrides the generator when set
  MeshShape shape = MeshShape::kBox;
  int cells = 30;                 ///< per axis
  double extent = 0.03;           ///< box edge, m; the box is centred on the origin
  double sphere_diameter = 0.03;  ///< tissue ball for sphere_in_box, m
  std::string tissue = "cerebral_gm";
};

struct HrfConfig {
  std::optional<double> amplitude_target = 0.2;
  std::optional<Vec3> source_point;  ///< default: origin
  SourceMode mode = SourceMode::kSingleNode;
  double source_volume = 0.0;   ///< single-node mode; 0 selects the node's element star
  double source_width = 0.002;  ///< Gaussian mode, m
};

struct FluxConfig {
  FluxMode mode = FluxMode::kPrescribed;
  std::optional<double> total;  ///< m^3/s; default theta * Q
  double zeta_r = 1.0;
  double lambda_r = 1.0;
  std::optional<double> reference_pressure;  ///< Pa; default mean pressure
  double reference_gradient = 0.0;           ///< dp_B/dz, Pa/m
};

struct OutputConfig {
  std::filesystem::path dir = "out";
  std::size_t cadence = 20;
  double solver_tol = 1e-10;
};

struct RunConfig {
  MeshConfig mesh;
  std::map<std::string, double> length_densities;  ///< compartment name -> xi override
  VesselParams params;
  HrfConfig hrf;
  FluxConfig flux;
  std::vector<RoiSpec> rois;  ///< default: one 14 mm ROI at the source point
  OutputConfig output;

  CompartmentTable compartments() const;
  Vec3 source_point() const { return hrf.source_point.value_or(Vec3{0.0, 0.0, 0.0}); }
  std::vector<RoiSpec> resolved_rois() const;
};

/// Flat "key = value" lines, '#' comments, optional [section] headers. Each
/// key belongs to one section; a header, when present, must match it.
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config(const std::filesystem::path& path);

/// Every resolved key in a fixed order; parse_config_text inverts it.
std::string format_config(const RunConfig& cfg);

/// FNV-1a of format_config, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

}  // namespace mcirc
