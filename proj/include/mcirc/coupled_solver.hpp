#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

#include "mcirc/hrf.hpp"
#include "mcirc/mesh.hpp"
#include "mcirc/ppe_flux.hpp"
#include "mcirc/sparse.hpp"
#include "mcirc/vasculature.hpp"

namespace mcirc {

/// Time-independent operators of the discrete system, assembled once.
struct SystemMatrices {
  SparseMatrix mass;         ///< M
  SparseMatrix outflow;      ///< T, epsilon-weighted mass
  SparseMatrix consumption;  ///< S, upsilon-weighted mass
  SparseMatrix diffusion;    ///< G, delta-weighted stiffness
  SparseMatrix tbv_system;   ///< M + dt (T + G)
  SparseMatrix dbv_system;   ///< M + dt (S + T + G)
  double dt = 0.0;
  double oxygenated_fraction = 0.0;  ///< h
  double tol = 1e-10;
};

/// Builds the step operators from explicit per-element coefficients.
std::shared_ptr<const SystemMatrices> assemble_system(const TetMesh& mesh,
                                                      std::span<const double> delta,
                                                      std::span<const double> epsilon,
                                                      std::span<const double> upsilon, double dt,
                                                      double h, double tol = 1e-10);

struct SimState {
  std::size_t step = 0;
  double time = 0.0;
  std::vector<double> c;        ///< excess TBV
  std::vector<double> q_tilde;  ///< DBV
  std::vector<double> c_bar;    ///< background TBV (static)
  std::shared_ptr<const SystemMatrices> system;
};

enum class SourceMode { kSingleNode, kGaussian };

/// Spatial pattern of the hemodynamic source plus the boundary influx.
struct SourceSpec {
  HrfSeries hrf;
  NodeId node = 0;                 ///< node nearest the configured point
  std::vector<double> unit_load;   ///< load for alpha_dot = 1
  std::vector<double> boundary_load;  ///< int_B f phi
};

/// Node-centred load. Single-node mode puts `source_volume` (<= 0 selects the
/// volume of the elements touching the node) on the nearest node; Gaussian
/// mode loads the unit-peak profile exp(-r^2 / (2 width^2)).
SourceSpec make_source(const TetMesh& mesh, const SparseMatrix& mass, HrfSeries hrf,
                       const Vec3& point, SourceMode mode, double width_or_volume,
                       const BoundaryFlux* flux);

/// Volume-weighted nodal average of per-element background values.
std::vector<double> nodal_background(const TetMesh& mesh, std::span<const double> element_c_bar);

/// c = 0, q_tilde = h c_bar, operators assembled.
SimState init_state(const TetMesh& mesh, const DerivedVesselFields& derived,
                    const VesselParams& params, double tol = 1e-10);

/// One implicit-Euler step: c first, then q_tilde with b built from c^k.
SimState step(const SimState& state, const SourceSpec& src);

using StateSink = std::function<void(const SimState&)>;

/// round(duration / dt) steps; `sink` sees the initial state and every step.
SimState run(SimState state, const SourceSpec& src, double duration, const StateSink& sink = {});

}  // namespace mcirc
