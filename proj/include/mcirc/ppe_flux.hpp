#pragma once

#include <functional>
#include <span>
#include <vector>

#include "mcirc/mesh.hpp"
#include "mcirc/vasculature.hpp"

namespace mcirc {

/// Facet-constant influx density f on patch B of one mesh.
struct BoundaryFlux {
  std::vector<std::size_t> facets;  ///< indices into boundary_tris (all B facets)
  std::vector<double> density;      ///< f per facet
  std::vector<double> area;         ///< facet areas
  double total = 0.0;               ///< sum of density * area
};

using ScalarField = std::function<double(const Vec3&)>;

/// Robin coupling dp/dn = -zeta_r lambda_r (p - p_B) on the artery surface.
struct RobinSpec {
  double zeta_r = 1.0;   ///< 1/m
  double lambda_r = 1.0;
  ScalarField reference_pressure;  ///< p_B in Pa, evaluated at facet centroids

  double coefficient() const { return zeta_r * lambda_r; }
};

struct PressureField {
  std::vector<double> pressure;     ///< nodal, on the artery mesh
  std::vector<NodeId> global_nodes; ///< root-mesh ids of those nodes
  RobinSpec robin;
  std::size_t iterations = 0;
};

/// Uniform density total / |B|.
BoundaryFlux prescribed_flux(const TetMesh& mesh, double total);

/// Rescales nonnegative raw facet values (negatives clamped to zero) so the
/// integral over B equals `total`. `raw` follows patch_facets(mesh, B) order.
BoundaryFlux normalize_flux(const TetMesh& mesh, std::span<const double> raw, double total);

/// Static pressure-Poisson solve with the velocity term dropped:
/// (grad p - rho g) . n = -zeta_r lambda_r (p - p_B) on every surface facet.
PressureField solve_ppe(const TetMesh& artery, const VesselParams& p, const RobinSpec& robin,
                        double tol = 1e-12);

/// f_raw = zeta_r lambda_r (p_B - mean facet pressure) on the B facets of
/// `tissue`, clamped at zero and normalized to `total`. Facet nodes are
/// matched to the pressure field through root-mesh node ids.
BoundaryFlux flux_from_pressure(const PressureField& field, const TetMesh& tissue, double total);

/// Integral of f * phi_i over B, times `scale`.
std::vector<double> flux_load(const TetMesh& mesh, const BoundaryFlux& flux, double scale = 1.0);

}  // namespace mcirc
