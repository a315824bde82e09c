#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "mcirc/mesh.hpp"
#include "mcirc/sparse.hpp"

namespace mcirc {

/// Zero matrix whose pattern couples nodes sharing a tetrahedron. Every
/// operator assembled on one mesh shares this pattern.
SparseMatrix mesh_pattern(const TetMesh& mesh);

/// Constant P1 basis gradients of one tetrahedron, scaled by 6|V|: the
/// gradients themselves are grads[i] / det.
struct TetGeometry {
  std::array<Vec3, 4> scaled_grads;
  double det = 0.0;  ///< 6 * signed volume
};

/// Throws ValidationError on a degenerate (zero-volume) element.
TetGeometry tet_geometry(const TetMesh& mesh, std::size_t tet);

/// Exact P1 consistent mass matrix M_ij = int phi_i phi_j.
SparseMatrix assemble_mass(const TetMesh& mesh);
/// M weighted by a per-element constant.
SparseMatrix assemble_weighted_mass(const TetMesh& mesh, std::span<const double> weight);
/// G_ij = int coeff grad phi_i . grad phi_j with per-element coefficients.
SparseMatrix assemble_stiffness(const TetMesh& mesh, std::span<const double> coeff);
/// Boundary mass w * int phi_i phi_j over facets with the given tag (every
/// facet when `patch` is empty).
SparseMatrix assemble_boundary_mass(const TetMesh& mesh, std::optional<PatchTag> patch,
                                    double weight);

/// int_patch w phi_i for facet-constant w. `facet_values` lists one value per
/// facet carrying `patch`, in boundary_tris order.
std::vector<double> assemble_boundary_load(const TetMesh& mesh, PatchTag patch,
                                           std::span<const double> facet_values);

}  // namespace mcirc
