#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace mcirc {

using Vec3 = std::array<double, 3>;
using NodeId = std::size_t;
using Label = int;
using PatchTag = int;

/// Compartment identifiers. Label 0 is the arterial compartment (Omega_A);
/// every other label belongs to the microcirculation domain.
namespace labels {
inline constexpr Label kArtery = 0;
inline constexpr Label kCerebralGm = 1;
inline constexpr Label kCerebralWm = 2;
inline constexpr Label kCerebellarGm = 3;
inline constexpr Label kCerebellarWm = 4;
inline constexpr Label kSubcorticalGm = 5;
inline constexpr Label kSubcorticalWm = 6;
inline constexpr Label kBrainstem = 7;
}  // namespace labels

inline constexpr PatchTag kOuterPatch = 0;
/// The artery/microcirculation interface B.
inline constexpr PatchTag kArterialPatch = 1;

struct BoundaryTri {
  std::array<NodeId, 3> nodes{};
  PatchTag patch = kOuterPatch;

  bool operator==(const BoundaryTri&) const = default;
};

/// Labeled tetrahedral mesh. Boundary triangles are stored with outward
/// orientation (right-hand normal points away from the owning tetrahedron).
struct TetMesh {
  std::vector<Vec3> nodes;
  std::vector<std::array<NodeId, 4>> tets;
  std::vector<Label> tet_labels;
  std::vector<BoundaryTri> boundary_tris;
  /// Node ids in the mesh this one was extracted from; empty for root meshes.
  std::vector<NodeId> parent_nodes;

  std::size_t num_nodes() const { return nodes.size(); }
  std::size_t num_tets() const { return tets.size(); }
};

// Geometry helpers.
double tet_volume(const Vec3& p0, const Vec3& p1, const Vec3& p2, const Vec3& p3);
double tet_volume(const TetMesh& mesh, std::size_t tet);
Vec3 tet_centroid(const TetMesh& mesh, std::size_t tet);
double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c);
double facet_area(const TetMesh& mesh, std::size_t facet);
Vec3 facet_centroid(const TetMesh& mesh, std::size_t facet);
/// Unit normal of a boundary facet following its stored vertex order.
Vec3 facet_normal(const TetMesh& mesh, std::size_t facet);
double total_volume(const TetMesh& mesh);
double patch_area(const TetMesh& mesh, PatchTag patch);
/// Indices of boundary facets carrying the given tag, in storage order.
std::vector<std::size_t> patch_facets(const TetMesh& mesh, PatchTag patch);

/// Throws ValidationError when any TetMesh invariant is broken.
void validate(const TetMesh& mesh);

/// Faces owned by exactly one tetrahedron, outward oriented, ordered by
/// (tet, local face). All receive `tag`.
std::vector<BoundaryTri> extract_boundary(const TetMesh& mesh, PatchTag tag = kOuterPatch);

/// Structured nx*ny*nz box split into 6 Kuhn tetrahedra per cell. Every tet
/// gets `label`; every boundary face gets kOuterPatch.
TetMesh generate_box_mesh(int nx, int ny, int nz, const Vec3& extents,
                          const Vec3& origin = {0.0, 0.0, 0.0},
                          Label label = labels::kCerebralGm);

using PointPredicate = std::function<bool(const Vec3&)>;

struct LabelRule {
  PointPredicate region;
  Label label = labels::kCerebralGm;
};

/// Relabels tetrahedra whose centroid satisfies a rule (later rules win) and
/// tags boundary facets whose centroid satisfies `arterial_surface` with B.
TetMesh label_by_predicate(const TetMesh& mesh, const std::vector<LabelRule>& rules,
                           const PointPredicate& arterial_surface = nullptr);

PointPredicate sphere_region(const Vec3& center, double radius);
PointPredicate half_space(int axis, double value, bool below);

/// Submesh of the tetrahedra whose label satisfies `keep`. Node numbering
/// preserves parent order; parent_nodes maps back. Faces that were interior in
/// the parent become boundary facets tagged B; true boundary facets keep
/// their parent tag.
TetMesh extract_submesh(const TetMesh& mesh, const std::function<bool(Label)>& keep);

/// Microcirculation part (all non-artery labels).
TetMesh tissue_submesh(const TetMesh& mesh);
TetMesh artery_submesh(const TetMesh& mesh);

/// Owning tetrahedron of every boundary facet (same order as boundary_tris).
std::vector<std::size_t> facet_owner_tets(const TetMesh& mesh);

/// Nodes adjacent to each node through tetrahedra (including itself), sorted.
std::vector<std::vector<NodeId>> node_adjacency(const TetMesh& mesh);

NodeId nearest_node(const TetMesh& mesh, const Vec3& point);

TetMesh read_mesh(const std::filesystem::path& path);
TetMesh parse_mesh(const std::string& text);
void write_mesh(const TetMesh& mesh, const std::filesystem::path& path);
std::string format_mesh(const TetMesh& mesh);

}  // namespace mcirc
