#include "mcirc/assembly.hpp"

#include <cmath>

#include "mcirc/error.hpp"

namespace mcirc {

namespace {

Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double dot3(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

void check_size(std::span<const double> v, std::size_t n, const char* what) {
  if (v.size() != n)
    throw ValidationError(std::string(what) + " length " + std::to_string(v.size()) +
                          " differs from element count " + std::to_string(n));
}

// Adds the mass block det * (1 + delta_ij) / 120 scaled by w. Using det
// directly keeps reference-element entries exactly 1/60 and 1/120.
void add_mass_block(SparseMatrix& m, const std::array<NodeId, 4>& tet, double det, double w) {
  const double off = w * det / 120.0;
  const double diag = w * det / 60.0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) m.add(tet[a], tet[b], a == b ? diag : off);
}

}  // namespace

SparseMatrix mesh_pattern(const TetMesh& mesh) {
  return SparseMatrix::from_pattern(node_adjacency(mesh));
}

TetGeometry tet_geometry(const TetMesh& mesh, std::size_t tet) {
  const auto& t = mesh.tets[tet];
  const Vec3 e1 = sub(mesh.nodes[t[1]], mesh.nodes[t[0]]);
  const Vec3 e2 = sub(mesh.nodes[t[2]], mesh.nodes[t[0]]);
  const Vec3 e3 = sub(mesh.nodes[t[3]], mesh.nodes[t[0]]);
  TetGeometry g;
  g.scaled_grads[1] = cross(e2, e3);
  g.scaled_grads[2] = cross(e3, e1);
  g.scaled_grads[3] = cross(e1, e2);
  for (int d = 0; d < 3; ++d)
    g.scaled_grads[0][d] = -(g.scaled_grads[1][d] + g.scaled_grads[2][d] + g.scaled_grads[3][d]);
  g.det = dot3(e1, g.scaled_grads[1]);
  if (g.det == 0.0 || !std::isfinite(g.det))
    throw ValidationError("degenerate tetrahedron " + std::to_string(tet));
  return g;
}

SparseMatrix assemble_mass(const TetMesh& mesh) {
  SparseMatrix m = mesh_pattern(mesh);
  for (std::size_t t = 0; t < mesh.tets.size(); ++t)
    add_mass_block(m, mesh.tets[t], std::abs(tet_geometry(mesh, t).det), 1.0);
  return m;
}

SparseMatrix assemble_weighted_mass(const TetMesh& mesh, std::span<const double> weight) {
  check_size(weight, mesh.tets.size(), "weight");
  SparseMatrix m = mesh_pattern(mesh);
  for (std::size_t t = 0; t < mesh.tets.size(); ++t)
    add_mass_block(m, mesh.tets[t], std::abs(tet_geometry(mesh, t).det), weight[t]);
  return m;
}

SparseMatrix assemble_stiffness(const TetMesh& mesh, std::span<const double> coeff) {
  check_size(coeff, mesh.tets.size(), "coefficient");
  SparseMatrix k = mesh_pattern(mesh);
  for (std::size_t t = 0; t < mesh.tets.size(); ++t) {
    if (coeff[t] < 0.0) throw ValidationError("negative diffusion coefficient");
    const TetGeometry g = tet_geometry(mesh, t);
    // V grad_i . grad_j = (c_i . c_j) / (6 |det|)
    const double denom = 6.0 * std::abs(g.det);
    const auto& tet = mesh.tets[t];
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        k.add(tet[a], tet[b], coeff[t] * dot3(g.scaled_grads[a], g.scaled_grads[b]) / denom);
  }
  return k;
}

SparseMatrix assemble_boundary_mass(const TetMesh& mesh, std::optional<PatchTag> patch,
                                    double weight) {
  SparseMatrix m = mesh_pattern(mesh);
  for (std::size_t f = 0; f < mesh.boundary_tris.size(); ++f) {
    const auto& bt = mesh.boundary_tris[f];
    if (patch && bt.patch != *patch) continue;
    const double area = facet_area(mesh, f);
    const double diag = weight * area / 6.0;
    const double off = weight * area / 12.0;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) m.add(bt.nodes[a], bt.nodes[b], a == b ? diag : off);
  }
  return m;
}

std::vector<double> assemble_boundary_load(const TetMesh& mesh, PatchTag patch,
                                           std::span<const double> facet_values) {
  std::vector<double> load(mesh.nodes.size(), 0.0);
  std::size_t next = 0;
  for (std::size_t f = 0; f < mesh.boundary_tris.size(); ++f) {
    const auto& bt = mesh.boundary_tris[f];
    if (bt.patch != patch) continue;
    if (next >= facet_values.size())
      throw ValidationError("missing facet values for patch " + std::to_string(patch));
    const double share = facet_values[next++] * facet_area(mesh, f) / 3.0;
    for (NodeId v : bt.nodes) load[v] += share;
  }
  if (next != facet_values.size())
    throw ValidationError("facet value count " + std::to_string(facet_values.size()) +
                          " differs from patch facet count " + std::to_string(next));
  return load;
}

}  // namespace mcirc
