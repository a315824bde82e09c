#include "mcirc/ppe_flux.hpp"

#include <algorithm>
#include <unordered_map>

#include "mcirc/assembly.hpp"
#include "mcirc/error.hpp"

namespace mcirc {

namespace {

NodeId global_id(const TetMesh& mesh, NodeId local) {
  return mesh.parent_nodes.empty() ? local : mesh.parent_nodes[local];
}

}  // namespace

BoundaryFlux prescribed_flux(const TetMesh& mesh, double total) {
  const auto facets = patch_facets(mesh, kArterialPatch);
  if (facets.empty()) throw ValidationError("arterial patch B is empty");
  BoundaryFlux flux;
  flux.facets = facets;
  double area = 0.0;
  for (std::size_t f : facets) {
    flux.area.push_back(facet_area(mesh, f));
    area += flux.area.back();
  }
  flux.density.assign(facets.size(), total / area);
  flux.total = total;
  return flux;
}

BoundaryFlux normalize_flux(const TetMesh& mesh, std::span<const double> raw, double total) {
  const auto facets = patch_facets(mesh, kArterialPatch);
  if (facets.empty()) throw ValidationError("arterial patch B is empty");
  if (raw.size() != facets.size())
    throw ValidationError("raw flux count differs from B facet count");
  BoundaryFlux flux;
  flux.facets = facets;
  double integral = 0.0;
  for (std::size_t i = 0; i < facets.size(); ++i) {
    flux.area.push_back(facet_area(mesh, facets[i]));
    flux.density.push_back(std::max(raw[i], 0.0));
    integral += flux.density.back() * flux.area.back();
  }
  if (!(integral > 0.0)) throw NumericalError("raw boundary flux is zero; cannot normalize");
  const double scale = total / integral;
  for (double& d : flux.density) d *= scale;
  flux.total = total;
  return flux;
}

PressureField solve_ppe(const TetMesh& artery, const VesselParams& p, const RobinSpec& robin,
                        double tol) {
  if (artery.tets.empty()) throw ValidationError("artery compartment is empty");
  if (artery.boundary_tris.empty()) throw NumericalError("Robin patch is empty; system is singular");
  if (!(robin.zeta_r > 0.0) || !(robin.lambda_r > 0.0))
    throw ValidationError("Robin coefficients must be positive");
  if (!robin.reference_pressure) throw ValidationError("reference pressure is not set");

  const double k = robin.coefficient();
  const std::vector<double> ones(artery.tets.size(), 1.0);
  SparseMatrix a = add_scaled(assemble_stiffness(artery, ones), 1.0,
                              assemble_boundary_mass(artery, std::nullopt, k));

  std::vector<double> rhs(artery.nodes.size(), 0.0);
  double ref_area = 0.0, ref_integral = 0.0;
  for (std::size_t f = 0; f < artery.boundary_tris.size(); ++f) {
    const double area = facet_area(artery, f);
    const double pb = robin.reference_pressure(facet_centroid(artery, f));
    const Vec3 n = facet_normal(artery, f);
    const double g_n = p.gravity_z * n[2];
    const double share = (k * pb + p.density * g_n) * area / 3.0;
    for (NodeId v : artery.boundary_tris[f].nodes) rhs[v] += share;
    ref_area += area;
    ref_integral += pb * area;
  }

  // Starting from the mean reference pressure makes the constant case exact.
  const std::vector<double> x0(artery.nodes.size(), ref_integral / ref_area);
  SolveResult sol = cg_solve(a, rhs, tol, 0, x0);

  PressureField field;
  field.pressure = std::move(sol.x);
  field.iterations = sol.iterations;
  field.robin = robin;
  field.global_nodes.resize(artery.nodes.size());
  for (NodeId v = 0; v < artery.nodes.size(); ++v) field.global_nodes[v] = global_id(artery, v);
  return field;
}

BoundaryFlux flux_from_pressure(const PressureField& field, const TetMesh& tissue, double total) {
  std::unordered_map<NodeId, std::size_t> index;
  index.reserve(field.global_nodes.size());
  for (std::size_t i = 0; i < field.global_nodes.size(); ++i) index.emplace(field.global_nodes[i], i);

  const auto facets = patch_facets(tissue, kArterialPatch);
  std::vector<double> raw;
  raw.reserve(facets.size());
  const double k = field.robin.coefficient();
  for (std::size_t f : facets) {
    double mean = 0.0;
    for (NodeId v : tissue.boundary_tris[f].nodes) {
      auto it = index.find(global_id(tissue, v));
      if (it == index.end())
        throw ValidationError("B facet " + std::to_string(f) + " is not covered by the pressure field");
      mean += field.pressure[it->second];
    }
    mean /= 3.0;
    raw.push_back(k * (field.robin.reference_pressure(facet_centroid(tissue, f)) - mean));
  }
  return normalize_flux(tissue, raw, total);
}

std::vector<double> flux_load(const TetMesh& mesh, const BoundaryFlux& flux, double scale) {
  std::vector<double> values(flux.density.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = scale * flux.density[i];
  return assemble_boundary_load(mesh, kArterialPatch, values);
}

}  // namespace mcirc
