#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mcirc/error.hpp"
#include "mcirc/mesh.hpp"
#include "mcirc/vasculature.hpp"

using namespace mcirc;

namespace {

bool rel_close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::abs(b); }

// Tissue cube [0,1]^3 (scaled) whose x = 0 face is the arterial interface.
TetMesh interface_cube(int n, double size, Label label = labels::kCerebralGm) {
  TetMesh m = generate_box_mesh(n, n, n, {size, size, size}, {0, 0, 0}, label);
  for (auto& bt : m.boundary_tris) {
    bool on_face = true;
    for (NodeId v : bt.nodes) on_face = on_face && m.nodes[v][0] == 0.0;
    if (on_face) bt.patch = kArterialPatch;
  }
  return m;
}

}  // namespace

TEST_SUITE("vasculature") {

TEST_CASE("cross-sectional areas") {
  CHECK(rel_close(cross_section_area(1.0e-5), 7.853982e-11, 1e-6));
  CHECK(rel_close(cross_section_area(7.0e-6), 3.848451e-11, 1e-6));
  CHECK_THROWS_AS(cross_section_area(0.0), ValidationError);
}

TEST_CASE("length density decomposition") {
  const VesselParams p;
  const double xi_a = arteriole_length_density(2.4e8, p);
  CHECK(rel_close(xi_a, 5.9557e7, 1e-4));
  CHECK(rel_close(2.4e8 / xi_a, 4.02973, 1e-5));
  CHECK_THROWS_AS(arteriole_length_density(0.0, p), ValidationError);

  VesselParams only_a = p;
  only_a.arteriole_area_fraction = 1.0;
  only_a.capillary_area_fraction = 0.0;
  only_a.venule_area_fraction = 0.0;
  CHECK(arteriole_length_density(2.4e8, only_a) == doctest::Approx(2.4e8));

  const auto [xi_c, xi_v] = capillary_venule_densities(5.9557e7, p);
  CHECK(rel_close(xi_c, 1.6206e8, 1e-4));
  CHECK(rel_close(xi_v, 1.8382e7, 1e-4));
  CHECK(rel_close(xi_c / 5.9557e7, 2.72109, 1e-5));
  CHECK(rel_close(xi_v / 5.9557e7, 0.308642, 1e-5));
  CHECK(capillary_venule_densities(5.9557e7, only_a).first == 0.0);

  SUBCASE("densities partition the total") {
    for (double xi : {1.0e8, 2.4e8, 3.3e8}) {
      const double a = arteriole_length_density(xi, p);
      const auto [c, v] = capillary_venule_densities(a, p);
      CHECK(rel_close(a + c + v, xi, 1e-12));
    }
  }
}

TEST_CASE("background TBV fraction") {
  VesselParams p;
  const double xi_a = arteriole_length_density(2.4e8, p);
  const double c_bar = background_tbv(xi_a, p);
  CHECK(rel_close(c_bar, 3.2743e-3, 1e-4));
  // Sum over vessel classes collapses to theta * xi_a * A_a / gamma_a.
  const double closed = p.expansion_factor * xi_a * cross_section_area(p.arteriole_diameter) /
                        p.arteriole_area_fraction;
  CHECK(rel_close(c_bar, closed, 1e-12));
  CHECK(rel_close(background_tbv(arteriole_length_density(4.8e8, p), p), 2.0 * c_bar, 1e-12));

  p.expansion_factor = 0.42;
  CHECK(rel_close(background_tbv(xi_a, p), 2.0 * c_bar, 1e-12));
  p.expansion_factor = 0.0;
  CHECK(background_tbv(xi_a, p) == 0.0);
}

TEST_CASE("diffusion coefficient") {
  VesselParams p;
  CHECK(rel_close(p.mean_pressure, 9999.15, 1e-9));
  const double d1 = diffusion_coefficient(1.0, p);
  CHECK(rel_close(d1, 7.812e-6, 2e-4));
  CHECK(diffusion_coefficient(2.0, p) == 2.0 * d1);
  p.viscosity *= 2.0;
  CHECK(rel_close(diffusion_coefficient(1.0, p), d1 / 2.0, 1e-14));
  CHECK_THROWS_AS(diffusion_coefficient(0.0, p), ValidationError);
}

TEST_CASE("arteriole flow rate and length") {
  VesselParams p;
  CHECK(rel_close(p.total_flow, 1.25e-5, 1e-12));
  const double qa = arteriole_flow_rate(1.25e-5, 1e-3, 5.9557e7);
  CHECK(rel_close(qa, 2.099e-10, 1e-3));
  CHECK(rel_close(arteriole_flow_rate(1.25e-5, 2e-3, 5.9557e7), qa / 2.0, 1e-14));
  CHECK_THROWS_AS(arteriole_flow_rate(1.25e-5, 0.0, 5.9557e7), ValidationError);
  CHECK_THROWS_AS(arteriole_flow_rate(1.25e-5, 1e-3, 0.0), ValidationError);

  const double len = arteriole_length(2.099e-10, p);
  CHECK(rel_close(len, 2.046e-6, 1e-3));
  CHECK(rel_close(arteriole_length(2.0 * 2.099e-10, p), len / 2.0, 1e-14));
  p.arteriole_pressure_drop = 0.0;
  CHECK_THROWS_AS(arteriole_length(2.099e-10, p), ValidationError);
}

TEST_CASE("outflow rate") {
  VesselParams p;
  // Listed as 4.8366e3; direct evaluation gives 4835.98.
  CHECK(rel_close(std::cbrt(36.0 * std::numbers::pi / 1e-9), 4.8366e3, 2e-4));
  const double eps = outflow_rate(7.812e-6, 0.02, 2.046e-6, 1e-9, p);
  CHECK(rel_close(eps, 2.586e2, 1e-3));
  CHECK(rel_close(outflow_rate(7.812e-6, 0.02, 2.046e-6, 8e-9, p), eps / 2.0, 1e-12));
  // Sphere calibration: eps * V = 4 pi R^2 |J| with |J| = delta tau vartheta c / L.
  const double r = std::cbrt(3.0 * 1e-9 / (4.0 * std::numbers::pi));
  const double flux = 7.812e-6 * 0.7 * 0.02 / 2.046e-6;
  CHECK(rel_close(eps * 1e-9, 4.0 * std::numbers::pi * r * r * flux, 1e-12));
  CHECK_THROWS_AS(outflow_rate(7.812e-6, 0.02, 0.0, 1e-9, p), ValidationError);
  CHECK_THROWS_AS(outflow_rate(7.812e-6, 0.02, 2.046e-6, 0.0, p), ValidationError);
  p.gradient_coupling = 0.0;
  CHECK(outflow_rate(7.812e-6, 0.02, 2.046e-6, 1e-9, p) == 0.0);
}

TEST_CASE("oxygen consumption rate") {
  VesselParams p;
  CHECK(rel_close(oxygen_consumption_rate(p), 0.4 / 1.89, 1e-12));
  CHECK(rel_close(oxygen_consumption_rate(p), 0.21164, 1e-4));
  p.hemoglobin_molality *= 2.0;
  CHECK(rel_close(oxygen_consumption_rate(p), 0.4 / 3.78, 1e-12));
  p.oxygen_consumption = 0.0;
  CHECK(oxygen_consumption_rate(p) == 0.0);
}

TEST_CASE("parameter validation names the field") {
  VesselParams p;
  CHECK_NOTHROW(validate(p));
  p.time_step = -1.0;
  CHECK_THROWS_WITH_AS(validate(p), doctest::Contains("dt"), ValidationError);
  p = VesselParams{};
  p.capillary_area_fraction = 0.5;
  CHECK_THROWS_WITH_AS(validate(p), doctest::Contains("gamma"), ValidationError);
  p = VesselParams{};
  p.oxygenated_fraction = 1.0;
  CHECK_THROWS_AS(validate(p), ValidationError);
}

TEST_CASE("compartment table") {
  const auto t = CompartmentTable::builtin();
  CHECK(t.at(labels::kCerebralGm).length_density == 2.4e8);
  CHECK(t.find("brainstem") == labels::kBrainstem);
  CHECK_FALSE(t.find("liver").has_value());
  CHECK_THROWS_AS(t.at(42), ValidationError);
  CompartmentTable u;
  CHECK_THROWS_AS(u.set(labels::kArtery, {"artery", 1.0}), ValidationError);
  CHECK_THROWS_AS(u.set(3, {"x", 0.0}), ValidationError);
}

TEST_CASE("derived fields on a single-compartment cube") {
  const VesselParams p;
  const TetMesh m = interface_cube(3, 0.01);
  const auto d = derive_fields(m, p, CompartmentTable::builtin());
  CHECK(rel_close(d.interface_area, 1e-4, 1e-12));
  CHECK(rel_close(d.domain_volume, 1e-6, 1e-12));
  CHECK(rel_close(d.max_element_volume, 1e-6 / 162.0, 1e-12));
  CHECK(rel_close(d.xi_a_mean, 5.9557e7, 1e-4));
  const auto& cf = d.compartments.at(labels::kCerebralGm);
  CHECK(cf.lambda_ratio == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rel_close(cf.delta, 7.812e-6, 2e-4));
  CHECK(rel_close(d.arteriole_flow, p.total_flow / (1e-4 * d.xi_a_mean), 1e-12));
  CHECK(rel_close(d.arteriole_len, arteriole_length(d.arteriole_flow, p), 1e-12));
  CHECK(rel_close(cf.epsilon,
                  outflow_rate(cf.delta, cf.c_bar, d.arteriole_len, d.max_element_volume, p), 1e-12));
  CHECK(d.element_epsilon.size() == m.tets.size());
  for (double u : d.element_upsilon) CHECK(rel_close(u, 0.21164, 1e-4));
}

TEST_CASE("two compartments weight the interface mean by area") {
  const VesselParams p;
  TetMesh m = interface_cube(2, 1.0);
  // Upper half (z > 0.5) becomes white matter; half of the interface each.
  m = label_by_predicate(m, {{half_space(2, 0.5, false), labels::kCerebralWm}});
  for (auto& bt : m.boundary_tris) {
    bool on_face = true;
    for (NodeId v : bt.nodes) on_face = on_face && m.nodes[v][0] == 0.0;
    bt.patch = on_face ? kArterialPatch : kOuterPatch;
  }
  const auto d = derive_fields(m, p, CompartmentTable::builtin());
  const double gm = arteriole_length_density(2.4e8, p);
  const double wm = arteriole_length_density(1.4e8, p);
  CHECK(rel_close(d.xi_a_mean, 0.5 * (gm + wm), 1e-12));
  CHECK(rel_close(d.compartments.at(labels::kCerebralGm).lambda_ratio, gm / (0.5 * (gm + wm)), 1e-12));
  // Lambda averages to one over B with the same area measure.
  const double avg = 0.5 * d.compartments.at(labels::kCerebralGm).lambda_ratio +
                     0.5 * d.compartments.at(labels::kCerebralWm).lambda_ratio;
  CHECK(avg == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("derive_fields rejects bad meshes") {
  const VesselParams p;
  TetMesh no_b = generate_box_mesh(1, 1, 1, {1, 1, 1});
  CHECK_THROWS_AS(derive_fields(no_b, p, CompartmentTable::builtin()), ValidationError);
  TetMesh artery = interface_cube(1, 1.0, labels::kArtery);
  CHECK_THROWS_AS(derive_fields(artery, p, CompartmentTable::builtin()), ValidationError);
  TetMesh unknown = interface_cube(1, 1.0, 99);
  CHECK_THROWS_AS(derive_fields(unknown, p, CompartmentTable::builtin()), ValidationError);
}

}  // TEST_SUITE
