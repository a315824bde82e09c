#include "mcirc/vasculature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <tuple>

#include "mcirc/error.hpp"

namespace mcirc {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw ValidationError(what);
}

}  // namespace

void validate(const VesselParams& p) {
  require(p.arteriole_diameter > 0.0, "D_a must be positive");
  require(p.capillary_diameter > 0.0, "D_c must be positive");
  require(p.venule_diameter > 0.0, "D_v must be positive");
  require(p.arteriole_area_fraction > 0.0, "gamma_a must be positive");
  require(p.capillary_area_fraction >= 0.0, "gamma_c must be nonnegative");
  require(p.venule_area_fraction >= 0.0, "gamma_v must be nonnegative");
  require(std::abs(p.arteriole_area_fraction + p.capillary_area_fraction +
                   p.venule_area_fraction - 1.0) <= 1e-12,
          "gamma_a + gamma_c + gamma_v must equal 1");
  require(p.expansion_factor >= 0.0, "theta must be nonnegative");
  require(p.arteriole_pressure_drop > 0.0 && p.arteriole_pressure_drop <= 1.0,
          "vartheta must lie in (0, 1]");
  require(p.oxygenated_fraction > 0.0 && p.oxygenated_fraction < 1.0, "h must lie in (0, 1)");
  require(p.viscosity > 0.0, "mu must be positive");
  require(p.density > 0.0, "rho must be positive");
  require(p.total_flow > 0.0, "Q must be positive");
  require(p.mean_pressure > 0.0, "p_bar must be positive");
  require(p.gradient_coupling >= 0.0, "tau must be nonnegative");
  require(p.oxygen_consumption >= 0.0, "eta must be nonnegative");
  require(p.hemoglobin_molality > 0.0, "psi must be positive");
  require(p.duration >= 0.0, "T must be nonnegative");
  require(p.time_step > 0.0, "dt must be positive");
  require(p.signal_decay > 0.0, "kappa must be positive");
  require(p.flow_elimination > 0.0, "gamma_hrf must be positive");
  require(std::isfinite(p.neural_drive), "zeta_hrf must be finite");
  require(std::isfinite(p.gravity_z), "g_z must be finite");
}

CompartmentTable CompartmentTable::builtin() {
  CompartmentTable t;
  t.set(labels::kCerebralGm, {"cerebral_gm", 2.4e8});
  t.set(labels::kCerebralWm, {"cerebral_wm", 1.4e8});
  t.set(labels::kCerebellarGm, {"cerebellar_gm", 3.0e8});
  t.set(labels::kCerebellarWm, {"cerebellar_wm", 1.0e8});
  t.set(labels::kSubcorticalGm, {"subcortical_gm", 3.3e8});
  t.set(labels::kSubcorticalWm, {"subcortical_wm", 1.5e8});
  t.set(labels::kBrainstem, {"brainstem", 2.9e8});
  return t;
}

void CompartmentTable::set(Label label, Compartment c) {
  if (label == labels::kArtery)
    throw ValidationError("label 0 is reserved for the arterial compartment");
  if (!(c.length_density > 0.0))
    throw ValidationError("length density of compartment '" + c.name + "' must be positive");
  entries_[label] = std::move(c);
}

const Compartment& CompartmentTable::at(Label label) const {
  auto it = entries_.find(label);
  if (it == entries_.end())
    throw ValidationError("no compartment with label " + std::to_string(label));
  return it->second;
}

std::optional<Label> CompartmentTable::find(const std::string& name) const {
  for (const auto& [label, c] : entries_)
    if (c.name == name) return label;
  return std::nullopt;
}

double cross_section_area(double diameter) {
  require(diameter > 0.0, "vessel diameter must be positive");
  return std::numbers::pi * diameter * diameter / 4.0;
}

double arteriole_length_density(double length_density, const VesselParams& p) {
  require(length_density > 0.0, "length density must be positive");
  const double aa = cross_section_area(p.arteriole_diameter);
  const double ac = cross_section_area(p.capillary_diameter);
  const double av = cross_section_area(p.venule_diameter);
  const double ga = p.arteriole_area_fraction;
  const double bracket = 1.0 + aa * p.capillary_area_fraction / (ac * ga) +
                         aa * p.venule_area_fraction / (av * ga);
  return length_density / bracket;
}

std::pair<double, double> capillary_venule_densities(double arteriole_density,
                                                     const VesselParams& p) {
  require(arteriole_density > 0.0, "arteriole length density must be positive");
  const double aa = cross_section_area(p.arteriole_diameter);
  const double ac = cross_section_area(p.capillary_diameter);
  const double av = cross_section_area(p.venule_diameter);
  const double ga = p.arteriole_area_fraction;
  return {aa * arteriole_density * p.capillary_area_fraction / (ac * ga),
          aa * arteriole_density * p.venule_area_fraction / (av * ga)};
}

double background_tbv(double arteriole_density, const VesselParams& p) {
  const auto [xi_c, xi_v] = capillary_venule_densities(arteriole_density, p);
  return p.expansion_factor * (arteriole_density * cross_section_area(p.arteriole_diameter) +
                               xi_c * cross_section_area(p.capillary_diameter) +
                               xi_v * cross_section_area(p.venule_diameter));
}

double diffusion_coefficient(double lambda_ratio, const VesselParams& p) {
  require(lambda_ratio > 0.0, "lambda ratio must be positive");
  return lambda_ratio * cross_section_area(p.arteriole_diameter) * p.mean_pressure /
         (8.0 * std::numbers::pi * p.viscosity);
}

double arteriole_flow_rate(double total_flow, double interface_area,
                           double mean_arteriole_density) {
  require(total_flow > 0.0, "total flow must be positive");
  require(interface_area > 0.0, "arterial interface area must be positive");
  require(mean_arteriole_density > 0.0, "mean arteriole density must be positive");
  return total_flow / (interface_area * mean_arteriole_density);
}

double arteriole_length(double arteriole_flow, const VesselParams& p) {
  require(arteriole_flow > 0.0, "arteriole flow rate must be positive");
  const double aa = cross_section_area(p.arteriole_diameter);
  const double len = p.arteriole_pressure_drop * p.mean_pressure * aa * aa /
                     (8.0 * std::numbers::pi * p.viscosity * arteriole_flow);
  require(len > 0.0, "degenerate arteriole length (vartheta = 0)");
  return len;
}

double outflow_rate(double delta, double c_tilde, double arteriole_len, double max_element_volume,
                    const VesselParams& p) {
  require(arteriole_len > 0.0, "arteriole length must be positive");
  require(max_element_volume > 0.0, "largest element volume must be positive");
  const double flux = delta * p.gradient_coupling * p.arteriole_pressure_drop * c_tilde /
                      arteriole_len;
  return flux * std::cbrt(36.0 * std::numbers::pi / max_element_volume);
}

double oxygen_consumption_rate(const VesselParams& p) {
  return p.oxygen_consumption / (p.density * p.hemoglobin_molality);
}

DerivedVesselFields derive_fields(const TetMesh& tissue, const VesselParams& p,
                                  const CompartmentTable& table) {
  validate(p);
  if (tissue.tets.empty()) throw ValidationError("tissue mesh has no elements");

  DerivedVesselFields d;
  for (Label l : tissue.tet_labels) {
    if (l == labels::kArtery)
      throw ValidationError("tissue mesh contains artery-labeled elements");
    if (d.compartments.count(l)) continue;
    CompartmentFields cf;
    cf.xi = table.at(l).length_density;
    cf.xi_a = arteriole_length_density(cf.xi, p);
    std::tie(cf.xi_c, cf.xi_v) = capillary_venule_densities(cf.xi_a, p);
    cf.c_bar = background_tbv(cf.xi_a, p);
    d.compartments.emplace(l, cf);
  }

  const auto owners = facet_owner_tets(tissue);
  double weighted = 0.0;
  for (std::size_t f = 0; f < tissue.boundary_tris.size(); ++f) {
    if (tissue.boundary_tris[f].patch != kArterialPatch) continue;
    const double a = facet_area(tissue, f);
    d.interface_area += a;
    weighted += a * d.compartments.at(tissue.tet_labels[owners[f]]).xi_a;
  }
  if (!(d.interface_area > 0.0))
    throw ValidationError("tissue mesh has no arterial interface facets");
  d.xi_a_mean = weighted / d.interface_area;

  for (std::size_t t = 0; t < tissue.tets.size(); ++t) {
    const double v = tet_volume(tissue, t);
    d.domain_volume += v;
    d.max_element_volume = std::max(d.max_element_volume, v);
  }
  d.arteriole_flow = arteriole_flow_rate(p.total_flow, d.interface_area, d.xi_a_mean);
  d.arteriole_len = arteriole_length(d.arteriole_flow, p);
  d.upsilon = oxygen_consumption_rate(p);

  for (auto& [label, cf] : d.compartments) {
    cf.lambda_ratio = cf.xi_a / d.xi_a_mean;
    cf.delta = diffusion_coefficient(cf.lambda_ratio, p);
    cf.epsilon = outflow_rate(cf.delta, cf.c_bar, d.arteriole_len, d.max_element_volume, p);
  }

  const std::size_t n = tissue.tets.size();
  d.element_delta.resize(n);
  d.element_epsilon.resize(n);
  d.element_upsilon.assign(n, d.upsilon);
  d.element_c_bar.resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    const auto& cf = d.compartments.at(tissue.tet_labels[t]);
    d.element_delta[t] = cf.delta;
    d.element_epsilon[t] = cf.epsilon;
    d.element_c_bar[t] = cf.c_bar;
  }
  return d;
}

}  // namespace mcirc
