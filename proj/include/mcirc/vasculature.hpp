#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mcirc/mesh.hpp"

namespace mcirc {

inline constexpr double kPascalPerMmHg = 133.322;
/// 1 ml/min in m^3/s.
inline constexpr double kCubicMetrePerSecondPerMlMin = 1.0e-6 / 60.0;

/// Physical model parameters in SI units. Defaults are the reference
/// simulation values (gray-matter cortex, 21 s window, 0.25 s step).
struct VesselParams {
  // Microvessel lumen diameters (m).
  double arteriole_diameter = 1.0e-5;
  double capillary_diameter = 7.0e-6;
  double venule_diameter = 1.8e-5;
  // Total cross-sectional area fractions; must sum to one.
  double arteriole_area_fraction = 0.3;
  double capillary_area_fraction = 0.4;
  double venule_area_fraction = 0.3;

  double expansion_factor = 0.21;         ///< theta
  double arteriole_pressure_drop = 0.7;   ///< vartheta, fraction of mean pressure
  double oxygenated_fraction = 0.85;      ///< h
  double viscosity = 4.0e-3;              ///< Pa s
  double density = 1050.0;                ///< kg/m^3
  double total_flow = 750.0 * kCubicMetrePerSecondPerMlMin;  ///< m^3/s
  double mean_pressure = 75.0 * kPascalPerMmHg;              ///< Pa
  double gradient_coupling = 1.0;         ///< tau, DBV/TBV gradient ratio
  double oxygen_consumption = 0.4;        ///< eta, 1/s
  double hemoglobin_molality = 0.0018;    ///< psi, mol/kg

  double duration = 21.0;   ///< T, s
  double time_step = 0.25;  ///< s

  // Damped-oscillator hemodynamic response.
  double signal_decay = 0.65;      ///< kappa, 1/s
  double flow_elimination = 0.41;  ///< gamma, 1/s^2
  double neural_drive = 1.0;       ///< zeta, 1/s^2

  double gravity_z = -9.81;  ///< m/s^2
};

/// Throws ValidationError naming the first offending field.
void validate(const VesselParams& p);

struct Compartment {
  std::string name;
  double length_density = 0.0;  ///< xi, m^-2
};

/// Compartment label -> (name, microvessel length density).
class CompartmentTable {
 public:
  /// Cortical, cerebellar, subcortical and brainstem densities.
  static CompartmentTable builtin();

  void set(Label label, Compartment c);
  const Compartment& at(Label label) const;
  bool contains(Label label) const { return entries_.count(label) != 0; }
  std::optional<Label> find(const std::string& name) const;
  const std::map<Label, Compartment>& entries() const { return entries_; }

 private:
  std::map<Label, Compartment> entries_;
};

double cross_section_area(double diameter);
double arteriole_length_density(double length_density, const VesselParams& p);
/// (capillary, venule) length densities implied by an arteriole density.
std::pair<double, double> capillary_venule_densities(double arteriole_density,
                                                     const VesselParams& p);
double background_tbv(double arteriole_density, const VesselParams& p);
double diffusion_coefficient(double lambda_ratio, const VesselParams& p);
double arteriole_flow_rate(double total_flow, double interface_area, double mean_arteriole_density);
double arteriole_length(double arteriole_flow, const VesselParams& p);
/// Venous outflow rate that balances the arteriolar flux on the surface of a
/// sphere with the volume of the largest element.
double outflow_rate(double delta, double c_tilde, double arteriole_len, double max_element_volume,
                    const VesselParams& p);
double oxygen_consumption_rate(const VesselParams& p);

struct CompartmentFields {
  double xi = 0.0;
  double xi_a = 0.0;
  double xi_c = 0.0;
  double xi_v = 0.0;
  double lambda_ratio = 0.0;
  double delta = 0.0;
  double c_bar = 0.0;
  double epsilon = 0.0;
};

struct DerivedVesselFields {
  std::map<Label, CompartmentFields> compartments;
  double xi_a_mean = 0.0;        ///< area-weighted over B
  double interface_area = 0.0;   ///< |B|, m^2
  double domain_volume = 0.0;    ///< m^3
  double arteriole_flow = 0.0;   ///< Q_a, m^3/s
  double arteriole_len = 0.0;    ///< L, m
  double max_element_volume = 0.0;
  double upsilon = 0.0;          ///< 1/s

  // Per-tetrahedron coefficients of the tissue mesh.
  std::vector<double> element_delta;
  std::vector<double> element_epsilon;
  std::vector<double> element_upsilon;
  std::vector<double> element_c_bar;
};

/// Evaluates every derived quantity on a tissue mesh (no artery-labeled
/// tets) whose interface facets carry kArterialPatch.
DerivedVesselFields derive_fields(const TetMesh& tissue, const VesselParams& p,
                                  const CompartmentTable& table);

}  // namespace mcirc
