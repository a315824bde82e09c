#include "mcirc/config.hpp"

#include <cstdio>
#include <functional>
#include <set>

#include "mcirc/error.hpp"
#include "mcirc/text.hpp"

namespace mcirc {

namespace {

using Setter = std::function<void(RunConfig&, std::string_view)>;
using Getter = std::function<std::string(const RunConfig&)>;

struct Key {
  const char* section;
  const char* name;
  Setter set;
  Getter get;
};

[[noreturn]] void bad_value(std::string_view key, std::string_view value, const char* expect) {
  throw ValidationError("config key '" + std::string(key) + "': expected " + expect + ", got '" +
                        std::string(value) + "'");
}

double to_double(std::string_view key, std::string_view v) {
  double x = 0.0;
  if (!parse_double(v, x)) bad_value(key, v, "a number");
  return x;
}

Vec3 to_vec3(std::string_view key, std::string_view v) {
  const auto parts = split_ws(v);
  if (parts.size() != 3) bad_value(key, v, "three numbers");
  return {to_double(key, parts[0]), to_double(key, parts[1]), to_double(key, parts[2])};
}

std::string vec3_str(const Vec3& p) {
  return format_double(p[0]) + ' ' + format_double(p[1]) + ' ' + format_double(p[2]);
}

template <typename Access>
Key real(const char* section, const char* name, Access access, double scale = 1.0) {
  return {section, name,
          [=](RunConfig& c, std::string_view v) { access(c) = to_double(name, v) * scale; },
          [=](const RunConfig& c) { return format_double(access(c) / scale); }};
}

std::vector<Key> build_keys() {
  std::vector<Key> k;
  // mesh
  k.push_back({"mesh", "mesh_file",
               [](RunConfig& c, std::string_view v) { c.mesh.file = std::string(v); },
               [](const RunConfig& c) { return c.mesh.file.empty() ? std::string("none") : c.mesh.file.string(); }});
  k.push_back({"mesh", "mesh_shape",
               [](RunConfig& c, std::string_view v) {
                 if (v == "box") c.mesh.shape = MeshShape::kBox;
                 else if (v == "sphere_in_box") c.mesh.shape = MeshShape::kSphereInBox;
                 else bad_value("mesh_shape", v, "box or sphere_in_box");
               },
               [](const RunConfig& c) {
                 return std::string(c.mesh.shape == MeshShape::kBox ? "box" : "sphere_in_box");
               }});
  k.push_back({"mesh", "mesh_cells",
               [](RunConfig& c, std::string_view v) {
                 if (!parse_int(v, c.mesh.cells)) bad_value("mesh_cells", v, "an integer");
               },
               [](const RunConfig& c) { return std::to_string(c.mesh.cells); }});
  k.push_back(real("mesh", "mesh_extent", [](auto& c) -> auto& { return c.mesh.extent; }));
  k.push_back(real("mesh", "sphere_diameter",
                   [](auto& c) -> auto& { return c.mesh.sphere_diameter; }));
  k.push_back({"mesh", "tissue", [](RunConfig& c, std::string_view v) { c.mesh.tissue = std::string(v); },
               [](const RunConfig& c) { return c.mesh.tissue; }});

  // params
  auto p = [&](const char* name, double VesselParams::*field, double scale = 1.0) {
    k.push_back(real("params", name, [field](auto& c) -> auto& { return c.params.*field; }, scale));
  };
  p("D_a", &VesselParams::arteriole_diameter);
  p("D_c", &VesselParams::capillary_diameter);
  p("D_v", &VesselParams::venule_diameter);
  p("gamma_a", &VesselParams::arteriole_area_fraction);
  p("gamma_c", &VesselParams::capillary_area_fraction);
  p("gamma_v", &VesselParams::venule_area_fraction);
  p("theta", &VesselParams::expansion_factor);
  p("vartheta", &VesselParams::arteriole_pressure_drop);
  p("h", &VesselParams::oxygenated_fraction);
  p("mu", &VesselParams::viscosity);
  p("rho", &VesselParams::density);
  p("Q_ml_per_min", &VesselParams::total_flow, kCubicMetrePerSecondPerMlMin);
  p("p_bar_mmHg", &VesselParams::mean_pressure, kPascalPerMmHg);
  p("tau", &VesselParams::gradient_coupling);
  p("eta", &VesselParams::oxygen_consumption);
  p("psi", &VesselParams::hemoglobin_molality);
  p("T", &VesselParams::duration);
  p("dt", &VesselParams::time_step);
  p("kappa", &VesselParams::signal_decay);
  p("gamma_hrf", &VesselParams::flow_elimination);
  p("zeta_hrf", &VesselParams::neural_drive);
  p("g_z", &VesselParams::gravity_z);

  // hrf / source
  k.push_back({"hrf", "amplitude_target",
               [](RunConfig& c, std::string_view v) {
                 if (v == "none") c.hrf.amplitude_target.reset();
                 else c.hrf.amplitude_target = to_double("amplitude_target", v);
               },
               [](const RunConfig& c) {
                 return c.hrf.amplitude_target ? format_double(*c.hrf.amplitude_target) : std::string("none");
               }});
  k.push_back({"hrf", "source_point",
               [](RunConfig& c, std::string_view v) { c.hrf.source_point = to_vec3("source_point", v); },
               [](const RunConfig& c) { return vec3_str(c.source_point()); }});
  k.push_back({"hrf", "source_mode",
               [](RunConfig& c, std::string_view v) {
                 if (v == "node") c.hrf.mode = SourceMode::kSingleNode;
                 else if (v == "gaussian") c.hrf.mode = SourceMode::kGaussian;
                 else bad_value("source_mode", v, "node or gaussian");
               },
               [](const RunConfig& c) {
                 return std::string(c.hrf.mode == SourceMode::kSingleNode ? "node" : "gaussian");
               }});
  k.push_back(real("hrf", "source_volume", [](auto& c) -> auto& { return c.hrf.source_volume; }));
  k.push_back(real("hrf", "source_width", [](auto& c) -> auto& { return c.hrf.source_width; }));

  // flux
  k.push_back({"flux", "flux_mode",
               [](RunConfig& c, std::string_view v) {
                 if (v == "none") c.flux.mode = FluxMode::kNone;
                 else if (v == "prescribed") c.flux.mode = FluxMode::kPrescribed;
                 else if (v == "ppe") c.flux.mode = FluxMode::kPpe;
                 else bad_value("flux_mode", v, "none, prescribed or ppe");
               },
               [](const RunConfig& c) {
                 switch (c.flux.mode) {
                   case FluxMode::kNone: return std::string("none");
                   case FluxMode::kPrescribed: return std::string("prescribed");
                   default: return std::string("ppe");
                 }
               }});
  k.push_back({"flux", "influx_total",
               [](RunConfig& c, std::string_view v) {
                 if (v == "auto") c.flux.total.reset();
                 else c.flux.total = to_double("influx_total", v);
               },
               [](const RunConfig& c) {
                 return c.flux.total ? format_double(*c.flux.total) : std::string("auto");
               }});
  k.push_back(real("flux", "zeta_r", [](auto& c) -> auto& { return c.flux.zeta_r; }));
  k.push_back(real("flux", "lambda_r", [](auto& c) -> auto& { return c.flux.lambda_r; }));
  k.push_back({"flux", "p_B_mmHg",
               [](RunConfig& c, std::string_view v) {
                 if (v == "auto") c.flux.reference_pressure.reset();
                 else c.flux.reference_pressure = to_double("p_B_mmHg", v) * kPascalPerMmHg;
               },
               [](const RunConfig& c) {
                 return c.flux.reference_pressure
                            ? format_double(*c.flux.reference_pressure / kPascalPerMmHg)
                            : std::string("auto");
               }});
  k.push_back(real("flux", "p_B_gradient", [](auto& c) -> auto& { return c.flux.reference_gradient; }));

  // output
  k.push_back({"output", "out_dir", [](RunConfig& c, std::string_view v) { c.output.dir = std::string(v); },
               [](const RunConfig& c) { return c.output.dir.string(); }});
  k.push_back({"output", "cadence",
               [](RunConfig& c, std::string_view v) {
                 if (!parse_size(v, c.output.cadence) || c.output.cadence == 0)
                   bad_value("cadence", v, "a positive integer");
               },
               [](const RunConfig& c) { return std::to_string(c.output.cadence); }});
  k.push_back(real("output", "solver_tol", [](auto& c) -> auto& { return c.output.solver_tol; }));
  return k;
}

const std::vector<Key>& keys() {
  static const std::vector<Key> k = build_keys();
  return k;
}

void validate(const RunConfig& c) {
  validate(c.params);
  if (c.mesh.cells < 1) throw ValidationError("mesh_cells must be at least 1");
  if (!(c.mesh.extent > 0.0)) throw ValidationError("mesh_extent must be positive");
  if (!(c.mesh.sphere_diameter > 0.0)) throw ValidationError("sphere_diameter must be positive");
  if (c.hrf.amplitude_target && !(*c.hrf.amplitude_target > 0.0))
    throw ValidationError("amplitude_target must be positive");
  if (c.hrf.source_volume < 0.0) throw ValidationError("source_volume must be nonnegative");
  if (!(c.hrf.source_width > 0.0)) throw ValidationError("source_width must be positive");
  if (c.flux.total && *c.flux.total < 0.0) throw ValidationError("influx_total must be nonnegative");
  if (!(c.flux.zeta_r > 0.0)) throw ValidationError("zeta_r must be positive");
  if (!(c.flux.lambda_r > 0.0)) throw ValidationError("lambda_r must be positive");
  if (!(c.output.solver_tol > 0.0)) throw ValidationError("solver_tol must be positive");
  if (!c.compartments().find(c.mesh.tissue))
    throw ValidationError("tissue: unknown compartment '" + c.mesh.tissue + "'");
}

}  // namespace

CompartmentTable RunConfig::compartments() const {
  CompartmentTable t = CompartmentTable::builtin();
  for (const auto& [name, xi] : length_densities) {
    auto label = t.find(name);
    if (!label) throw ValidationError("xi." + name + ": unknown compartment");
    t.set(*label, {name, xi});
  }
  return t;
}

std::vector<RoiSpec> RunConfig::resolved_rois() const {
  if (!rois.empty()) return rois;
  RoiSpec r;
  r.name = "source";
  r.center = source_point();
  return {r};
}

RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;
  std::string section;
  std::set<std::string> seen;
  std::set<std::string> roi_names;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + start, end - start);
    start = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ValidationError(where + "unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      static const std::set<std::string> known = {"mesh", "compartments", "params", "hrf",
                                                  "flux", "roi", "output"};
      if (!known.count(section)) throw ValidationError(where + "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ValidationError(where + "expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key.empty()) throw ValidationError(where + "missing key");
    if (value.empty()) throw ValidationError(where + "config key '" + key + "' has no value");

    auto check_section = [&](const char* expected) {
      if (!section.empty() && section != expected)
        throw ValidationError(where + "config key '" + key + "' belongs in [" + expected + "]");
    };

    if (key == "roi") {
      check_section("roi");
      const auto parts = split_ws(value);
      if (parts.size() != 4 && parts.size() != 5)
        bad_value(key, value, "'name x y z [diameter]'");
      RoiSpec r;
      r.name = std::string(parts[0]);
      if (!roi_names.insert(r.name).second) throw ValidationError(where + "duplicate roi '" + r.name + "'");
      r.center = {to_double(key, parts[1]), to_double(key, parts[2]), to_double(key, parts[3])};
      if (parts.size() == 5) r.diameter = to_double(key, parts[4]);
      if (!(r.diameter > 0.0)) throw ValidationError(where + "roi diameter must be positive");
      cfg.rois.push_back(r);
      continue;
    }
    if (!seen.insert(key).second) throw ValidationError(where + "duplicate config key '" + key + "'");
    if (key.rfind("xi.", 0) == 0) {
      check_section("compartments");
      cfg.length_densities[key.substr(3)] = to_double(key, value);
      continue;
    }
    bool found = false;
    for (const Key& k : keys()) {
      if (key != k.name) continue;
      check_section(k.section);
      k.set(cfg, value);
      found = true;
      break;
    }
    if (!found) throw ValidationError(where + "unknown config key '" + key + "'");
  }
  validate(cfg);
  return cfg;
}

RunConfig parse_config(const std::filesystem::path& path) {
  return parse_config_text(read_text_file(path));
}

std::string format_config(const RunConfig& cfg) {
  std::string out;
  const char* current = "";
  for (const Key& k : keys()) {
    if (std::string_view(current) != k.section) {
      current = k.section;
      out += std::string(out.empty() ? "" : "\n") + '[' + current + "]\n";
    }
    out += std::string(k.name) + " = " + k.get(cfg) + '\n';
  }
  if (!cfg.length_densities.empty()) {
    out += "\n[compartments]\n";
    for (const auto& [name, xi] : cfg.length_densities)
      out += "xi." + name + " = " + format_double(xi) + '\n';
  }
  if (!cfg.rois.empty()) {
    out += "\n[roi]\n";
    for (const auto& r : cfg.rois)
      out += "roi = " + r.name + ' ' + vec3_str(r.center) + ' ' + format_double(r.diameter) + '\n';
  }
  return out;
}

std::string config_hash(const RunConfig& cfg) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : format_config(cfg)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace mcirc
