#include "mcirc/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <ostream>

#include <json.hpp>

#include "mcirc/assembly.hpp"
#include "mcirc/error.hpp"
#include "mcirc/io.hpp"
#include "mcirc/text.hpp"

namespace mcirc {

using nlohmann::ordered_json;

namespace {

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

ordered_json derived_json(const Scenario& sc, const RunConfig& cfg) {
  const auto& d = sc.derived;
  ordered_json comps = ordered_json::object();
  for (const auto& [label, cf] : d.compartments) {
    comps[sc.table.at(label).name] = {{"label", label},       {"xi", cf.xi},
                                      {"xi_a", cf.xi_a},      {"xi_c", cf.xi_c},
                                      {"xi_v", cf.xi_v},      {"lambda", cf.lambda_ratio},
                                      {"delta", cf.delta},    {"c_bar", cf.c_bar},
                                      {"epsilon", cf.epsilon}};
  }
  return {{"tissue_nodes", sc.tissue.nodes.size()},
          {"tissue_tets", sc.tissue.tets.size()},
          {"artery_tets", sc.artery.tets.size()},
          {"domain_volume", d.domain_volume},
          {"interface_area", d.interface_area},
          {"xi_a_mean", d.xi_a_mean},
          {"arteriole_flow", d.arteriole_flow},
          {"arteriole_length", d.arteriole_len},
          {"max_element_volume", d.max_element_volume},
          {"upsilon", d.upsilon},
          {"influx_total", influx_total(cfg)},
          {"compartments", comps}};
}

void write_manifest(const std::filesystem::path& out, const std::string& command,
                    const RunConfig& cfg, ordered_json extra) {
  ordered_json m;
  m["version"] = kVersion;
  m["command"] = command;
  m["config_hash"] = config_hash(cfg);
  m["config"] = format_config(cfg);
  for (auto& [k, v] : extra.items()) m[k] = v;
  m["timestamp"] = utc_timestamp();
  write_text_atomic(out / "manifest.json", m.dump(2) + '\n');
}

void prepare_dir(const std::filesystem::path& out) {
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec) throw ValidationError("cannot create output directory " + out.string() + ": " + ec.message());
}

std::string snapshot_name(std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "field_%06zu", k);
  return buf;
}

CsvTable field_table(const TetMesh& mesh, const SimState& s) {
  CsvTable t;
  t.header = {"node", "x", "y", "z", "c", "q_tilde", "c_bar"};
  t.rows.reserve(mesh.nodes.size());
  for (NodeId i = 0; i < mesh.nodes.size(); ++i)
    t.rows.push_back({std::to_string(i), format_double(mesh.nodes[i][0]),
                      format_double(mesh.nodes[i][1]), format_double(mesh.nodes[i][2]),
                      format_double(s.c[i]), format_double(s.q_tilde[i]), format_double(s.c_bar[i])});
  return t;
}

SimState state_from_table(const CsvTable& t, std::size_t nodes) {
  SimState s;
  s.c = t.numbers("c");
  s.q_tilde = t.numbers("q_tilde");
  s.c_bar = t.numbers("c_bar");
  if (s.c.size() != nodes) throw ValidationError("field snapshot does not match the mesh");
  return s;
}

std::string opt_str(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

CsvTable profile_table(const std::vector<ProfileBin>& tbv, const std::vector<ProfileBin>& dbv) {
  CsvTable t;
  t.header = {"r", "tbv", "dbv", "ratio"};
  for (std::size_t b = 0; b < tbv.size(); ++b) {
    std::optional<double> ratio;
    if (tbv[b].mean && dbv[b].mean && *tbv[b].mean > 0.0) ratio = *dbv[b].mean / *tbv[b].mean;
    t.rows.push_back({format_double(0.5 * (tbv[b].r_lo + tbv[b].r_hi)), opt_str(tbv[b].mean),
                      opt_str(dbv[b].mean), opt_str(ratio)});
  }
  return t;
}

}  // namespace

TetMesh build_mesh(const RunConfig& cfg) {
  const CompartmentTable table = cfg.compartments();
  if (!cfg.mesh.file.empty()) {
    TetMesh m = read_mesh(cfg.mesh.file);
    validate(m);
    return m;
  }
  const Label tissue = *table.find(cfg.mesh.tissue);
  const double e = cfg.mesh.extent;
  const int n = cfg.mesh.cells;
  TetMesh box = generate_box_mesh(n, n, n, {e, e, e}, {-e / 2, -e / 2, -e / 2}, tissue);
  if (cfg.mesh.shape == MeshShape::kBox)
    return label_by_predicate(box, {}, [](const Vec3&) { return true; });
  if (!(cfg.mesh.sphere_diameter < e))
    throw ValidationError("sphere_diameter must be smaller than mesh_extent");
  return label_by_predicate(
      box, {{[](const Vec3&) { return true; }, labels::kArtery},
            {sphere_region({0.0, 0.0, 0.0}, cfg.mesh.sphere_diameter / 2), tissue}});
}

Scenario build_scenario(const RunConfig& cfg) {
  Scenario sc;
  sc.table = cfg.compartments();
  sc.full = build_mesh(cfg);
  const bool has_artery = std::any_of(sc.full.tet_labels.begin(), sc.full.tet_labels.end(),
                                      [](Label l) { return l == labels::kArtery; });
  if (has_artery) {
    sc.tissue = tissue_submesh(sc.full);
    sc.artery = artery_submesh(sc.full);
  } else {
    sc.tissue = sc.full;
  }
  if (sc.tissue.tets.empty()) throw ValidationError("mesh has no tissue elements");
  sc.derived = derive_fields(sc.tissue, cfg.params, sc.table);
  return sc;
}

HrfSeries build_hrf(const RunConfig& cfg) {
  return hrf_alpha(solve_balloon(cfg.params), cfg.params.duration, cfg.hrf.amplitude_target);
}

double influx_total(const RunConfig& cfg) {
  return cfg.flux.total.value_or(cfg.params.expansion_factor * cfg.params.total_flow);
}

RobinSpec robin_spec(const RunConfig& cfg) {
  RobinSpec r;
  r.zeta_r = cfg.flux.zeta_r;
  r.lambda_r = cfg.flux.lambda_r;
  const double p0 = cfg.flux.reference_pressure.value_or(cfg.params.mean_pressure);
  const double grad = cfg.flux.reference_gradient;
  r.reference_pressure = [p0, grad](const Vec3& x) { return p0 + grad * x[2]; };
  return r;
}

PressureField solve_pressure(const RunConfig& cfg, const Scenario& sc) {
  if (sc.artery.tets.empty())
    throw ValidationError("flux_mode = ppe needs artery elements (use mesh_shape = sphere_in_box)");
  return solve_ppe(sc.artery, cfg.params, robin_spec(cfg));
}

std::optional<BoundaryFlux> build_flux(const RunConfig& cfg, const Scenario& sc) {
  const double total = influx_total(cfg);
  switch (cfg.flux.mode) {
    case FluxMode::kNone:
      return std::nullopt;
    case FluxMode::kPrescribed:
      return prescribed_flux(sc.tissue, total);
    case FluxMode::kPpe:
      return flux_from_pressure(solve_pressure(cfg, sc), sc.tissue, total);
  }
  return std::nullopt;
}

SourceSpec build_source(const RunConfig& cfg, const Scenario& sc, const SimState& init) {
  const auto flux = build_flux(cfg, sc);
  const double size = cfg.hrf.mode == SourceMode::kGaussian ? cfg.hrf.source_width
                                                            : cfg.hrf.source_volume;
  return make_source(sc.tissue, init.system->mass, build_hrf(cfg), cfg.source_point(), cfg.hrf.mode,
                     size, flux ? &*flux : nullptr);
}

std::optional<std::size_t> step_at(const RunConfig& cfg, double t) {
  const double ratio = t / cfg.params.time_step;
  const double k = std::round(ratio);
  if (std::abs(ratio - k) > 1e-9 || t > cfg.params.duration + 1e-12) return std::nullopt;
  return static_cast<std::size_t>(k);
}

std::set<std::size_t> snapshot_steps(const RunConfig& cfg) {
  std::set<std::size_t> s;
  const auto last = step_at(cfg, cfg.params.duration).value_or(0);
  for (std::size_t k = 0; k <= last; k += cfg.output.cadence) s.insert(k);
  for (double t : {0.25, 5.0})
    if (auto k = step_at(cfg, t)) s.insert(*k);
  return s;
}

Simulation simulate(const RunConfig& cfg, const Scenario& sc, const StateSink& sink) {
  Simulation sim;
  SimState init = init_state(sc.tissue, sc.derived, cfg.params, cfg.output.solver_tol);
  const SourceSpec src = build_source(cfg, sc, init);
  sim.rois = cfg.resolved_rois();
  std::vector<std::vector<double>> weights;
  for (const auto& r : sim.rois) weights.push_back(roi_weights(sc.tissue, r, init.system->mass));
  sim.series.resize(sim.rois.size());

  std::vector<double> tbv(init.c.size());
  auto record = [&](const SimState& s) {
    for (std::size_t i = 0; i < tbv.size(); ++i) tbv[i] = s.c[i] + s.c_bar[i];
    for (std::size_t r = 0; r < sim.rois.size(); ++r)
      sim.series[r].push(s.time, roi_mean(tbv, weights[r]), roi_mean(s.q_tilde, weights[r]));
    if (sink) sink(s);
  };
  sim.final_state = run(std::move(init), src, cfg.params.duration, record);
  return sim;
}

std::vector<RoiSummary> summarize(const TetMesh& tissue, const SparseMatrix& mass,
                                  const std::vector<RoiSpec>& rois, const SimState& s025,
                                  const SimState& s5, std::size_t n_bins) {
  const BloodSplit a = obv_dbv_split(s025.c, s025.q_tilde, s025.c_bar);
  const BloodSplit b = obv_dbv_split(s5.c, s5.q_tilde, s5.c_bar);
  std::vector<RoiSummary> out;
  for (const auto& roi : rois) {
    const auto w = roi_weights(tissue, roi, mass);
    RoiSummary s;
    s.roi = roi;
    s.background = roi_mean(s025.c_bar, w);
    s.tbv_025 = roi_mean(a.tbv, w);
    s.tbv_5 = roi_mean(b.tbv, w);
    s.dbv_025 = roi_mean(a.dbv, w);
    s.dbv_5 = roi_mean(b.dbv, w);
    s.diam_tbv = perturbation_diameter(b.tbv, a.tbv, s.background, roi, tissue);
    s.diam_dbv = perturbation_diameter(b.dbv, a.dbv, s.background, roi, tissue);
    const double r_max = roi.diameter / 2;
    s.tbv_profile_025 = radial_profile(a.tbv, roi.center, n_bins, r_max, tissue, mass);
    s.dbv_profile_025 = radial_profile(a.dbv, roi.center, n_bins, r_max, tissue, mass);
    s.tbv_profile_5 = radial_profile(b.tbv, roi.center, n_bins, r_max, tissue, mass);
    s.dbv_profile_5 = radial_profile(b.dbv, roi.center, n_bins, r_max, tissue, mass);
    out.push_back(std::move(s));
  }
  return out;
}

void command_mesh_gen(const RunConfig& cfg, const std::filesystem::path& out) {
  prepare_dir(out);
  const TetMesh mesh = build_mesh(cfg);
  write_mesh(mesh, out / "mesh.msh");
  write_vtk(mesh, {}, out / "mesh.vtk");
  write_manifest(out, "mesh-gen", cfg,
                 {{"nodes", mesh.nodes.size()},
                  {"tets", mesh.tets.size()},
                  {"boundary_tris", mesh.boundary_tris.size()},
                  {"interface_area", patch_area(mesh, kArterialPatch)}});
}

void command_derive(const RunConfig& cfg, const std::filesystem::path& out, std::ostream* log) {
  prepare_dir(out);
  const Scenario sc = build_scenario(cfg);
  const ordered_json d = derived_json(sc, cfg);
  write_text_atomic(out / "derived.json", d.dump(2) + '\n');
  write_manifest(out, "derive", cfg, {{"derived", d}});
  if (log) *log << d.dump(2) << '\n';
}

void command_hrf(const RunConfig& cfg, const std::filesystem::path& out) {
  prepare_dir(out);
  const HrfSeries s = build_hrf(cfg);
  CsvTable t;
  t.header = {"t", "alpha", "alpha_dot"};
  for (std::size_t k = 0; k < s.size(); ++k)
    t.rows.push_back({format_double(s.times[k]), format_double(s.alpha[k]), format_double(s.alpha_dot[k])});
  write_csv(t, out / "hrf.csv");
  write_manifest(out, "hrf", cfg, {{"samples", s.size()}, {"scale", s.scale}});
}

void command_ppe(const RunConfig& cfg, const std::filesystem::path& out, std::ostream* log) {
  prepare_dir(out);
  const Scenario sc = build_scenario(cfg);
  const PressureField field = solve_pressure(cfg, sc);
  write_vtk(sc.artery, {{"pressure", field.pressure}}, out / "pressure.vtk");
  const BoundaryFlux flux = flux_from_pressure(field, sc.tissue, influx_total(cfg));
  CsvTable t;
  t.header = {"facet", "area", "value"};
  for (std::size_t i = 0; i < flux.facets.size(); ++i)
    t.rows.push_back({std::to_string(flux.facets[i]), format_double(flux.area[i]),
                      format_double(flux.density[i])});
  write_csv(t, out / "flux.csv");
  write_manifest(out, "ppe", cfg,
                 {{"cg_iterations", field.iterations}, {"influx_total", flux.total},
                  {"derived", derived_json(sc, cfg)}});
  if (log) *log << "ppe: " << field.iterations << " CG iterations, " << flux.facets.size() << " B facets\n";
}

void command_run(const RunConfig& cfg, const std::filesystem::path& out, std::ostream* log) {
  prepare_dir(out);
  const Scenario sc = build_scenario(cfg);
  write_mesh(sc.tissue, out / "mesh.msh");
  const auto snaps = snapshot_steps(cfg);
  std::vector<double> tbv(sc.tissue.nodes.size());
  auto sink = [&](const SimState& s) {
    if (!snaps.count(s.step)) return;
    write_csv(field_table(sc.tissue, s), out / (snapshot_name(s.step) + ".csv"));
    for (std::size_t i = 0; i < tbv.size(); ++i) tbv[i] = s.c[i] + s.c_bar[i];
    write_vtk(sc.tissue, {{"c", s.c}, {"q_tilde", s.q_tilde}, {"tbv", tbv}},
              out / (snapshot_name(s.step) + ".vtk"));
    if (log) *log << "t = " << format_double(s.time) << " s written\n";
  };
  const Simulation sim = simulate(cfg, sc, sink);

  for (std::size_t r = 0; r < sim.rois.size(); ++r) {
    const auto& ts = sim.series[r];
    CsvTable t, rel;
    t.header = {"t", "tbv", "dbv", "obv", "ratio"};
    rel.header = {"t", "tbv", "dbv", "obv"};
    for (std::size_t k = 0; k < ts.times.size(); ++k) {
      t.rows.push_back({format_double(ts.times[k]), format_double(ts.tbv[k]), format_double(ts.dbv[k]),
                        format_double(ts.obv[k]), opt_str(ts.ratio[k])});
      rel.rows.push_back({format_double(ts.times[k]), format_double(ts.tbv[k] / ts.tbv[0]),
                          format_double(ts.dbv[k] / ts.dbv[0]), format_double(ts.obv[k] / ts.obv[0])});
    }
    write_csv(t, out / ("roi_" + sim.rois[r].name + ".csv"));
    write_csv(rel, out / ("roi_" + sim.rois[r].name + "_relative.csv"));
  }
  ordered_json snap_list = ordered_json::array();
  for (std::size_t k : snaps) snap_list.push_back(snapshot_name(k) + ".csv");
  write_manifest(out, "run", cfg,
                 {{"steps", sim.final_state.step}, {"snapshots", snap_list},
                  {"derived", derived_json(sc, cfg)}});
}

void command_analyze(const std::filesystem::path& run_dir, const std::filesystem::path& out,
                     std::ostream* log) {
  ordered_json manifest;
  try {
    manifest = ordered_json::parse(read_text_file(run_dir / "manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("malformed manifest in " + run_dir.string() + ": " + e.what());
  }
  if (!manifest.contains("config") || manifest.value("command", "") != "run")
    throw ValidationError(run_dir.string() + " is not a run directory");
  const RunConfig cfg = parse_config_text(manifest["config"].get<std::string>());
  const TetMesh tissue = read_mesh(run_dir / "mesh.msh");
  const SparseMatrix mass = assemble_mass(tissue);

  const auto k025 = step_at(cfg, 0.25), k5 = step_at(cfg, 5.0);
  if (!k025 || !k5) throw ValidationError("run does not cover t = 0.25 s and t = 5 s");
  const SimState s025 = state_from_table(read_csv(run_dir / (snapshot_name(*k025) + ".csv")), tissue.nodes.size());
  const SimState s5 = state_from_table(read_csv(run_dir / (snapshot_name(*k5) + ".csv")), tissue.nodes.size());

  prepare_dir(out);
  const auto rows = summarize(tissue, mass, cfg.resolved_rois(), s025, s5);
  CsvTable summary;
  summary.header = {"roi", "background", "tbv_025", "tbv_5", "dbv_025", "dbv_5",
                    "ratio_025", "ratio_5", "diam_tbv", "diam_dbv"};
  for (const auto& r : rows) {
    summary.rows.push_back({r.roi.name, format_double(r.background), format_double(r.tbv_025),
                            format_double(r.tbv_5), format_double(r.dbv_025), format_double(r.dbv_5),
                            format_double(r.dbv_025 / r.tbv_025), format_double(r.dbv_5 / r.tbv_5),
                            format_double(r.diam_tbv), format_double(r.diam_dbv)});
    write_csv(profile_table(r.tbv_profile_025, r.dbv_profile_025),
              out / ("profile_" + r.roi.name + "_t025.csv"));
    write_csv(profile_table(r.tbv_profile_5, r.dbv_profile_5), out / ("profile_" + r.roi.name + "_t5.csv"));
    if (log)
      *log << r.roi.name << ": TBV diameter " << format_double(r.diam_tbv * 1e3) << " mm, DBV diameter "
           << format_double(r.diam_dbv * 1e3) << " mm\n";
  }
  write_csv(summary, out / "summary.csv");

  const BloodSplit b = obv_dbv_split(s5.c, s5.q_tilde, s5.c_bar);
  const std::vector<double> tbv_db = db_scale(b.tbv), dbv_db = db_scale(b.dbv);
  std::vector<NamedField> fields = {{"tbv_db", tbv_db}, {"dbv_db", dbv_db}};
  std::vector<double> excess_db;
  if (std::any_of(s5.c.begin(), s5.c.end(), [](double v) { return v > 0.0; })) {
    excess_db = db_scale(s5.c);
    fields.push_back({"excess_tbv_db", excess_db});
  }
  write_vtk(tissue, fields, out / "fields_t5_db.vtk");
  write_manifest(out, "analyze", cfg, {{"run_dir", run_dir.string()}});
}

}  // namespace mcirc
