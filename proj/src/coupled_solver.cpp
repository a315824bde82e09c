#include "mcirc/coupled_solver.hpp"

#include <cmath>

#include "mcirc/assembly.hpp"
#include "mcirc/error.hpp"

namespace mcirc {

std::shared_ptr<const SystemMatrices> assemble_system(const TetMesh& mesh,
                                                      std::span<const double> delta,
                                                      std::span<const double> epsilon,
                                                      std::span<const double> upsilon, double dt,
                                                      double h, double tol) {
  if (!(dt > 0.0)) throw ValidationError("dt must be positive");
  auto sys = std::make_shared<SystemMatrices>();
  sys->mass = assemble_mass(mesh);
  sys->outflow = assemble_weighted_mass(mesh, epsilon);
  sys->consumption = assemble_weighted_mass(mesh, upsilon);
  sys->diffusion = assemble_stiffness(mesh, delta);
  SparseMatrix tg = add_scaled(sys->outflow, 1.0, sys->diffusion);
  sys->tbv_system = add_scaled(sys->mass, dt, tg);
  sys->dbv_system = add_scaled(sys->mass, dt, add_scaled(tg, 1.0, sys->consumption));
  sys->dt = dt;
  sys->oxygenated_fraction = h;
  sys->tol = tol;
  return sys;
}

std::vector<double> nodal_background(const TetMesh& mesh, std::span<const double> element_c_bar) {
  if (element_c_bar.size() != mesh.tets.size())
    throw ValidationError("background values must cover every element");
  std::vector<double> sum(mesh.nodes.size(), 0.0), weight(mesh.nodes.size(), 0.0);
  for (std::size_t t = 0; t < mesh.tets.size(); ++t) {
    if (mesh.tet_labels[t] == labels::kArtery) continue;
    const double v = tet_volume(mesh, t);
    for (NodeId n : mesh.tets[t]) {
      sum[n] += v * element_c_bar[t];
      weight[n] += v;
    }
  }
  for (std::size_t n = 0; n < sum.size(); ++n) {
    if (!(weight[n] > 0.0))
      throw ValidationError("node " + std::to_string(n) + " has no adjacent tissue element");
    sum[n] /= weight[n];
  }
  return sum;
}

SimState init_state(const TetMesh& mesh, const DerivedVesselFields& derived,
                    const VesselParams& params, double tol) {
  validate(params);
  SimState s;
  s.c_bar = nodal_background(mesh, derived.element_c_bar);
  s.c.assign(mesh.nodes.size(), 0.0);
  s.q_tilde.resize(mesh.nodes.size());
  for (std::size_t i = 0; i < s.c_bar.size(); ++i)
    s.q_tilde[i] = params.oxygenated_fraction * s.c_bar[i];
  s.system = assemble_system(mesh, derived.element_delta, derived.element_epsilon,
                             derived.element_upsilon, params.time_step,
                             params.oxygenated_fraction, tol);
  return s;
}

SourceSpec make_source(const TetMesh& mesh, const SparseMatrix& mass, HrfSeries hrf,
                       const Vec3& point, SourceMode mode, double width_or_volume,
                       const BoundaryFlux* flux) {
  SourceSpec src;
  src.hrf = std::move(hrf);
  src.node = nearest_node(mesh, point);
  const std::size_t n = mesh.nodes.size();
  src.unit_load.assign(n, 0.0);

  bool in_tissue = false;
  double star = 0.0;
  for (std::size_t t = 0; t < mesh.tets.size(); ++t)
    for (NodeId v : mesh.tets[t])
      if (v == src.node) {
        if (mesh.tet_labels[t] != labels::kArtery) in_tissue = true;
        star += tet_volume(mesh, t);
      }
  if (!in_tissue) throw ValidationError("source node does not belong to a tissue element");

  if (mode == SourceMode::kSingleNode) {
    src.unit_load[src.node] = width_or_volume > 0.0 ? width_or_volume : star;
  } else {
    if (!(width_or_volume > 0.0)) throw ValidationError("Gaussian source width must be positive");
    std::vector<double> profile(n);
    const double two_s2 = 2.0 * width_or_volume * width_or_volume;
    for (std::size_t i = 0; i < n; ++i) {
      double r2 = 0.0;
      for (int k = 0; k < 3; ++k) r2 += (mesh.nodes[i][k] - point[k]) * (mesh.nodes[i][k] - point[k]);
      profile[i] = std::exp(-r2 / two_s2);
    }
    mass.multiply(profile, src.unit_load);
  }

  if (flux) {
    src.boundary_load = flux_load(mesh, *flux);
  } else {
    src.boundary_load.assign(n, 0.0);
  }
  return src;
}

SimState step(const SimState& state, const SourceSpec& src) {
  const SystemMatrices& sys = *state.system;
  const std::size_t n = state.c.size();
  if (src.unit_load.size() != n || src.boundary_load.size() != n)
    throw ValidationError("source does not match the state dimension");
  const double dt = sys.dt;
  const double h = sys.oxygenated_fraction;
  const double rate = src.hrf.alpha_dot_at(state.time);

  // Excess TBV.
  std::vector<double> rhs = sys.mass.multiply(state.c);
  for (std::size_t i = 0; i < n; ++i)
    rhs[i] += dt * (src.boundary_load[i] + rate * src.unit_load[i]);
  SolveResult c_next = cg_solve(sys.tbv_system, rhs, sys.tol, 0, state.c);

  // DBV, driven by the k-th TBV iterate.
  std::vector<double> hc(n);
  for (std::size_t i = 0; i < n; ++i) hc[i] = h * (state.c[i] + state.c_bar[i]);
  std::vector<double> b = sys.consumption.multiply(hc);
  rhs = sys.mass.multiply(state.q_tilde);
  for (std::size_t i = 0; i < n; ++i) rhs[i] += dt * ((1.0 - h) * src.boundary_load[i] + b[i]);
  SolveResult q_next = cg_solve(sys.dbv_system, rhs, sys.tol, 0, state.q_tilde);

  SimState next;
  next.step = state.step + 1;
  next.time = static_cast<double>(next.step) * dt;
  next.c = std::move(c_next.x);
  next.q_tilde = std::move(q_next.x);
  next.c_bar = state.c_bar;
  next.system = state.system;
  return next;
}

SimState run(SimState state, const SourceSpec& src, double duration, const StateSink& sink) {
  const double dt = state.system->dt;
  if (duration < 0.0) throw ValidationError("duration must be nonnegative");
  const double ratio = duration / dt;
  const auto steps = static_cast<std::size_t>(std::llround(ratio));
  if (std::abs(ratio - static_cast<double>(steps)) > 1e-9 * std::max(1.0, ratio))
    throw ValidationError("T must be an integer multiple of dt");
  if (sink) sink(state);
  for (std::size_t k = 0; k < steps; ++k) {
    state = step(state, src);
    if (sink) sink(state);
  }
  return state;
}

}  // namespace mcirc
