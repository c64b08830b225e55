#include "geoloop/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iostream>

namespace geoloop {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw Error(message);
}

}  // namespace

TransientModel::TransientModel(Setup setup) : setup_(std::move(setup)) {
  const StructuredMesh& mesh = setup_.mesh;
  require(mesh.node_count() > 0, "model needs a mesh");

  if (!setup_.dirichlet_value) {
    const SurfaceBC bc = setup_.bc;
    setup_.dirichlet_value = [bc](const Vec3& p, double) { return bc.prescribed(p.z); };
  }
  if (!setup_.initial_value) {
    const SurfaceBC bc = setup_.bc;
    setup_.initial_value = [bc](const Vec3& p) { return bc.prescribed(p.z); };
  }

  mass_ = assemble_mass(mesh, setup_.material, setup_.solver.mass);
  SparseOperator conduction = assemble_conduction(mesh, setup_.material);
  SurfaceOperator surface = assemble_surface_linear(mesh, setup_.bc);
  SparseOperator advection = assemble_channel_advection(mesh, setup_.channel, setup_.coupling);
  linear_ = SparseOperator::weighted_sum(1.0, conduction, 1.0, advection);
  linear_ = SparseOperator::weighted_sum(1.0, linear_, 1.0, surface.matrix);
  surface_rhs_ = std::move(surface.rhs);

  dirichlet_nodes_ = dirichlet_face_nodes(mesh, setup_.bc);
  if (setup_.constrain_inlet && !setup_.channel.edges.empty())
    inlet_node_ = setup_.channel.inlet_node;

  for (auto fc : setup_.bc.faces)
    if (fc == FaceCondition::ConvectRadiate && setup_.bc.emissivity > 0.0) radiating_ = true;
}

ThermalState TransientModel::initial_state() const {
  ThermalState state;
  state.time = 0.0;
  state.theta.resize(setup_.mesh.node_count());
  for (std::size_t i = 0; i < state.theta.size(); ++i)
    state.theta[i] = setup_.initial_value(setup_.mesh.node_position(i));
  return state;
}

StepReport TransientModel::advance(ThermalState& state, const ThermalState* older,
                                   double dt) const {
  require(dt > 0.0, "time step must be positive");
  require(state.theta.size() == setup_.mesh.node_count(), "state size mismatch");
  const double t_next = state.time + dt;
  const std::size_t n = state.theta.size();

  // BDF coefficients: residual = (a0*M*theta - M*history)/dt + ...
  double a0 = 1.0;
  std::vector<double> history = state.theta;
  if (older != nullptr && setup_.solver.bdf_order == 2) {
    require(older->theta.size() == n, "history state size mismatch");
    a0 = 1.5;
    for (std::size_t i = 0; i < n; ++i)
      history[i] = 2.0 * state.theta[i] - 0.5 * older->theta[i];
  }

  std::vector<double> forcing = surface_rhs_;
  if (setup_.source) {
    const auto& src = setup_.source;
    const std::vector<double> load =
        assemble_volume_load(setup_.mesh, [&](const Vec3& p) { return src(p, t_next); });
    for (std::size_t i = 0; i < n; ++i) forcing[i] += load[i];
  }

  // Constraint values at t_next; the inlet temperature wins over a face
  // prescription when both apply to the inlet node.
  std::vector<DirichletValue> constraints;
  constraints.reserve(dirichlet_nodes_.size() + 1);
  bool inlet_emitted = false;
  for (const std::size_t node : dirichlet_nodes_) {
    if (inlet_node_ && node == *inlet_node_) {
      constraints.push_back({node, setup_.bc.theta_inlet});
      inlet_emitted = true;
      static std::atomic<bool> warned{false};
      const double face_value = setup_.dirichlet_value(setup_.mesh.node_position(node), t_next);
      if (face_value != setup_.bc.theta_inlet && !warned.exchange(true))
        std::clog << "note: inlet temperature overrides the face prescription at the inlet node\n";
      continue;
    }
    constraints.push_back({node, setup_.dirichlet_value(setup_.mesh.node_position(node), t_next)});
  }
  if (inlet_node_ && !inlet_emitted) constraints.push_back({*inlet_node_, setup_.bc.theta_inlet});

  BdfSystem system;
  system.mass = &mass_;
  system.linear = &linear_;
  system.forcing = &forcing;
  system.history = &history;
  system.a0 = a0;
  system.dt = dt;
  system.constraints = &constraints;
  if (radiating_) {
    const StructuredMesh& mesh = setup_.mesh;
    const SurfaceBC& bc = setup_.bc;
    system.nonlinear = [&mesh, &bc](const std::vector<double>& th, std::vector<double>& r,
                                    SparseOperator* jac) {
      accumulate_radiation(mesh, bc, th, r, jac);
    };
  }

  NewtonOptions newton;
  newton.relative_tolerance = setup_.solver.newton_tolerance;
  newton.max_iterations = setup_.solver.newton_max_iterations;

  KrylovStats krylov_total;
  LinearSolver solve;
  if (setup_.dense_backend) {
    solve = make_dense_solver();
  } else {
    KrylovOptions krylov;
    krylov.tolerance = setup_.solver.krylov_tolerance;
    krylov.max_iterations = setup_.solver.krylov_max_iterations;
    krylov.preconditioner = setup_.solver.preconditioner;
    solve = make_krylov_solver(krylov, &krylov_total);
  }

  NewtonReport report;
  try {
    report = bdf_step(system, newton, solve, state.theta);
  } catch (const Error& e) {
    throw Error("step to t = " + std::to_string(t_next) + " s failed: " + e.what());
  }

  state.time = t_next;
  StepReport out;
  out.time = t_next;
  out.newton_iterations = report.iterations;
  out.krylov_iterations = krylov_total.iterations;
  out.residual_norm = report.residual_norms.empty() ? 0.0 : report.residual_norms.back();
  return out;
}

TransientModel::Setup model_setup(const Scenario& scenario) {
  TransientModel::Setup setup;

  const VascularNetwork network = build_layout(scenario.layout);

  // The grid must contain every channel station plane so segments map onto
  // grid edges exactly.
  AxisSpec ax{scenario.Lx, {}, scenario.nx, scenario.grading_ratio};
  AxisSpec ay{scenario.Ly, {}, scenario.ny, scenario.grading_ratio};
  AxisSpec az{scenario.Lz, {}, scenario.nz, scenario.grading_ratio};
  for (const auto& node : network.nodes) {
    ax.required.push_back(node.x);
    ay.required.push_back(node.y);
    az.required.push_back(node.z);
  }
  setup.mesh = build_graded_grid(ax, ay, az);

  setup.material = scenario.material;
  setup.bc = scenario.bc;
  setup.channel = map_channel_to_edges(setup.mesh, network);
  setup.coupling = {scenario.chi(), scenario.upwind_blend};
  setup.solver = scenario.solver;
  setup.constrain_inlet = true;
  return setup;
}

RunResult run_transient(const Scenario& scenario, const RunHooks& hooks) {
  RunResult result;
  result.hash = scenario_hash(scenario);
  result.network = build_layout(scenario.layout);

  TransientModel model(model_setup(scenario));
  result.mesh = model.mesh();
  result.channel = map_channel_to_edges(result.mesh, result.network);

  const std::size_t outlet = result.channel.outlet_node;
  const double dt = scenario.solver.dt;
  const double total = scenario.solver.total_time;

  std::vector<double> snapshot_times = scenario.output.snapshot_times;
  std::size_t snap_idx = 0;
  const double snap_tol = 1e-6 * std::max(dt, 1.0);

  ThermalState current = model.initial_state();
  ThermalState older;
  bool have_older = false;

  auto emit = [&](const ThermalState& state) {
    SeriesRecord rec;
    rec.t = state.time;
    rec.theta_outlet = state.theta[outlet];
    rec.cop = coefficient_of_performance(scenario.bc.theta_inlet, rec.theta_outlet);
    rec.power = instantaneous_power(scenario.mdot, scenario.c_f, rec.theta_outlet,
                                    scenario.bc.theta_ambient);
    if (rec.cop < 0.0) result.outlet_below_inlet = true;
    result.series.records.push_back(rec);
    if (hooks.on_record) hooks.on_record(rec);
    if (hooks.on_state) hooks.on_state(state);
    while (snap_idx < snapshot_times.size() && snapshot_times[snap_idx] <= state.time + snap_tol) {
      result.snapshots.emplace_back(snapshot_times[snap_idx], state);
      if (hooks.on_snapshot) hooks.on_snapshot(snapshot_times[snap_idx], state);
      ++snap_idx;
    }
  };

  emit(current);

  // Whole steps of dt, then one trailing BDF1 step if total_time is not a
  // multiple of dt.
  const double n_real = total / dt;
  std::size_t n_full = static_cast<std::size_t>(std::floor(n_real + 1e-9));
  double tail = total - static_cast<double>(n_full) * dt;
  if (tail <= 1e-9 * dt) tail = 0.0;

  for (std::size_t k = 1; k <= n_full; ++k) {
    ThermalState next = current;
    StepReport step = model.advance(next, have_older ? &older : nullptr, dt);
    older = std::move(current);
    have_older = true;
    current = std::move(next);
    current.time = static_cast<double>(k) * dt;  // avoid accumulated drift
    step.time = current.time;
    result.steps.push_back(step);
    if (hooks.on_step) hooks.on_step(step);
    emit(current);
  }
  if (tail > 0.0) {
    ThermalState next = current;
    StepReport step = model.advance(next, nullptr, tail);
    older = std::move(current);
    current = std::move(next);
    current.time = total;
    step.time = total;
    result.steps.push_back(step);
    if (hooks.on_step) hooks.on_step(step);
    emit(current);
  }

  if (result.outlet_below_inlet)
    std::clog << "note: outlet temperature dipped below the inlet during start-up\n";

  result.final_state = std::move(current);
  return result;
}

}  // namespace geoloop
