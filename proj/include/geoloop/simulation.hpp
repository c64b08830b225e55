// Transient thermal model: owns the assembled operators for one scenario and
// advances the state with implicit BDF steps; run_transient drives a whole
// simulation and streams records, states, and snapshots to caller hooks.
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "geoloop/postprocess.hpp"
#include "geoloop/scenario.hpp"
#include "geoloop/solver.hpp"

namespace geoloop {

struct StepReport {
  double time = 0.0;
  int newton_iterations = 0;
  int krylov_iterations = 0;
  double residual_norm = 0.0;
};

class TransientModel {
 public:
  struct Setup {
    StructuredMesh mesh;
    MaterialField material;
    SurfaceBC bc;
    ChannelEdgeMap channel;  // may be empty (pure conduction)
    ChannelCoupling coupling;
    SolverConfig solver;
    bool constrain_inlet = false;  // pin the channel inlet node to theta_inlet
    // Dirichlet values on tagged faces as a function of position and time;
    // defaults to the static geothermal profile.
    std::function<double(const Vec3&, double)> dirichlet_value;
    // Initial field; defaults to the geothermal profile.
    std::function<double(const Vec3&)> initial_value;
    // Optional volumetric source density f(x, t) in W/m^3 (verification runs).
    std::function<double(const Vec3&, double)> source;
    bool dense_backend = false;  // solve linear systems by dense LU instead of Krylov
  };

  explicit TransientModel(Setup setup);

  const StructuredMesh& mesh() const { return setup_.mesh; }
  const SparseOperator& mass() const { return mass_; }
  const SparseOperator& linear() const { return linear_; }
  const std::vector<std::size_t>& constrained_nodes() const { return dirichlet_nodes_; }

  ThermalState initial_state() const;

  // Advances state (holding theta^n at state.time) by dt. older, when given,
  // holds theta^{n-1} from a step of the same dt and enables BDF2; without it
  // the step is BDF1 (also used for start-up and trailing partial steps).
  StepReport advance(ThermalState& state, const ThermalState* older, double dt) const;

 private:
  Setup setup_;
  SparseOperator mass_;
  SparseOperator linear_;
  std::vector<double> surface_rhs_;
  std::vector<std::size_t> dirichlet_nodes_;  // face nodes, sorted; inlet handled separately
  std::optional<std::size_t> inlet_node_;
  bool radiating_ = false;
};

// Builds the mesh, network, and operator setup for a scenario. Exposed so
// verification paths can override pieces (initial field, backend) while
// sharing the assembly code exactly.
TransientModel::Setup model_setup(const Scenario& scenario);

struct RunHooks {
  std::function<void(const SeriesRecord&)> on_record;            // every accepted record
  std::function<void(const ThermalState&)> on_state;             // every accepted state
  std::function<void(double, const ThermalState&)> on_snapshot;  // configured snapshot times
  std::function<void(const StepReport&)> on_step;                // solver diagnostics
};

struct RunResult {
  std::string hash;
  StructuredMesh mesh;
  VascularNetwork network;
  ChannelEdgeMap channel;
  TimeSeries series;
  std::vector<StepReport> steps;
  std::vector<std::pair<double, ThermalState>> snapshots;
  ThermalState final_state;
  bool outlet_below_inlet = false;  // start-up dip diagnostic
};

// Runs a scenario end to end. Hooks stream results as steps complete, so
// partial output survives a mid-run solver failure (the error propagates
// after the hooks have seen every accepted step).
RunResult run_transient(const Scenario& scenario, const RunHooks& hooks = {});

}  // namespace geoloop
