#include <doctest.h>

#include <cmath>
#include <vector>

#include <json.hpp>

#include "geoloop/simulation.hpp"

using namespace geoloop;
using nlohmann::json;

namespace {

// Small, fast scenario: 3 m cube, shallow U loop, tiny flow.
json toy_doc(double total_time, double dt = 10000.0) {
  json doc = json::parse(R"({
    "domain": {"Lx": 3, "Ly": 3, "Lz": 3},
    "layout": {"kind": "U", "depth": 2, "spacing": 1},
    "fluid": {"mdot": 0.01},
    "mesh": {"nx": 3, "ny": 3, "nz": 3, "grading_ratio": 1.0},
    "solver": {"krylov_tolerance": 1e-12}
  })");
  doc["solver"]["dt"] = dt;
  doc["solver"]["total_time"] = total_time;
  doc["output"]["snapshot_times"] = json::array({total_time});
  return doc;
}

}  // namespace

TEST_CASE("zero-horizon run emits exactly the initial record") {
  const RunResult r = run_transient(load_scenario(toy_doc(0.0)));
  REQUIRE(r.series.records.size() == 1);
  CHECK(r.series.records[0].t == 0.0);
  CHECK(r.series.records[0].theta_outlet == doctest::Approx(303.15).epsilon(1e-14));
  CHECK(r.series.records[0].power == doctest::Approx(0.0));
  CHECK(r.steps.empty());
  CHECK(r.final_state.time == 0.0);

  // The initial field is the undisturbed geothermal profile.
  for (std::size_t n = 0; n < r.mesh.node_count(); ++n)
    CHECK(r.final_state.theta[n] ==
          doctest::Approx(0.03 * r.mesh.node_position(n).z + 303.15).epsilon(1e-14));
}

TEST_CASE("whole and trailing partial steps cover the horizon") {
  const RunResult even = run_transient(load_scenario(toy_doc(30000.0)));
  std::vector<double> times;
  for (const auto& rec : even.series.records) times.push_back(rec.t);
  CHECK(times == std::vector<double>{0.0, 10000.0, 20000.0, 30000.0});

  const RunResult ragged = run_transient(load_scenario(toy_doc(25000.0)));
  times.clear();
  for (const auto& rec : ragged.series.records) times.push_back(rec.t);
  CHECK(times == std::vector<double>{0.0, 10000.0, 20000.0, 25000.0});
  CHECK(ragged.final_state.time == 25000.0);
}

TEST_CASE("the undisturbed profile is a steady state") {
  // No channel, no radiation, every face prescribed: the geothermal profile
  // solves the discrete equations exactly, so time stepping must not move it.
  json doc = toy_doc(50000.0);
  doc["fluid"]["mdot"] = 0.0;
  doc["bc"] = {{"mode", "all_dirichlet"}};
  const Scenario scenario = load_scenario(doc);
  const RunResult r = run_transient(scenario);

  double drift = 0.0;
  for (std::size_t n = 0; n < r.mesh.node_count(); ++n) {
    const double exact = scenario.bc.prescribed(r.mesh.node_position(n).z);
    drift = std::max(drift, std::abs(r.final_state.theta[n] - exact));
  }
  CHECK(drift <= 1e-8);
}

TEST_CASE("runs are bitwise deterministic") {
  const Scenario scenario = load_scenario(toy_doc(30000.0));
  const RunResult a = run_transient(scenario);
  const RunResult b = run_transient(scenario);
  REQUIRE(a.final_state.theta.size() == b.final_state.theta.size());
  for (std::size_t n = 0; n < a.final_state.theta.size(); ++n)
    CHECK(a.final_state.theta[n] == b.final_state.theta[n]);
  REQUIRE(a.series.records.size() == b.series.records.size());
  for (std::size_t i = 0; i < a.series.records.size(); ++i) {
    CHECK(a.series.records[i].theta_outlet == b.series.records[i].theta_outlet);
    CHECK(a.series.records[i].power == b.series.records[i].power);
  }
  CHECK(a.hash == b.hash);
}

TEST_CASE("snapshots fire at the configured times") {
  json doc = toy_doc(30000.0);
  doc["output"]["snapshot_times"] = json::array({10000.0, 30000.0});
  const RunResult r = run_transient(load_scenario(doc));
  REQUIRE(r.snapshots.size() == 2);
  CHECK(r.snapshots[0].first == 10000.0);
  CHECK(r.snapshots[1].first == 30000.0);
  CHECK(r.snapshots[0].second.theta.size() == r.mesh.node_count());
  CHECK(r.snapshots[1].second.time == 30000.0);
}

TEST_CASE("hooks stream every record and step") {
  std::vector<double> record_times;
  std::vector<double> snapshot_times;
  int states = 0, steps = 0;
  RunHooks hooks;
  hooks.on_record = [&](const SeriesRecord& rec) { record_times.push_back(rec.t); };
  hooks.on_state = [&](const ThermalState&) { ++states; };
  hooks.on_snapshot = [&](double t, const ThermalState&) { snapshot_times.push_back(t); };
  hooks.on_step = [&](const StepReport&) { ++steps; };

  const RunResult r = run_transient(load_scenario(toy_doc(30000.0)), hooks);
  CHECK(record_times == std::vector<double>{0.0, 10000.0, 20000.0, 30000.0});
  CHECK(states == 4);              // initial + 3 accepted steps
  CHECK(steps == 3);
  CHECK(snapshot_times == std::vector<double>{30000.0});
  CHECK(r.steps.size() == 3);
}

TEST_CASE("channel extraction warms the outlet and the loop dips first") {
  const RunResult r = run_transient(load_scenario(toy_doc(30000.0)));
  // The rock is warmer at depth, so the outlet must heat up...
  CHECK(r.series.records.back().theta_outlet > 303.15);
  // ...monotonically in this smooth start-up window.
  for (std::size_t i = 1; i < r.series.records.size(); ++i)
    CHECK(r.series.records[i].theta_outlet >= r.series.records[i - 1].theta_outlet);
  CHECK(r.series.records.back().power > 0.0);
  CHECK(r.series.records.back().cop > 0.0);
}

TEST_CASE("inlet node is pinned to the inlet temperature") {
  const Scenario scenario = load_scenario(toy_doc(30000.0));
  const RunResult r = run_transient(scenario);
  const auto inlet =
      r.mesh.find_node(r.network.nodes[static_cast<std::size_t>(r.network.inlet)]);
  REQUIRE(inlet);
  CHECK(r.final_state.theta[*inlet] == doctest::Approx(303.15).epsilon(1e-12));
}

TEST_CASE("model advance steps match run_transient") {
  const Scenario scenario = load_scenario(toy_doc(20000.0));
  TransientModel model(model_setup(scenario));
  ThermalState state = model.initial_state();
  ThermalState older = state;

  // BDF1 start-up step, then one BDF2 step: exactly what the driver does.
  model.advance(state, nullptr, 10000.0);
  ThermalState next = state;
  model.advance(next, &older, 10000.0);

  const RunResult r = run_transient(scenario);
  REQUIRE(next.theta.size() == r.final_state.theta.size());
  for (std::size_t n = 0; n < next.theta.size(); ++n)
    CHECK(next.theta[n] == r.final_state.theta[n]);  // bitwise
}

TEST_CASE("dense and krylov backends agree on a tiny problem") {
  const Scenario scenario = load_scenario(toy_doc(30000.0));

  TransientModel::Setup dense = model_setup(scenario);
  dense.dense_backend = true;
  TransientModel model(std::move(dense));
  ThermalState state = model.initial_state();
  model.advance(state, nullptr, 10000.0);

  TransientModel krylov_model(model_setup(scenario));
  ThermalState krylov_state = krylov_model.initial_state();
  krylov_model.advance(krylov_state, nullptr, 10000.0);

  double worst = 0.0;
  for (std::size_t n = 0; n < state.theta.size(); ++n)
    worst = std::max(worst, std::abs(state.theta[n] - krylov_state.theta[n]));
  CHECK(worst < 1e-8);
}

TEST_CASE("lumped mass runs and stays physical") {
  json doc = toy_doc(30000.0);
  doc["solver"]["lumped_mass"] = true;
  const RunResult r = run_transient(load_scenario(doc));
  for (double v : r.final_state.theta) {
    CHECK(v >= 303.15 - 1e-9);
    CHECK(v <= 303.15 + 0.03 * 3.0 + 1e-9);
  }
}
