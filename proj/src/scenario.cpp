#include "geoloop/scenario.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <set>

namespace geoloop {

namespace {

using nlohmann::json;

void require(bool ok, const std::string& message) {
  if (!ok) throw Error(message);
}

// Wraps one JSON object, tracking which keys were consumed so unknown keys
// can be reported with their full path.
class ObjectReader {
 public:
  ObjectReader(json doc, std::string path) : doc_(std::move(doc)), path_(std::move(path)) {
    require(doc_.is_object(), "expected object at " + label());
  }

  std::string label() const { return path_.empty() ? "<root>" : path_; }
  std::string child_path(const char* key) const {
    return path_.empty() ? key : path_ + "." + key;
  }
  bool has(const char* key) const { return doc_.contains(key); }

  double number(const char* key, double fallback) {
    if (!doc_.contains(key)) return fallback;
    return required_number(key);
  }
  double required_number(const char* key) {
    require(doc_.contains(key), "missing key: " + child_path(key));
    consumed_.insert(key);
    const json& v = doc_.at(key);
    require(v.is_number(), "expected number at " + child_path(key));
    return v.get<double>();
  }
  int integer(const char* key, int fallback) {
    if (!doc_.contains(key)) return fallback;
    consumed_.insert(key);
    const json& v = doc_.at(key);
    require(v.is_number_integer(), "expected integer at " + child_path(key));
    return v.get<int>();
  }
  bool boolean(const char* key, bool fallback) {
    if (!doc_.contains(key)) return fallback;
    consumed_.insert(key);
    const json& v = doc_.at(key);
    require(v.is_boolean(), "expected boolean at " + child_path(key));
    return v.get<bool>();
  }
  std::string text(const char* key, std::string fallback) {
    if (!doc_.contains(key)) return fallback;
    consumed_.insert(key);
    const json& v = doc_.at(key);
    require(v.is_string(), "expected string at " + child_path(key));
    return v.get<std::string>();
  }
  std::vector<double> number_array(const char* key, std::vector<double> fallback) {
    if (!doc_.contains(key)) return fallback;
    consumed_.insert(key);
    const json& v = doc_.at(key);
    require(v.is_array(), "expected array at " + child_path(key));
    std::vector<double> out;
    for (const auto& e : v) {
      require(e.is_number(), "expected numbers in " + child_path(key));
      out.push_back(e.get<double>());
    }
    return out;
  }
  const json& raw(const char* key) {
    consumed_.insert(key);
    return doc_.at(key);
  }
  json object(const char* key) {
    if (!doc_.contains(key)) return json::object();
    consumed_.insert(key);
    const json& v = doc_.at(key);
    require(v.is_object(), "expected object at " + child_path(key));
    return v;
  }

  void finish() const {
    for (const auto& [key, value] : doc_.items())
      require(consumed_.count(key) > 0, "unknown key: " + child_path(key.c_str()));
  }

 private:
  json doc_;
  std::string path_;
  std::set<std::string> consumed_;
};

void validate_positive(double v, const char* key) {
  require(v > 0.0, std::string(key) + " must be positive");
}

std::array<FaceCondition, 6> faces_for_mode(BcMode mode) {
  using FC = FaceCondition;
  switch (mode) {
    case BcMode::Dirichlet:
      return {FC::Dirichlet, FC::Dirichlet, FC::Dirichlet, FC::Dirichlet, FC::ConvectRadiate,
              FC::Dirichlet};
    case BcMode::Neumann:
      return {FC::Flux, FC::Flux, FC::Flux, FC::Flux, FC::ConvectRadiate, FC::Flux};
    case BcMode::AllDirichlet:
      return {FC::Dirichlet, FC::Dirichlet, FC::Dirichlet, FC::Dirichlet, FC::Dirichlet,
              FC::Dirichlet};
  }
  throw Error("unhandled bc mode");
}

}  // namespace

Scenario load_scenario(const nlohmann::json& document) {
  ObjectReader root(document, "");
  Scenario s;

  {
    ObjectReader domain(root.object("domain"), "domain");
    s.Lx = domain.number("Lx", s.Lx);
    s.Ly = domain.number("Ly", s.Ly);
    s.Lz = domain.number("Lz", s.Lz);
    domain.finish();
    validate_positive(s.Lx, "domain.Lx");
    validate_positive(s.Ly, "domain.Ly");
    validate_positive(s.Lz, "domain.Lz");
  }

  {
    ObjectReader layout(root.object("layout"), "layout");
    const std::string kind = layout.text("kind", "U");
    if (kind == "U")
      s.layout.kind = LayoutKind::U;
    else if (kind == "comb")
      s.layout.kind = LayoutKind::Comb;
    else
      throw Error("layout.kind must be \"U\" or \"comb\"");
    s.layout.depth = layout.number("depth", s.layout.kind == LayoutKind::U ? 5000.0 : 8000.0);
    s.layout.spacing = layout.number("spacing", s.layout.kind == LayoutKind::U ? 3000.0 : 900.0);
    s.layout.lateral_length = layout.number("lateral_length", 3000.0);
    s.layout.n_laterals = layout.integer("n_laterals", 4);
    layout.finish();
    validate_positive(s.layout.depth, "layout.depth");
    validate_positive(s.layout.spacing, "layout.spacing");
    require(s.Lz >= s.layout.depth, "domain.Lz must be >= layout.depth");
    s.layout.footprint_x = s.Lx;
    s.layout.footprint_y = s.Ly;
  }

  {
    ObjectReader material(root.object("material"), "material");
    s.material.rho_s = material.number("rho_s", 2500.0);
    s.material.c_s = material.number("c_s", 790.0);
    if (material.has("k_s") && material.raw("k_s").is_array()) {
      const auto ks = material.number_array("k_s", {});
      require(ks.size() == 3, "material.k_s array must have 3 entries");
      s.material.conductivity = {ks[0], ks[1], ks[2]};
    } else {
      const double ks = material.number("k_s", 3.5);
      s.material.conductivity = {ks, ks, ks};
    }
    material.finish();
    validate_positive(s.material.rho_s, "material.rho_s");
    validate_positive(s.material.c_s, "material.c_s");
    for (double k : s.material.conductivity) validate_positive(k, "material.k_s");
  }

  {
    ObjectReader fluid(root.object("fluid"), "fluid");
    s.rho_f = fluid.number("rho_f", 1000.0);
    s.c_f = fluid.number("c_f", 4183.0);
    validate_positive(s.rho_f, "fluid.rho_f");
    validate_positive(s.c_f, "fluid.c_f");
    require(!(fluid.has("mdot") && fluid.has("volumetric_flow")),
            "fluid.mdot and fluid.volumetric_flow are mutually exclusive");
    if (fluid.has("volumetric_flow")) {
      // Q in m^3/s is normalized to a mass flow at parse time.
      s.mdot = s.rho_f * fluid.required_number("volumetric_flow");
    } else {
      s.mdot = fluid.number("mdot", 30.0);
    }
    fluid.finish();
    require(s.mdot >= 0.0 && s.mdot <= 1000.0, "fluid.mdot must lie in [0, 1000]");
  }

  {
    ObjectReader bc(root.object("bc"), "bc");
    const std::string mode = bc.text("mode", "dirichlet");
    if (mode == "dirichlet")
      s.bc_mode = BcMode::Dirichlet;
    else if (mode == "neumann")
      s.bc_mode = BcMode::Neumann;
    else if (mode == "all_dirichlet")
      s.bc_mode = BcMode::AllDirichlet;
    else
      throw Error("bc.mode must be \"dirichlet\", \"neumann\", or \"all_dirichlet\"");

    // The gradient is configured in K/km and normalized to K/m here.
    require(!(bc.has("gradient_K_per_km") && bc.has("gradient_K_per_m")),
            "bc.gradient_K_per_km and bc.gradient_K_per_m are mutually exclusive");
    if (bc.has("gradient_K_per_m"))
      s.bc.geothermal_gradient = bc.required_number("gradient_K_per_m");
    else
      s.bc.geothermal_gradient = bc.number("gradient_K_per_km", 30.0) / 1000.0;
    s.bc.theta_ambient = bc.number("theta_ambient", 303.15);
    s.bc.theta_inlet = bc.number("theta_inlet", s.bc.theta_ambient);
    s.bc.h_convection = bc.number("h_convection", 0.5);
    s.bc.emissivity = bc.number("emissivity", 0.9);
    bc.finish();
    validate_positive(s.bc.geothermal_gradient, "bc.gradient_K_per_km");
    validate_positive(s.bc.theta_ambient, "bc.theta_ambient");
    validate_positive(s.bc.theta_inlet, "bc.theta_inlet");
    require(s.bc.h_convection >= 0.0, "bc.h_convection must be >= 0");
    require(s.bc.emissivity >= 0.0 && s.bc.emissivity <= 1.0,
            "bc.emissivity must lie in [0, 1]");

    s.bc.faces = faces_for_mode(s.bc_mode);
    s.bc.flux = {0, 0, 0, 0, 0, 0};
    if (s.bc_mode == BcMode::Neumann) {
      // Undisturbed geothermal heat flux enters through the bottom face;
      // outward flux is therefore negative there. Lateral faces are adiabatic.
      s.bc.flux[kZMax] = -s.material.conductivity[2] * s.bc.geothermal_gradient;
    }
  }

  {
    ObjectReader mesh(root.object("mesh"), "mesh");
    s.nx = mesh.integer("nx", 24);
    s.ny = mesh.integer("ny", 24);
    s.nz = mesh.integer("nz", 40);
    s.grading_ratio = mesh.number("grading_ratio", 1.3);
    mesh.finish();
    require(s.nx >= 2 && s.ny >= 2 && s.nz >= 2, "mesh.nx/ny/nz must be >= 2");
    require(s.grading_ratio >= 1.0, "mesh.grading_ratio must be >= 1");
  }

  {
    ObjectReader solver(root.object("solver"), "solver");
    s.solver.dt = solver.number("dt", 1e6);
    s.solver.total_time = solver.number("total_time", 2e9);
    s.solver.bdf_order = solver.integer("bdf_order", 2);
    s.solver.newton_tolerance = solver.number("newton_tolerance", 1e-8);
    s.solver.newton_max_iterations = solver.integer("newton_max_iterations", 20);
    s.solver.krylov_tolerance = solver.number("krylov_tolerance", 1e-9);
    s.solver.krylov_max_iterations = solver.integer("krylov_max_iterations", 2000);
    const std::string precond = solver.text("preconditioner", "ilu0");
    if (precond == "ilu0")
      s.solver.preconditioner = PreconditionerKind::Ilu0;
    else if (precond == "diagonal")
      s.solver.preconditioner = PreconditionerKind::Diagonal;
    else
      throw Error("solver.preconditioner must be \"ilu0\" or \"diagonal\"");
    s.solver.mass = solver.boolean("lumped_mass", false) ? MassType::Lumped : MassType::Consistent;
    s.upwind_blend = solver.number("upwind_blend", 1.0);
    solver.finish();
    validate_positive(s.solver.dt, "solver.dt");
    require(s.solver.total_time >= 0.0, "solver.total_time must be >= 0");
    require(s.solver.total_time == 0.0 || s.solver.total_time >= s.solver.dt,
            "solver.total_time must be 0 or >= solver.dt");
    require(s.solver.bdf_order == 1 || s.solver.bdf_order == 2, "solver.bdf_order must be 1 or 2");
    require(s.solver.newton_tolerance > 0.0 && s.solver.newton_tolerance < 1.0,
            "solver.newton_tolerance must lie in (0, 1)");
    require(s.solver.krylov_tolerance > 0.0 && s.solver.krylov_tolerance < 1.0,
            "solver.krylov_tolerance must lie in (0, 1)");
    require(s.solver.newton_max_iterations >= 1, "solver.newton_max_iterations must be >= 1");
    require(s.solver.krylov_max_iterations >= 1, "solver.krylov_max_iterations must be >= 1");
    require(s.upwind_blend >= 0.0 && s.upwind_blend <= 1.0,
            "solver.upwind_blend must lie in [0, 1]");
  }

  {
    ObjectReader output(root.object("output"), "output");
    s.output.snapshot_times = output.number_array("snapshot_times", {s.solver.total_time});
    for (double t : s.output.snapshot_times)
      require(t >= 0.0 && t <= s.solver.total_time,
              "output.snapshot_times entries must lie in [0, total_time]");
    std::sort(s.output.snapshot_times.begin(), s.output.snapshot_times.end());
    s.output.snapshot_times.erase(
        std::unique(s.output.snapshot_times.begin(), s.output.snapshot_times.end()),
        s.output.snapshot_times.end());
    s.output.mst_edges = output.number_array("mst_edges", {});
    for (double a : s.output.mst_edges)
      require(a > 0.0, "output.mst_edges entries must be positive");
    if (output.has("mst_center")) {
      const auto c = output.number_array("mst_center", {});
      require(c.size() == 2, "output.mst_center must have 2 entries");
      s.output.mst_center = std::array<double, 2>{c[0], c[1]};
    }
    if (output.has("profile_depth_fraction")) {
      const double f = output.required_number("profile_depth_fraction");
      require(f >= 0.0 && f <= 1.0, "output.profile_depth_fraction must lie in [0, 1]");
      s.output.profile_depth_fraction = f;
    }
    output.finish();
  }

  root.finish();

  // Surface geometry fit errors (spacing vs footprint and the like) should
  // show up at load time, not mid-run.
  build_layout(s.layout);
  return s;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open scenario file: " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error("scenario file " + path + " is not valid JSON: " + e.what());
  }
  return load_scenario(doc);
}

nlohmann::json canonical_json(const Scenario& s) {
  json doc;
  doc["domain"] = {{"Lx", s.Lx}, {"Ly", s.Ly}, {"Lz", s.Lz}};
  doc["layout"] = {{"kind", s.layout.kind == LayoutKind::U ? "U" : "comb"},
                   {"depth", s.layout.depth},
                   {"spacing", s.layout.spacing},
                   {"lateral_length", s.layout.lateral_length},
                   {"n_laterals", s.layout.n_laterals}};
  doc["material"] = {{"rho_s", s.material.rho_s},
                     {"c_s", s.material.c_s},
                     {"k_s", {s.material.conductivity[0], s.material.conductivity[1],
                              s.material.conductivity[2]}}};
  doc["fluid"] = {{"rho_f", s.rho_f}, {"c_f", s.c_f}, {"mdot", s.mdot}};
  doc["bc"] = {{"mode", s.bc_mode == BcMode::Dirichlet     ? "dirichlet"
                        : s.bc_mode == BcMode::Neumann     ? "neumann"
                                                           : "all_dirichlet"},
               {"gradient_K_per_m", s.bc.geothermal_gradient},
               {"theta_ambient", s.bc.theta_ambient},
               {"theta_inlet", s.bc.theta_inlet},
               {"h_convection", s.bc.h_convection},
               {"emissivity", s.bc.emissivity}};
  doc["mesh"] = {{"nx", s.nx}, {"ny", s.ny}, {"nz", s.nz}, {"grading_ratio", s.grading_ratio}};
  doc["solver"] = {{"dt", s.solver.dt},
                   {"total_time", s.solver.total_time},
                   {"bdf_order", s.solver.bdf_order},
                   {"newton_tolerance", s.solver.newton_tolerance},
                   {"newton_max_iterations", s.solver.newton_max_iterations},
                   {"krylov_tolerance", s.solver.krylov_tolerance},
                   {"krylov_max_iterations", s.solver.krylov_max_iterations},
                   {"preconditioner",
                    s.solver.preconditioner == PreconditionerKind::Ilu0 ? "ilu0" : "diagonal"},
                   {"lumped_mass", s.solver.mass == MassType::Lumped},
                   {"upwind_blend", s.upwind_blend}};
  json output = {{"snapshot_times", s.output.snapshot_times},
                 {"mst_edges", s.output.mst_edges}};
  if (s.output.mst_center)
    output["mst_center"] = {(*s.output.mst_center)[0], (*s.output.mst_center)[1]};
  if (s.output.profile_depth_fraction)
    output["profile_depth_fraction"] = *s.output.profile_depth_fraction;
  doc["output"] = output;
  return doc;
}

std::string scenario_hash(const Scenario& s) {
  const std::string dump = canonical_json(s).dump();
  // FNV-1a, 64-bit.
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  static const char* hex = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = hex[h & 0xf];
    h >>= 4;
  }
  return out;
}

}  // namespace geoloop
