#include "porestab/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace porestab {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& section) {
  if (!j.is_object()) {
    throw ValidationError("config section '" + section + "' must be an object");
  }
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw ValidationError("unknown key '" + it.key() + "' in config section '" + section + "'");
    }
  }
}

template <typename T>
T get_or(const json& j, const std::string& key, const T& dflt) {
  if (!j.contains(key)) return dflt;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError("bad value for config key '" + key + "': " + e.what());
  }
}

template <typename T>
T get_required(const json& j, const std::string& key, const std::string& section) {
  if (!j.contains(key)) {
    throw ValidationError("missing required key '" + key + "' in config section '" + section +
                          "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError("bad value for config key '" + section + "." + key + "': " + e.what());
  }
}

Vec to_vec(const std::vector<double>& v) {
  return Eigen::Map<const Vec>(v.data(), static_cast<long>(v.size()));
}

} // namespace

SpeciesSystem species_from_config(const SpeciesConfig& sc) {
  return make_species_system(sc.n_species, to_vec(sc.alpha), to_vec(sc.beta), sc.kappa_f,
                             sc.kappa_b, to_vec(sc.k_ad), to_vec(sc.k_de), to_vec(sc.d_bulk),
                             to_vec(sc.d_surf));
}

CylinderMesh mesh_from_config(const GeometryConfig& gc) {
  return build_mesh(CylinderSpec{gc.radius, gc.height}, gc.n_r, gc.n_theta, gc.n_z);
}

VelocityProfile profile_from_name(const std::string& name) {
  if (name == "poiseuille") return VelocityProfile::poiseuille;
  if (name == "plug") return VelocityProfile::plug;
  throw ValidationError("field 'velocity.profile' must be 'poiseuille' or 'plug', got '" + name +
                        "'");
}

EquilibriumPair equilibrium_from_config(const EquilibriumConfig& ec, const SpeciesSystem& sys) {
  if (ec.mode == "chemical-balance") {
    return equilibrium_chemical_balance(sys);
  }
  if (ec.mode != "explicit") {
    throw ValidationError("field 'equilibrium.mode' must be 'chemical-balance' or 'explicit'");
  }
  if (static_cast<int>(ec.xi.size()) != sys.n_species) {
    throw ValidationError("field 'equilibrium.xi' must list one value per species");
  }
  EquilibriumPair eq;
  eq.xi = to_vec(ec.xi);
  for (int s = 0; s < sys.n_species; ++s) {
    if (!(eq.xi[s] > 0.0)) {
      throw ValidationError("field 'equilibrium.xi' must be componentwise > 0");
    }
  }
  const double fwd = sys.kappa_f * monomial(eq.xi, sys.alpha);
  const double bwd = sys.kappa_b * monomial(eq.xi, sys.beta);
  if (std::abs(fwd - bwd) > 1e-10 * std::max({fwd, bwd, 1.0})) {
    std::ostringstream os;
    os << "field 'equilibrium.xi' does not satisfy the chemical balance equation "
       << "(kappa_f xi^alpha = " << fwd << ", kappa_b xi^beta = " << bwd << ")";
    throw ValidationError(os.str());
  }
  eq.psi = sys.k_de.cwiseQuotient(sys.k_ad).cwiseProduct(eq.xi);
  return eq;
}

namespace {

GeometryConfig parse_geometry(const json& j) {
  check_keys(j, {"radius", "height", "n_r", "n_theta", "n_z"}, "geometry");
  GeometryConfig g;
  g.radius = get_required<double>(j, "radius", "geometry");
  g.height = get_required<double>(j, "height", "geometry");
  g.n_r = get_required<int>(j, "n_r", "geometry");
  g.n_theta = get_required<int>(j, "n_theta", "geometry");
  g.n_z = get_required<int>(j, "n_z", "geometry");
  return g;
}

SpeciesConfig parse_species(const json& j) {
  check_keys(j,
             {"n_species", "alpha", "beta", "kappa_f", "kappa_b", "k_ad", "k_de", "d_bulk",
              "d_surf"},
             "species");
  SpeciesConfig s;
  s.n_species = get_required<int>(j, "n_species", "species");
  s.alpha = get_required<std::vector<double>>(j, "alpha", "species");
  s.beta = get_required<std::vector<double>>(j, "beta", "species");
  s.kappa_f = get_required<double>(j, "kappa_f", "species");
  s.kappa_b = get_required<double>(j, "kappa_b", "species");
  s.k_ad = get_required<std::vector<double>>(j, "k_ad", "species");
  s.k_de = get_required<std::vector<double>>(j, "k_de", "species");
  s.d_bulk = get_required<std::vector<double>>(j, "d_bulk", "species");
  s.d_surf = get_required<std::vector<double>>(j, "d_surf", "species");
  return s;
}

VelocityConfig parse_velocity(const json& j) {
  check_keys(j, {"profile", "w_max"}, "velocity");
  VelocityConfig v;
  v.profile = get_or<std::string>(j, "profile", "poiseuille");
  v.w_max = get_required<double>(j, "w_max", "velocity");
  return v;
}

EquilibriumConfig parse_equilibrium(const json& j) {
  check_keys(j, {"mode", "xi"}, "equilibrium");
  EquilibriumConfig e;
  e.mode = get_or<std::string>(j, "mode", "chemical-balance");
  e.xi = get_or<std::vector<double>>(j, "xi", {});
  return e;
}

std::vector<double> parse_axis_values(const json& j, const std::string& name) {
  if (j.contains("values")) {
    return get_required<std::vector<double>>(j, "values", "sweep axis " + name);
  }
  const double from = get_required<double>(j, "from", "sweep axis " + name);
  const double to = get_required<double>(j, "to", "sweep axis " + name);
  const int count = get_required<int>(j, "count", "sweep axis " + name);
  if (count < 1) throw ValidationError("sweep axis '" + name + "': count must be >= 1");
  std::vector<double> vals(count);
  for (int i = 0; i < count; ++i) {
    vals[i] = count == 1 ? from : from + (to - from) * i / (count - 1);
  }
  return vals;
}

} // namespace

RunConfig parse_config(const json& j) {
  check_keys(j, {"geometry", "species", "velocity", "equilibrium", "scenario", "output_dir"},
             "<root>");
  RunConfig cfg;
  if (!j.contains("geometry") || !j.contains("species") || !j.contains("velocity") ||
      !j.contains("scenario")) {
    throw ValidationError("config requires sections geometry, species, velocity, scenario");
  }
  cfg.geometry = parse_geometry(j.at("geometry"));
  cfg.species = parse_species(j.at("species"));
  cfg.velocity = parse_velocity(j.at("velocity"));
  if (j.contains("equilibrium")) cfg.equilibrium = parse_equilibrium(j.at("equilibrium"));
  cfg.output_dir = get_or<std::string>(j, "output_dir", "out");

  const json& sc = j.at("scenario");
  const std::string type = get_required<std::string>(sc, "type", "scenario");
  if (type == "analyze") {
    cfg.scenario = ScenarioType::analyze;
    check_keys(sc, {"type", "num_eigenvalues", "target", "export_operator", "seed"}, "scenario");
    cfg.analyze.num_eigenvalues = get_or<int>(sc, "num_eigenvalues", 40);
    cfg.analyze.target = get_or<std::string>(sc, "target", "smallest-real");
    cfg.analyze.export_operator = get_or<bool>(sc, "export_operator", false);
    cfg.analyze.seed = get_or<std::uint64_t>(sc, "seed", 1234);
    if (cfg.analyze.target != "smallest-real" && cfg.analyze.target != "around-zero") {
      throw ValidationError("field 'scenario.target' must be 'smallest-real' or 'around-zero'");
    }
    if (cfg.analyze.num_eigenvalues < 1) {
      throw ValidationError("field 'scenario.num_eigenvalues' must be >= 1");
    }
  } else if (type == "simulate") {
    cfg.scenario = ScenarioType::simulate;
    check_keys(sc, {"type", "t_end", "dt", "sample_every", "delta", "seed", "num_eigenvalues"},
               "scenario");
    cfg.simulate.t_end = get_required<double>(sc, "t_end", "scenario");
    cfg.simulate.dt = get_required<double>(sc, "dt", "scenario");
    cfg.simulate.sample_every = get_or<int>(sc, "sample_every", 1);
    cfg.simulate.delta = get_or<double>(sc, "delta", 1e-3);
    cfg.simulate.seed = get_or<std::uint64_t>(sc, "seed", 1234);
    cfg.simulate.num_eigenvalues = get_or<int>(sc, "num_eigenvalues", 20);
    if (!(cfg.simulate.t_end > 0.0)) throw ValidationError("field 'scenario.t_end' must be > 0");
    if (!(cfg.simulate.dt > 0.0)) throw ValidationError("field 'scenario.dt' must be > 0");
    if (cfg.simulate.sample_every < 1) {
      throw ValidationError("field 'scenario.sample_every' must be >= 1");
    }
    if (cfg.simulate.delta < 0.0) throw ValidationError("field 'scenario.delta' must be >= 0");
  } else if (type == "poincare") {
    cfg.scenario = ScenarioType::poincare;
    check_keys(sc, {"type", "resolutions"}, "scenario");
    if (sc.contains("resolutions")) {
      for (const auto& r : sc.at("resolutions")) {
        if (!r.is_array() || r.size() != 2) {
          throw ValidationError("field 'scenario.resolutions' must hold [n_theta, n_z] pairs");
        }
        cfg.poincare.resolutions.emplace_back(r.at(0).get<int>(), r.at(1).get<int>());
      }
    }
  } else if (type == "sweep") {
    cfg.scenario = ScenarioType::sweep;
    check_keys(sc, {"type", "axes", "max_points", "num_eigenvalues", "seed"}, "scenario");
    if (!sc.contains("axes") || !sc.at("axes").is_array() || sc.at("axes").empty()) {
      throw ValidationError("field 'scenario.axes' must be a non-empty array");
    }
    static const std::set<std::string> axis_names = {"kappa_f", "kappa_b", "k_ad", "k_de",
                                                     "R", "h", "w_max"};
    for (const auto& a : sc.at("axes")) {
      check_keys(a, {"name", "values", "from", "to", "count"}, "sweep axis");
      SweepAxis axis;
      axis.name = get_required<std::string>(a, "name", "sweep axis");
      if (!axis_names.count(axis.name)) {
        throw ValidationError("sweep axis '" + axis.name +
                              "' is not one of kappa_f kappa_b k_ad k_de R h w_max");
      }
      axis.values = parse_axis_values(a, axis.name);
      if (axis.values.empty()) {
        throw ValidationError("sweep axis '" + axis.name + "' has an empty value list");
      }
      cfg.sweep.axes.push_back(std::move(axis));
    }
    cfg.sweep.max_points = get_or<int>(sc, "max_points", 256);
    cfg.sweep.num_eigenvalues = get_or<int>(sc, "num_eigenvalues", 12);
    cfg.sweep.seed = get_or<std::uint64_t>(sc, "seed", 1234);
    long total = 1;
    for (const auto& a : cfg.sweep.axes) total *= static_cast<long>(a.values.size());
    if (total > cfg.sweep.max_points) {
      std::ostringstream os;
      os << "sweep grid has " << total << " points, above max_points=" << cfg.sweep.max_points;
      throw ValidationError(os.str());
    }
  } else {
    throw ValidationError("field 'scenario.type' must be analyze, simulate, poincare or sweep");
  }

  // cross-validate against the modules the fields feed
  const SpeciesSystem sys = species_from_config(cfg.species);
  const CylinderMesh mesh = mesh_from_config(cfg.geometry);
  (void)mesh;
  const VelocityProfile prof = profile_from_name(cfg.velocity.profile);
  (void)prof;
  if (cfg.velocity.w_max < 0.0) throw ValidationError("field 'velocity.w_max' must be >= 0");
  if (cfg.scenario != ScenarioType::poincare) (void)equilibrium_from_config(cfg.equilibrium, sys);
  return cfg;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

nlohmann::json config_to_json(const RunConfig& cfg) {
  json j;
  j["geometry"] = {{"radius", cfg.geometry.radius},
                   {"height", cfg.geometry.height},
                   {"n_r", cfg.geometry.n_r},
                   {"n_theta", cfg.geometry.n_theta},
                   {"n_z", cfg.geometry.n_z}};
  j["species"] = {{"n_species", cfg.species.n_species}, {"alpha", cfg.species.alpha},
                  {"beta", cfg.species.beta},           {"kappa_f", cfg.species.kappa_f},
                  {"kappa_b", cfg.species.kappa_b},     {"k_ad", cfg.species.k_ad},
                  {"k_de", cfg.species.k_de},           {"d_bulk", cfg.species.d_bulk},
                  {"d_surf", cfg.species.d_surf}};
  j["velocity"] = {{"profile", cfg.velocity.profile}, {"w_max", cfg.velocity.w_max}};
  j["equilibrium"] = {{"mode", cfg.equilibrium.mode}, {"xi", cfg.equilibrium.xi}};
  j["output_dir"] = cfg.output_dir;
  json sc;
  switch (cfg.scenario) {
    case ScenarioType::analyze:
      sc = {{"type", "analyze"},
            {"num_eigenvalues", cfg.analyze.num_eigenvalues},
            {"target", cfg.analyze.target},
            {"export_operator", cfg.analyze.export_operator},
            {"seed", cfg.analyze.seed}};
      break;
    case ScenarioType::simulate:
      sc = {{"type", "simulate"},
            {"t_end", cfg.simulate.t_end},
            {"dt", cfg.simulate.dt},
            {"sample_every", cfg.simulate.sample_every},
            {"delta", cfg.simulate.delta},
            {"seed", cfg.simulate.seed},
            {"num_eigenvalues", cfg.simulate.num_eigenvalues}};
      break;
    case ScenarioType::poincare: {
      json res = json::array();
      for (const auto& [nt, nz] : cfg.poincare.resolutions) res.push_back({nt, nz});
      sc = {{"type", "poincare"}, {"resolutions", res}};
      break;
    }
    case ScenarioType::sweep: {
      json axes = json::array();
      for (const auto& a : cfg.sweep.axes) {
        axes.push_back({{"name", a.name}, {"values", a.values}});
      }
      sc = {{"type", "sweep"},
            {"axes", axes},
            {"max_points", cfg.sweep.max_points},
            {"num_eigenvalues", cfg.sweep.num_eigenvalues},
            {"seed", cfg.sweep.seed}};
      break;
    }
  }
  j["scenario"] = sc;
  return j;
}

} // namespace porestab
