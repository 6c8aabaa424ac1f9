#pragma once

#include "porestab/common.hpp"
#include "porestab/mesh.hpp"
#include "porestab/species.hpp"
#include "porestab/velocity.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace porestab {

/// Units: radius/height in length, counts dimensionless.
struct GeometryConfig {
  double radius = 1.0;
  double height = 1.0;
  int n_r = 8;
  int n_theta = 8;
  int n_z = 8;
};

/// Mirrors SpeciesSystem; see that type for units.
struct SpeciesConfig {
  int n_species = 0;
  std::vector<double> alpha, beta;
  double kappa_f = 1.0, kappa_b = 1.0;
  std::vector<double> k_ad, k_de, d_bulk, d_surf;
};

struct VelocityConfig {
  std::string profile = "poiseuille"; ///< poiseuille | plug
  double w_max = 1.0;                 ///< length/time
};

/// chemical-balance: equal-components construction (needs |alpha| != |beta|);
/// explicit: xi given and validated against the balance equation.
struct EquilibriumConfig {
  std::string mode = "chemical-balance";
  std::vector<double> xi;
};

enum class ScenarioType { analyze, simulate, poincare, sweep };

struct AnalyzeScenario {
  int num_eigenvalues = 40;
  std::string target = "smallest-real"; ///< smallest-real | around-zero
  bool export_operator = false;
  std::uint64_t seed = 1234;
};

struct SimulateScenario {
  double t_end = 1.0;   ///< time
  double dt = 1e-2;     ///< time
  int sample_every = 1;
  double delta = 1e-3;  ///< perturbation amplitude, concentration units
  std::uint64_t seed = 1234;
  int num_eigenvalues = 20; ///< for the predicted decay rate
};

struct PoincareScenario {
  /// (n_theta, n_z) pairs; defaults to the geometry counts when empty.
  std::vector<std::pair<int, int>> resolutions;
};

struct SweepAxis {
  std::string name; ///< one of kappa_f kappa_b k_ad k_de R h w_max
  std::vector<double> values;
};

struct SweepScenario {
  std::vector<SweepAxis> axes;
  int max_points = 256;
  int num_eigenvalues = 12;
  std::uint64_t seed = 1234;
};

struct RunConfig {
  GeometryConfig geometry;
  SpeciesConfig species;
  VelocityConfig velocity;
  EquilibriumConfig equilibrium;
  ScenarioType scenario = ScenarioType::analyze;
  AnalyzeScenario analyze;
  SimulateScenario simulate;
  PoincareScenario poincare;
  SweepScenario sweep;
  std::string output_dir = "out";
};

/// Parses and validates; unknown keys are rejected, numeric fields are checked
/// against the preconditions of the modules they feed (errors name the field).
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config_file(const std::string& path);
nlohmann::json config_to_json(const RunConfig& cfg);

SpeciesSystem species_from_config(const SpeciesConfig& sc);
CylinderMesh mesh_from_config(const GeometryConfig& gc);
VelocityProfile profile_from_name(const std::string& name);

/// Resolves the configured equilibrium against the species system; explicit xi
/// is validated to satisfy the chemical balance to 1e-10 relative.
EquilibriumPair equilibrium_from_config(const EquilibriumConfig& ec, const SpeciesSystem& sys);

} // namespace porestab
