#include "porestab/runner.hpp"

#include "porestab/compat.hpp"
#include "porestab/csvio.hpp"
#include "porestab/manifest.hpp"
#include "porestab/stability.hpp"
#include "porestab/timestep.hpp"

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <thread>

namespace porestab {

namespace fs = std::filesystem;

namespace {

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

struct BuiltScene {
  std::shared_ptr<const CylinderMesh> mesh;
  SpeciesSystem sys;
  VelocityField vel;
  EquilibriumPair eq;
  InflowField g_in;
};

BuiltScene build_scene(const RunConfig& cfg) {
  BuiltScene b;
  b.mesh = std::make_shared<CylinderMesh>(mesh_from_config(cfg.geometry));
  b.sys = species_from_config(cfg.species);
  b.vel = build_velocity(*b.mesh, cfg.velocity.w_max, profile_from_name(cfg.velocity.profile));
  b.eq = equilibrium_from_config(cfg.equilibrium, b.sys);
  b.g_in = matched_inflow(*b.mesh, b.sys, b.eq, b.vel);
  return b;
}

std::string prepare_output_dir(const RunConfig& cfg, const CliOverrides& cli) {
  const std::string dir = cli.output_dir.value_or(cfg.output_dir);
  fs::create_directories(dir);
  return dir;
}

SpectrumTarget target_from_name(const std::string& name) {
  return name == "around-zero" ? SpectrumTarget::around_zero : SpectrumTarget::smallest_real;
}

void write_report_txt(const std::string& path, const StabilityReport& rep,
                      const VelocityField& vel) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ValidationError("cannot open '" + path + "'");
  os.precision(15);
  os << "porestab stability report\n"
     << "verdict: " << verdict_name(rep.verdict) << "\n"
     << "criterion_lhs: " << rep.criterion_lhs << "\n"
     << "criterion_rhs: " << rep.criterion_rhs << "\n"
     << "criterion_satisfied: " << (rep.criterion_satisfied ? "true" : "false") << "\n"
     << "poincare_c_p: " << rep.c_p << "\n"
     << "poincare_mu_1: " << rep.mu_1 << "\n"
     << "poincare_subspace: " << rep.poincare_subspace << "\n"
     << "inflow_active: " << (rep.inflow_active ? "true" : "false") << "\n"
     << "velocity_w_max: " << vel.w_max << "\n"
     << "spectral_gap: " << rep.spectral_gap << "\n"
     << "k_computed: " << rep.k_computed << "\n"
     << "max_eigen_residual: " << rep.max_eigen_residual << "\n"
     << "conjugate_symmetry_ok: " << (rep.conjugate_symmetry_ok ? "true" : "false") << "\n"
     << "anomaly: " << (rep.anomaly ? rep.anomaly_note : std::string("none")) << "\n";
  os << "equilibrium_psi:";
  for (int s = 0; s < rep.equilibrium.psi.size(); ++s) os << " " << rep.equilibrium.psi[s];
  os << "\nequilibrium_xi:";
  for (int s = 0; s < rep.equilibrium.xi.size(); ++s) os << " " << rep.equilibrium.xi[s];
  os << "\n\neigenvalues (re, im, residual):\n";
  for (const auto& p : rep.eigenpairs) {
    os << "  " << p.lambda.real() << " " << p.lambda.imag() << " " << p.residual << "\n";
  }
}

void write_eigenvalues_csv(const std::string& path, const std::vector<Eigenpair>& pairs) {
  CsvWriter csv(path, {"re", "im", "residual"});
  for (const auto& p : pairs) {
    csv.begin_row();
    csv.field(p.lambda.real());
    csv.field(p.lambda.imag());
    csv.field(p.residual);
    csv.end_row();
  }
}

} // namespace

void cmd_analyze(const RunConfig& cfg, const CliOverrides& cli) {
  const std::string dir = prepare_output_dir(cfg, cli);
  ManifestBuilder manifest(config_to_json(cfg), dir);
  try {
    Timer total;
    BuiltScene scene = build_scene(cfg);
    manifest.add_note("mesh_summary", mesh_summary(*scene.mesh));
    manifest.add_note("mesh_checksum", sha256_string(mesh_summary(*scene.mesh)));

    VerdictOptions vopts;
    vopts.spectrum.k = cfg.analyze.num_eigenvalues;
    vopts.spectrum.which = target_from_name(cfg.analyze.target);
    vopts.spectrum.seed = cli.seed.value_or(cfg.analyze.seed);

    Timer spect;
    LinearizedOperator op;
    const StabilityReport rep =
        stability_verdict(scene.mesh, scene.sys, scene.eq, scene.vel, vopts, &op);
    manifest.add_timing("stability_verdict", spect.seconds());

    write_report_txt(dir + "/report.txt", rep, scene.vel);
    manifest.add_file("report.txt");
    write_eigenvalues_csv(dir + "/eigenvalues.csv", rep.eigenpairs);
    manifest.add_file("eigenvalues.csv");

    {
      CsvWriter csv(dir + "/energy.csv", {"re", "im", "identity_residual"});
      for (const auto& p : rep.eigenpairs) {
        csv.begin_row();
        csv.field(p.lambda.real());
        csv.field(p.lambda.imag());
        csv.field(energy_identity_residual(op, p.lambda, p.vec));
        csv.end_row();
      }
      manifest.add_file("energy.csv");
    }
    {
      const auto probe = instability_probe(op, rep.eigenpairs, op.lin);
      CsvWriter csv(dir + "/probe.csv", {"re", "im", "lhs", "rhs", "satisfied", "skipped"});
      for (const auto& r : probe) {
        csv.begin_row();
        csv.field(r.lambda.real());
        csv.field(r.lambda.imag());
        csv.field(r.lhs);
        csv.field(r.rhs);
        csv.field(std::string(r.satisfied ? "true" : "false"));
        csv.field(std::string(r.skipped ? "true" : "false"));
        csv.end_row();
      }
      manifest.add_file("probe.csv");
    }
    if (cfg.analyze.export_operator) {
      std::ofstream os(dir + "/operator.txt", std::ios::binary);
      write_triplets(op, os);
      os.close();
      manifest.add_file("operator.txt");
    }

    manifest.add_note("verdict", verdict_name(rep.verdict));
    manifest.add_note("operator_dimensions",
                      {{"total", op.size()},
                       {"bulk_unknowns", op.n_bulk_unknowns},
                       {"surf_unknowns", op.n_surf_unknowns},
                       {"bulk_block_offset", 0},
                       {"surf_block_offset", op.n_bulk_unknowns}});
    manifest.add_note("energy_weights",
                      "diagonal congruence weights: K^{-1,1} bulk, K^{-1,1} squared surface");
    manifest.add_timing("total", total.seconds());
    manifest.write();
  } catch (...) {
    manifest.mark_incomplete("analyze failed; see stderr");
    manifest.write();
    throw;
  }
}

void cmd_simulate(const RunConfig& cfg, const CliOverrides& cli) {
  const std::string dir = prepare_output_dir(cfg, cli);
  ManifestBuilder manifest(config_to_json(cfg), dir);
  try {
    Timer total;
    BuiltScene scene = build_scene(cfg);
    manifest.add_note("mesh_summary", mesh_summary(*scene.mesh));
    manifest.add_note("mesh_checksum", sha256_string(mesh_summary(*scene.mesh)));

    VerdictOptions vopts;
    vopts.spectrum.k = cfg.simulate.num_eigenvalues;
    vopts.spectrum.seed = cli.seed.value_or(cfg.simulate.seed);
    Timer spect;
    const StabilityReport rep = stability_verdict(scene.mesh, scene.sys, scene.eq, scene.vel,
                                                  vopts);
    manifest.add_timing("stability_verdict", spect.seconds());
    manifest.add_note("verdict", verdict_name(rep.verdict));

    const std::uint64_t seed = cli.seed.value_or(cfg.simulate.seed);
    const StateField state0 =
        perturb_equilibrium(*scene.mesh, scene.sys, scene.eq, cfg.simulate.delta, seed);

    SimulateOptions sopts;
    sopts.t_end = cfg.simulate.t_end;
    sopts.dt = cfg.simulate.dt;
    sopts.sample_every = cfg.simulate.sample_every;
    Timer simt;
    const Trajectory traj =
        simulate(scene.sys, scene.mesh, scene.vel, scene.g_in, state0, scene.eq, sopts);
    manifest.add_timing("simulate", simt.seconds());

    {
      const int N = scene.sys.n_species;
      std::vector<std::string> cols = {"t"};
      for (int s = 1; s <= N; ++s) cols.push_back("mass_bulk_" + std::to_string(s));
      for (int s = 1; s <= N; ++s) cols.push_back("mass_surf_" + std::to_string(s));
      cols.push_back("deviation");
      CsvWriter csv(dir + "/trajectory.csv", cols);
      for (const auto& smp : traj.samples) {
        csv.begin_row();
        csv.field(smp.t);
        for (int s = 0; s < N; ++s) csv.field(smp.mass_bulk[s]);
        for (int s = 0; s < N; ++s) csv.field(smp.mass_surf[s]);
        csv.field(smp.deviation);
        csv.end_row();
      }
      manifest.add_file("trajectory.csv");
    }
    {
      CsvWriter csv(dir + "/ledger.csv", {"t", "species", "delta_mass", "expected",
                                          "residual_rel"});
      for (const auto& rec : traj.ledger) {
        for (int s = 0; s < rec.delta.size(); ++s) {
          csv.begin_row();
          csv.field(rec.t);
          csv.field(static_cast<long>(s + 1));
          csv.field(rec.delta[s]);
          csv.field(rec.expected[s]);
          csv.field(rec.residual_rel[s]);
          csv.end_row();
        }
      }
      manifest.add_file("ledger.csv");
    }
    manifest.add_note("max_ledger_residual", traj.max_ledger_residual);

    {
      std::ofstream os(dir + "/decay.txt", std::ios::binary);
      os.precision(15);
      os << "porestab decay-fit summary\n"
         << "norm: discrete volume/area-weighted 2-norm (surrogate for the paper's trace-space "
            "norm)\n"
         << "predicted_rate (spectral gap): " << rep.spectral_gap << "\n";
      std::vector<double> times, devs;
      for (const auto& smp : traj.samples) {
        times.push_back(smp.t);
        devs.push_back(smp.deviation);
      }
      try {
        const DecayFit fit = decay_rate(times, devs, rep.spectral_gap);
        os << "status: ok\n"
           << "fitted_rate: " << fit.fitted_rate << "\n"
           << "rate_stderr: " << fit.rate_stderr << "\n"
           << "fitted_over_predicted: " << fit.ratio() << "\n"
           << "tail_begin_sample: " << fit.tail_begin << "\n";
        manifest.add_note("decay_fit", {{"status", "ok"},
                                        {"fitted_rate", fit.fitted_rate},
                                        {"predicted_rate", fit.predicted_rate},
                                        {"ratio", fit.ratio()}});
      } catch (const InsufficientDecayError& e) {
        os << "status: insufficient-decay\n"
           << "detail: " << e.what() << "\n";
        manifest.add_note("decay_fit", {{"status", "insufficient-decay"}, {"detail", e.what()}});
      }
      os.close();
      manifest.add_file("decay.txt");
    }
    manifest.add_timing("total", total.seconds());
    manifest.write();
  } catch (...) {
    manifest.mark_incomplete("simulate failed; see stderr");
    manifest.write();
    throw;
  }
}

void cmd_poincare(const RunConfig& cfg, const CliOverrides& cli) {
  const std::string dir = prepare_output_dir(cfg, cli);
  ManifestBuilder manifest(config_to_json(cfg), dir);
  try {
    Timer total;
    auto resolutions = cfg.poincare.resolutions;
    if (resolutions.empty()) resolutions.push_back({cfg.geometry.n_theta, cfg.geometry.n_z});

    CsvWriter csv(dir + "/poincare.csv",
                  {"n_theta", "n_z", "mu_1", "c_p", "mu_1_continuum"});
    for (const auto& [nth, nz] : resolutions) {
      const CylinderMesh mesh = build_mesh(CylinderSpec{cfg.geometry.radius, cfg.geometry.height},
                                           cfg.geometry.n_r, nth, nz);
      const PoincareResult pr = poincare_constant_surface(mesh);
      csv.begin_row();
      csv.field(static_cast<long>(nth));
      csv.field(static_cast<long>(nz));
      csv.field(pr.mu_1);
      csv.field(pr.c_p);
      csv.field(poincare_mu1_continuum(cfg.geometry.radius, cfg.geometry.height));
      csv.end_row();
    }
    manifest.add_file("poincare.csv");
    manifest.add_note("poincare_subspace", "neumann-mean-zero");
    manifest.add_timing("total", total.seconds());
    manifest.write();
  } catch (...) {
    manifest.mark_incomplete("poincare failed; see stderr");
    manifest.write();
    throw;
  }
}

namespace {

struct SweepPoint {
  std::vector<double> axis_values;
  double criterion_lhs = 0.0, criterion_rhs = 0.0, spectral_gap = 0.0;
  std::string verdict;
  std::string error;
};

RunConfig apply_axes(RunConfig cfg, const std::vector<SweepAxis>& axes,
                     const std::vector<double>& values) {
  for (size_t a = 0; a < axes.size(); ++a) {
    const double v = values[a];
    const std::string& name = axes[a].name;
    if (name == "kappa_f") cfg.species.kappa_f = v;
    else if (name == "kappa_b") cfg.species.kappa_b = v;
    else if (name == "k_ad") std::fill(cfg.species.k_ad.begin(), cfg.species.k_ad.end(), v);
    else if (name == "k_de") std::fill(cfg.species.k_de.begin(), cfg.species.k_de.end(), v);
    else if (name == "R") cfg.geometry.radius = v;
    else if (name == "h") cfg.geometry.height = v;
    else if (name == "w_max") cfg.velocity.w_max = v;
  }
  return cfg;
}

} // namespace

void cmd_sweep(const RunConfig& cfg, const CliOverrides& cli) {
  const std::string dir = prepare_output_dir(cfg, cli);
  ManifestBuilder manifest(config_to_json(cfg), dir);
  try {
    Timer total;
    const auto& axes = cfg.sweep.axes;
    long total_points = 1;
    for (const auto& a : axes) total_points *= static_cast<long>(a.values.size());

    std::vector<SweepPoint> points(total_points);
    auto values_at = [&](long idx) {
      std::vector<double> vals(axes.size());
      long rest = idx;
      for (size_t a = axes.size(); a-- > 0;) {
        const long n = static_cast<long>(axes[a].values.size());
        vals[a] = axes[a].values[rest % n];
        rest /= n;
      }
      return vals;
    };

    std::atomic<long> next{0};
    auto worker = [&]() {
      for (;;) {
        const long idx = next.fetch_add(1);
        if (idx >= total_points) return;
        SweepPoint& pt = points[idx];
        pt.axis_values = values_at(idx);
        try {
          const RunConfig point_cfg = apply_axes(cfg, axes, pt.axis_values);
          BuiltScene scene = build_scene(point_cfg);
          VerdictOptions vopts;
          vopts.spectrum.k = cfg.sweep.num_eigenvalues;
          vopts.spectrum.seed = cli.seed.value_or(cfg.sweep.seed);
          const StabilityReport rep =
              stability_verdict(scene.mesh, scene.sys, scene.eq, scene.vel, vopts);
          pt.criterion_lhs = rep.criterion_lhs;
          pt.criterion_rhs = rep.criterion_rhs;
          pt.spectral_gap = rep.spectral_gap;
          pt.verdict = verdict_name(rep.verdict);
        } catch (const Error& e) {
          pt.error = e.what();
        }
      }
    };
    const int jobs = std::max(1, cli.jobs);
    std::vector<std::thread> threads;
    for (int t = 1; t < jobs; ++t) threads.emplace_back(worker);
    worker();
    for (auto& t : threads) t.join();

    std::vector<std::string> cols;
    for (const auto& a : axes) cols.push_back(a.name);
    for (const char* c : {"criterion_lhs", "criterion_rhs", "spectral_gap", "verdict", "error"})
      cols.push_back(c);
    CsvWriter csv(dir + "/sweep.csv", cols);
    for (const auto& pt : points) {
      csv.begin_row();
      for (double v : pt.axis_values) csv.field(v);
      if (pt.error.empty()) {
        csv.field(pt.criterion_lhs);
        csv.field(pt.criterion_rhs);
        csv.field(pt.spectral_gap);
        csv.field(pt.verdict);
        csv.field(std::string(""));
      } else {
        csv.field(std::string(""));
        csv.field(std::string(""));
        csv.field(std::string(""));
        csv.field(std::string("error"));
        csv.field(pt.error);
      }
      csv.end_row();
    }
    manifest.add_file("sweep.csv");
    manifest.add_note("sweep_points", total_points);
    manifest.add_timing("total", total.seconds());
    manifest.write();
  } catch (...) {
    manifest.mark_incomplete("sweep failed; see stderr");
    manifest.write();
    throw;
  }
}

void run_scenario(const RunConfig& cfg, const CliOverrides& cli) {
  switch (cfg.scenario) {
    case ScenarioType::analyze: cmd_analyze(cfg, cli); break;
    case ScenarioType::simulate: cmd_simulate(cfg, cli); break;
    case ScenarioType::poincare: cmd_poincare(cfg, cli); break;
    case ScenarioType::sweep: cmd_sweep(cfg, cli); break;
  }
}

} // namespace porestab
