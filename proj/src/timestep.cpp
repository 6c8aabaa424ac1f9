#include "porestab/timestep.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace porestab {

StateField StateField::constant(const CylinderMesh& mesh, const EquilibriumPair& eq) {
  StateField s;
  const int n = static_cast<int>(eq.xi.size());
  s.c.reserve(n);
  s.c_surf.reserve(n);
  for (int i = 0; i < n; ++i) {
    s.c.push_back(Vec::Constant(mesh.n_bulk(), eq.psi[i]));
    s.c_surf.push_back(Vec::Constant(mesh.n_surface(), eq.xi[i]));
  }
  return s;
}

double StateField::min_value() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& f : c) m = std::min(m, f.minCoeff());
  for (const auto& f : c_surf) m = std::min(m, f.minCoeff());
  return m;
}

Vec flatten(const StateField& s) {
  const int n = static_cast<int>(s.c.size());
  const auto nb = s.c[0].size();
  const auto ns = s.c_surf[0].size();
  Vec v(n * (nb + ns));
  for (int i = 0; i < n; ++i) v.segment(i * nb, nb) = s.c[i];
  for (int i = 0; i < n; ++i) v.segment(n * nb + i * ns, ns) = s.c_surf[i];
  return v;
}

StateField unflatten(const CylinderMesh& mesh, int n_species, const Vec& v, double time) {
  const int nb = mesh.n_bulk();
  const int ns = mesh.n_surface();
  if (v.size() != static_cast<long>(n_species) * (nb + ns)) {
    throw ValidationError("unflatten: vector length does not match mesh/species");
  }
  StateField s;
  s.time = time;
  for (int i = 0; i < n_species; ++i) s.c.push_back(v.segment(i * nb, nb));
  for (int i = 0; i < n_species; ++i)
    s.c_surf.push_back(v.segment(static_cast<long>(n_species) * nb + i * ns, ns));
  return s;
}

namespace {

Vec cell_volumes(const CylinderMesh& mesh) {
  Vec v(mesh.n_bulk());
  for (int k = 0; k < mesh.n_z(); ++k)
    for (int j = 0; j < mesh.n_theta(); ++j)
      for (int i = 0; i < mesh.n_r(); ++i) v[mesh.bulk_index(i, j, k)] = mesh.cell_volume(i);
  return v;
}

} // namespace

Vec bulk_mass(const CylinderMesh& mesh, const StateField& s) {
  const Vec vols = cell_volumes(mesh);
  Vec m(static_cast<long>(s.c.size()));
  for (size_t i = 0; i < s.c.size(); ++i) m[static_cast<long>(i)] = s.c[i].dot(vols);
  return m;
}

Vec surface_mass(const CylinderMesh& mesh, const StateField& s) {
  Vec m(static_cast<long>(s.c_surf.size()));
  for (size_t i = 0; i < s.c_surf.size(); ++i)
    m[static_cast<long>(i)] = s.c_surf[i].sum() * mesh.surface_cell_area();
  return m;
}

double deviation_norm(const CylinderMesh& mesh, const StateField& s, const EquilibriumPair& eq) {
  const Vec vols = cell_volumes(mesh);
  double acc = 0.0;
  for (size_t i = 0; i < s.c.size(); ++i) {
    acc += (s.c[i].array() - eq.psi[static_cast<long>(i)]).square().matrix().dot(vols);
    acc += (s.c_surf[i].array() - eq.xi[static_cast<long>(i)]).square().sum() *
           mesh.surface_cell_area();
  }
  return std::sqrt(acc);
}

double reaction_dt_bound(const SpeciesSystem& sys, const StateField& state) {
  const Vec a = sys.alpha - sys.beta;
  const double na = a.norm();
  if (na == 0.0) return std::numeric_limits<double>::infinity();
  const auto ns = state.c_surf[0].size();
  Vec cs(sys.n_species);
  double worst = 0.0;
  for (long p = 0; p < ns; ++p) {
    for (int s = 0; s < sys.n_species; ++s) cs[s] = std::max(state.c_surf[s][p], 0.0);
    const SurfaceLinearization lin = linearize_reaction(sys, cs);
    worst = std::max(worst, na * lin.b.row(0).norm()); // rank-one: |M|_2 = |a||b|
  }
  if (worst == 0.0) return std::numeric_limits<double>::infinity();
  return 0.5 / worst;
}

ImexStepper::ImexStepper(std::shared_ptr<const CylinderMesh> mesh, const SpeciesSystem& sys,
                         const VelocityField& vel, const InflowField& g_in, double dt,
                         bool reaction_enabled)
    : mesh_(std::move(mesh)), sys_(sys), vel_(vel), g_in_(g_in), dt_(dt),
      reaction_enabled_(reaction_enabled) {
  if (!(dt > 0.0)) throw ValidationError("field 'dt' must be > 0");
  const SurfaceLinearization zero_lin =
      make_linearization(sys_.alpha - sys_.beta, Vec::Zero(sys_.n_species));
  lin_part_ = assemble_A0(mesh_, sys_, vel_, zero_lin);

  affine_ = Vec::Zero(lin_part_.size());
  if (!g_in_.empty()) {
    if (g_in_.values.rows() != mesh_->n_inflow_faces() || g_in_.values.cols() != sys_.n_species) {
      throw ValidationError("ImexStepper: g_in field does not match the mesh/species");
    }
    for (int s = 0; s < sys_.n_species; ++s) {
      for (int j = 0; j < mesh_->n_theta(); ++j) {
        for (int i = 0; i < mesh_->n_r(); ++i) {
          const int cell = lin_part_.bulk_offset(s) + mesh_->bulk_index(i, j, 0);
          const double flux_out = g_in_.values(mesh_->inflow_face_index(i, j), s);
          affine_[cell] -= flux_out * mesh_->axial_face_area(i) / mesh_->cell_volume(i);
        }
      }
    }
  }

  SpMat system = lin_part_.a0 * dt_;
  for (int i = 0; i < system.rows(); ++i) system.coeffRef(i, i) += 1.0;
  system.makeCompressed();
  lu_.compute(system);
  if (lu_.info() != Eigen::Success) {
    throw NumericalError("ImexStepper: factorization of the implicit system failed");
  }
}

StateField ImexStepper::step(const StateField& state, StepFluxes* fluxes) const {
  const CylinderMesh& m = *mesh_;
  const int N = sys_.n_species;
  const int ns = m.n_surface();

  if (reaction_enabled_) {
    const double bound = reaction_dt_bound(sys_, state);
    if (dt_ > bound) {
      std::ostringstream os;
      os << "step_imex: dt=" << dt_ << " exceeds the explicit-reaction stability bound " << bound
         << " at t=" << state.time;
      throw ValidationError(os.str());
    }
  }

  Vec x = flatten(state);
  Vec rhs = x + dt_ * affine_;

  Vec reaction_integral = Vec::Zero(N);
  if (reaction_enabled_) {
    Vec cs(N);
    for (int p = 0; p < ns; ++p) {
      for (int s = 0; s < N; ++s) cs[s] = std::max(state.c_surf[s][p], 0.0);
      const Vec r = reaction_rate(sys_, cs);
      for (int s = 0; s < N; ++s) {
        rhs[lin_part_.surf_offset(s) + p] += dt_ * r[s];
        reaction_integral[s] += r[s] * m.surface_cell_area();
      }
    }
  }

  const Vec xn = lu_.solve(rhs);
  if (lu_.info() != Eigen::Success) {
    std::ostringstream os;
    os << "step_imex: implicit solve failed at t=" << state.time;
    throw NumericalError(os.str());
  }

  StateField out = unflatten(m, N, xn, state.time + dt_);
  const double minval = out.min_value();
  if (minval < -1e-10) {
    std::ostringstream os;
    os << "step_imex: positivity abort at t=" << out.time << " (min value " << minval << ")";
    throw NumericalError(os.str());
  }

  if (fluxes) {
    fluxes->inflow = Vec::Zero(N);
    fluxes->outflow = Vec::Zero(N);
    fluxes->reaction = reaction_integral;
    if (!g_in_.empty()) {
      for (int s = 0; s < N; ++s) {
        for (int j = 0; j < m.n_theta(); ++j)
          for (int i = 0; i < m.n_r(); ++i)
            fluxes->inflow[s] +=
                g_in_.values(m.inflow_face_index(i, j), s) * m.axial_face_area(i);
      }
    }
    for (int s = 0; s < N; ++s) {
      for (int j = 0; j < m.n_theta(); ++j) {
        for (int i = 0; i < m.n_r(); ++i) {
          const int top = lin_part_.bulk_offset(s) + m.bulk_index(i, j, m.n_z() - 1);
          fluxes->outflow[s] += vel_.w[i] * xn[top] * m.axial_face_area(i);
        }
      }
    }
  }
  return out;
}

StateField step_imex(const StateField& state, double dt, const SpeciesSystem& sys,
                     std::shared_ptr<const CylinderMesh> mesh, const VelocityField& vel,
                     const InflowField& g_in) {
  return ImexStepper(std::move(mesh), sys, vel, g_in, dt).step(state);
}

LedgerRecord mass_ledger(const CylinderMesh& mesh, const StateField& before,
                         const StateField& after, double dt, const StepFluxes& fluxes) {
  const int N = static_cast<int>(before.c.size());
  LedgerRecord rec;
  rec.t = after.time;
  const Vec mb0 = bulk_mass(mesh, before), ms0 = surface_mass(mesh, before);
  const Vec mb1 = bulk_mass(mesh, after), ms1 = surface_mass(mesh, after);
  rec.delta = (mb1 + ms1) - (mb0 + ms0);
  rec.expected = dt * (-fluxes.inflow - fluxes.outflow + fluxes.reaction);
  rec.residual_rel.resize(N);
  for (int s = 0; s < N; ++s) {
    const double scale = std::max({mb0[s] + ms0[s],
                                   dt * (std::abs(fluxes.inflow[s]) + std::abs(fluxes.outflow[s]) +
                                         std::abs(fluxes.reaction[s])),
                                   1e-30});
    rec.residual_rel[s] = std::abs(rec.delta[s] - rec.expected[s]) / scale;
  }
  rec.max_residual = rec.residual_rel.maxCoeff();
  return rec;
}

Trajectory simulate(const SpeciesSystem& sys, std::shared_ptr<const CylinderMesh> mesh,
                    const VelocityField& vel, const InflowField& g_in, const StateField& state0,
                    const EquilibriumPair& eq, const SimulateOptions& opts) {
  if (!(opts.t_end > 0.0)) throw ValidationError("field 't_end' must be > 0");
  if (opts.sample_every < 1) throw ValidationError("field 'sample_every' must be >= 1");
  const ImexStepper stepper(mesh, sys, vel, g_in, opts.dt, opts.reaction_enabled);

  Trajectory traj;
  auto sample = [&](const StateField& s) {
    TrajectorySample ts;
    ts.t = s.time;
    ts.mass_bulk = bulk_mass(*mesh, s);
    ts.mass_surf = surface_mass(*mesh, s);
    ts.deviation = deviation_norm(*mesh, s, eq);
    traj.samples.push_back(std::move(ts));
    traj.sampled_states.push_back(s);
  };

  StateField current = state0;
  sample(current);
  const long n_steps = static_cast<long>(std::ceil(opts.t_end / opts.dt - 1e-12));
  for (long step = 1; step <= n_steps; ++step) {
    StepFluxes fluxes;
    StateField next = stepper.step(current, &fluxes);
    LedgerRecord rec = mass_ledger(*mesh, current, next, opts.dt, fluxes);
    traj.max_ledger_residual = std::max(traj.max_ledger_residual, rec.max_residual);
    traj.ledger.push_back(std::move(rec));
    current = std::move(next);
    if (step % opts.sample_every == 0 || step == n_steps) sample(current);
  }
  traj.completed = true;
  return traj;
}

DecayFit decay_rate(const std::vector<double>& times, const std::vector<double>& deviations,
                    double predicted_rate) {
  if (times.size() != deviations.size() || times.size() < 2) {
    throw ValidationError("decay_rate: times and deviations must match and hold >= 2 samples");
  }
  DecayFit fit;
  fit.times = times;
  fit.deviation_norms = deviations;
  fit.predicted_rate = predicted_rate;

  const double dev0 = deviations.front();
  int begin = -1;
  for (size_t i = 0; i < deviations.size(); ++i) {
    if (deviations[i] > 0.0 && deviations[i] <= 0.1 * dev0) {
      begin = static_cast<int>(i);
      break;
    }
  }
  if (begin < 0) {
    throw InsufficientDecayError("decay_rate: deviation never dropped one decade below its "
                                 "initial value");
  }
  std::vector<double> tt, ld;
  double dmax = 0.0, dmin = std::numeric_limits<double>::infinity();
  for (size_t i = begin; i < deviations.size(); ++i) {
    if (deviations[i] <= 0.0) break; // decayed to zero/roundoff floor
    tt.push_back(times[i]);
    ld.push_back(std::log(deviations[i]));
    dmax = std::max(dmax, deviations[i]);
    dmin = std::min(dmin, deviations[i]);
  }
  if (tt.size() < 10) {
    std::ostringstream os;
    os << "decay_rate: only " << tt.size() << " tail samples (need >= 10)";
    throw InsufficientDecayError(os.str());
  }
  if (dmax / dmin < 10.0) {
    std::ostringstream os;
    os << "decay_rate: tail spans only a factor " << dmax / dmin << " (need one decade)";
    throw InsufficientDecayError(os.str());
  }

  const auto n = static_cast<double>(tt.size());
  double st = 0.0, sy = 0.0;
  for (size_t i = 0; i < tt.size(); ++i) {
    st += tt[i];
    sy += ld[i];
  }
  const double tbar = st / n, ybar = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < tt.size(); ++i) {
    sxx += (tt[i] - tbar) * (tt[i] - tbar);
    sxy += (tt[i] - tbar) * (ld[i] - ybar);
  }
  const double slope = sxy / sxx;
  double ss_res = 0.0;
  for (size_t i = 0; i < tt.size(); ++i) {
    const double r = ld[i] - (ybar + slope * (tt[i] - tbar));
    ss_res += r * r;
  }
  fit.fitted_rate = -slope;
  fit.rate_stderr = tt.size() > 2 ? std::sqrt(ss_res / (n - 2.0) / sxx) : 0.0;
  fit.tail_begin = begin;
  return fit;
}

StateField perturb_equilibrium(const CylinderMesh& mesh, const SpeciesSystem& sys,
                               const EquilibriumPair& eq, double delta, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  const double R = mesh.radius(), h = mesh.height();

  StateField s = StateField::constant(mesh, eq);
  for (int sp = 0; sp < sys.n_species; ++sp) {
    // bulk: low-order polynomial in r times truncated Fourier in (theta, z)
    struct BulkMode { int p, m, q; double amp, phi; };
    std::vector<BulkMode> modes;
    for (int p = 0; p <= 2; ++p)
      for (int mm = 0; mm <= 2; ++mm)
        for (int q = 0; q <= 2; ++q) modes.push_back({p, mm, q, coef(rng), phase(rng)});
    Vec f(mesh.n_bulk());
    for (int k = 0; k < mesh.n_z(); ++k) {
      for (int j = 0; j < mesh.n_theta(); ++j) {
        for (int i = 0; i < mesh.n_r(); ++i) {
          double val = 0.0;
          const double r = mesh.r_center(i) / R;
          const double th = mesh.theta_center(j);
          const double z = mesh.z_center(k) / h;
          for (const auto& md : modes) {
            val += md.amp * std::pow(r, md.p) * std::cos(md.m * th + md.phi) *
                   std::cos(md.q * std::numbers::pi * z);
          }
          f[mesh.bulk_index(i, j, k)] = val;
        }
      }
    }
    f /= std::max(f.cwiseAbs().maxCoeff(), 1e-300);
    s.c[sp] += delta * f;

    struct SurfMode { int m, q; double amp, phi; };
    std::vector<SurfMode> smodes;
    for (int mm = 0; mm <= 3; ++mm)
      for (int q = 0; q <= 3; ++q) smodes.push_back({mm, q, coef(rng), phase(rng)});
    Vec g(mesh.n_surface());
    for (int k = 0; k < mesh.n_z(); ++k) {
      for (int j = 0; j < mesh.n_theta(); ++j) {
        double val = 0.0;
        const double th = mesh.theta_center(j);
        const double z = mesh.z_center(k) / h;
        for (const auto& md : smodes) {
          val += md.amp * std::cos(md.m * th + md.phi) * std::cos(md.q * std::numbers::pi * z);
        }
        g[mesh.surface_index(j, k)] = val;
      }
    }
    g /= std::max(g.cwiseAbs().maxCoeff(), 1e-300);
    s.c_surf[sp] += delta * g;
  }
  return s;
}

} // namespace porestab
