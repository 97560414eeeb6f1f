#pragma once

// Execute an ExperimentConfig: build initial data, dispatch to the solver of
// the requested scale and write CSV artifacts plus a run header into
// config.output_dir.

#include <chemoflock/compare.hpp>
#include <chemoflock/config.hpp>
#include <chemoflock/euler.hpp>
#include <chemoflock/initial_data.hpp>
#include <chemoflock/particles.hpp>
#include <chemoflock/vlasov.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace chemoflock {

enum class RunStatus { ok = 0, blowup = 2 };

inline std::string time_tag(double t) {
  std::ostringstream os;
  os.precision(10);
  os << 't' << t;
  return os.str();
}

namespace detail {

inline std::vector<std::vector<double>> read_numeric_csv(const std::string& path, std::size_t columns) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    auto cells = split_list(line);
    if (cells.size() != columns) throw Error(path + ": expected " + std::to_string(columns) + " columns");
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(parse_number(path, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline void require_node(const std::string& path, double got, double want, double h) {
  if (std::abs(got - want) > 1e-6 * h) throw Error(path + ": node coordinates do not match the configured grid");
}

}  // namespace detail

/// Phase-space initial data on the configured grid. custom_csv reads
/// `x,v,value` rows in node order (x outer, v inner).
inline PhaseDensity make_phase_density(const ExperimentConfig& c) {
  const auto g = c.grid.phase();
  const auto& iv = c.initial;
  switch (iv.kind) {
    case InitialKind::two_bump_v: {
      TwoBumpV f;
      f.v0 = iv.get("v0", f.v0);
      f.sigma_x = iv.get("sigma_x", f.sigma_x);
      f.sigma_v = iv.get("sigma_v", f.sigma_v);
      f.scale = iv.get("scale", f.scale);
      return PhaseDensity::from_function(g, f);
    }
    case InitialKind::monokinetic_gauss: {
      MonokineticGauss f;
      f.x0 = iv.get("x0", f.x0);
      f.v0 = iv.get("v0", f.v0);
      f.sigma_x = iv.get("sigma_x", f.sigma_x);
      f.sigma_v = iv.get("sigma_v", f.sigma_v);
      return PhaseDensity::from_function(g, f);
    }
    case InitialKind::two_bump_xv: {
      TwoBumpXV f;
      f.x1 = iv.get("x1", f.x1);
      f.v1 = iv.get("v1", f.v1);
      f.x2 = iv.get("x2", f.x2);
      f.v2 = iv.get("v2", f.v2);
      f.sigma_x = iv.get("sigma_x", f.sigma_x);
      f.sigma_v = iv.get("sigma_v", f.sigma_v);
      f.scale = iv.get("scale", f.scale);
      return PhaseDensity::from_function(g, f);
    }
    case InitialKind::custom_csv: {
      const auto rows = detail::read_numeric_csv(iv.path, 3);
      if (rows.size() != g.x_nodes() * g.v_nodes())
        throw Error(iv.path + ": expected " + std::to_string(g.x_nodes() * g.v_nodes()) + " rows");
      PhaseDensity rho(g);
      for (std::size_t k = 0; k < rows.size(); ++k) {
        const std::size_t i = k / g.v_nodes(), j = k % g.v_nodes();
        detail::require_node(iv.path, rows[k][0], g.x(i), g.dx());
        detail::require_node(iv.path, rows[k][1], g.v(j), g.dv());
        if (rows[k][2] < 0.0) throw Error(iv.path + ": negative density");
        rho.at(i, j) = rows[k][2];
      }
      return rho;
    }
    case InitialKind::cosine_density: break;
  }
  throw Error("initial.kind: not phase-space data");
}

/// Hydrodynamic initial data. custom_csv reads `x,mu,Q` rows in node order.
inline EulerState make_euler_state(const ExperimentConfig& c) {
  const auto g = c.grid.euler();
  const auto& iv = c.initial;
  if (iv.kind == InitialKind::cosine_density) {
    CosineDensity f;
    f.c1 = iv.get("c1", f.c1);
    f.c2 = iv.get("c2", f.c2);
    return f.make(g);
  }
  if (iv.kind == InitialKind::custom_csv) {
    const auto rows = detail::read_numeric_csv(iv.path, 3);
    if (rows.size() != g.nodes()) throw Error(iv.path + ": expected " + std::to_string(g.nodes()) + " rows");
    EulerState s(g);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      detail::require_node(iv.path, rows[i][0], g.x(i), g.dx());
      s.mu[i] = rows[i][1];
      s.Q[i] = rows[i][2];
    }
    s.enforce_boundary();
    return s;
  }
  throw Error("initial.kind: not hydrodynamic data");
}

inline VlasovParams vlasov_params(const ExperimentConfig& c) {
  return VlasovParams{c.params.kernel(), c.params.chemo(), c.params.alpha};
}

inline EulerParams euler_params(const ExperimentConfig& c, double epsilon) {
  EulerParams p;
  p.kernel = c.params.kernel();
  p.chemo = c.params.chemo();
  p.alpha = c.params.alpha;
  p.epsilon = epsilon;
  p.p = c.params.p;
  return p;
}

class RunOutput {
public:
  explicit RunOutput(const std::string& dir) : dir_(dir) { std::filesystem::create_directories(dir_); }

  std::ofstream open(const std::string& file) const {
    std::ofstream os(dir_ / file);
    if (!os) throw Error("cannot write '" + (dir_ / file).string() + "'");
    return os;
  }

  const std::filesystem::path& dir() const { return dir_; }

private:
  std::filesystem::path dir_;
};

inline void write_header(const RunOutput& out, const ExperimentConfig& c, const std::string& status,
                         double wall_seconds, const std::vector<std::pair<std::string, std::string>>& extra) {
  auto os = out.open("header.txt");
  for (const auto& [k, v] : c.resolved.items()) os << k << " = " << v << '\n';
  for (const auto& [k, v] : extra) os << k << " = " << v << '\n';
  os << "status = " << status << '\n';
  os << "wall_time_s = " << wall_seconds << '\n';
}

namespace detail {

using Extra = std::vector<std::pair<std::string, std::string>>;

inline RunStatus run_particles(const ExperimentConfig& c, const RunOutput& out, Extra& extra) {
  const auto rho0 = make_phase_density(c);
  auto state = sample_particles(rho0, c.particles, c.seed);
  ParticleRunOptions opt;
  opt.kernel = c.params.kernel();
  opt.chemo = c.params.chemo();
  opt.chemo_grid = c.grid.spatial();
  opt.normalize_source = c.normalize_source;
  opt.dt = c.dt;
  opt.T = c.T;
  opt.snapshot_times = c.snapshot_times;
  const auto snaps = particle_run(std::move(state), opt);

  auto traj = out.open("trajectory.csv");
  write_trajectory_csv(traj, snaps);
  auto diag = out.open("diagnostics.csv");
  diag.precision(12);
  diag << "t,mean_velocity,velocity_variance,slow_fraction\n";
  for (const auto& s : snaps) {
    std::size_t slow = 0;
    for (double v : s.state.V) slow += std::abs(v) <= 0.5 ? 1 : 0;
    diag << s.t << ',' << mean_velocity(s.state) << ',' << velocity_variance(s.state) << ','
         << static_cast<double>(slow) / static_cast<double>(s.state.size()) << '\n';
    auto phi = out.open("phi_" + time_tag(s.t) + ".csv");
    write_csv(phi, s.phi);
  }
  extra.emplace_back("particles_sampled", std::to_string(c.particles));
  return RunStatus::ok;
}

inline VlasovTrajectory solve_vlasov(const ExperimentConfig& c, const PhaseDensity& rho0, bool keep_density) {
  VlasovRunOptions opt;
  opt.dt = c.dt;
  opt.T = c.T;
  opt.snapshot_times = c.snapshot_times;
  opt.store_density = keep_density;
  opt.outflow_tolerance = c.outflow_tolerance;
  return vlasov_run(rho0, vlasov_params(c), opt);
}

inline void write_vlasov_outputs(const ExperimentConfig& c, const VlasovTrajectory& traj, const RunOutput& out,
                                 Extra& extra) {
  auto diag = out.open("diagnostics.csv");
  diag.precision(12);
  diag << "t,mass,slow_fraction,velocity_spread\n";
  for (const auto& s : traj.snapshots) {
    auto m = out.open("moments_" + time_tag(s.t) + ".csv");
    write_moments_csv(m, s);
    if (s.rho) {
      diag << s.t << ',' << s.rho->mass() << ',' << slow_mass_fraction(*s.rho, 0.5) << ','
           << velocity_spread(*s.rho) << '\n';
      if (c.store_density) {
        auto d = out.open("density_" + time_tag(s.t) + ".csv");
        write_csv(d, *s.rho);
      }
    }
  }
  std::ostringstream mass;
  mass.precision(12);
  mass << traj.initial_mass;
  extra.emplace_back("initial_mass", mass.str());
  extra.emplace_back("substeps", std::to_string(traj.substeps));
  std::ostringstream outflow;
  outflow << traj.v_outflow;
  extra.emplace_back("velocity_boundary_outflow", outflow.str());
}

inline RunStatus run_vlasov(const ExperimentConfig& c, const RunOutput& out, Extra& extra) {
  const auto traj = solve_vlasov(c, make_phase_density(c), true);
  write_vlasov_outputs(c, traj, out, extra);
  return RunStatus::ok;
}

inline RunStatus run_euler(const ExperimentConfig& c, const RunOutput& out, Extra& extra) {
  EulerRunOptions opt;
  opt.T = c.T;
  opt.snapshot_times = c.snapshot_times;
  opt.dt_cap = c.dt_cap;
  opt.blowup_factor = c.blowup_factor;
  const auto traj = euler_run(make_euler_state(c), euler_params(c, c.params.epsilon), opt);

  auto diag = out.open("diagnostics.csv");
  diag.precision(12);
  diag << "t,mass,max_mu,max_speed\n";
  for (const auto& s : traj.snapshots) {
    auto os = out.open("snapshot_" + time_tag(s.t) + ".csv");
    write_snapshot_csv(os, s);
    EulerState st(s.mu.grid);
    st.mu = s.mu.values;
    st.Q = s.Q.values;
    diag << s.t << ',' << st.mass() << ',' << max_abs(st.mu) << ',' << max_speed_on_support(st) << '\n';
  }
  extra.emplace_back("euler_steps", std::to_string(traj.steps));
  if (traj.blowup) {
    auto os = out.open("blowup.txt");
    write_blowup_report(os, *traj.blowup);
    return RunStatus::blowup;
  }
  return RunStatus::ok;
}

inline RunStatus run_compare(const ExperimentConfig& c, const RunOutput& out, Extra& extra) {
  const auto rho0 = make_phase_density(c);
  const auto vlasov = solve_vlasov(c, rho0, false);
  write_vlasov_outputs(c, vlasov, out, extra);
  const auto ic = euler_ic_from_vlasov(rho0, c.grid.euler());

  auto euler = [&](double eps, double T, std::vector<double> times) {
    EulerRunOptions opt;
    opt.T = T;
    opt.snapshot_times = std::move(times);
    opt.dt_cap = c.dt_cap;
    opt.blowup_factor = c.blowup_factor;
    return euler_run(ic, euler_params(c, eps), opt);
  };

  RunStatus status = RunStatus::ok;
  if (!c.epsilons.empty()) {
    std::vector<ComparisonRecord> records;
    for (double eps : c.epsilons) {
      const auto traj = euler(eps, c.T, c.snapshot_times);
      for (const auto& es : traj.snapshots) {
        records.push_back(compare_snapshots(vlasov.at_time(es.t), es, eps));
        std::ostringstream name;
        name.precision(10);
        name << "euler_eps" << eps << '_' << time_tag(es.t) << ".csv";
        auto os = out.open(name.str());
        write_snapshot_csv(os, es);
      }
      if (traj.blowup) {
        std::ostringstream name;
        name.precision(10);
        name << "blowup_eps" << eps << ".txt";
        auto os = out.open(name.str());
        write_blowup_report(os, *traj.blowup);
        status = RunStatus::blowup;
      }
    }
    auto os = out.open("comparison.csv");
    write_comparison_csv(os, records);
  }

  if (!c.search_times.empty()) {
    EulerRunner runner = [&](double eps, double t) -> std::optional<EulerSnapshot> {
      auto traj = euler(eps, t, {t});
      if (traj.blowup) return std::nullopt;
      return traj.at_time(t);
    };
    auto table = out.open("epsilon_star.csv");
    table.precision(10);
    table << "t,epsilon_star,E0\n";
    for (double t : c.search_times) {
      EpsilonSearch s = c.search;
      s.time = t;
      const auto res = optimize_epsilon(s, vlasov, runner);
      table << t << ',' << res.epsilon_star << ',' << res.objective << '\n';
      auto probes = out.open("probes_" + time_tag(t) + ".csv");
      write_probe_csv(probes, res.probes);
    }
  }
  return status;
}

}  // namespace detail

/// Run one experiment. Solver errors propagate as exceptions; a detected
/// blow-up is a normal outcome reported as RunStatus::blowup.
inline RunStatus run_experiment(const ExperimentConfig& c) {
  const RunOutput out(c.output_dir);
  const auto start = std::chrono::steady_clock::now();
  detail::Extra extra;
  RunStatus status = RunStatus::ok;
  switch (c.scale) {
    case Scale::particle: status = detail::run_particles(c, out, extra); break;
    case Scale::vlasov: status = detail::run_vlasov(c, out, extra); break;
    case Scale::euler: status = detail::run_euler(c, out, extra); break;
    case Scale::compare: status = detail::run_compare(c, out, extra); break;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_header(out, c, status == RunStatus::ok ? "ok" : "blowup", wall, extra);
  return status;
}

}  // namespace chemoflock
