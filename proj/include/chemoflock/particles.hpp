#pragma once

// Second-order agent system with Cucker–Smale alignment and chemotactic
// forcing. Velocities are advanced implicitly (dense N×N solve per step),
// positions explicitly with the new velocities.

#include <chemoflock/chemotaxis.hpp>
#include <chemoflock/grid.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace chemoflock {

struct AlignmentKernel {
  double beta = 0.5;
  double radius = 1.0;

  void validate() const {
    if (!(beta > 0.0)) throw Error("AlignmentKernel: beta must be positive");
    if (!(radius > 0.0)) throw Error("AlignmentKernel: radius must be positive");
  }
};

/// (1 + s²/R²)^(−β), in (0, 1].
inline double cs_weight(const AlignmentKernel& kernel, double separation) {
  const double r = separation / kernel.radius;
  return std::pow(1.0 + r * r, -kernel.beta);
}

struct ParticleState {
  std::vector<double> X;
  std::vector<double> V;
  double t = 0.0;

  std::size_t size() const { return X.size(); }
};

inline double mean_velocity(const ParticleState& s) {
  if (s.V.empty()) throw Error("mean_velocity: empty state");
  double sum = 0.0;
  for (double v : s.V) sum += v;
  return sum / static_cast<double>(s.V.size());
}

/// Population variance, two-pass.
inline double velocity_variance(const ParticleState& s) {
  const double m = mean_velocity(s);
  double sum = 0.0;
  for (double v : s.V) sum += (v - m) * (v - m);
  return sum / static_cast<double>(s.V.size());
}

/// Advance one step. `chemo_grad` is the gradient of φ^k on its grid (periodic);
/// pass nullopt (or eta = 0) for pure alignment.
inline ParticleState particle_step(const ParticleState& state, const std::optional<AlignmentKernel>& kernel,
                                   const std::optional<ScalarField>& chemo_grad, double eta, double dt) {
  if (!(dt > 0.0)) throw Error("particle_step: dt must be positive");
  const std::size_t n = state.size();
  if (n == 0 || state.V.size() != n) throw Error("particle_step: inconsistent particle state");

  Eigen::VectorXd rhs(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    double g = 0.0;
    if (chemo_grad && eta != 0.0) g = interpolate_at(*chemo_grad, state.X[i], Boundary::periodic);
    rhs(static_cast<Eigen::Index>(i)) = state.V[i] + eta * dt * g;
  }

  Eigen::VectorXd vnew;
  if (kernel) {
    // (I + dt M) V^{k+1} = rhs, M_ii = (1/N) Σ_{j≠i} w_ij, M_ij = −w_ij / N.
    const double c = dt / static_cast<double>(n);
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      for (std::size_t j = i + 1; j < n; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        const double w = c * cs_weight(*kernel, state.X[i] - state.X[j]);
        A(ii, jj) = -w;
        A(jj, ii) = -w;
        A(ii, ii) += w;
        A(jj, jj) += w;
      }
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    vnew = lu.solve(rhs);
  } else {
    vnew = rhs;
  }

  ParticleState next;
  next.X.resize(n);
  next.V.resize(n);
  next.t = state.t + dt;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = vnew(static_cast<Eigen::Index>(i));
    if (!std::isfinite(v)) throw Error("particle_step: non-finite velocity");
    next.V[i] = v;
    next.X[i] = state.X[i] + dt * v;
  }
  return next;
}

/// Draw N agents from a phase density: inverse CDF over cells, uniform jitter
/// inside the chosen cell. Deterministic for a given seed.
inline ParticleState sample_particles(const PhaseDensity& rho, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw Error("sample_particles: need at least one particle");
  const auto& g = rho.grid;
  const std::size_t nv = g.v_nodes();
  const std::size_t cells = g.spatial.n_x * nv;
  std::vector<double> cdf(cells);
  double acc = 0.0;
  for (std::size_t k = 0; k < cells; ++k) {
    acc += std::max(rho.values[k], 0.0);
    cdf[k] = acc;
  }
  if (!(acc > 0.0)) throw Error("sample_particles: density has no mass");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  ParticleState s;
  s.X.reserve(n);
  s.V.reserve(n);
  for (std::size_t p = 0; p < n; ++p) {
    const double target = uni(rng) * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
    if (it == cdf.end()) --it;
    const auto k = static_cast<std::size_t>(it - cdf.begin());
    const std::size_t i = k / nv;
    const std::size_t j = k % nv;
    const double jx = uni(rng) - 0.5;
    const double jv = uni(rng) - 0.5;
    s.X.push_back(g.x(i) + jx * g.dx());
    s.V.push_back(std::clamp(g.v(j) + jv * g.dv(), g.v_min, g.v_max));
  }
  return s;
}

struct ParticleRunOptions {
  std::optional<AlignmentKernel> kernel;
  ChemoParams chemo;
  SpatialGrid chemo_grid;
  bool normalize_source = true;
  double dt = 1e-3;
  double T = 1.0;
  std::vector<double> snapshot_times;
};

struct ParticleSnapshot {
  double t = 0.0;
  ParticleState state;
  ScalarField phi;
};

inline std::size_t steps_for(double T, double dt, const char* what) {
  if (!(dt > 0.0) || !(T > 0.0)) throw Error(std::string(what) + ": dt and T must be positive");
  const double ratio = T / dt;
  const auto steps = static_cast<std::size_t>(std::llround(ratio));
  if (std::abs(ratio - static_cast<double>(steps)) > 1e-6 * std::max(1.0, ratio))
    throw Error(std::string(what) + ": dt must divide T");
  return steps;
}

/// Integrate agents and chemical field together. The gradient felt at step k
/// comes from φ^k; the chemical step then uses the sources at X^k and X^{k+1}.
inline std::vector<ParticleSnapshot> particle_run(ParticleState state, const ParticleRunOptions& opt) {
  opt.chemo.validate();
  if (opt.kernel) opt.kernel->validate();
  const std::size_t steps = steps_for(opt.T, opt.dt, "particle_run");
  std::vector<std::size_t> marks;
  for (double ts : opt.snapshot_times) marks.push_back(static_cast<std::size_t>(std::llround(ts / opt.dt)));

  ChemoState psi(opt.chemo_grid, opt.chemo.kappa);
  psi.t = state.t;
  const bool chemo_on = opt.chemo.eta > 0.0;
  std::vector<ParticleSnapshot> out;
  auto record = [&](std::size_t k) {
    for (std::size_t m : marks)
      if (m == k) {
        out.push_back({state.t, state, psi.phi()});
        break;
      }
  };

  ScalarField src = chemo_on ? source_from_particles(state.X, opt.chemo_grid, opt.chemo.R, opt.normalize_source)
                             : ScalarField(opt.chemo_grid);
  record(0);
  for (std::size_t k = 1; k <= steps; ++k) {
    std::optional<ScalarField> grad;
    if (chemo_on) grad = chemo_gradient(psi);
    state = particle_step(state, opt.kernel, grad, opt.chemo.eta, opt.dt);
    if (chemo_on) {
      ScalarField src1 = source_from_particles(state.X, opt.chemo_grid, opt.chemo.R, opt.normalize_source);
      psi = chemo_step(psi, src, src1, opt.dt, opt.chemo);
      src = std::move(src1);
    } else {
      psi.t = state.t;
    }
    record(k);
  }
  return out;
}

inline void write_trajectory_csv(std::ostream& os, std::span<const ParticleSnapshot> snaps) {
  const auto old = os.precision(12);
  os << "t,i,x,v\n";
  for (const auto& s : snaps)
    for (std::size_t i = 0; i < s.state.size(); ++i)
      os << s.t << ',' << i << ',' << s.state.X[i] << ',' << s.state.V[i] << '\n';
  os.precision(old);
}

}  // namespace chemoflock
