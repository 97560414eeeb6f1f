#pragma once

// Hydrodynamic level with optional isentropic pressure ε μ^p:
//
//   ∂_t μ + ∂_x Q = 0
//   ∂_t Q + ∂_x(Q²/μ + ε μ^p) = μ I[μ, u] + η μ ∂_x ψ − α Q
//
// advanced by a two-velocity BGK relaxation scheme: Maxwellians
// f_{1,2} = ½(W ± A(W)/λ) are transported upwind at ±λ, recombined, then the
// source is added (alignment and chemotaxis explicit, damping implicit).
// Boundary nodes are held at W = 0.

#include <chemoflock/chemotaxis.hpp>
#include <chemoflock/grid.hpp>
#include <chemoflock/particles.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace chemoflock {

inline constexpr double kDensityFloor = 1e-12;
inline constexpr double kMinWaveSpeed = 1e-8;
inline constexpr double kEulerCfl = 0.9;

struct EulerParams {
  std::optional<AlignmentKernel> kernel;
  ChemoParams chemo;
  double alpha = 0.0;
  double epsilon = 0.0;
  double p = 2.0;

  void validate() const {
    if (kernel) kernel->validate();
    chemo.validate();
    if (alpha < 0.0) throw Error("EulerParams: alpha must be nonnegative");
    if (epsilon < 0.0) throw Error("EulerParams: epsilon must be nonnegative");
    if (!(p > 1.0)) throw Error("EulerParams: p must exceed 1");
  }
};

struct EulerState {
  SpatialGrid grid;
  std::vector<double> mu;
  std::vector<double> Q;
  double t = 0.0;

  EulerState() = default;
  explicit EulerState(SpatialGrid g) : grid(g), mu(g.nodes(), 0.0), Q(g.nodes(), 0.0) {}

  double velocity(std::size_t i) const { return mu[i] > kDensityFloor ? Q[i] / mu[i] : 0.0; }
  ScalarField density() const { return ScalarField(grid, mu); }
  ScalarField momentum() const { return ScalarField(grid, Q); }
  double mass() const { return integrate(density()); }
  double total_momentum() const { return integrate(momentum()); }

  void enforce_boundary() {
    mu.front() = mu.back() = 0.0;
    Q.front() = Q.back() = 0.0;
  }
};

/// Flux contribution ε μ^p.
inline double pressure(double mu, const EulerParams& params) {
  if (mu < -kNegativeTolerance) throw Error("pressure: negative density " + std::to_string(mu));
  if (mu <= 0.0 || params.epsilon == 0.0) return 0.0;
  return params.epsilon * std::pow(mu, params.p);
}

/// max(λ_min, max_i |u_i| + sqrt(ε p μ_i^{p−1})) over nodes carrying mass.
inline double max_wave_speed(const EulerState& state, const EulerParams& params) {
  double lambda = kMinWaveSpeed;
  for (std::size_t i = 0; i < state.grid.nodes(); ++i) {
    const double m = state.mu[i];
    if (!(m > kDensityFloor)) continue;
    double c = 0.0;
    if (params.epsilon > 0.0) c = std::sqrt(params.epsilon * params.p * std::pow(m, params.p - 1.0));
    lambda = std::max(lambda, std::abs(state.Q[i] / m) + c);
  }
  return lambda;
}

/// I_i = dx Σ_m (u_m − u_i) K(x_i − x_m) μ_m.
inline ScalarField alignment_integral(const EulerState& state, const AlignmentKernel& kernel) {
  const auto& g = state.grid;
  const std::size_t n = g.nodes();
  const double dx = g.dx();
  std::vector<double> u(n), kern(n);
  for (std::size_t i = 0; i < n; ++i) u[i] = state.velocity(i);
  for (std::size_t d = 0; d < n; ++d) kern[d] = cs_weight(kernel, static_cast<double>(d) * dx);

  ScalarField out(g);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
      const std::size_t d = m > i ? m - i : i - m;
      s += (u[m] - u[i]) * kern[d] * state.mu[m];
    }
    out[i] = s * dx;
  }
  return out;
}

class BlowUpError : public Error {
public:
  BlowUpError(double time, double max_mu, std::string reason)
      : Error("blow-up at t = " + std::to_string(time) + ": " + reason), time_(time), max_mu_(max_mu),
        reason_(std::move(reason)) {}
  double time() const { return time_; }
  double max_mu() const { return max_mu_; }
  const std::string& reason() const { return reason_; }

private:
  double time_;
  double max_mu_;
  std::string reason_;
};

struct EulerStepResult {
  EulerState state;
  double dt = 0.0;
};

/// One relaxation step; dt = min(dt_cap, 0.9 dx / λ). `psi` may be null when
/// the chemotactic coupling is off.
inline EulerStepResult euler_step(const EulerState& state, const ChemoState* psi, const EulerParams& params,
                                  double dt_cap) {
  const auto& g = state.grid;
  const std::size_t n = g.nodes();
  const double dx = g.dx();

  const double lambda = max_wave_speed(state, params);
  if (!std::isfinite(lambda)) throw BlowUpError(state.t, max_abs(state.mu), "non-finite wave speed");
  const double dt = std::min(dt_cap, kEulerCfl * dx / lambda);
  if (!(dt > 0.0)) throw Error("euler_step: dt_cap must be positive");

  // Maxwellian streams for (μ, Q).
  std::vector<double> f1m(n), f1q(n), f2m(n), f2q(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double m = state.mu[i];
    // Below the density floor the velocity is undefined; treat the node as at rest.
    const double q = m > kDensityFloor ? state.Q[i] : 0.0;
    const double flux_q = (m > kDensityFloor ? q * q / m : 0.0) + pressure(std::max(m, 0.0), params);
    f1m[i] = 0.5 * (m + q / lambda);
    f2m[i] = 0.5 * (m - q / lambda);
    f1q[i] = 0.5 * (q + flux_q / lambda);
    f2q[i] = 0.5 * (q - flux_q / lambda);
  }

  ScalarField source(g);
  if (params.kernel) {
    const auto I = alignment_integral(state, *params.kernel);
    for (std::size_t i = 0; i < n; ++i) source[i] += state.mu[i] * I[i];
  }
  if (params.chemo.eta != 0.0) {
    if (psi == nullptr) throw Error("euler_step: chemotaxis enabled but no chemical state given");
    const auto grad = chemo_gradient(*psi);
    for (std::size_t i = 0; i < n; ++i) source[i] += params.chemo.eta * state.mu[i] * grad[i];
  }

  const double c = dt * lambda / dx;
  EulerState next(g);
  next.t = state.t + dt;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    // +λ stream takes from the left, −λ stream from the right.
    const double m1 = f1m[i] - c * (f1m[i] - f1m[i - 1]);
    const double q1 = f1q[i] - c * (f1q[i] - f1q[i - 1]);
    const double m2 = f2m[i] + c * (f2m[i + 1] - f2m[i]);
    const double q2 = f2q[i] + c * (f2q[i + 1] - f2q[i]);
    next.mu[i] = m1 + m2;
    next.Q[i] = (q1 + q2 + dt * source[i]) / (1.0 + params.alpha * dt);
  }
  next.enforce_boundary();

  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(next.mu[i]) || !std::isfinite(next.Q[i]))
      throw BlowUpError(next.t, max_abs(state.mu), "non-finite field");
    if (next.mu[i] < 0.0) {
      if (next.mu[i] < -kNegativeTolerance)
        throw BlowUpError(next.t, max_abs(state.mu), "negative density " + std::to_string(next.mu[i]));
      next.mu[i] = 0.0;
    }
  }
  return {std::move(next), dt};
}

struct EulerSnapshot {
  double t = 0.0;
  ScalarField mu;
  ScalarField Q;
  ScalarField psi;
};

struct BlowUpReport {
  double time = 0.0;
  double max_mu = 0.0;
  std::string reason;
};

struct EulerRunOptions {
  double T = 1.0;
  std::vector<double> snapshot_times;
  /// Upper bound on every step (the CFL rule alone may allow more).
  double dt_cap = std::numeric_limits<double>::infinity();
  /// Declare blow-up once max μ exceeds this multiple of its initial maximum.
  double blowup_factor = 20.0;
};

struct EulerTrajectory {
  std::vector<EulerSnapshot> snapshots;
  std::optional<BlowUpReport> blowup;
  std::size_t steps = 0;
  double final_time = 0.0;
  EulerState final_state;

  const EulerSnapshot& at_time(double t, double tol = 1e-9) const {
    for (const auto& s : snapshots)
      if (std::abs(s.t - t) <= tol * std::max(1.0, std::abs(t))) return s;
    throw Error("EulerTrajectory: no snapshot at t = " + std::to_string(t));
  }
};

/// Couple euler_step with the chemical equation (source = window mass of μ).
/// Steps are shortened so that every requested snapshot time is hit exactly.
/// Blow-up ends the run and is returned as a report, not thrown.
inline EulerTrajectory euler_run(EulerState state, const EulerParams& params, const EulerRunOptions& opt) {
  params.validate();
  if (!(opt.T > 0.0)) throw Error("euler_run: T must be positive");
  std::vector<double> marks = opt.snapshot_times;
  std::sort(marks.begin(), marks.end());
  for (double m : marks)
    if (m < 0.0 || m > opt.T * (1.0 + 1e-12)) throw Error("euler_run: snapshot time outside [0, T]");

  state.enforce_boundary();
  const double mu0_max = max_abs(state.mu);
  const double threshold = opt.blowup_factor * std::max(mu0_max, kDensityFloor);
  const bool chemo_on = params.chemo.eta > 0.0;
  ChemoState psi(state.grid, params.chemo.kappa);
  psi.t = state.t;

  EulerTrajectory traj;
  std::size_t next_mark = 0;
  auto record = [&]() {
    while (next_mark < marks.size() && state.t >= marks[next_mark] - 1e-12 * std::max(1.0, marks[next_mark])) {
      traj.snapshots.push_back({marks[next_mark], state.density(), state.momentum(), psi.phi()});
      ++next_mark;
    }
  };

  ScalarField src = chemo_on ? source_from_density(state.density(), params.chemo.R) : ScalarField(state.grid);
  record();
  while (state.t < opt.T * (1.0 - 1e-14)) {
    double target = opt.T;
    if (next_mark < marks.size()) target = std::min(target, marks[next_mark]);
    const double cap = std::min(opt.dt_cap, target - state.t);
    try {
      auto step = euler_step(state, chemo_on ? &psi : nullptr, params, cap);
      // Land exactly on the target when the step reaches it.
      if (std::abs(step.state.t - target) <= 1e-12 * std::max(1.0, target)) step.state.t = target;
      if (chemo_on) {
        ScalarField src1 = source_from_density(step.state.density(), params.chemo.R);
        psi = chemo_step(psi, src, src1, step.dt, params.chemo);
        src = std::move(src1);
      }
      state = std::move(step.state);
      ++traj.steps;
      const double peak = max_abs(state.mu);
      if (peak > threshold)
        throw BlowUpError(state.t, peak, "density exceeded " + std::to_string(opt.blowup_factor) +
                                             " x its initial maximum");
    } catch (const BlowUpError& e) {
      traj.blowup = BlowUpReport{e.time(), e.max_mu(), e.reason()};
      break;
    }
    record();
  }
  traj.final_time = state.t;
  traj.final_state = std::move(state);
  return traj;
}

/// max |u| over nodes whose density is at least `rel` times the peak density.
inline double max_speed_on_support(const EulerState& s, double rel = 1e-3) {
  const double peak = max_abs(s.mu);
  double m = 0.0;
  for (std::size_t i = 0; i < s.grid.nodes(); ++i)
    if (s.mu[i] >= rel * peak && s.mu[i] > kDensityFloor) m = std::max(m, std::abs(s.velocity(i)));
  return m;
}

inline void write_snapshot_csv(std::ostream& os, const EulerSnapshot& s) {
  const auto old = os.precision(12);
  os << "x,mu,Q,psi\n";
  for (std::size_t i = 0; i < s.mu.size(); ++i)
    os << s.mu.grid.x(i) << ',' << s.mu[i] << ',' << s.Q[i] << ',' << s.psi[i] << '\n';
  os.precision(old);
}

inline void write_blowup_report(std::ostream& os, const BlowUpReport& r) {
  const auto old = os.precision(12);
  os << "time = " << r.time << "\nmax_mu = " << r.max_mu << "\nreason = " << r.reason << '\n';
  os.precision(old);
}

}  // namespace chemoflock
