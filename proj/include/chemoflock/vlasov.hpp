#pragma once

// Kinetic level: ∂_t ρ + v ∂_x ρ + ∂_v(a ρ) = 0 on a periodic-in-x phase grid,
// with characteristic acceleration
//
//   a(x, v) = ∫∫ (w − v) K(x − y) ρ(y, w) dy dw + η ∂_x ψ(x) − α v,
//
// advanced by the first-order upwind (donor-cell) scheme. Because the
// alignment part is linear in v it factorizes through the moments:
// a_ij = A_i − v_j B_i with A = K * ν₁ and B = K * ν₀.

#include <chemoflock/chemotaxis.hpp>
#include <chemoflock/grid.hpp>
#include <chemoflock/particles.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

namespace chemoflock {

struct VlasovParams {
  std::optional<AlignmentKernel> kernel;
  ChemoParams chemo;
  double alpha = 0.0;

  void validate() const {
    if (kernel) kernel->validate();
    chemo.validate();
    if (alpha < 0.0) throw Error("VlasovParams: alpha must be nonnegative");
  }
};

struct AccelField {
  PhaseGrid grid;
  ScalarField A;
  ScalarField B;
  ScalarField grad_psi;
  double eta = 0.0;
  double alpha = 0.0;

  /// a_ij = A_i − v_j B_i + η ∂_xψ_i − α v_j
  double at(std::size_t i, std::size_t j) const {
    const double v = grid.v(j);
    return A[i] - v * B[i] + eta * grad_psi[i] - alpha * v;
  }

  /// a is affine in v, so the extremes sit at v_min or v_max.
  double max_abs() const {
    double m = 0.0;
    for (std::size_t i = 0; i < grid.x_nodes(); ++i)
      m = std::max({m, std::abs(at(i, 0)), std::abs(at(i, grid.n_v))});
    return m;
  }
};

inline ScalarField moment0(const PhaseDensity& rho) {
  const auto& g = rho.grid;
  ScalarField out(g.spatial);
  for (std::size_t i = 0; i < g.x_nodes(); ++i) {
    const double* row = rho.values.data() + i * g.v_nodes();
    double s = 0.0;
#pragma omp simd reduction(+ : s)
    for (std::size_t j = 0; j < g.v_nodes(); ++j) s += row[j];
    out[i] = s * g.dv();
  }
  return out;
}

inline ScalarField moment1(const PhaseDensity& rho) {
  const auto& g = rho.grid;
  std::vector<double> vel(g.v_nodes());
  for (std::size_t j = 0; j < vel.size(); ++j) vel[j] = g.v(j);
  ScalarField out(g.spatial);
  for (std::size_t i = 0; i < g.x_nodes(); ++i) {
    const double* row = rho.values.data() + i * g.v_nodes();
    double s = 0.0;
#pragma omp simd reduction(+ : s)
    for (std::size_t j = 0; j < vel.size(); ++j) s += vel[j] * row[j];
    out[i] = s * g.dv();
  }
  return out;
}

/// x-marginal mass per velocity node, ∫ρ dx.
inline std::vector<double> velocity_marginal(const PhaseDensity& rho) {
  const auto& g = rho.grid;
  std::vector<double> out(g.v_nodes(), 0.0);
  for (std::size_t i = 0; i < g.spatial.n_x; ++i) {
    const auto row = rho.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) out[j] += row[j] * g.dx();
  }
  return out;
}

/// Fraction of the total mass with |v| ≤ vcut.
inline double slow_mass_fraction(const PhaseDensity& rho, double vcut) {
  const auto marg = velocity_marginal(rho);
  double inside = 0.0, total = 0.0;
  for (std::size_t j = 0; j < marg.size(); ++j) {
    total += marg[j];
    if (std::abs(rho.grid.v(j)) <= vcut + 1e-12) inside += marg[j];
  }
  return total > 0.0 ? inside / total : 0.0;
}

/// sqrt(∫(v − ν₁/ν₀)² ρ / mass): spread of velocities around the local mean.
inline double velocity_spread(const PhaseDensity& rho) {
  const auto& g = rho.grid;
  const auto nu0 = moment0(rho);
  const auto nu1 = moment1(rho);
  double acc = 0.0, mass = 0.0;
  for (std::size_t i = 0; i < g.spatial.n_x; ++i) {
    if (!(nu0[i] > 0.0)) continue;
    const double u = nu1[i] / nu0[i];
    const auto row = rho.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      const double dv = g.v(j) - u;
      acc += dv * dv * row[j];
      mass += row[j];
    }
  }
  return mass > 0.0 ? std::sqrt(acc / mass) : 0.0;
}

/// A_i = dx Σ_m K(x_i − x_m) ν₁_m,  B_i = dx Σ_m K(x_i − x_m) ν₀_m, over one period of m.
inline std::pair<ScalarField, ScalarField> alignment_from_moments(const ScalarField& nu0, const ScalarField& nu1,
                                                                  const AlignmentKernel& kernel) {
  require_same_grid(nu0, nu1, "alignment_from_moments");
  const auto& g = nu0.grid;
  const std::size_t n = g.n_x;
  const double dx = g.dx();

  // kfull[n − 1 + d] = K(d dx) for d in (−n, n); with reversed moments both
  // indices run forward, which keeps the inner loop vectorizable.
  std::vector<double> kfull(2 * n - 1);
  for (std::size_t k = 0; k < kfull.size(); ++k) {
    const double d = (static_cast<double>(k) - static_cast<double>(n - 1)) * dx;
    kfull[k] = cs_weight(kernel, d);
  }
  std::vector<double> r0(n), r1(n);
  for (std::size_t m = 0; m < n; ++m) {
    r0[m] = nu0[n - 1 - m];
    r1[m] = nu1[n - 1 - m];
  }

  ScalarField A(g), B(g);
  for (std::size_t i = 0; i < n; ++i) {
    const double* k = kfull.data() + i;  // k[m'] = K((i − (n − 1 − m')) dx)
    const double* p0 = r0.data();
    const double* p1 = r1.data();
    const auto len = static_cast<std::ptrdiff_t>(n);
    double sa = 0.0, sb = 0.0;
#pragma omp simd reduction(+ : sa, sb)
    for (std::ptrdiff_t mp = 0; mp < len; ++mp) {
      sa += k[mp] * p1[mp];
      sb += k[mp] * p0[mp];
    }
    A[i] = sa * dx;
    B[i] = sb * dx;
  }
  A[n] = A[0];
  B[n] = B[0];
  return {std::move(A), std::move(B)};
}

inline std::pair<ScalarField, ScalarField> alignment_field(const PhaseDensity& rho, const AlignmentKernel& kernel) {
  return alignment_from_moments(moment0(rho), moment1(rho), kernel);
}

inline AccelField build_accel(const PhaseGrid& grid, const ScalarField& nu0, const ScalarField& nu1,
                              const ChemoState& psi, const VlasovParams& params) {
  const auto& sg = grid.spatial;
  AccelField acc{grid, ScalarField(sg), ScalarField(sg), ScalarField(sg), params.chemo.eta, params.alpha};
  if (params.kernel) std::tie(acc.A, acc.B) = alignment_from_moments(nu0, nu1, *params.kernel);
  if (params.chemo.eta != 0.0) {
    if (!(psi.grid == sg)) throw Error("build_accel: chemo grid differs from phase x-grid");
    acc.grad_psi = chemo_gradient(psi);
  }
  return acc;
}

inline AccelField build_accel(const PhaseDensity& rho, const ChemoState& psi, const VlasovParams& params) {
  return build_accel(rho.grid, moment0(rho), moment1(rho), psi, params);
}

/// 1 / (|v|_max/dx + max|a|/dv); +inf when nothing moves.
inline double cfl_max_dt(const PhaseGrid& grid, const AccelField& accel) {
  const double rate = grid.abs_v_max() / grid.dx() + accel.max_abs() / grid.dv();
  return rate > 0.0 ? 1.0 / rate : std::numeric_limits<double>::infinity();
}

/// Mass leaving through the v-boundaries during one step of size dt.
inline double v_boundary_outflow(const PhaseDensity& rho, const AccelField& accel, double dt) {
  const auto& g = rho.grid;
  double out = 0.0;
  for (std::size_t i = 0; i < g.spatial.n_x; ++i) {
    out += std::max(-accel.at(i, 0), 0.0) * rho.at(i, 0);
    out += std::max(accel.at(i, g.n_v), 0.0) * rho.at(i, g.n_v);
  }
  return out * dt * g.dx();
}

/// One explicit donor-cell step: transport in x at speed v_j (periodic),
/// in v with flux a ρ (no inflow through v_min / v_max). Writes into `next`,
/// which must not alias `rho`. When given, `nu0` and `nu1` receive the
/// moments of `next`.
inline void vlasov_step_into(const PhaseDensity& rho, const AccelField& accel, double dt, PhaseDensity& next,
                             ScalarField* nu0 = nullptr, ScalarField* nu1 = nullptr) {
  const auto& g = rho.grid;
  if (!(accel.grid == g)) throw Error("vlasov_step: acceleration grid mismatch");
  const double dt_max = cfl_max_dt(g, accel);
  if (!(dt > 0.0) || dt > dt_max * (1.0 + 1e-12))
    throw Error("vlasov_step: dt = " + std::to_string(dt) + " violates CFL bound " + std::to_string(dt_max));
  if (&next == &rho) throw Error("vlasov_step: output aliases input");

  const std::size_t n = g.spatial.n_x;
  const std::size_t nv = g.v_nodes();
  const double lx = dt / g.dx();
  const double lv = dt / g.dv();
  next.grid = g;
  next.values.resize(rho.values.size());

  // Padded by one zero ghost on each side of the velocity range.
  std::vector<double> vel(nv + 2), vplus(nv), vminus(nv), padded(nv + 2, 0.0);
  for (std::size_t j = 0; j < nv; ++j) {
    vel[j + 1] = g.v(j);
    vplus[j] = std::max(vel[j + 1], 0.0);
    vminus[j] = std::min(vel[j + 1], 0.0);
  }
  vel[0] = g.v_min - g.dv();
  vel[nv + 1] = g.v_max + g.dv();

  double lowest = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* cur = rho.values.data() + i * nv;
    const double* prev = rho.values.data() + (i == 0 ? n - 1 : i - 1) * nv;
    const double* nxt = rho.values.data() + (i + 1 == n ? 0 : i + 1) * nv;
    double* out = next.values.data() + i * nv;
    std::copy_n(cur, nv, padded.data() + 1);
    const double* r = padded.data();

    const double p = accel.A[i] + accel.eta * accel.grad_psi[i];
    const double q = accel.B[i] + accel.alpha;
    double s0 = 0.0, s1 = 0.0;
#pragma omp simd reduction(min : lowest) reduction(+ : s0, s1)
    for (std::size_t j = 0; j < nv; ++j) {
      // r[j], r[j+1], r[j+2] are nodes j-1, j, j+1.
      const double a_lo = p - q * vel[j];
      const double a_mid = p - q * vel[j + 1];
      const double a_hi = p - q * vel[j + 2];
      const double gain = std::max(a_lo, 0.0) * r[j] - std::min(a_hi, 0.0) * r[j + 2];
      const double vflux = gain - std::abs(a_mid) * r[j + 1];
      const double xflux = vplus[j] * (cur[j] - prev[j]) + vminus[j] * (nxt[j] - cur[j]);
      const double val = cur[j] - lx * xflux + lv * vflux;
      lowest = std::min(lowest, val);
      const double kept = val < 0.0 ? 0.0 : val;
      out[j] = kept;
      s0 += kept;
      s1 += vel[j + 1] * kept;
    }
    if (nu0) (*nu0)[i] = s0 * g.dv();
    if (nu1) (*nu1)[i] = s1 * g.dv();
  }
  if (nu0) (*nu0)[n] = (*nu0)[0];
  if (nu1) (*nu1)[n] = (*nu1)[0];
  if (lowest < -kNegativeTolerance)
    throw Error("vlasov_step: negative density " + std::to_string(lowest));
  std::copy_n(next.values.data(), nv, next.values.data() + n * nv);
}

inline PhaseDensity vlasov_step(const PhaseDensity& rho, const AccelField& accel, double dt) {
  PhaseDensity next;
  vlasov_step_into(rho, accel, dt, next);
  return next;
}

struct VlasovSnapshot {
  double t = 0.0;
  ScalarField nu0;
  ScalarField nu1;
  ScalarField psi;
  std::optional<PhaseDensity> rho;
};

struct VlasovRunOptions {
  double dt = 1e-3;
  double T = 1.0;
  std::vector<double> snapshot_times;
  bool store_density = false;
  /// Relative mass allowed to leave through the v-boundaries before the run fails.
  double outflow_tolerance = 1e-3;
};

struct VlasovTrajectory {
  std::vector<VlasovSnapshot> snapshots;
  double initial_mass = 0.0;
  double v_outflow = 0.0;
  std::size_t steps = 0;
  std::size_t substeps = 0;

  const VlasovSnapshot& at_time(double t, double tol = 1e-9) const {
    for (const auto& s : snapshots)
      if (std::abs(s.t - t) <= tol * std::max(1.0, std::abs(t))) return s;
    throw Error("VlasovTrajectory: no snapshot at t = " + std::to_string(t));
  }
};

/// Alternate accel build (ψ^k), upwind step(s) and a Crank–Nicolson chemical
/// step sourced by the window mass of ν₀^k and ν₀^{k+1}. When the preset dt
/// exceeds the CFL bound the step is split into equal substeps.
inline VlasovTrajectory vlasov_run(PhaseDensity rho, const VlasovParams& params, const VlasovRunOptions& opt) {
  params.validate();
  const FlushDenormals ftz;
  const std::size_t steps = steps_for(opt.T, opt.dt, "vlasov_run");
  std::vector<std::size_t> marks;
  for (double ts : opt.snapshot_times) {
    if (ts < 0.0 || ts > opt.T * (1.0 + 1e-12)) throw Error("vlasov_run: snapshot time outside [0, T]");
    marks.push_back(static_cast<std::size_t>(std::llround(ts / opt.dt)));
  }

  const auto& sg = rho.grid.spatial;
  ChemoState psi(sg, params.chemo.kappa);
  const bool chemo_on = params.chemo.eta > 0.0;

  VlasovTrajectory traj;
  traj.initial_mass = rho.mass();
  auto nu0 = moment0(rho);
  auto nu1 = moment1(rho);
  auto record = [&](std::size_t k) {
    if (std::find(marks.begin(), marks.end(), k) == marks.end()) return;
    VlasovSnapshot s{static_cast<double>(k) * opt.dt, nu0, nu1, psi.phi(), std::nullopt};
    if (opt.store_density) s.rho = rho;
    traj.snapshots.push_back(std::move(s));
  };

  ScalarField src = chemo_on ? source_from_density(nu0, params.chemo.R) : ScalarField(sg);
  PhaseDensity scratch(rho.grid);
  record(0);
  for (std::size_t k = 1; k <= steps; ++k) {
    // Split the step only when the CFL bound demands it.
    double remaining = opt.dt;
    for (bool first = true; remaining > 1e-12 * opt.dt; first = false) {
      const auto accel = build_accel(rho.grid, nu0, nu1, psi, params);
      const double dt_max = cfl_max_dt(rho.grid, accel);
      double h = remaining;
      if (h > dt_max) {
        h = first ? remaining / std::ceil(remaining / dt_max) : std::min(remaining, dt_max);
        if (h > dt_max) h = dt_max;
      }
      traj.v_outflow += v_boundary_outflow(rho, accel, h);
      vlasov_step_into(rho, accel, h, scratch, &nu0, &nu1);
      std::swap(rho, scratch);
      remaining -= h;
      ++traj.substeps;
    }
    if (traj.v_outflow > opt.outflow_tolerance * traj.initial_mass)
      throw Error("vlasov_run: mass " + std::to_string(traj.v_outflow) +
                  " left through the velocity boundary; enlarge [v_min, v_max]");

    if (chemo_on) {
      ScalarField src1 = source_from_density(nu0, params.chemo.R);
      psi = chemo_step(psi, src, src1, opt.dt, params.chemo);
      src = std::move(src1);
    } else {
      psi.t += opt.dt;
    }
    ++traj.steps;
    record(k);
  }
  return traj;
}

inline void write_moments_csv(std::ostream& os, const VlasovSnapshot& s) {
  const auto old = os.precision(12);
  os << "x,nu0,nu1\n";
  for (std::size_t i = 0; i < s.nu0.size(); ++i)
    os << s.nu0.grid.x(i) << ',' << s.nu0[i] << ',' << s.nu1[i] << '\n';
  os.precision(old);
}

}  // namespace chemoflock
