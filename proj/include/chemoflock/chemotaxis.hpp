#pragma once

// Chemoattractant equation  ∂_t φ = D ∂²_x φ − κ φ + source  on a periodic grid.
//
// The degradation term is removed by the substitution φ = e^{−κt} u, so the
// solver advances u with Crank–Nicolson in time and second-order centered
// differences in space:
//
//   (I − ½ dt D L) u^{k+1} = (I + ½ dt D L) u^k + ½ dt (e^{κ t_{k+1}} s^{k+1} + e^{κ t_k} s^k)
//
// with L the periodic second-difference operator. Each step is one cyclic
// tridiagonal solve.

#include <chemoflock/grid.hpp>

#include <cmath>
#include <span>
#include <vector>

namespace chemoflock {

struct ChemoParams {
  double D = 0.0;      // diffusivity
  double kappa = 0.0;  // degradation rate
  double R = 0.0;      // production radius
  double eta = 0.0;    // chemotactic sensitivity; 0 disables the coupling

  void validate() const {
    if (D < 0.0 || kappa < 0.0 || R < 0.0 || eta < 0.0)
      throw Error("ChemoParams: D, kappa, R and eta must be nonnegative");
  }
};

/// Solve the periodic system  a_i x_{i-1} + b_i x_i + c_i x_{i+1} = d_i  (indices mod n)
/// by Sherman–Morrison on top of the Thomas algorithm.
inline std::vector<double> solve_cyclic_tridiagonal(std::span<const double> a, std::span<const double> b,
                                                    std::span<const double> c, std::span<const double> d) {
  const std::size_t n = b.size();
  if (n < 3 || a.size() != n || c.size() != n || d.size() != n)
    throw Error("solve_cyclic_tridiagonal: need n >= 3 and equal lengths");

  auto thomas = [n](const std::vector<double>& lo, const std::vector<double>& diag,
                    const std::vector<double>& up, std::vector<double> rhs) {
    std::vector<double> cp(n);
    double denom = diag[0];
    if (denom == 0.0) throw Error("solve_cyclic_tridiagonal: singular system");
    cp[0] = up[0] / denom;
    rhs[0] /= denom;
    for (std::size_t i = 1; i < n; ++i) {
      denom = diag[i] - lo[i] * cp[i - 1];
      if (denom == 0.0) throw Error("solve_cyclic_tridiagonal: singular system");
      cp[i] = up[i] / denom;
      rhs[i] = (rhs[i] - lo[i] * rhs[i - 1]) / denom;
    }
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= cp[i] * rhs[i + 1];
    return rhs;
  };

  // A = T + u vᵀ with u = (γ, 0, …, 0, c_{n-1}), v = (1, 0, …, 0, a_0/γ).
  const double gamma = -b[0];
  std::vector<double> lo(a.begin(), a.end()), diag(b.begin(), b.end()), up(c.begin(), c.end());
  diag[0] -= gamma;
  diag[n - 1] -= c[n - 1] * a[0] / gamma;
  lo[0] = 0.0;
  up[n - 1] = 0.0;

  std::vector<double> rhs(d.begin(), d.end());
  std::vector<double> u(n, 0.0);
  u[0] = gamma;
  u[n - 1] = c[n - 1];

  const auto y = thomas(lo, diag, up, rhs);
  const auto z = thomas(lo, diag, up, u);
  const double vy = y[0] + a[0] / gamma * y[n - 1];
  const double vz = z[0] + a[0] / gamma * z[n - 1];
  if (1.0 + vz == 0.0) throw Error("solve_cyclic_tridiagonal: singular system");
  const double factor = vy / (1.0 + vz);

  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = y[i] - factor * z[i];
  return x;
}

/// Transformed chemical field; the physical concentration is φ = e^{−κt} u.
struct ChemoState {
  SpatialGrid grid;
  std::vector<double> u;
  double t = 0.0;
  double kappa = 0.0;

  ChemoState() = default;
  ChemoState(SpatialGrid g, double degradation) : grid(g), u(g.nodes(), 0.0), kappa(degradation) {}

  ScalarField phi() const {
    ScalarField out(grid, u);
    const double decay = std::exp(-kappa * t);
    for (double& v : out.values) v *= decay;
    return out;
  }
};

/// Node value = scale · #{j : |x_l − x_j| ≤ R} with periodic distance;
/// scale = 1/N when `normalize`, else 1.
inline ScalarField source_from_particles(std::span<const double> positions, const SpatialGrid& grid, double R,
                                         bool normalize = true) {
  if (positions.empty()) throw Error("source_from_particles: need at least one particle");
  if (R < 0.0) throw Error("source_from_particles: R must be nonnegative");
  const double scale = normalize ? 1.0 / static_cast<double>(positions.size()) : 1.0;
  const double L = grid.length();
  const double dx = grid.dx();
  const std::size_t n = grid.n_x;
  ScalarField out(grid);
  // Slightly widened window so particles exactly R away from a node count.
  const double reach = R * (1.0 + 1e-12) + 1e-12 * dx;
  for (double xp : positions) {
    const double xw = wrap_position(grid, xp);
    const double s = (xw - grid.x_min) / dx;
    const auto lo = static_cast<long long>(std::ceil(s - reach / dx));
    const auto hi = static_cast<long long>(std::floor(s + reach / dx));
    for (long long k = lo; k <= hi; ++k) {
      if (k - lo >= static_cast<long long>(n)) break;  // window covers the period
      const auto node = static_cast<std::size_t>(((k % static_cast<long long>(n)) + n) % n);
      double dist = std::abs(grid.x(node) - xw);
      dist = std::min(dist, L - dist);
      if (dist <= reach) out[node] += scale;
    }
  }
  out[n] = out[0];
  return out;
}

/// Window mass ∫_{x−R}^{x+R} f(y) dy of a density (Vlasov ν₀ or Euler μ).
inline ScalarField source_from_density(const ScalarField& density, double R) {
  return window_sums(density, R, Boundary::periodic);
}

/// One Crank–Nicolson step of the transformed equation; sources are the
/// physical (untransformed) production rates at t_k and t_k + dt.
inline ChemoState chemo_step(const ChemoState& state, const ScalarField& source_k, const ScalarField& source_k1,
                             double dt, const ChemoParams& params) {
  if (!(dt > 0.0)) throw Error("chemo_step: dt must be positive");
  require_same_grid(source_k, source_k1, "chemo_step");
  if (!(source_k.grid == state.grid)) throw Error("chemo_step: source grid differs from chemo grid");

  const std::size_t n = state.grid.n_x;
  const double dx = state.grid.dx();
  const double r = 0.5 * dt * params.D / (dx * dx);
  const double w0 = 0.5 * dt * std::exp(state.kappa * state.t);
  const double w1 = 0.5 * dt * std::exp(state.kappa * (state.t + dt));

  std::vector<double> rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double left = state.u[(i + n - 1) % n];
    const double right = state.u[(i + 1) % n];
    rhs[i] = state.u[i] + r * (left - 2.0 * state.u[i] + right) + w1 * source_k1[i] + w0 * source_k[i];
  }

  ChemoState next = state;
  next.t = state.t + dt;
  if (r == 0.0) {
    std::copy(rhs.begin(), rhs.end(), next.u.begin());
  } else {
    std::vector<double> off(n, -r), diag(n, 1.0 + 2.0 * r);
    auto sol = solve_cyclic_tridiagonal(off, diag, off, rhs);
    std::copy(sol.begin(), sol.end(), next.u.begin());
  }
  next.u[n] = next.u[0];
  return next;
}

inline ScalarField chemo_gradient(const ChemoState& state) {
  return central_gradient(state.phi(), Boundary::periodic);
}

}  // namespace chemoflock
