#pragma once

// Named initial data used by the experiment presets.

#include <chemoflock/euler.hpp>
#include <chemoflock/grid.hpp>

#include <cmath>
#include <numbers>

namespace chemoflock {

/// Two opposite-velocity Gaussian bumps centered at x = 0:
///   scale/(2π σx σv) e^{−x²/2σx²} (e^{−(v+v0)²/2σv²} + e^{−(v−v0)²/2σv²}).
/// scale = 1/2 gives a probability density.
struct TwoBumpV {
  double v0 = 3.5;
  double sigma_x = std::sqrt(0.1);
  double sigma_v = std::sqrt(0.5);
  double scale = 0.5;

  double operator()(double x, double v) const {
    const double pre = scale / (2.0 * std::numbers::pi * sigma_x * sigma_v);
    const double gx = std::exp(-x * x / (2.0 * sigma_x * sigma_x));
    const double s2 = 2.0 * sigma_v * sigma_v;
    return pre * gx * (std::exp(-(v + v0) * (v + v0) / s2) + std::exp(-(v - v0) * (v - v0) / s2));
  }
};

/// Single Gaussian in (x, v), nearly monokinetic for small σv.
struct MonokineticGauss {
  double x0 = -2.0;
  double v0 = 1.5;
  double sigma_x = std::sqrt(0.2);
  double sigma_v = std::sqrt(0.001);

  double operator()(double x, double v) const {
    const double pre = 1.0 / (2.0 * std::numbers::pi * sigma_x * sigma_v);
    const double ex = (x - x0) * (x - x0) / (2.0 * sigma_x * sigma_x);
    const double ev = (v - v0) * (v - v0) / (2.0 * sigma_v * sigma_v);
    return pre * std::exp(-ex - ev);
  }
};

/// Two Gaussian bumps at (x1, v1) and (x2, v2) with prefactor
/// scale / sqrt(2π σx σv).
struct TwoBumpXV {
  double x1 = -2.0, v1 = 1.5;
  double x2 = 2.0, v2 = -2.5;
  double sigma_x = std::sqrt(0.2);
  double sigma_v = std::sqrt(0.5);
  double scale = 1.0;

  double operator()(double x, double v) const {
    const double pre = scale / std::sqrt(2.0 * std::numbers::pi * sigma_x * sigma_v);
    const double sx = 2.0 * sigma_x * sigma_x;
    const double sv = 2.0 * sigma_v * sigma_v;
    auto bump = [&](double xc, double vc) {
      return std::exp(-(x - xc) * (x - xc) / sx - (v - vc) * (v - vc) / sv);
    };
    return pre * (bump(x1, v1) + bump(x2, v2));
  }
};

/// μ⁰ = c1 cos(πx/1.5), u⁰ = −c2 sin(πx/1.5) on |x| ≤ 0.75, zero outside.
/// c1 = π/3 makes ∫μ⁰ = 1.
struct CosineDensity {
  double c1 = std::numbers::pi / 3.0;
  double c2 = 0.2;

  EulerState make(const SpatialGrid& grid) const {
    EulerState s(grid);
    for (std::size_t i = 0; i < grid.nodes(); ++i) {
      const double x = grid.x(i);
      if (std::abs(x) > 0.75) continue;
      const double arg = std::numbers::pi * x / 1.5;
      const double mu = std::max(c1 * std::cos(arg), 0.0);
      s.mu[i] = mu;
      s.Q[i] = mu * (-c2 * std::sin(arg));
    }
    s.enforce_boundary();
    return s;
  }
};

}  // namespace chemoflock
