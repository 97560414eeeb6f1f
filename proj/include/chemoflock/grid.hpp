#pragma once

// Uniform node-centered grids in x and (x, v), value-semantic grid functions,
// and the discrete calculus shared by every solver.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#if defined(__SSE2__)
#include <xmmintrin.h>
#endif

namespace chemoflock {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Values in (-kNegativeTolerance, 0) are rounding noise and get clamped to 0.
inline constexpr double kNegativeTolerance = 1e-12;

/// Flushes subnormal results and inputs to zero while alive (x86 only).
class FlushDenormals {
public:
#if defined(__SSE2__)
  FlushDenormals() : saved_(_mm_getcsr()) { _mm_setcsr(saved_ | 0x8040u); }
  ~FlushDenormals() { _mm_setcsr(saved_); }
#endif
  FlushDenormals(const FlushDenormals&) = delete;
  FlushDenormals& operator=(const FlushDenormals&) = delete;

private:
  unsigned saved_ = 0;
};

enum class Boundary { periodic, one_sided };

/// n_x cells, n_x + 1 nodes x_i = x_min + i dx covering [x_min, x_max].
/// For periodic data node n_x is the image of node 0.
struct SpatialGrid {
  double x_min = 0.0;
  double x_max = 1.0;
  std::size_t n_x = 2;

  SpatialGrid() = default;
  SpatialGrid(double lo, double hi, std::size_t cells) : x_min(lo), x_max(hi), n_x(cells) {
    if (!(hi > lo)) throw Error("SpatialGrid: x_max must exceed x_min");
    if (cells < 2) throw Error("SpatialGrid: need at least 2 cells");
  }

  /// Grid whose spacing is `spacing` (rounded to the nearest whole cell count).
  static SpatialGrid with_spacing(double lo, double hi, double spacing) {
    if (!(spacing > 0.0)) throw Error("SpatialGrid: spacing must be positive");
    auto cells = static_cast<std::size_t>(std::llround((hi - lo) / spacing));
    return SpatialGrid(lo, hi, cells);
  }

  double dx() const { return (x_max - x_min) / static_cast<double>(n_x); }
  std::size_t nodes() const { return n_x + 1; }
  double x(std::size_t i) const { return x_min + static_cast<double>(i) * dx(); }
  double length() const { return x_max - x_min; }

  friend bool operator==(const SpatialGrid&, const SpatialGrid&) = default;
};

struct PhaseGrid {
  SpatialGrid spatial;
  double v_min = -1.0;
  double v_max = 1.0;
  std::size_t n_v = 2;

  PhaseGrid() = default;
  PhaseGrid(SpatialGrid sx, double lo, double hi, std::size_t cells)
      : spatial(sx), v_min(lo), v_max(hi), n_v(cells) {
    if (!(hi > lo)) throw Error("PhaseGrid: v_max must exceed v_min");
    if (cells < 2) throw Error("PhaseGrid: need at least 2 velocity cells");
  }

  static PhaseGrid with_spacing(SpatialGrid sx, double lo, double hi, double spacing) {
    if (!(spacing > 0.0)) throw Error("PhaseGrid: spacing must be positive");
    auto cells = static_cast<std::size_t>(std::llround((hi - lo) / spacing));
    return PhaseGrid(sx, lo, hi, cells);
  }

  double dx() const { return spatial.dx(); }
  double dv() const { return (v_max - v_min) / static_cast<double>(n_v); }
  std::size_t x_nodes() const { return spatial.nodes(); }
  std::size_t v_nodes() const { return n_v + 1; }
  double x(std::size_t i) const { return spatial.x(i); }
  double v(std::size_t j) const { return v_min + static_cast<double>(j) * dv(); }
  double abs_v_max() const { return std::max(std::abs(v_min), std::abs(v_max)); }

  friend bool operator==(const PhaseGrid&, const PhaseGrid&) = default;
};

struct ScalarField {
  SpatialGrid grid;
  std::vector<double> values;

  ScalarField() = default;
  explicit ScalarField(SpatialGrid g, double fill = 0.0) : grid(g), values(g.nodes(), fill) {}
  ScalarField(SpatialGrid g, std::vector<double> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.nodes()) throw Error("ScalarField: value count does not match grid");
  }

  template <class F>
  static ScalarField from_function(SpatialGrid g, F&& f) {
    ScalarField out(g);
    for (std::size_t i = 0; i < g.nodes(); ++i) out.values[i] = f(g.x(i));
    return out;
  }

  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
  std::size_t size() const { return values.size(); }
};

/// Row-major in x: value(i, j) lives at i * v_nodes + j.
struct PhaseDensity {
  PhaseGrid grid;
  std::vector<double> values;

  PhaseDensity() = default;
  explicit PhaseDensity(PhaseGrid g, double fill = 0.0)
      : grid(g), values(g.x_nodes() * g.v_nodes(), fill) {}

  template <class F>
  static PhaseDensity from_function(PhaseGrid g, F&& f) {
    PhaseDensity out(g);
    for (std::size_t i = 0; i < g.x_nodes(); ++i)
      for (std::size_t j = 0; j < g.v_nodes(); ++j) out.at(i, j) = f(g.x(i), g.v(j));
    return out;
  }

  double& at(std::size_t i, std::size_t j) { return values[i * grid.v_nodes() + j]; }
  double at(std::size_t i, std::size_t j) const { return values[i * grid.v_nodes() + j]; }
  std::span<const double> row(std::size_t i) const {
    return {values.data() + i * grid.v_nodes(), grid.v_nodes()};
  }

  /// Σ ρ dx dv over one period in x (node n_x duplicates node 0).
  double mass() const {
    const std::size_t nv = grid.v_nodes();
    double s = 0.0;
    for (std::size_t i = 0; i < grid.spatial.n_x; ++i)
      for (std::size_t j = 0; j < nv; ++j) s += values[i * nv + j];
    return s * grid.dx() * grid.dv();
  }
};

/// Clamp rounding-level negatives; anything below -tol is an error.
inline void clamp_negatives(std::span<double> values, const char* what, double tol = kNegativeTolerance) {
  for (double& v : values) {
    if (v < 0.0) {
      if (v < -tol) throw Error(std::string(what) + ": negative value " + std::to_string(v));
      v = 0.0;
    }
  }
}

inline void require_same_grid(const ScalarField& a, const ScalarField& b, const char* what) {
  if (!(a.grid == b.grid) || a.size() != b.size())
    throw Error(std::string(what) + ": fields live on different grids");
}

/// Trapezoidal quadrature weight of node i (dx inside, dx/2 at the two ends).
/// On periodic data with f[n] == f[0] this is the plain one-period sum.
inline double trapezoid_weight(const SpatialGrid& g, std::size_t i) {
  return (i == 0 || i == g.n_x) ? 0.5 * g.dx() : g.dx();
}

inline double integrate(const ScalarField& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += trapezoid_weight(f.grid, i) * f[i];
  return s;
}

inline double l1_distance(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a, b, "l1_distance");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += trapezoid_weight(a.grid, i) * std::abs(a[i] - b[i]);
  return s;
}

inline ScalarField central_gradient(const ScalarField& f, Boundary boundary) {
  const auto& g = f.grid;
  const std::size_t n = g.n_x;
  if (n < 3) throw Error("central_gradient: need at least 3 cells");
  const double inv2dx = 0.5 / g.dx();
  ScalarField out(g);
  for (std::size_t i = 1; i < n; ++i) out[i] = (f[i + 1] - f[i - 1]) * inv2dx;
  if (boundary == Boundary::periodic) {
    out[0] = (f[1] - f[n - 1]) * inv2dx;
    out[n] = out[0];
  } else {
    out[0] = (f[1] - f[0]) / g.dx();
    out[n] = (f[n] - f[n - 1]) / g.dx();
  }
  return out;
}

/// Number of whole cells inside a closed window of radius R.
inline std::size_t window_half_width(const SpatialGrid& g, double radius) {
  if (radius < 0.0) throw Error("window: radius must be nonnegative");
  return static_cast<std::size_t>(std::floor(radius / g.dx() + 1e-9));
}

/// dx * Σ f_m over nodes with |x_m - x_i| <= R; periodic windows wrap over the
/// n_x distinct nodes, one-sided windows are clipped at the ends.
inline double window_sum(const ScalarField& f, std::size_t center, double radius, Boundary boundary) {
  const auto& g = f.grid;
  std::size_t w = window_half_width(g, radius);
  double s = 0.0;
  if (boundary == Boundary::periodic) {
    const std::size_t n = g.n_x;
    if (2 * w + 1 > n) w = (n - 1) / 2;
    const std::size_t c = center % n;
    for (std::size_t k = 0; k <= 2 * w; ++k) s += f[(c + n + k - w) % n];
  } else {
    const std::size_t lo = center > w ? center - w : 0;
    const std::size_t hi = std::min(g.n_x, center + w);
    for (std::size_t m = lo; m <= hi; ++m) s += f[m];
  }
  return s * g.dx();
}

/// window_sum at every node in O(n_x) via prefix sums.
inline ScalarField window_sums(const ScalarField& f, double radius, Boundary boundary) {
  const auto& g = f.grid;
  std::size_t w = window_half_width(g, radius);
  ScalarField out(g);
  const double dx = g.dx();
  if (boundary == Boundary::periodic) {
    const std::size_t n = g.n_x;
    if (2 * w + 1 > n) w = (n - 1) / 2;
    // Prefix over three copies of the period so every window is one contiguous range.
    std::vector<double> prefix(3 * n + 1, 0.0);
    for (std::size_t k = 0; k < 3 * n; ++k) prefix[k + 1] = prefix[k] + f[k % n];
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t lo = n + i - w;
      out[i] = (prefix[n + i + w + 1] - prefix[lo]) * dx;
    }
    out[n] = out[0];
  } else {
    std::vector<double> prefix(g.nodes() + 1, 0.0);
    for (std::size_t k = 0; k < g.nodes(); ++k) prefix[k + 1] = prefix[k] + f[k];
    for (std::size_t i = 0; i < g.nodes(); ++i) {
      const std::size_t lo = i > w ? i - w : 0;
      const std::size_t hi = std::min(g.n_x, i + w);
      out[i] = (prefix[hi + 1] - prefix[lo]) * dx;
    }
  }
  return out;
}

/// Map x into [x_min, x_max) by whole periods.
inline double wrap_position(const SpatialGrid& g, double x) {
  const double L = g.length();
  double r = std::fmod(x - g.x_min, L);
  if (r < 0.0) r += L;
  if (r >= L) r = 0.0;
  return g.x_min + r;
}

inline double interpolate_at(const ScalarField& f, double x, Boundary boundary) {
  const auto& g = f.grid;
  if (boundary == Boundary::periodic) {
    x = wrap_position(g, x);
  } else if (x < g.x_min || x > g.x_max) {
    throw Error("interpolate_at: position " + std::to_string(x) + " outside grid");
  }
  const double s = (x - g.x_min) / g.dx();
  auto i = static_cast<std::size_t>(std::floor(s));
  if (i >= g.n_x) i = g.n_x - 1;
  const double frac = s - static_cast<double>(i);
  const double right = (boundary == Boundary::periodic && i + 1 == g.n_x) ? f[0] : f[i + 1];
  return (1.0 - frac) * f[i] + frac * right;
}

/// Linear resampling of f onto another grid (periodic wrap or zero outside).
inline ScalarField resample(const ScalarField& f, const SpatialGrid& target, Boundary boundary) {
  if (f.grid == target) return f;
  ScalarField out(target);
  for (std::size_t i = 0; i < target.nodes(); ++i) {
    const double x = target.x(i);
    if (boundary == Boundary::one_sided && (x < f.grid.x_min || x > f.grid.x_max)) continue;
    out[i] = interpolate_at(f, x, boundary);
  }
  return out;
}

inline double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Snapshot CSVs: `x,value` and `x,v,value`, row-major node order.

inline void write_csv(std::ostream& os, const ScalarField& f) {
  const auto old = os.precision(12);
  os << "x,value\n";
  for (std::size_t i = 0; i < f.size(); ++i) os << f.grid.x(i) << ',' << f[i] << '\n';
  os.precision(old);
}

inline void write_csv(std::ostream& os, const PhaseDensity& rho) {
  const auto old = os.precision(12);
  os << "x,v,value\n";
  const auto& g = rho.grid;
  for (std::size_t i = 0; i < g.x_nodes(); ++i)
    for (std::size_t j = 0; j < g.v_nodes(); ++j)
      os << g.x(i) << ',' << g.v(j) << ',' << rho.at(i, j) << '\n';
  os.precision(old);
}

}  // namespace chemoflock
