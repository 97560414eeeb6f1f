#pragma once

// Kinetic-vs-hydrodynamic comparison: Euler data from Vlasov moments, L¹
// distances between ν₀/μ and ν₁/Q, and the search for the pressure
// coefficient ε that minimizes them.

#include <chemoflock/euler.hpp>
#include <chemoflock/grid.hpp>
#include <chemoflock/vlasov.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <ostream>
#include <vector>

namespace chemoflock {

/// μ⁰ = ν₀(ρ⁰), Q⁰ = ν₁(ρ⁰), interpolated onto `euler_grid` when it differs.
inline EulerState euler_ic_from_vlasov(const PhaseDensity& rho0, const SpatialGrid& euler_grid) {
  const auto nu0 = resample(moment0(rho0), euler_grid, Boundary::one_sided);
  const auto nu1 = resample(moment1(rho0), euler_grid, Boundary::one_sided);
  EulerState s(euler_grid);
  s.mu = nu0.values;
  s.Q = nu1.values;
  s.enforce_boundary();
  return s;
}

struct ComparisonRecord {
  double t = 0.0;
  double epsilon = 0.0;
  double E0 = 0.0;
  double E1 = 0.0;
};

inline ComparisonRecord compare_snapshots(const VlasovSnapshot& v, const EulerSnapshot& e, double epsilon) {
  const auto nu0 = resample(v.nu0, e.mu.grid, Boundary::one_sided);
  const auto nu1 = resample(v.nu1, e.mu.grid, Boundary::one_sided);
  return {e.t, epsilon, l1_distance(nu0, e.mu), l1_distance(nu1, e.Q)};
}

inline std::vector<ComparisonRecord> distance_series(const VlasovTrajectory& vlasov, const EulerTrajectory& euler,
                                                     const std::vector<double>& times, double epsilon) {
  std::vector<ComparisonRecord> out;
  for (double t : times) out.push_back(compare_snapshots(vlasov.at_time(t), euler.at_time(t), epsilon));
  return out;
}

struct Probe {
  double x = 0.0;
  double value = 0.0;
};

struct ScalarMinimum {
  double argmin = 0.0;
  double value = 0.0;
  std::vector<Probe> probes;
};

/// Coarse scan on `scan_points` equispaced nodes, then golden-section search
/// inside the bracket around the best node until its width is ≤ tol.
/// Non-finite objective values count as +inf. Ties go to the node closest to
/// the interval center and keep the middle of the golden bracket, so a flat
/// objective returns the midpoint.
inline ScalarMinimum minimize_scalar(const std::function<double(double)>& f, double lo, double hi, double tol,
                                     std::size_t scan_points = 9) {
  if (!(hi > lo) || !(tol > 0.0)) throw Error("minimize_scalar: need lo < hi and tol > 0");
  if (scan_points < 3) throw Error("minimize_scalar: need at least 3 scan points");
  ScalarMinimum out;
  auto eval = [&](double x) {
    double v = f(x);
    if (!std::isfinite(v)) v = std::numeric_limits<double>::infinity();
    out.probes.push_back({x, v});
    return v;
  };

  const double h = (hi - lo) / static_cast<double>(scan_points - 1);
  std::vector<double> scan(scan_points);
  for (std::size_t k = 0; k < scan_points; ++k) scan[k] = eval(lo + h * static_cast<double>(k));
  const double center = 0.5 * static_cast<double>(scan_points - 1);
  std::size_t best = 0;
  for (std::size_t k = 1; k < scan_points; ++k) {
    const bool better = scan[k] < scan[best];
    const bool tie_closer = scan[k] == scan[best] &&
                            std::abs(static_cast<double>(k) - center) < std::abs(static_cast<double>(best) - center);
    if (better || tie_closer) best = k;
  }

  double a = lo + h * static_cast<double>(best > 0 ? best - 1 : 0);
  double b = lo + h * static_cast<double>(std::min(best + 1, scan_points - 1));
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = eval(c);
  double fd = eval(d);
  while (b - a > tol) {
    if (fc == fd) {
      // Tie: keep [c, d].
      a = c;
      b = d;
      c = b - invphi * (b - a);
      d = a + invphi * (b - a);
      fc = eval(c);
      fd = eval(d);
    } else if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = eval(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = eval(d);
    }
  }
  out.argmin = 0.5 * (a + b);
  out.value = eval(out.argmin);
  return out;
}

enum class Objective { E0, E1 };

struct EpsilonSearch {
  double lo = 0.0;
  double hi = 0.05;
  double tol = 1e-3;
  double time = 1.0;
  Objective objective = Objective::E0;
  std::size_t scan_points = 9;

  void validate() const {
    if (lo < 0.0 || !(hi > lo)) throw Error("EpsilonSearch: need 0 <= lo < hi");
    if (!(tol > 0.0)) throw Error("EpsilonSearch: tol must be positive");
  }
};

struct EpsilonResult {
  double epsilon_star = 0.0;
  double objective = 0.0;
  std::vector<Probe> probes;
};

inline double round_to(double x, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::round(x * scale) / scale;
}

/// `euler_runner(eps, t)` re-solves the Euler problem from the shared initial
/// data and returns its snapshot at time t (or nullopt on blow-up).
using EulerRunner = std::function<std::optional<EulerSnapshot>(double epsilon, double t)>;

inline double epsilon_objective(const EpsilonSearch& search, const VlasovSnapshot& target,
                                const EulerRunner& runner, double eps) {
  const auto snap = runner(eps, search.time);
  if (!snap) return std::numeric_limits<double>::infinity();
  const auto rec = compare_snapshots(target, *snap, eps);
  return search.objective == Objective::E0 ? rec.E0 : rec.E1;
}

/// ε* to three decimals. The returned objective never exceeds the best probe,
/// which includes both interval endpoints.
inline EpsilonResult optimize_epsilon(const EpsilonSearch& search, const VlasovTrajectory& vlasov,
                                      const EulerRunner& runner) {
  search.validate();
  const auto& target = vlasov.at_time(search.time);
  auto f = [&](double eps) { return epsilon_objective(search, target, runner, eps); };
  auto res = minimize_scalar(f, search.lo, search.hi, search.tol, search.scan_points);

  EpsilonResult out;
  out.probes = std::move(res.probes);
  Probe best{res.argmin, res.value};
  for (const auto& p : out.probes)
    if (p.value < best.value) best = p;
  const double rounded = std::clamp(round_to(best.x, 3), search.lo, search.hi);
  const double value = rounded == best.x ? best.value : f(rounded);
  if (rounded != best.x) out.probes.push_back({rounded, value});
  out.epsilon_star = rounded;
  out.objective = value;

  // Never worse than an endpoint.
  for (const Probe& end : {out.probes[0], out.probes[search.scan_points - 1]})
    if (end.value < out.objective) {
      out.epsilon_star = end.x;
      out.objective = end.value;
    }
  return out;
}

inline void write_comparison_csv(std::ostream& os, const std::vector<ComparisonRecord>& records) {
  const auto old = os.precision(10);
  os << "t,epsilon,E0,E1\n";
  for (const auto& r : records) os << r.t << ',' << r.epsilon << ',' << r.E0 << ',' << r.E1 << '\n';
  os.precision(old);
}

inline void write_probe_csv(std::ostream& os, const std::vector<Probe>& probes) {
  const auto old = os.precision(10);
  os << "probe_epsilon,objective\n";
  for (const auto& p : probes) os << p.x << ',' << p.value << '\n';
  os.precision(old);
}

}  // namespace chemoflock
