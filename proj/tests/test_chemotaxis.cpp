#include <chemoflock/chemotaxis.hpp>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace chemoflock;

namespace {

ChemoState sine_state(std::size_t n, double L, double kappa) {
  SpatialGrid g(0.0, L, n);
  ChemoState s(g, kappa);
  for (std::size_t i = 0; i < g.nodes(); ++i) s.u[i] = std::sin(2.0 * std::numbers::pi * g.x(i) / L);
  s.u[n] = s.u[0];
  return s;
}

// Projection onto sin(2πx/L) over one period.
double sine_amplitude(const std::vector<double>& u, const SpatialGrid& g) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < g.n_x; ++i) {
    const double s = std::sin(2.0 * std::numbers::pi * g.x(i) / g.length());
    num += u[i] * s;
    den += s * s;
  }
  return num / den;
}

}  // namespace

TEST(CyclicTridiagonal, MatchesDenseSolve) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::size_t n : {3u, 4u, 7u, 31u}) {
    std::vector<double> a(n), b(n), c(n), d(n);
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = u(rng);
      c[i] = u(rng);
      b[i] = 3.0 + u(rng);
      d[i] = u(rng);
      const auto ii = static_cast<Eigen::Index>(i);
      M(ii, static_cast<Eigen::Index>((i + n - 1) % n)) += a[i];
      M(ii, ii) += b[i];
      M(ii, static_cast<Eigen::Index>((i + 1) % n)) += c[i];
      rhs(ii) = d[i];
    }
    const Eigen::VectorXd ref = M.partialPivLu().solve(rhs);
    const auto x = solve_cyclic_tridiagonal(a, b, c, d);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(x[i], ref(static_cast<Eigen::Index>(i)), 1e-12);
  }
}

TEST(ChemoStep, KappaDecayIsExact) {
  SpatialGrid g(0.0, 1.0, 50);
  ChemoParams p{1.0, 0.7, 0.0, 0.0};
  ChemoState s(g, p.kappa);
  for (auto& v : s.u) v = 2.5;
  ScalarField zero(g);
  const double dt = 0.01;
  for (int k = 1; k <= 100; ++k) {
    s = chemo_step(s, zero, zero, dt, p);
    const auto phi = s.phi();
    for (double v : phi.values) EXPECT_NEAR(v, 2.5 * std::exp(-p.kappa * k * dt), 1e-12);
  }
}

TEST(ChemoStep, TransformRoundTrip) {
  const double dt = 0.002;
  ChemoParams with{0.5, 0.3, 0.0, 0.0}, without{0.5, 0.0, 0.0, 0.0};
  auto a = sine_state(64, 2.0, with.kappa);
  auto b = sine_state(64, 2.0, 0.0);
  ScalarField zero(a.grid);
  for (int k = 1; k <= 50; ++k) {
    a = chemo_step(a, zero, zero, dt, with);
    b = chemo_step(b, zero, zero, dt, without);
    const auto pa = a.phi(), pb = b.phi();
    for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_NEAR(pa[i], pb[i] * std::exp(-with.kappa * k * dt), 1e-12);
  }
}

TEST(ChemoStep, FourierModeFactor) {
  const double L = 1.0, D = 0.8, dt = 0.003;
  auto s = sine_state(40, L, 0.0);
  ScalarField zero(s.grid);
  auto next = chemo_step(s, zero, zero, dt, {D, 0.0, 0.0, 0.0});
  const double dx = s.grid.dx();
  const double sn = std::sin(std::numbers::pi * dx / L);
  const double z = 4.0 * D * dt * sn * sn / (dx * dx);
  const double factor = (1.0 - z / 2.0) / (1.0 + z / 2.0);
  for (std::size_t i = 0; i < s.u.size(); ++i) EXPECT_NEAR(next.u[i], factor * s.u[i], 1e-13);
}

TEST(ChemoStep, DiffusionDecaySecondOrder) {
  const double L = 1.0, D = 1.0, T = 0.05;
  const double exact = std::exp(-D * std::pow(2.0 * std::numbers::pi / L, 2) * T);
  std::vector<double> errs;
  for (std::size_t level = 0; level < 3; ++level) {
    const std::size_t n = 16u << level;
    const double dt = 0.001 / static_cast<double>(1u << level);
    auto s = sine_state(n, L, 0.0);
    ScalarField zero(s.grid);
    const auto steps = static_cast<int>(std::llround(T / dt));
    for (int k = 0; k < steps; ++k) s = chemo_step(s, zero, zero, dt, {D, 0.0, 0.0, 0.0});
    errs.push_back(std::abs(sine_amplitude(s.u, s.grid) - exact));
  }
  EXPECT_GE(std::log2(errs[0] / errs[1]), 1.9);
  EXPECT_GE(std::log2(errs[1] / errs[2]), 1.9);
}

TEST(ChemoStep, ConstantSourceNoDiffusion) {
  SpatialGrid g(0.0, 1.0, 10);
  ChemoState s(g, 0.0);
  ScalarField src(g, 3.0);
  auto next = chemo_step(s, src, src, 0.25, {0.0, 0.0, 0.0, 0.0});
  for (double v : next.u) EXPECT_DOUBLE_EQ(v, 0.75);
  EXPECT_DOUBLE_EQ(next.t, 0.25);
}

TEST(ChemoStep, MassConservedWithoutSource) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SpatialGrid g(-1.0, 1.0, 80);
  ChemoState s(g, 0.0);
  for (std::size_t i = 0; i < g.n_x; ++i) s.u[i] = u(rng);
  s.u[g.n_x] = s.u[0];
  ScalarField zero(g);
  const double m0 = integrate(s.phi());
  for (int k = 0; k < 200; ++k) {
    s = chemo_step(s, zero, zero, 0.001, {1.0, 0.0, 0.0, 0.0});
    EXPECT_NEAR(integrate(s.phi()), m0, 1e-10);
  }
}

TEST(ChemoStep, MaxNonIncreasingWithoutSource) {
  SpatialGrid g(-20.0, 20.0, 4000);
  ChemoState s(g, 0.01);
  for (std::size_t i = 0; i < g.nodes(); ++i) s.u[i] = std::abs(g.x(i)) <= 0.5 ? 1.0 : 0.0;
  ScalarField zero(g);
  double prev = max_abs(s.phi().values);
  for (int k = 0; k < 100; ++k) {
    s = chemo_step(s, zero, zero, 0.001, {1.0, 0.01, 0.0, 0.0});
    const double m = max_abs(s.phi().values);
    EXPECT_LE(m, prev * (1.0 + 1e-12));
    prev = m;
  }
}

TEST(ChemoStep, RejectsBadInput) {
  SpatialGrid g(0.0, 1.0, 10);
  ChemoState s(g, 0.0);
  ScalarField zero(g), other(SpatialGrid(0.0, 1.0, 11));
  EXPECT_THROW(chemo_step(s, zero, zero, 0.0, {}), Error);
  EXPECT_THROW(chemo_step(s, zero, other, 0.1, {}), Error);
}

TEST(SourceFromParticles, SingleParticleAtNode) {
  SpatialGrid g(-1.0, 1.0, 20);
  const std::vector<double> X{g.x(7)};
  auto f = source_from_particles(X, g, 0.0);
  for (std::size_t i = 0; i < g.nodes(); ++i) EXPECT_EQ(f[i], i == 7 ? 1.0 : 0.0);
}

TEST(SourceFromParticles, NormalizationSymmetry) {
  SpatialGrid g(-1.0, 1.0, 40);
  const std::vector<double> one{0.13}, two{0.13, 0.13};
  auto a = source_from_particles(one, g, 0.2), b = source_from_particles(two, g, 0.2);
  for (std::size_t i = 0; i < g.nodes(); ++i) EXPECT_DOUBLE_EQ(a[i], b[i]);
  auto raw = source_from_particles(two, g, 0.2, false);
  for (std::size_t i = 0; i < g.nodes(); ++i) EXPECT_DOUBLE_EQ(raw[i], 2.0 * a[i]);
}

TEST(SourceFromParticles, OverlapPlateausMatchDoubleLoop) {
  SpatialGrid g(-3.0, 3.0, 60);
  const std::vector<double> X{-1.0, 0.0, 1.0};
  auto f = source_from_particles(X, g, 0.5);
  for (std::size_t i = 0; i < g.nodes(); ++i) {
    double ref = 0.0;
    for (double xp : X)
      if (std::abs(g.x(i) - xp) <= 0.5 + 1e-12) ref += 1.0 / 3.0;
    EXPECT_NEAR(f[i], ref, 1e-15) << "x = " << g.x(i);
  }
  EXPECT_NEAR(f[20], 1.0 / 3.0, 1e-15);  // x = -1
  EXPECT_NEAR(f[25], 2.0 / 3.0, 1e-15);  // x = -0.5, both windows
}

TEST(SourceFromParticles, PeriodicWrap) {
  SpatialGrid g(0.0, 1.0, 10);
  const std::vector<double> X{0.0};
  auto f = source_from_particles(X, g, 0.2);
  EXPECT_EQ(f[8], 1.0);
  EXPECT_EQ(f[2], 1.0);
  EXPECT_EQ(f[5], 0.0);
  EXPECT_EQ(f[10], f[0]);
}

TEST(SourceFromDensity, ZeroAndUnit) {
  SpatialGrid g(0.0, 1.0, 100);
  auto z = source_from_density(ScalarField(g), 0.1);
  for (double v : z.values) EXPECT_EQ(v, 0.0);
  auto u = source_from_density(ScalarField(g, 1.0), 10 * g.dx());
  for (std::size_t i = 10; i <= 90; ++i) EXPECT_NEAR(u[i], 21 * g.dx(), 1e-13);
}

TEST(SourceFromDensity, HistogramMatchesParticles) {
  std::mt19937_64 rng(21);
  SpatialGrid g(-2.0, 2.0, 400);
  std::uniform_int_distribution<std::size_t> node(0, g.n_x - 1);
  std::vector<double> X;
  ScalarField hist(g);
  for (int p = 0; p < 20; ++p) {
    const std::size_t k = node(rng);
    X.push_back(g.x(k));
    hist[k] += 1.0 / (20.0 * g.dx());
  }
  hist[g.n_x] = hist[0];
  const double R = 0.3;
  auto a = source_from_particles(X, g, R), b = source_from_density(hist, R);
  for (std::size_t i = 0; i < g.nodes(); ++i) EXPECT_NEAR(a[i], b[i], g.dx());
}

TEST(ChemoGradient, ConstantAndSine) {
  SpatialGrid g(0.0, 1.0, 200);
  ChemoState s(g, 0.0);
  for (auto& v : s.u) v = 4.0;
  for (double v : chemo_gradient(s).values) EXPECT_NEAR(v, 0.0, 1e-12);
  for (std::size_t i = 0; i < g.nodes(); ++i) s.u[i] = std::sin(2.0 * std::numbers::pi * g.x(i));
  auto d = chemo_gradient(s);
  const double tau = 2.0 * std::numbers::pi;
  for (std::size_t i = 0; i < g.nodes(); ++i)
    EXPECT_NEAR(d[i], tau * std::cos(tau * g.x(i)), std::pow(tau, 3) * g.dx() * g.dx() / 6.0 + 1e-12);
}

TEST(ChemoGradient, PlateauAntisymmetric) {
  SpatialGrid g(-1.0, 1.0, 100);
  ChemoState s(g, 0.0);
  for (std::size_t i = 0; i < g.nodes(); ++i) s.u[i] = std::abs(g.x(i)) <= 0.2 + 1e-12 ? 1.0 : 0.0;
  auto d = chemo_gradient(s);
  for (std::size_t i = 1; i < g.n_x; ++i) EXPECT_NEAR(d[i], -d[g.n_x - i], 1e-12);
}
