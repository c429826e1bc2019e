#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "atlab/flux.hpp"
#include "atlab/tridiagonal.hpp"

using namespace atlab;

namespace {

NodalField hat_v(const Grid1D& g, double depth_to) {
  return sample(g, [&](double x) { return 1.0 - (1.0 - depth_to) * std::max(0.0, 1.0 - std::abs(x - 0.5) / 0.2); });
}

}  // namespace

TEST(SolveU, ConstantCoefficient) {
  const Grid1D g = make_grid(1.0, 100);
  const ATParams p{0.1, 0.01, 1.0, 1.0};
  const FluxSolution s = solve_u(constant_nodal(g, 1.0), p, g);
  EXPECT_NEAR(s.c_eps, 1.01, 1e-14);
  for (std::size_t i = 0; i < g.node_count(); ++i) EXPECT_NEAR(s.u[i], g.x(i), 1e-14);
}

TEST(SolveU, MatchesTridiagonalSolveWithBrokenInterior) {
  const std::size_t n = 2000;
  const Grid1D g = make_grid(1.0, n);
  const ATParams p{0.05, 0.0025, 1.0, 1.0};
  NodalField v(n + 1, 0.0);
  v[0] = v[n] = 1.0;
  const FluxSolution s = solve_u(v, p, g);
  // Direct assembly of -(k_c (u_{c+1} - u_c))' = 0 with the same cell coefficients.
  std::vector<double> k(n);
  for (std::size_t c = 0; c < n; ++c) k[c] = p.eta + 0.5 * (v[c] * v[c] + v[c + 1] * v[c + 1]);
  const std::size_t m = n - 1;
  std::vector<double> lo(m), di(m), up(m), rhs(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    lo[i] = -k[i];
    di[i] = k[i] + k[i + 1];
    up[i] = -k[i + 1];
  }
  rhs[m - 1] = k[n - 1] * p.boundary_value;
  const auto u = solve_tridiagonal(lo, di, up, rhs);
  double diff = 0.0;
  for (std::size_t i = 0; i < m; ++i) diff = std::max(diff, std::abs(u[i] - s.u[i + 1]));
  EXPECT_LE(diff, 1e-12);
  // c = a / sum h / k_c
  double comp = 0.0;
  for (double kc : k) comp += g.spacing() / kc;
  EXPECT_NEAR(s.c_eps, 1.0 / comp, 1e-15);
}

TEST(SolveU, SteepestWhereVIsSmallest) {
  const Grid1D g = make_grid(1.0, 1000);
  const ATParams p{0.05, 0.0025, 1.0, 1.0};
  const NodalField v = hat_v(g, 0.1);
  const FluxSolution s = solve_u(v, p, g);
  for (std::size_t i = 0; i < g.n_cells(); ++i) EXPECT_LT(s.u[i], s.u[i + 1]);
  const auto it = std::max_element(s.u_prime.begin(), s.u_prime.end());
  const std::size_t c = static_cast<std::size_t>(it - s.u_prime.begin());
  EXPECT_TRUE(c == g.cell_of(0.5) || c + 1 == g.cell_of(0.5)) << c;
}

TEST(SolveU, SignFollowsDatum) {
  const Grid1D g = make_grid(1.0, 64);
  const NodalField v = hat_v(g, 0.3);
  const FluxSolution neg = solve_u(v, ATParams{0.05, 0.0025, 1.0, -2.0}, g);
  for (std::size_t i = 0; i < g.n_cells(); ++i) EXPECT_GT(neg.u[i], neg.u[i + 1]);
  const FluxSolution zero = solve_u(v, ATParams{0.05, 0.0025, 1.0, 0.0}, g);
  EXPECT_EQ(zero.c_eps, 0.0);
  for (double x : zero.u) EXPECT_EQ(x, 0.0);
}

TEST(SolveU, LinearInDatum) {
  const Grid1D g = make_grid(1.0, 300);
  const NodalField v = hat_v(g, 0.2);
  const ATParams p{0.05, 0.0025, 1.0, 0.7};
  const FluxSolution a = solve_u(v, p, g);
  for (double lambda : {-3.0, 0.5, 7.25}) {
    const FluxSolution b = solve_u(v, p.with_boundary(0.7 * lambda), g);
    EXPECT_NEAR(b.c_eps, lambda * a.c_eps, 1e-14 * std::abs(lambda * a.c_eps));
    for (std::size_t i = 0; i < g.node_count(); ++i) EXPECT_NEAR(b.u[i], lambda * a.u[i], 1e-13 * std::abs(lambda));
  }
}

TEST(SolveU, ElasticEnergyEqualsFluxTimesDatum) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const Grid1D g = make_grid(1.0, 512);
  for (int trial = 0; trial < 10; ++trial) {
    NodalField v(513, 1.0);
    for (std::size_t i = 1; i < 512; ++i) v[i] = U(rng);
    const ATParams p{0.05, 0.0025, 1.0, 4.0 * U(rng) - 2.0};
    const FluxSolution s = solve_u(v, p, g);
    const double el = at_energy(State{s.u, v}, p, g).elastic;
    EXPECT_NEAR(el, s.c_eps * p.boundary_value, 1e-10 * std::max(1.0, el));
    EXPECT_LE(flux_residual(s.u, v, s.c_eps, p, g), 1e-14);
  }
}

TEST(FluxResidual, DetectsPerturbation) {
  const Grid1D g = make_grid(1.0, 64);
  const ATParams p{0.05, 0.0025, 1.0, 1.0};
  const NodalField v = hat_v(g, 0.2);
  FluxSolution s = solve_u(v, p, g);
  s.u[30] += 1e-6;
  EXPECT_GT(flux_residual(s.u, v, s.c_eps, p, g), 1e-8);
}

TEST(Tridiagonal, SmallSystemAndErrors) {
  const std::vector<double> lo{0, -1, -1}, di{2, 2, 2}, up{-1, -1, 0}, rhs{1, 0, 1};
  const auto x = solve_tridiagonal(lo, di, up, rhs);
  for (double xi : x) EXPECT_NEAR(xi, 1.0, 1e-15);
  const std::vector<double> short_rhs{1, 0};
  EXPECT_THROW(solve_tridiagonal(lo, di, up, short_rhs), std::invalid_argument);
  const std::vector<double> zero{0, 0, 0};
  EXPECT_THROW(solve_tridiagonal(lo, zero, up, rhs), std::runtime_error);
}
