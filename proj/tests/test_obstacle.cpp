#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "atlab/obstacle.hpp"
#include "atlab/tridiagonal.hpp"

using namespace atlab;

namespace {

// Dense Gaussian elimination, used only as an oracle for small systems.
std::vector<double> dense_solve(std::vector<std::vector<double>> A, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t r = k + 1; r < n; ++r) {
      if (std::abs(A[r][k]) > std::abs(A[piv][k])) piv = r;
    }
    std::swap(A[k], A[piv]);
    std::swap(b[k], b[piv]);
    for (std::size_t r = k + 1; r < n; ++r) {
      const double f = A[r][k] / A[k][k];
      for (std::size_t c = k; c < n; ++c) A[r][c] -= f * A[k][c];
      b[r] -= f * b[k];
    }
  }
  std::vector<double> x(n);
  for (std::size_t k = n; k-- > 0;) {
    double s = b[k];
    for (std::size_t c = k + 1; c < n; ++c) s -= A[k][c] * x[c];
    x[k] = s / A[k][k];
  }
  return x;
}

struct Lcp {
  std::vector<std::vector<double>> A;
  std::vector<double> f, b;
};

// Interior system of -eps v'' + (1/eps + q) v = 1/eps with v = 1 at the ends.
Lcp assemble(const CellField& load, const NodalField& obstacle, const ATParams& p, const Grid1D& g) {
  const std::size_t m = g.n_cells() - 1;
  const double h = g.spacing(), k = p.eps / (h * h);
  Lcp s{std::vector<std::vector<double>>(m, std::vector<double>(m, 0.0)), std::vector<double>(m, 1.0 / p.eps),
        std::vector<double>(m)};
  for (std::size_t j = 0; j < m; ++j) {
    const double q = 0.5 * (load[j] + load[j + 1]);
    s.A[j][j] = 2.0 * k + 1.0 / p.eps + q;
    if (j > 0) s.A[j][j - 1] = -k;
    if (j + 1 < m) s.A[j][j + 1] = -k;
    s.b[j] = obstacle[j + 1];
  }
  s.f[0] += k;
  s.f[m - 1] += k;
  return s;
}

// Tries every active set; returns the unique one satisfying all KKT signs.
std::vector<double> enumerate_lcp(const Lcp& s) {
  const std::size_t m = s.f.size();
  for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
    std::vector<std::size_t> free;
    std::vector<double> v(m);
    for (std::size_t j = 0; j < m; ++j) {
      if (mask & (1u << j)) {
        v[j] = s.b[j];
      } else {
        free.push_back(j);
      }
    }
    std::vector<std::vector<double>> Aff(free.size(), std::vector<double>(free.size()));
    std::vector<double> rhs(free.size());
    for (std::size_t a = 0; a < free.size(); ++a) {
      rhs[a] = s.f[free[a]];
      for (std::size_t j = 0; j < m; ++j) {
        if (mask & (1u << j)) rhs[a] -= s.A[free[a]][j] * v[j];
      }
      for (std::size_t c = 0; c < free.size(); ++c) Aff[a][c] = s.A[free[a]][free[c]];
    }
    const auto vf = free.empty() ? std::vector<double>{} : dense_solve(Aff, rhs);
    for (std::size_t a = 0; a < free.size(); ++a) v[free[a]] = vf[a];
    bool ok = true;
    for (std::size_t j = 0; j < m && ok; ++j) {
      double r = -s.f[j];
      for (std::size_t c = 0; c < m; ++c) r += s.A[j][c] * v[c];
      if (mask & (1u << j)) {
        ok = r <= 1e-12;
      } else {
        ok = v[j] <= s.b[j] + 1e-12;
      }
    }
    if (ok) return v;
  }
  return {};
}

CellField constant_load(const Grid1D& g, double value) { return CellField(g.n_cells(), value); }

}  // namespace

TEST(SolveV, NoLoadUnitObstacleGivesOne) {
  const Grid1D g = make_grid(1.0, 128);
  const ATParams p{0.05, 0.0025, 1.0, 0.0};
  const ObstacleSolution s = solve_v(constant_load(g, 0.0), ObstacleSpec::unconstrained(g), p, g);
  for (double v : s.v) EXPECT_NEAR(v, 1.0, 1e-14);
  for (double mu : s.multiplier.mu) EXPECT_NEAR(mu, 0.0, 1e-12);
  EXPECT_EQ(s.active.contact_indices.size(), g.n_cells() - 1);
  EXPECT_LE(s.residual.max(), 1e-11);
}

TEST(SolveV, ConstantLoadPlateau) {
  const Grid1D g = make_grid(1.0, 2048);
  const ATParams p{0.05, 0.0025, 1.0, 1.0};
  const ObstacleSolution s = solve_v(constant_load(g, 4.0), ObstacleSpec::unconstrained(g), p, g);
  // Continuum solution: plateau 1/(1 + eps k^2) joined to v = 1 by cosh layers
  // of width eps / sqrt(1 + eps k^2).
  const double plateau = 1.0 / 1.2, width = p.eps / std::sqrt(1.2);
  EXPECT_NEAR(s.v[1024], plateau, 1e-5);
  double err = 0.0;
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    const double exact = plateau + (1.0 - plateau) * std::cosh((g.x(i) - 0.5) / width) / std::cosh(0.5 / width);
    err = std::max(err, std::abs(s.v[i] - exact));
  }
  EXPECT_LE(err, 1e-5);
  EXPECT_TRUE(s.active.empty());
  EXPECT_LE(s.residual.max(), 1e-11);
}

TEST(SolveV, ConstantLoadMatchesDenseSolveAtSmallN) {
  const Grid1D g = make_grid(1.0, 64);
  const ATParams p{0.05, 0.0025, 1.0, 1.0};
  const CellField load = constant_load(g, 4.0);
  const NodalField obstacle = constant_nodal(g, 1.0);
  const ObstacleSolution s = solve_v(load, ObstacleSpec{obstacle}, p, g);
  const Lcp lcp = assemble(load, obstacle, p, g);
  const auto v = dense_solve(lcp.A, lcp.f);
  double diff = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j) diff = std::max(diff, std::abs(v[j] - s.v[j + 1]));
  EXPECT_LE(diff, 1e-9);
}

TEST(SolveV, MatchesExhaustiveEnumeration) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const Grid1D g = make_grid(1.0, 13);
  const ATParams p{0.1, 0.01, 1.0, 1.0};
  int constrained = 0;
  for (int trial = 0; trial < 30; ++trial) {
    CellField load(g.n_cells(), 0.0);
    for (std::size_t c = 0; c < g.n_cells(); ++c) load[c] = 40.0 * U(rng);
    NodalField obstacle(g.node_count(), 1.0);
    for (std::size_t i = 1; i < g.n_cells(); ++i) obstacle[i] = 0.2 + 0.8 * U(rng);
    const ObstacleSolution s = solve_v(load, ObstacleSpec{obstacle}, p, g);
    const auto v = enumerate_lcp(assemble(load, obstacle, p, g));
    ASSERT_FALSE(v.empty());
    double diff = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) diff = std::max(diff, std::abs(v[j] - s.v[j + 1]));
    EXPECT_LE(diff, 1e-9) << trial;
    constrained += s.active.empty() ? 0 : 1;
  }
  EXPECT_GT(constrained, 10);
}

TEST(SolveV, DeepWellObstacleKkt) {
  const Grid1D g = make_grid(1.0, 1024);
  const ATParams p{0.05, 0.0025, 1.0, 0.0};
  NodalField obstacle = sample(g, [](double x) { return 1.0 - 0.95 * std::exp(-std::pow((x - 0.5) / 0.05, 2)); });
  obstacle[0] = obstacle[g.n_cells()] = 1.0;
  const CellField load = constant_load(g, 0.0);
  const ObstacleSolution s = solve_v(load, ObstacleSpec{obstacle}, p, g);
  const ObstacleSolution free_sol = solve_v(load, ObstacleSpec::unconstrained(g), p, g);
  EXPECT_FALSE(s.active.empty());
  EXPECT_LE(s.residual.complementarity, 1e-11);
  EXPECT_LE(s.residual.max(), 1e-11);
  // Contact only where the free solution would exceed the obstacle.
  for (std::size_t i : s.active.contact_indices) EXPECT_GE(free_sol.v[i], obstacle[i] - 1e-10);
  // Node-by-node KKT: residual zero on the free set, nonpositive on contact.
  const NodalField r = v_equation_residual(s.v, load, p, g);
  for (std::size_t i : s.active.free_indices) {
    EXPECT_LT(s.v[i], obstacle[i]);
    EXPECT_EQ(s.multiplier.mu[i], 0.0);
  }
  for (std::size_t i : s.active.contact_indices) {
    EXPECT_LE(s.multiplier.mu[i], 1e-9);
    EXPECT_EQ(s.multiplier.mu[i], r[i]);
  }
}

TEST(SolveV, BoundsHold) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const Grid1D g = make_grid(1.0, 256);
  const ATParams p{0.02, 0.0004, 1.0, 1.0};
  for (int trial = 0; trial < 10; ++trial) {
    CellField load(g.n_cells(), 0.0);
    for (std::size_t c = 0; c < g.n_cells(); ++c) load[c] = 1e4 * U(rng) * U(rng);
    NodalField obstacle(g.node_count(), 1.0);
    for (std::size_t i = 1; i < g.n_cells(); ++i) obstacle[i] = U(rng);
    const ObstacleSolution s = solve_v(load, ObstacleSpec{obstacle}, p, g);
    for (std::size_t i = 0; i < g.node_count(); ++i) {
      EXPECT_GE(s.v[i], -1e-12);
      EXPECT_LE(s.v[i], obstacle[i] + 1e-12);
      EXPECT_LE(s.multiplier.mu[i], 1e-9);
    }
    EXPECT_LE(s.residual.max(), 1e-11) << trial;
  }
}

TEST(SolveV, MonotoneInLoad) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const Grid1D g = make_grid(1.0, 64);
  const ATParams p{0.05, 0.0025, 1.0, 1.0};
  for (int trial = 0; trial < 25; ++trial) {
    CellField lo(g.n_cells(), 0.0), hi(g.n_cells(), 0.0);
    for (std::size_t c = 0; c < g.n_cells(); ++c) {
      lo[c] = 50.0 * U(rng);
      hi[c] = lo[c] + 50.0 * U(rng);
    }
    NodalField obstacle(g.node_count(), 1.0);
    for (std::size_t i = 1; i < g.n_cells(); ++i) obstacle[i] = 0.3 + 0.7 * U(rng);
    const auto a = solve_v(lo, ObstacleSpec{obstacle}, p, g), b = solve_v(hi, ObstacleSpec{obstacle}, p, g);
    for (std::size_t i = 0; i < g.node_count(); ++i) EXPECT_LE(b.v[i], a.v[i] + 1e-13);
  }
}

TEST(SolveV, UnitObstacleAgreesWithUnconstrainedSolve) {
  const Grid1D g = make_grid(1.0, 500);
  const ATParams p{0.05, 0.0025, 1.0, 1.0};
  CellField load(g.n_cells(), 0.0);
  for (std::size_t c = 0; c < g.n_cells(); ++c) load[c] = 10.0 * (1.0 + std::sin(9.0 * g.midpoint(c)));
  const ObstacleSolution s = solve_v(load, ObstacleSpec::unconstrained(g), p, g);
  const Lcp lcp = assemble(load, constant_nodal(g, 1.0), p, g);
  std::vector<double> lo(lcp.f.size()), di(lcp.f.size()), up(lcp.f.size());
  for (std::size_t j = 0; j < lcp.f.size(); ++j) {
    di[j] = lcp.A[j][j];
    lo[j] = j > 0 ? lcp.A[j][j - 1] : 0.0;
    up[j] = j + 1 < lcp.f.size() ? lcp.A[j][j + 1] : 0.0;
  }
  const auto v = solve_tridiagonal(lo, di, up, lcp.f);
  for (std::size_t j = 0; j < v.size(); ++j) EXPECT_NEAR(s.v[j + 1], v[j], 1e-11);
}

TEST(SolveV, WarmStartGivesSameAnswer) {
  const Grid1D g = make_grid(1.0, 400);
  const ATParams p{0.05, 0.0025, 1.0, 1.0};
  NodalField obstacle = sample(g, [](double x) { return 1.0 - 0.8 * std::exp(-std::pow((x - 0.3) / 0.05, 2)); });
  obstacle[0] = obstacle[g.n_cells()] = 1.0;
  const CellField load = constant_load(g, 3.0);
  const auto cold = solve_v(load, ObstacleSpec{obstacle}, p, g);
  const auto warm = solve_v(load, ObstacleSpec{obstacle}, p, g, {}, &cold.v);
  EXPECT_LE(sup_distance(cold.v, warm.v), 1e-13);
}

TEST(SolveV, RejectsBadInput) {
  const Grid1D g = make_grid(1.0, 16);
  const ATParams p{0.05, 0.0025, 1.0, 1.0};
  NodalField bad(g.node_count(), 1.0);
  bad[0] = 0.5;
  EXPECT_THROW(solve_v(constant_load(g, 0.0), ObstacleSpec{bad}, p, g), std::invalid_argument);
  NodalField high(g.node_count(), 1.0);
  high[3] = 1.5;
  EXPECT_THROW(solve_v(constant_load(g, 0.0), ObstacleSpec{high}, p, g), std::invalid_argument);
  EXPECT_THROW(solve_v(constant_load(g, -1.0), ObstacleSpec::unconstrained(g), p, g), std::invalid_argument);
  EXPECT_THROW(solve_v(CellField(3, 0.0), ObstacleSpec::unconstrained(g), p, g), std::invalid_argument);
}
