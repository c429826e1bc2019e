#include <cmath>
#include <stdexcept>

#include <gtest/gtest.h>

#include "atlab/grid.hpp"

using namespace atlab;

TEST(Grid, SpacingAndNodeCount) {
  const Grid1D g = make_grid(1.0, 4);
  EXPECT_DOUBLE_EQ(g.spacing(), 0.25);
  EXPECT_EQ(g.node_count(), 5u);
}

TEST(Grid, MiddleNodeOfSymmetricGrid) { EXPECT_DOUBLE_EQ(make_grid(2.0, 8).x(4), 1.0); }

TEST(Grid, SpacingTimesCellsIsLength) {
  const Grid1D g = make_grid(1.0, 4096);
  EXPECT_NEAR(g.spacing() * 4096.0, 1.0, 1e-15);
  EXPECT_EQ(g.x(4096), 1.0);
}

TEST(Grid, RejectsBadInput) {
  EXPECT_THROW(make_grid(0.0, 8), std::invalid_argument);
  EXPECT_THROW(make_grid(-1.0, 8), std::invalid_argument);
  EXPECT_THROW(make_grid(1.0, 1), std::invalid_argument);
  EXPECT_THROW(make_grid(std::nan(""), 8), std::invalid_argument);
}

TEST(Grid, CellOfClampsAndLocates) {
  const Grid1D g = make_grid(1.0, 10);
  EXPECT_EQ(g.cell_of(-1.0), 0u);
  EXPECT_EQ(g.cell_of(0.35), 3u);
  EXPECT_EQ(g.cell_of(1.0), 9u);
  EXPECT_DOUBLE_EQ(g.midpoint(3), 0.35);
}

TEST(Integrate, ConstantIsLength) {
  const Grid1D g = make_grid(1.0, 37);
  EXPECT_DOUBLE_EQ(integrate(constant_nodal(g, 1.0), g), 1.0);
}

TEST(Integrate, TrapezoidExactOnAffine) {
  for (std::size_t n : {2u, 3u, 17u, 1000u}) {
    const Grid1D g = make_grid(1.0, n);
    EXPECT_NEAR(integrate(sample(g, [](double x) { return x; }), g), 0.5, 1e-15) << n;
  }
}

TEST(Integrate, QuadraticAgainstAntiderivative) {
  const Grid1D g = make_grid(1.0, 4096);
  EXPECT_NEAR(integrate(sample(g, [](double x) { return x * x; }), g), 1.0 / 3.0, 1e-7);
}

TEST(Integrate, CellFieldMidpointRule) {
  const Grid1D g = make_grid(2.0, 8);
  EXPECT_DOUBLE_EQ(integrate(CellField(8, 3.0), g), 6.0);
}

TEST(Integrate, SizeMismatchThrows) {
  const Grid1D g = make_grid(1.0, 8);
  EXPECT_THROW(integrate(NodalField(8, 1.0), g), std::invalid_argument);
}

TEST(Derivative, ConstantGivesZero) {
  const Grid1D g = make_grid(1.0, 16);
  for (double d : derivative(constant_nodal(g, 4.2), g)) EXPECT_EQ(d, 0.0);
}

TEST(Derivative, AffineGivesExactConstant) {
  const Grid1D g = make_grid(1.0, 64);
  const CellField d = derivative(sample(g, [](double x) { return x; }), g);
  for (double x : d) EXPECT_NEAR(x, 1.0, 1e-12);
  const CellField d2 = derivative(sample(g, [](double x) { return 3.0 - 2.0 * x; }), g);
  for (double x : d2) EXPECT_NEAR(x, -2.0, 1e-12);
}

TEST(Derivative, SineAgainstCosineAtMidpoints) {
  const Grid1D g = make_grid(1.0, 4096);
  const CellField d = derivative(sample(g, [](double x) { return std::sin(x); }), g);
  double err = 0.0;
  for (std::size_t c = 0; c < g.n_cells(); ++c) err = std::max(err, std::abs(d[c] - std::cos(g.midpoint(c))));
  EXPECT_LE(err, 1e-7);
}

TEST(Property, CumulativeIntegralOfDerivativeTelescopes) {
  const Grid1D g = make_grid(1.0, 997);
  for (int k = 1; k <= 5; ++k) {
    const NodalField f = sample(g, [k](double x) { return std::exp(std::sin(7.0 * k * x)) + k * x * x; });
    const NodalField F = cumulative_integral(derivative(f, g), g, f[0]);
    const double tol = 1e-12 * sup_norm(f);
    EXPECT_NEAR(F[g.n_cells()], f[g.n_cells()], tol);
    EXPECT_NEAR(integrate(derivative(f, g), g), f[g.n_cells()] - f[0], tol);
  }
}

TEST(Fields, MeansAndTransfers) {
  const Grid1D g = make_grid(1.0, 4);
  const NodalField f(std::vector<double>{0.0, 1.0, 2.0, 3.0, 4.0});
  const CellField m = cell_mean(f, g);
  EXPECT_DOUBLE_EQ(m[2], 2.5);
  const CellField s = cell_mean_square(f, g);
  EXPECT_DOUBLE_EQ(s[1], 2.5);
  const NodalField back = to_nodes(m, g);
  EXPECT_DOUBLE_EQ(back[0], 0.5);
  EXPECT_DOUBLE_EQ(back[2], 2.0);
  EXPECT_DOUBLE_EQ(back[4], 3.5);
}

TEST(Fields, Distances) {
  const Grid1D g = make_grid(1.0, 100);
  const NodalField a = constant_nodal(g, 1.0), b = constant_nodal(g, 0.5);
  EXPECT_DOUBLE_EQ(sup_distance(a, b), 0.5);
  EXPECT_NEAR(l2_distance(a, b, g), 0.5, 1e-15);
  EXPECT_DOUBLE_EQ(sup_norm(b), 0.5);
  EXPECT_THROW(sup_distance(a, NodalField(3, 0.0)), std::invalid_argument);
}
