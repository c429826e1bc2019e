#ifndef ATLAB_GRID_HPP
#define ATLAB_GRID_HPP

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace atlab {

/// Uniform mesh of [0, L] with `n_cells` cells and `n_cells + 1` nodes.
class Grid1D {
 public:
  Grid1D(double length, std::size_t n_cells)
      : length_(length), n_cells_(n_cells), spacing_(length / static_cast<double>(n_cells)) {}

  double length() const { return length_; }
  std::size_t n_cells() const { return n_cells_; }
  std::size_t node_count() const { return n_cells_ + 1; }
  double spacing() const { return spacing_; }

  /// Node coordinate. The last node is pinned to L so that x_n == L exactly.
  double x(std::size_t i) const {
    return i == n_cells_ ? length_ : static_cast<double>(i) * spacing_;
  }
  double midpoint(std::size_t c) const { return (static_cast<double>(c) + 0.5) * spacing_; }

  /// Index of the cell containing x (clamped to the mesh).
  std::size_t cell_of(double x) const {
    if (x <= 0.0) return 0;
    auto c = static_cast<std::size_t>(std::floor(x / spacing_));
    return c >= n_cells_ ? n_cells_ - 1 : c;
  }

  bool operator==(const Grid1D& o) const { return length_ == o.length_ && n_cells_ == o.n_cells_; }

 private:
  double length_;
  std::size_t n_cells_;
  double spacing_;
};

inline Grid1D make_grid(double length, std::size_t n_cells) {
  if (!(length > 0.0) || !std::isfinite(length)) {
    throw std::invalid_argument("make_grid: length must be positive");
  }
  if (n_cells < 2) throw std::invalid_argument("make_grid: need at least two cells");
  return Grid1D(length, n_cells);
}

namespace detail {

template <class Tag>
struct Field {
  std::vector<double> values;

  Field() = default;
  explicit Field(std::vector<double> v) : values(std::move(v)) {}
  explicit Field(std::size_t n, double fill = 0.0) : values(n, fill) {}

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
  auto begin() const { return values.begin(); }
  auto end() const { return values.end(); }
  auto begin() { return values.begin(); }
  auto end() { return values.end(); }
  bool operator==(const Field&) const = default;
};

struct NodalTag {};
struct CellTag {};

}  // namespace detail

/// Samples at the grid nodes x_0 .. x_n.
using NodalField = detail::Field<detail::NodalTag>;
/// Per-cell (midpoint) quantities, one per cell.
using CellField = detail::Field<detail::CellTag>;

inline void require_nodal(const NodalField& f, const Grid1D& g, const char* who) {
  if (f.size() != g.node_count()) {
    throw std::invalid_argument(std::string(who) + ": nodal field size does not match grid");
  }
}

inline void require_cell(const CellField& f, const Grid1D& g, const char* who) {
  if (f.size() != g.n_cells()) {
    throw std::invalid_argument(std::string(who) + ": cell field size does not match grid");
  }
}

inline NodalField constant_nodal(const Grid1D& g, double value) { return NodalField(g.node_count(), value); }

inline NodalField sample(const Grid1D& g, const std::function<double(double)>& f) {
  NodalField out(g.node_count(), 0.0);
  for (std::size_t i = 0; i < g.node_count(); ++i) out[i] = f(g.x(i));
  return out;
}

/// Trapezoidal rule. Accumulates in long double so that energy differences
/// between iterates are not swamped by summation error.
inline double integrate(const NodalField& f, const Grid1D& g) {
  require_nodal(f, g, "integrate");
  long double s = 0.5L * (static_cast<long double>(f[0]) + f[g.n_cells()]);
  for (std::size_t i = 1; i < g.n_cells(); ++i) s += f[i];
  return static_cast<double>(s * g.spacing());
}

/// Midpoint rule for a piecewise-constant cell quantity.
inline double integrate(const CellField& f, const Grid1D& g) {
  require_cell(f, g, "integrate");
  long double s = 0.0L;
  for (double v : f) s += v;
  return static_cast<double>(s * g.spacing());
}

/// Forward differences (f_{i+1} - f_i) / h, one per cell.
inline CellField derivative(const NodalField& f, const Grid1D& g) {
  require_nodal(f, g, "derivative");
  CellField d(g.n_cells(), 0.0);
  const double inv_h = 1.0 / g.spacing();
  for (std::size_t c = 0; c < g.n_cells(); ++c) d[c] = (f[c + 1] - f[c]) * inv_h;
  return d;
}

/// Arithmetic mean of the two nodes of each cell.
inline CellField cell_mean(const NodalField& f, const Grid1D& g) {
  require_nodal(f, g, "cell_mean");
  CellField m(g.n_cells(), 0.0);
  for (std::size_t c = 0; c < g.n_cells(); ++c) m[c] = 0.5 * (f[c] + f[c + 1]);
  return m;
}

/// Mean of the squared nodal values of each cell, (f_i^2 + f_{i+1}^2) / 2.
/// This is the cell value of v^2 used by every elastic term.
inline CellField cell_mean_square(const NodalField& f, const Grid1D& g) {
  require_nodal(f, g, "cell_mean_square");
  CellField m(g.n_cells(), 0.0);
  for (std::size_t c = 0; c < g.n_cells(); ++c) m[c] = 0.5 * (f[c] * f[c] + f[c + 1] * f[c + 1]);
  return m;
}

/// Average of the adjacent cells at interior nodes; boundary nodes copy their
/// single neighbour.
inline NodalField to_nodes(const CellField& f, const Grid1D& g) {
  require_cell(f, g, "to_nodes");
  NodalField out(g.node_count(), 0.0);
  out[0] = f[0];
  out[g.n_cells()] = f[g.n_cells() - 1];
  for (std::size_t i = 1; i < g.n_cells(); ++i) out[i] = 0.5 * (f[i - 1] + f[i]);
  return out;
}

/// Running integral of a cell field from 0, returned at the nodes.
inline NodalField cumulative_integral(const CellField& f, const Grid1D& g, double start = 0.0) {
  require_cell(f, g, "cumulative_integral");
  NodalField out(g.node_count(), start);
  long double s = start;
  for (std::size_t c = 0; c < g.n_cells(); ++c) {
    s += static_cast<long double>(f[c]) * g.spacing();
    out[c + 1] = static_cast<double>(s);
  }
  return out;
}

inline double sup_norm(const NodalField& f) {
  double m = 0.0;
  for (double v : f) m = std::max(m, std::abs(v));
  return m;
}

inline double sup_distance(const NodalField& a, const NodalField& b) {
  if (a.size() != b.size()) throw std::invalid_argument("sup_distance: size mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

/// Discrete L2 distance via the trapezoidal rule.
inline double l2_distance(const NodalField& a, const NodalField& b, const Grid1D& g) {
  require_nodal(a, g, "l2_distance");
  require_nodal(b, g, "l2_distance");
  NodalField sq(g.node_count(), 0.0);
  for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(integrate(sq, g));
}

}  // namespace atlab

#endif  // ATLAB_GRID_HPP
