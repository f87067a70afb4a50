#pragma once

#include <cstddef>
#include <iosfwd>
#include <set>
#include <span>
#include <vector>

namespace taxlearn {

/// clip(a, l, r) = min(max(a, l), r). Throws ArgumentError when l > r.
double clip(double a, double l, double r);

/// Uniform grid {0, 1/K, 2/K, ..., 1} on the unit interval.
///
/// Loads produced by the equilibrium solver are only approximate, so every
/// query first snaps x to the nearest grid point when it lies within
/// snap_tol() = spacing * 1e-6 of it.
class Grid {
 public:
  static constexpr double kSnapFactor = 1e-6;

  explicit Grid(int resolution);

  int resolution() const { return resolution_; }
  double spacing() const { return spacing_; }
  double snap_tol() const { return spacing_ * kSnapFactor; }
  std::size_t size() const { return static_cast<std::size_t>(resolution_) + 1; }

  // Exactly i / K; point(K) == 1.
  double point(int index) const;

  // Index of the grid point x snaps to, or -1 when x is not within snap_tol.
  int snapped_index(double x) const;

  // Largest index i with point(i) <= x (after snapping). x must lie in [0,1].
  int floor_index(double x) const;
  int ceil_index(double x) const;

  double floor(double x) const { return point(floor_index(x)); }
  double ceil(double x) const { return point(ceil_index(x)); }

 private:
  int resolution_;
  double spacing_;
};

/// Subset of grid points, stored as indices. Always contains 0.
class KnownIndexSet {
 public:
  explicit KnownIndexSet(const Grid& grid);

  const Grid& grid() const { return grid_; }
  bool contains_index(int index) const { return members_.count(index) != 0; }
  bool contains(double x) const;
  std::size_t size() const { return members_.size(); }
  const std::set<int>& indices() const { return members_; }
  std::vector<double> points() const;

  // Returns true when the index was not already present.
  bool insert_index(int index);

  // Nearest member at or below x. Always defined for x in [0,1] since 0 is a member.
  double floor(double x) const;
  // Nearest member at or above x. With include_one the set is augmented by {1}
  // for this query only; otherwise a RangeError is thrown when x exceeds max().
  double ceil(double x, bool include_one) const;

 private:
  Grid grid_;
  std::set<int> members_;
};

/// Piece-wise linear function on [0,1] given by sorted breakpoints.
///
/// Values are immutable; update() returns a new function. When constructed
/// with monotone = true, every construction and update verifies that the
/// ordinates are non-decreasing.
class PiecewiseLinear {
 public:
  struct Breakpoint {
    double x;
    double y;
    bool operator==(const Breakpoint&) const = default;
  };

  explicit PiecewiseLinear(std::vector<Breakpoint> breakpoints, bool monotone = false);

  // {(0,0),(1,0)}
  static PiecewiseLinear zero();
  // {(0, at_zero), (1, at_one)}
  static PiecewiseLinear line(double at_zero, double at_one, bool monotone = false);

  double operator()(double x) const { return eval(x); }
  double eval(double x) const;

  // d ∪ (x, y): replaces the ordinate at an existing abscissa, inserts otherwise.
  PiecewiseLinear update(double x, double y) const;

  // Exact integral of the function over [0, upper].
  double integral(double upper) const;

  // Adds slope * x to every ordinate.
  PiecewiseLinear plus_linear(double slope) const;

  // Smallest slope over all segments.
  double min_slope() const;
  // Derivative from the right at x (left derivative at x = 1).
  double slope_at(double x) const;

  std::span<const Breakpoint> breakpoints() const { return points_; }
  bool monotone() const { return monotone_; }

  void write_csv(std::ostream& out) const;

  bool operator==(const PiecewiseLinear& other) const { return points_ == other.points_; }

 private:
  // Index i with x_i <= x <= x_{i+1}.
  std::size_t segment(double x) const;
  void validate() const;

  std::vector<Breakpoint> points_;
  bool monotone_;
};

}  // namespace taxlearn
