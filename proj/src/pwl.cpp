#include "taxlearn/pwl.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "taxlearn/errors.hpp"

namespace taxlearn {

double clip(double a, double l, double r) {
  if (l > r) {
    throw ArgumentError("clip: lower bound " + std::to_string(l) + " exceeds upper bound " +
                        std::to_string(r));
  }
  return std::min(std::max(a, l), r);
}

// ---------------------------------------------------------------------------
// Grid

Grid::Grid(int resolution) : resolution_(resolution), spacing_(0.0) {
  if (resolution < 1) throw ArgumentError("Grid: resolution must be >= 1");
  spacing_ = 1.0 / resolution;
}

double Grid::point(int index) const {
  if (index < 0 || index > resolution_) throw RangeError("Grid: index out of range");
  return static_cast<double>(index) / resolution_;
}

int Grid::snapped_index(double x) const {
  const double scaled = std::round(x * resolution_);
  if (scaled < 0.0 || scaled > resolution_) return -1;
  const int index = static_cast<int>(scaled);
  return std::abs(x - point(index)) <= snap_tol() ? index : -1;
}

int Grid::floor_index(double x) const {
  if (!(x >= -snap_tol() && x <= 1.0 + snap_tol())) {
    throw DomainError("Grid: x outside [0,1]");
  }
  if (const int s = snapped_index(x); s >= 0) return s;
  int i = std::clamp(static_cast<int>(std::floor(x * resolution_)), 0, resolution_);
  while (i > 0 && point(i) > x) --i;
  while (i < resolution_ && point(i + 1) <= x) ++i;
  return i;
}

int Grid::ceil_index(double x) const {
  if (!(x >= -snap_tol() && x <= 1.0 + snap_tol())) {
    throw DomainError("Grid: x outside [0,1]");
  }
  if (const int s = snapped_index(x); s >= 0) return s;
  int i = std::clamp(static_cast<int>(std::ceil(x * resolution_)), 0, resolution_);
  while (i < resolution_ && point(i) < x) ++i;
  while (i > 0 && point(i - 1) >= x) --i;
  return i;
}

// ---------------------------------------------------------------------------
// KnownIndexSet

KnownIndexSet::KnownIndexSet(const Grid& grid) : grid_(grid), members_{0} {}

bool KnownIndexSet::contains(double x) const {
  const int s = grid_.snapped_index(x);
  return s >= 0 && contains_index(s);
}

std::vector<double> KnownIndexSet::points() const {
  std::vector<double> out;
  out.reserve(members_.size());
  for (int i : members_) out.push_back(grid_.point(i));
  return out;
}

bool KnownIndexSet::insert_index(int index) {
  if (index < 0 || index > grid_.resolution()) {
    throw RangeError("KnownIndexSet: index outside the grid");
  }
  return members_.insert(index).second;
}

double KnownIndexSet::floor(double x) const {
  const int bound = grid_.floor_index(x);
  auto it = members_.upper_bound(bound);
  // 0 is always a member, so the predecessor exists.
  --it;
  return grid_.point(*it);
}

double KnownIndexSet::ceil(double x, bool include_one) const {
  const int bound = grid_.ceil_index(x);
  auto it = members_.lower_bound(bound);
  if (it != members_.end()) return grid_.point(*it);
  if (include_one) return 1.0;
  throw RangeError("KnownIndexSet: no member at or above x");
}

// ---------------------------------------------------------------------------
// PiecewiseLinear

PiecewiseLinear::PiecewiseLinear(std::vector<Breakpoint> breakpoints, bool monotone)
    : points_(std::move(breakpoints)), monotone_(monotone) {
  validate();
}

PiecewiseLinear PiecewiseLinear::zero() { return line(0.0, 0.0); }

PiecewiseLinear PiecewiseLinear::line(double at_zero, double at_one, bool monotone) {
  return PiecewiseLinear({{0.0, at_zero}, {1.0, at_one}}, monotone);
}

void PiecewiseLinear::validate() const {
  if (points_.size() < 2) throw ArgumentError("PiecewiseLinear: need at least two breakpoints");
  if (points_.front().x != 0.0 || points_.back().x != 1.0) {
    throw ArgumentError("PiecewiseLinear: breakpoints must span exactly [0,1]");
  }
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!std::isfinite(points_[i].y)) throw ArgumentError("PiecewiseLinear: non-finite ordinate");
    if (i > 0 && !(points_[i].x > points_[i - 1].x)) {
      throw ArgumentError("PiecewiseLinear: abscissas must be strictly increasing");
    }
    if (monotone_ && i > 0 && points_[i].y < points_[i - 1].y) {
      throw ArgumentError("PiecewiseLinear: monotone function has a decreasing ordinate");
    }
  }
}

std::size_t PiecewiseLinear::segment(double x) const {
  auto it = std::upper_bound(points_.begin(), points_.end(), x,
                             [](double v, const Breakpoint& b) { return v < b.x; });
  std::size_t i = it == points_.begin() ? 0 : static_cast<std::size_t>(it - points_.begin()) - 1;
  return std::min(i, points_.size() - 2);
}

double PiecewiseLinear::eval(double x) const {
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("PiecewiseLinear: x outside [0,1]");
  const std::size_t i = segment(x);
  const Breakpoint& a = points_[i];
  const Breakpoint& b = points_[i + 1];
  if (x == a.x) return a.y;
  if (x == b.x) return b.y;
  return (x - b.x) / (a.x - b.x) * a.y + (a.x - x) / (a.x - b.x) * b.y;
}

PiecewiseLinear PiecewiseLinear::update(double x, double y) const {
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("PiecewiseLinear: x outside [0,1]");
  std::vector<Breakpoint> next = points_;
  auto it = std::lower_bound(next.begin(), next.end(), x,
                             [](const Breakpoint& b, double v) { return b.x < v; });
  if (it != next.end() && it->x == x) {
    it->y = y;
  } else {
    next.insert(it, Breakpoint{x, y});
  }
  return PiecewiseLinear(std::move(next), monotone_);
}

double PiecewiseLinear::integral(double upper) const {
  if (!(upper >= 0.0 && upper <= 1.0)) throw DomainError("PiecewiseLinear: x outside [0,1]");
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
    const Breakpoint& a = points_[i];
    const Breakpoint& b = points_[i + 1];
    if (upper <= a.x) break;
    if (upper >= b.x) {
      total += 0.5 * (b.x - a.x) * (a.y + b.y);
    } else {
      total += 0.5 * (upper - a.x) * (a.y + eval(upper));
      break;
    }
  }
  return total;
}

PiecewiseLinear PiecewiseLinear::plus_linear(double slope) const {
  std::vector<Breakpoint> next = points_;
  for (Breakpoint& b : next) b.y += slope * b.x;
  return PiecewiseLinear(std::move(next), monotone_ && slope >= 0.0);
}

double PiecewiseLinear::min_slope() const {
  double best = (points_[1].y - points_[0].y) / (points_[1].x - points_[0].x);
  for (std::size_t i = 1; i + 1 < points_.size(); ++i) {
    best = std::min(best, (points_[i + 1].y - points_[i].y) / (points_[i + 1].x - points_[i].x));
  }
  return best;
}

double PiecewiseLinear::slope_at(double x) const {
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("PiecewiseLinear: x outside [0,1]");
  const std::size_t i = segment(x);
  return (points_[i + 1].y - points_[i].y) / (points_[i + 1].x - points_[i].x);
}

void PiecewiseLinear::write_csv(std::ostream& out) const {
  out << "x,y\n";
  char line[96];
  for (const Breakpoint& b : points_) {
    std::snprintf(line, sizeof line, "%.12g,%.12g\n", b.x, b.y);
    out << line;
  }
}

}  // namespace taxlearn
