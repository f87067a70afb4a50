#include "taxlearn/simplex.hpp"

#include <algorithm>
#include <cmath>

#include "taxlearn/errors.hpp"

namespace taxlearn {
namespace {

class Tableau {
 public:
  Tableau(const std::vector<std::vector<double>>& A, const std::vector<double>& b)
      : rows_(A.size()), cols_(A.empty() ? 0 : A.front().size()) {
    const std::size_t width = cols_ + rows_ + 1;
    t_.assign(rows_ + 1, std::vector<double>(width, 0.0));
    basis_.resize(rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
      if (A[r].size() != cols_) throw ArgumentError("simplex: ragged constraint matrix");
      const double sign = b[r] < 0.0 ? -1.0 : 1.0;
      for (std::size_t c = 0; c < cols_; ++c) t_[r][c] = sign * A[r][c];
      t_[r][cols_ + r] = 1.0;
      t_[r][width - 1] = sign * b[r];
      basis_[r] = cols_ + r;
    }
    // Phase-1 objective row: reduced costs of sum(artificials).
    for (std::size_t c = 0; c < width; ++c) {
      if (c >= cols_ && c < cols_ + rows_) continue;
      double s = 0.0;
      for (std::size_t r = 0; r < rows_; ++r) s += t_[r][c];
      t_[rows_][c] = -s;
    }
  }

  void solve(double tol) {
    const std::size_t rhs = cols_ + rows_;
    for (std::size_t guard = 0; guard < 50000; ++guard) {
      std::size_t enter = rhs;
      for (std::size_t c = 0; c < rhs; ++c) {
        if (t_[rows_][c] < -tol) {
          enter = c;
          break;
        }
      }
      if (enter == rhs) return;
      std::size_t leave = rows_;
      double best_ratio = 0.0;
      for (std::size_t r = 0; r < rows_; ++r) {
        if (t_[r][enter] <= tol) continue;
        const double ratio = t_[r][rhs] / t_[r][enter];
        if (leave == rows_ || ratio < best_ratio - tol ||
            (std::abs(ratio - best_ratio) <= tol && basis_[r] < basis_[leave])) {
          leave = r;
          best_ratio = ratio;
        }
      }
      if (leave == rows_) return;  // unbounded direction; cannot happen in phase 1
      pivot(leave, enter);
    }
    throw DecompositionError("simplex: iteration limit reached");
  }

  // Pivot remaining zero-level artificials out of the basis where possible.
  void expel_artificials(double tol) {
    for (std::size_t r = 0; r < rows_; ++r) {
      if (basis_[r] < cols_) continue;
      for (std::size_t c = 0; c < cols_; ++c) {
        if (std::abs(t_[r][c]) > tol) {
          pivot(r, c);
          break;
        }
      }
    }
  }

  double objective() const { return -t_[rows_][cols_ + rows_]; }

  std::vector<double> solution() const {
    std::vector<double> x(cols_, 0.0);
    for (std::size_t r = 0; r < rows_; ++r) {
      if (basis_[r] < cols_) x[basis_[r]] = std::max(0.0, t_[r][cols_ + rows_]);
    }
    return x;
  }

 private:
  void pivot(std::size_t row, std::size_t col) {
    const double p = t_[row][col];
    for (double& v : t_[row]) v /= p;
    for (std::size_t r = 0; r <= rows_; ++r) {
      if (r == row) continue;
      const double factor = t_[r][col];
      if (factor == 0.0) continue;
      for (std::size_t c = 0; c < t_[r].size(); ++c) t_[r][c] -= factor * t_[row][c];
    }
    basis_[row] = col;
  }

  std::size_t rows_;
  std::size_t cols_;
  std::vector<std::vector<double>> t_;
  std::vector<std::size_t> basis_;
};

}  // namespace

std::optional<std::vector<double>> find_feasible_point(const std::vector<std::vector<double>>& A,
                                                       const std::vector<double>& b, double tol) {
  if (A.size() != b.size()) throw ArgumentError("simplex: row count differs from rhs size");
  if (A.empty()) return std::vector<double>{};
  Tableau tableau(A, b);
  tableau.solve(tol);
  double scale = 1.0;
  for (double v : b) scale = std::max(scale, std::abs(v));
  if (tableau.objective() > 1e-9 * scale) return std::nullopt;
  tableau.expel_artificials(1e-9);
  return tableau.solution();
}

}  // namespace taxlearn
