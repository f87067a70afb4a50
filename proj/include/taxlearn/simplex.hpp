#pragma once

#include <optional>
#include <vector>

namespace taxlearn {

/// Dense phase-1 simplex: finds x >= 0 with A x = b, or nullopt when the
/// system is infeasible. Bland's rule keeps it from cycling. `A` is row-major.
std::optional<std::vector<double>> find_feasible_point(const std::vector<std::vector<double>>& A,
                                                       const std::vector<double>& b,
                                                       double tol = 1e-11);

}  // namespace taxlearn
