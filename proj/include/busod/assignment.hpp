#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace busod::assign {

// Dense row-major cost matrix; entries must be finite and >= 0.
struct CostMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> d;

    CostMatrix() = default;
    CostMatrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), d(r * c, fill) {}

    double& at(std::size_t r, std::size_t c) { return d[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return d[r * cols + c]; }
};

using Matching = std::vector<std::pair<int, int>>;

// Minimum-cost bipartite matching over pairs with cost <= gate.
// Cardinality is maximized first, then total cost minimized; among optima the
// lexicographically smallest (row, col) pair set is returned. Pairs above the
// gate are never matched.
Matching solve_assignment(const CostMatrix& costs, double gate);

}  // namespace busod::assign
