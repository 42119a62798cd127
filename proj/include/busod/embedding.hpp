#pragma once

#include <span>
#include <vector>

#include "busod/assignment.hpp"

namespace busod::emb {

// 1 - cos(e1, e2), in [0, 2]. Throws DegenerateEmbedding on a zero-norm
// vector, InputSchemaError on dimension mismatch.
double cosine_distance(std::span<const double> e1, std::span<const double> e2);

// Pairwise cosine-distance matrix between two embedding galleries.
// The serial variant is the reference; the default one runs the same kernel
// with OpenMP when available. Both produce identical results.
assign::CostMatrix cosine_cost_matrix_serial(
    const std::vector<std::vector<double>>& a,
    const std::vector<std::vector<double>>& b);

assign::CostMatrix cosine_cost_matrix(
    const std::vector<std::vector<double>>& a,
    const std::vector<std::vector<double>>& b);

}  // namespace busod::emb
