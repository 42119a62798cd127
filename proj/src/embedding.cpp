#include "busod/embedding.hpp"

#include <cmath>

#include "busod/errors.hpp"

namespace busod::emb {

namespace {

// No-validation kernel shared by the serial and parallel builders.
double cosine_distance_raw(std::span<const double> e1,
                           std::span<const double> e2) {
    double dot = 0.0, n1 = 0.0, n2 = 0.0;
    for (std::size_t i = 0; i < e1.size(); ++i) {
        dot += e1[i] * e2[i];
        n1 += e1[i] * e1[i];
        n2 += e2[i] * e2[i];
    }
    double d = 1.0 - dot / (std::sqrt(n1) * std::sqrt(n2));
    if (d < 0.0) d = 0.0;
    if (d > 2.0) d = 2.0;
    return d;
}

void validate_gallery(const std::vector<std::vector<double>>& g,
                      std::size_t dim) {
    for (const auto& e : g) {
        if (e.size() != dim)
            throw InputSchemaError("embedding dimension mismatch in gallery");
        double n = 0.0;
        for (double x : e) n += x * x;
        if (n == 0.0) throw DegenerateEmbedding("zero-norm embedding in gallery");
    }
}

}  // namespace

double cosine_distance(std::span<const double> e1, std::span<const double> e2) {
    if (e1.size() != e2.size())
        throw InputSchemaError("embedding dimension mismatch");
    double n1 = 0.0, n2 = 0.0;
    for (double x : e1) n1 += x * x;
    for (double x : e2) n2 += x * x;
    if (n1 == 0.0 || n2 == 0.0)
        throw DegenerateEmbedding("zero-norm embedding");
    return cosine_distance_raw(e1, e2);
}

assign::CostMatrix cosine_cost_matrix_serial(
    const std::vector<std::vector<double>>& a,
    const std::vector<std::vector<double>>& b) {
    std::size_t dim = a.empty() ? (b.empty() ? 0 : b.front().size())
                                : a.front().size();
    validate_gallery(a, dim);
    validate_gallery(b, dim);
    assign::CostMatrix m(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j)
            m.at(i, j) = cosine_distance_raw(a[i], b[j]);
    return m;
}

assign::CostMatrix cosine_cost_matrix(
    const std::vector<std::vector<double>>& a,
    const std::vector<std::vector<double>>& b) {
    std::size_t dim = a.empty() ? (b.empty() ? 0 : b.front().size())
                                : a.front().size();
    validate_gallery(a, dim);
    validate_gallery(b, dim);
    assign::CostMatrix m(a.size(), b.size());
    const long rows = static_cast<long>(a.size());
#pragma omp parallel for schedule(static)
    for (long i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < b.size(); ++j)
            m.at(static_cast<std::size_t>(i), j) = cosine_distance_raw(a[i], b[j]);
    return m;
}

}  // namespace busod::emb
