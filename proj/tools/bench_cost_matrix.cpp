// Timing comparison of the serial reference cosine cost-matrix kernel against
// the OpenMP-parallel variant, with a correctness cross-check.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <vector>

#include "busod/embedding.hpp"

namespace {

using Clock = std::chrono::steady_clock;

std::vector<std::vector<double>> gallery(std::mt19937_64& rng, int n, int dim) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<std::vector<double>> out(n, std::vector<double>(dim));
    for (auto& v : out) {
        double norm = 0.0;
        for (double& x : v) {
            x = g(rng);
            norm += x * x;
        }
        norm = std::sqrt(norm);
        for (double& x : v) x /= norm;
    }
    return out;
}

double time_ms(const std::function<void()>& fn) {
    auto t0 = Clock::now();
    fn();
    auto t1 = Clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
    int n = argc > 1 ? std::atoi(argv[1]) : 1200;
    int dim = argc > 2 ? std::atoi(argv[2]) : 128;
    std::mt19937_64 rng(7);
    auto a = gallery(rng, n, dim);
    auto b = gallery(rng, n, dim);

    busod::assign::CostMatrix serial(0, 0), parallel(0, 0);
    double t_serial = time_ms(
        [&] { serial = busod::emb::cosine_cost_matrix_serial(a, b); });
    double t_parallel =
        time_ms([&] { parallel = busod::emb::cosine_cost_matrix(a, b); });

    double max_diff = 0.0;
    for (std::size_t i = 0; i < serial.rows; ++i)
        for (std::size_t j = 0; j < serial.cols; ++j)
            max_diff = std::max(max_diff,
                                std::abs(serial.at(i, j) - parallel.at(i, j)));

    std::printf("%dx%d gallery, dim %d\n", n, n, dim);
    std::printf("serial:   %8.2f ms\n", t_serial);
    std::printf("parallel: %8.2f ms\n", t_parallel);
    std::printf("speedup:  %8.2fx\n", t_serial / t_parallel);
    std::printf("max |diff|: %.3e\n", max_diff);
    return max_diff < 1e-12 ? 0 : 1;
}
