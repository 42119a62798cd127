#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>

#include "busod/assignment.hpp"
#include "support/oracles.hpp"

using busod::assign::CostMatrix;
using busod::assign::Matching;
using busod::assign::solve_assignment;

namespace {

CostMatrix from_rows(const std::vector<std::vector<double>>& rows) {
    CostMatrix m(rows.size(), rows.empty() ? 0 : rows[0].size());
    for (size_t r = 0; r < m.rows; ++r)
        for (size_t c = 0; c < m.cols; ++c) m.at(r, c) = rows[r][c];
    return m;
}

Matching sorted(Matching m) {
    std::sort(m.begin(), m.end());
    return m;
}

}  // namespace

TEST_CASE("two-by-two diagonal optimum") {
    auto m = from_rows({{0.1, 0.9}, {0.9, 0.1}});
    CHECK(sorted(solve_assignment(m, 0.5)) == Matching{{0, 0}, {1, 1}});
}

TEST_CASE("single entry above the gate stays unmatched") {
    auto m = from_rows({{0.9}});
    CHECK(solve_assignment(m, 0.5).empty());
}

TEST_CASE("total cost beats greedy row minima") {
    // Greedy on row 1 would grab (1,1)=0.21 after (0,0)=0.2; the optimum is
    // still {(0,0),(1,1)} = 0.41 against the swap at 0.55.
    auto m = from_rows({{0.2, 0.3}, {0.25, 0.21}});
    CHECK(sorted(solve_assignment(m, 1.0)) == Matching{{0, 0}, {1, 1}});
}

TEST_CASE("rectangular matrices fully match the smaller side") {
    auto wide = from_rows({{0.3, 0.1, 0.2}});
    CHECK(solve_assignment(wide, 1.0) == Matching{{0, 1}});

    auto tall = from_rows({{0.3}, {0.1}, {0.2}});
    CHECK(solve_assignment(tall, 1.0) == Matching{{1, 0}});
}

TEST_CASE("lexicographic tie-break among equal-cost optima") {
    // Both diagonals cost 1.0; the pair set {(0,0),(1,1)} sorts first.
    auto m = from_rows({{0.5, 0.5}, {0.5, 0.5}});
    CHECK(sorted(solve_assignment(m, 1.0)) == Matching{{0, 0}, {1, 1}});
}

TEST_CASE("empty matrices and gate-excluded rows") {
    CHECK(solve_assignment(CostMatrix(0, 0), 1.0).empty());
    CHECK(solve_assignment(CostMatrix(3, 0), 1.0).empty());
    // Row 1 has no admissible column; the others still match.
    auto m = from_rows({{0.1, 2.0, 2.0}, {2.0, 2.0, 2.0}, {2.0, 0.2, 2.0}});
    CHECK(sorted(solve_assignment(m, 1.0)) == Matching{{0, 0}, {2, 1}});
}

TEST_CASE("matching is injective and respects the gate") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> cost(0.0, 2.0);
    std::uniform_int_distribution<int> dim(1, 7);
    for (int trial = 0; trial < 300; ++trial) {
        CostMatrix m(dim(rng), dim(rng));
        for (double& x : m.d) x = cost(rng);
        auto match = solve_assignment(m, 1.0);
        std::set<int> rows, cols;
        for (auto [r, c] : match) {
            CHECK(m.at(r, c) <= 1.0);
            CHECK(rows.insert(r).second);
            CHECK(cols.insert(c).second);
        }
    }
}

TEST_CASE("solver equals the exhaustive optimum on random gated matrices") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> cost(0.0, 2.0);
    std::uniform_int_distribution<int> dim(1, 7);
    std::uniform_real_distribution<double> gate_d(0.3, 2.0);
    for (int trial = 0; trial < 1000; ++trial) {
        CostMatrix m(dim(rng), dim(rng));
        for (double& x : m.d) x = cost(rng);
        double gate = gate_d(rng);
        auto got = sorted(solve_assignment(m, gate));
        auto want = oracle::solve_assignment_brute(m, gate);

        // Cardinality and total cost must agree exactly with brute force;
        // the pair set itself must match under the lexicographic rule.
        REQUIRE(got.size() == want.size());
        double got_cost = 0.0, want_cost = 0.0;
        for (auto [r, c] : got) got_cost += m.at(r, c);
        for (auto [r, c] : want) want_cost += m.at(r, c);
        CHECK(got_cost == doctest::Approx(want_cost).epsilon(1e-9));
        CHECK(Matching(want.begin(), want.end()) == got);
    }
}
