#include "busod/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "busod/errors.hpp"

namespace busod::assign {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kCostTol = 1e-9;

struct Solution {
    int cardinality = 0;
    double cost = 0.0;
    Matching pairs;
};

// Jonker-Volgenant style shortest augmenting path, minimization, n <= m.
// a is 1-indexed (n+1) x (m+1). Returns col -> row assignment in p.
void jv_solve(const std::vector<std::vector<double>>& a, int n, int m,
              std::vector<int>& p) {
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    p.assign(m + 1, 0);
    std::vector<int> way(m + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(m + 1, kInf);
        std::vector<char> used(m + 1, 0);
        do {
            used[j0] = 1;
            int i0 = p[j0], j1 = -1;
            double delta = kInf;
            for (int j = 1; j <= m; ++j) {
                if (used[j]) continue;
                double cur = a[i0][j] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
}

// Optimal (max cardinality, then min cost) matching over the given row/col
// subsets. Unmatchable pairs have allowed=false.
Solution solve_subset(const CostMatrix& costs,
                      const std::vector<char>& allowed,
                      const std::vector<int>& rows,
                      const std::vector<int>& cols) {
    Solution sol;
    int n = static_cast<int>(rows.size());
    int m = static_cast<int>(cols.size());
    if (n == 0) return sol;

    double maxc = 0.0;
    for (int r : rows)
        for (int c : cols)
            if (allowed[r * costs.cols + c])
                maxc = std::max(maxc, costs.at(r, c));
    // Dummy cost dominates any real total so cardinality is maximized first;
    // forbid cost dominates any all-dummy total so it is never chosen.
    double dummy = n * maxc + 1.0;
    double forbid = (n + 1) * (dummy + 1.0);

    // One private dummy column per row allows any row to stay unmatched.
    int mm = m + n;
    std::vector<std::vector<double>> a(n + 1, std::vector<double>(mm + 1, forbid));
    for (int i = 1; i <= n; ++i) {
        for (int j = 1; j <= m; ++j) {
            int r = rows[i - 1], c = cols[j - 1];
            a[i][j] = allowed[r * costs.cols + c] ? costs.at(r, c) : forbid;
        }
        a[i][m + i] = dummy;
    }
    std::vector<int> p;
    jv_solve(a, n, mm, p);
    for (int j = 1; j <= m; ++j) {
        int i = p[j];
        if (i == 0) continue;
        int r = rows[i - 1], c = cols[j - 1];
        if (!allowed[r * costs.cols + c]) continue;
        sol.pairs.emplace_back(r, c);
        sol.cost += costs.at(r, c);
        ++sol.cardinality;
    }
    std::sort(sol.pairs.begin(), sol.pairs.end());
    return sol;
}

}  // namespace

Matching solve_assignment(const CostMatrix& costs, double gate) {
    for (double x : costs.d) {
        if (!std::isfinite(x) || x < 0.0)
            throw DataError("cost matrix entries must be finite and nonnegative");
    }
    std::size_t R = costs.rows, C = costs.cols;
    std::vector<char> allowed(R * C, 0);
    for (std::size_t i = 0; i < R * C; ++i) allowed[i] = costs.d[i] <= gate;

    std::vector<int> all_rows(R), all_cols(C);
    for (std::size_t i = 0; i < R; ++i) all_rows[i] = static_cast<int>(i);
    for (std::size_t j = 0; j < C; ++j) all_cols[j] = static_cast<int>(j);
    Solution best = solve_subset(costs, allowed, all_rows, all_cols);

    // Fix rows in order, always taking the smallest column that preserves the
    // optimum; this yields the lexicographically smallest optimal pair set.
    Matching fixed;
    double fixed_cost = 0.0;
    std::vector<char> col_used(C, 0);
    for (int r = 0; r < static_cast<int>(R); ++r) {
        std::vector<int> rem_rows;
        for (int rr = r + 1; rr < static_cast<int>(R); ++rr) rem_rows.push_back(rr);
        int chosen = -1;
        for (int c = 0; c < static_cast<int>(C); ++c) {
            if (col_used[c] || !allowed[r * C + c]) continue;
            std::vector<int> rem_cols;
            for (int cc = 0; cc < static_cast<int>(C); ++cc)
                if (!col_used[cc] && cc != c) rem_cols.push_back(cc);
            Solution rest = solve_subset(costs, allowed, rem_rows, rem_cols);
            int card = static_cast<int>(fixed.size()) + 1 + rest.cardinality;
            double cost = fixed_cost + costs.at(r, c) + rest.cost;
            if (card == best.cardinality && cost <= best.cost + kCostTol) {
                chosen = c;
                break;
            }
        }
        if (chosen >= 0) {
            fixed.emplace_back(r, chosen);
            fixed_cost += costs.at(r, chosen);
            col_used[chosen] = 1;
        }
    }
    return fixed;
}

}  // namespace busod::assign
