#pragma once

// Optimal bipartite matching between multisets of complex values.

#include <algorithm>
#include <functional>
#include <limits>
#include <vector>

#include "core.hpp"

namespace eigenpaths {

namespace detail {

/// Minimum-cost perfect assignment (Hungarian method with potentials).
/// Returns assignment[row] = column.
inline std::vector<std::size_t> hungarian(const std::vector<std::vector<double>>& cost) {
    const std::size_t n = cost.size();
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
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
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<std::size_t> assignment(n);
    for (std::size_t j = 1; j <= n; ++j) assignment[p[j] - 1] = j - 1;
    return assignment;
}

inline double assignment_cost(const std::vector<std::vector<double>>& cost, const std::vector<std::size_t>& a) {
    double c = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) c += cost[i][a[i]];
    return c;
}

/// Optimal cost of the subproblem that excludes the given rows and columns.
inline double residual_optimum(const std::vector<std::vector<double>>& cost, const std::vector<char>& row_fixed,
                               const std::vector<char>& col_used) {
    std::vector<std::size_t> rows, cols;
    for (std::size_t i = 0; i < cost.size(); ++i)
        if (!row_fixed[i]) rows.push_back(i);
    for (std::size_t j = 0; j < cost.size(); ++j)
        if (!col_used[j]) cols.push_back(j);
    if (rows.empty()) return 0.0;
    std::vector<std::vector<double>> sub(rows.size(), std::vector<double>(cols.size()));
    for (std::size_t a = 0; a < rows.size(); ++a)
        for (std::size_t b = 0; b < cols.size(); ++b) sub[a][b] = cost[rows[a]][cols[b]];
    return assignment_cost(sub, hungarian(sub));
}

}  // namespace detail

/// Largest size for which the lexicographic tie-break is enforced; above it
/// the Hungarian assignment is returned as is (still deterministic).
inline constexpr std::size_t kLexTieBreakCap = 12;

/// Permutation pi minimizing sum_i |s1[i] - s2[pi(i)]|; among optimal
/// assignments (within a relative 1e-12) the lexicographically smallest.
inline Permutation match_spectra(const std::vector<Complex>& s1, const std::vector<Complex>& s2) {
    if (s1.size() != s2.size()) domain_error("match_spectra: size mismatch");
    const std::size_t n = s1.size();
    if (n == 0) return Permutation{};
    std::vector<std::vector<double>> cost(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) cost[i][j] = std::abs(s1[i] - s2[j]);
    auto best = detail::hungarian(cost);
    if (n > kLexTieBreakCap) return Permutation(best);
    const double opt = detail::assignment_cost(cost, best);
    const double slack = 1e-12 * (1.0 + opt);
    std::vector<char> row_fixed(n, 0), col_used(n, 0);
    std::vector<std::size_t> out(n);
    double fixed_cost = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        row_fixed[i] = 1;
        for (std::size_t j = 0; j < n; ++j) {
            if (col_used[j]) continue;
            col_used[j] = 1;
            const double total = fixed_cost + cost[i][j] + detail::residual_optimum(cost, row_fixed, col_used);
            if (total <= opt + slack) {
                out[i] = j;
                fixed_cost += cost[i][j];
                break;
            }
            col_used[j] = 0;
        }
    }
    return Permutation(std::move(out));
}

inline Permutation match_spectra(const Spectrum& s1, const Spectrum& s2) { return match_spectra(s1.values, s2.values); }

inline double matching_cost(const std::vector<Complex>& s1, const std::vector<Complex>& s2, const Permutation& pi) {
    double c = 0.0;
    for (std::size_t i = 0; i < s1.size(); ++i) c += std::abs(s1[i] - s2[pi(i)]);
    return c;
}

inline double matching_max(const std::vector<Complex>& s1, const std::vector<Complex>& s2, const Permutation& pi) {
    double c = 0.0;
    for (std::size_t i = 0; i < s1.size(); ++i) c = std::max(c, std::abs(s1[i] - s2[pi(i)]));
    return c;
}

namespace detail {

inline bool has_perfect_matching(const std::vector<std::vector<double>>& cost, double threshold) {
    const std::size_t n = cost.size();
    std::vector<std::ptrdiff_t> match_col(n, -1);
    std::vector<char> seen;
    std::function<bool(std::size_t)> augment = [&](std::size_t r) {
        for (std::size_t c = 0; c < n; ++c) {
            if (cost[r][c] > threshold || seen[c]) continue;
            seen[c] = 1;
            if (match_col[c] < 0 || augment(std::size_t(match_col[c]))) {
                match_col[c] = std::ptrdiff_t(r);
                return true;
            }
        }
        return false;
    };
    for (std::size_t r = 0; r < n; ++r) {
        seen.assign(n, 0);
        if (!augment(r)) return false;
    }
    return true;
}

}  // namespace detail

/// Bottleneck assignment: min over bijections of max_i cost[i][pi(i)].
inline double bottleneck_value(const std::vector<std::vector<double>>& cost) {
    std::vector<double> levels;
    for (const auto& row : cost) levels.insert(levels.end(), row.begin(), row.end());
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    std::size_t lo = 0, hi = levels.size() - 1;
    while (lo < hi) {
        const std::size_t mid = (lo + hi) / 2;
        if (detail::has_perfect_matching(cost, levels[mid]))
            hi = mid;
        else
            lo = mid + 1;
    }
    return levels[lo];
}

/// Smallest achievable max |s1[i] - s2[pi(i)]| over bijections pi.
inline double bottleneck_distance(const std::vector<Complex>& s1, const std::vector<Complex>& s2) {
    if (s1.size() != s2.size()) domain_error("bottleneck_distance: size mismatch");
    if (s1.empty()) return 0.0;
    std::vector<std::vector<double>> cost(s1.size(), std::vector<double>(s2.size()));
    for (std::size_t i = 0; i < s1.size(); ++i)
        for (std::size_t j = 0; j < s2.size(); ++j) cost[i][j] = std::abs(s1[i] - s2[j]);
    return bottleneck_value(cost);
}

}  // namespace eigenpaths
