#include "wclust/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace wclust::metrics {

CountMatrix contingency(const std::vector<int>& true_labels, const std::vector<int>& assignments,
                        std::size_t k_true, std::size_t k_hat) {
    if (true_labels.size() != assignments.size()) {
        throw std::invalid_argument("contingency: label vectors differ in length (" +
                                    std::to_string(true_labels.size()) + " vs " +
                                    std::to_string(assignments.size()) + ")");
    }
    CountMatrix m(k_true, std::vector<long long>(k_hat, 0));
    for (std::size_t i = 0; i < true_labels.size(); ++i) {
        const int t = true_labels[i];
        const int a = assignments[i];
        if (t < 0 || static_cast<std::size_t>(t) >= k_true || a < 0 || static_cast<std::size_t>(a) >= k_hat) {
            throw std::invalid_argument("contingency: label out of range at index " + std::to_string(i));
        }
        ++m[static_cast<std::size_t>(t)][static_cast<std::size_t>(a)];
    }
    return m;
}

// Hungarian method with potentials (shortest augmenting paths) on an n x m
// cost matrix with n <= m. Costs are negated counts.
Matching max_weight_matching(const CountMatrix& weights) {
    Matching out;
    const std::size_t rows = weights.size();
    const std::size_t cols = rows == 0 ? 0 : weights[0].size();
    out.match.assign(rows, -1);
    if (rows == 0 || cols == 0) return out;

    const bool transposed = rows > cols;
    const std::size_t n = transposed ? cols : rows;
    const std::size_t m = transposed ? rows : cols;
    auto cost = [&](std::size_t i, std::size_t j) -> long long {
        return transposed ? -weights[j][i] : -weights[i][j];
    };

    constexpr long long inf = std::numeric_limits<long long>::max() / 4;
    std::vector<long long> u(n + 1, 0), v(m + 1, 0), minv(m + 1);
    std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
    std::vector<char> used(m + 1);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            long long delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const long long cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= m; ++j) {
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

    for (std::size_t j = 1; j <= m; ++j) {
        if (p[j] == 0) continue;
        const std::size_t i = p[j] - 1;
        const std::size_t c = j - 1;
        if (transposed) {
            out.match[c] = static_cast<int>(i);
            out.total += weights[c][i];
        } else {
            out.match[i] = static_cast<int>(c);
            out.total += weights[i][c];
        }
    }
    return out;
}

double classification_error(const std::vector<int>& true_labels, const std::vector<int>& assignments,
                            std::size_t k_true, std::size_t k_hat) {
    if (true_labels.empty()) return 0.0;
    const auto m = contingency(true_labels, assignments, k_true, k_hat);
    const auto best = max_weight_matching(m);
    return 1.0 - static_cast<double>(best.total) / static_cast<double>(true_labels.size());
}

double distortion(const PointSet& points, const std::vector<Vec>& centroids, const std::vector<int>& assignments,
                  bool squared) {
    if (assignments.size() != points.size()) throw std::invalid_argument("distortion: one assignment per point required");
    if (points.empty()) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const int a = assignments[i];
        if (a < 0 || static_cast<std::size_t>(a) >= centroids.size()) {
            throw std::invalid_argument("distortion: assignment out of range at index " + std::to_string(i));
        }
        const double d2 = squared_distance(points.row(i), centroids[static_cast<std::size_t>(a)]);
        acc += squared ? d2 : std::sqrt(d2);
    }
    return acc / static_cast<double>(points.size());
}

}  // namespace wclust::metrics
