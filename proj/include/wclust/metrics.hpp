#pragma once

#include "wclust/point_set.hpp"

#include <cstddef>
#include <vector>

namespace wclust::metrics {

using CountMatrix = std::vector<std::vector<long long>>;

// rows = true clusters, columns = estimated clusters.
CountMatrix contingency(const std::vector<int>& true_labels, const std::vector<int>& assignments,
                        std::size_t k_true, std::size_t k_hat);

// One-to-one matching of rows to columns maximizing the matched total on a
// rectangular matrix. match[r] is the column for row r, or -1 when r has no
// partner (more rows than columns).
struct Matching {
    std::vector<int> match;
    long long total = 0;
};
Matching max_weight_matching(const CountMatrix& weights);

// 1 - (correctly assigned under the best one-to-one matching) / N.
double classification_error(const std::vector<int>& true_labels, const std::vector<int>& assignments,
                            std::size_t k_true, std::size_t k_hat);

// Mean distance from each point to its assigned centroid; mean squared
// distance when `squared` is set.
double distortion(const PointSet& points, const std::vector<Vec>& centroids, const std::vector<int>& assignments,
                  bool squared = false);

}  // namespace wclust::metrics
