#pragma once

#include "wclust/point_set.hpp"

#include <cstddef>
#include <vector>

namespace wclust {

struct ClusteringResult {
    std::vector<Vec> centroids;                 // k_hat vectors, input units
    std::vector<int> assignments;               // one entry per point, in [0, k_hat)
    std::vector<std::size_t> support_counts;    // per centroid
    std::size_t k_hat = 0;
    std::vector<int> iterations_per_centroid;   // one per estimation, before fusion
};

}  // namespace wclust
