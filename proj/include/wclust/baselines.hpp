#pragma once

#include "wclust/clustering_result.hpp"
#include "wclust/point_set.hpp"
#include "wclust/random.hpp"

#include <cstdint>
#include <vector>

// Reference algorithms the Wald-kernel pipeline is compared against.
namespace wclust::baselines {

enum class KMeansInit { UniformRandom, PlusPlus };

struct KMeansConfig {
    std::size_t k = 1;
    KMeansInit init = KMeansInit::UniformRandom;
    int replicates = 1;
    int max_iter = 100;
    std::uint64_t seed = 0;
};

struct LloydRun {
    ClusteringResult result;
    double objective = 0.0;             // mean point-to-centroid distance
    std::vector<double> sse_history;    // sum of squared distances after each update
    int iterations = 0;
};

// k distinct points drawn uniformly.
std::vector<Vec> uniform_seed(const PointSet& points, std::size_t k, Rng& rng);
// D^2 sampling: first seed uniform, then proportional to the squared distance
// to the nearest seed already chosen.
std::vector<Vec> kmeanspp_seed(const PointSet& points, std::size_t k, Rng& rng);

// Lloyd iterations from the given seeds until assignments stop changing.
// A cluster that empties is re-seeded with the point farthest from its centroid.
LloydRun lloyd(const PointSet& points, std::vector<Vec> seeds, int max_iter);

// One seeded run (replicate 0 of kmeans_replicated).
LloydRun kmeans_lloyd(const PointSet& points, const KMeansConfig& config);
ClusteringResult kmeans_lloyd(const Dataset& data, const KMeansConfig& config);

// Best of `replicates` independent runs by mean distance; ties keep the
// earliest replicate.
ClusteringResult kmeans_replicated(const Dataset& data, const KMeansConfig& config);

// The centralized pipeline with exp(-beta |x|^2 / sigma^2) in place of the
// Wald kernel; r^2 is recomputed for that kernel.
ClusteringResult centrex_gaussian(const Dataset& data, double gamma, double epsilon, double beta,
                                  std::uint64_t seed);

double mean_distance(const PointSet& points, const std::vector<Vec>& centroids, const std::vector<int>& assignments);

}  // namespace wclust::baselines
