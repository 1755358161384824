#pragma once

#include "wclust/clustering_result.hpp"
#include "wclust/point_set.hpp"
#include "wclust/statfn.hpp"
#include "wclust/wald.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

// Centralized clustering: centroids are estimated one at a time as fixed
// points of the robust weighted mean h_N, seeded from not-yet-marked points.
// Every estimate marks the points its Wald test accepts; once all points are
// marked, duplicate estimates are fused and points go to the nearest centroid.
namespace wclust::centrex {

// h_N(x) = sum_n w(|Y_n - x|^2) Y_n / sum_n w(|Y_n - x|^2).
// Weights are accumulated in log space, so far-away x never produce 0/0.
void h_map(const PointSet& points, const statfn::KernelSpec& kernel, std::span<const double> x,
           std::span<double> out);
Vec h_map(const PointSet& points, const statfn::KernelSpec& kernel, std::span<const double> x);

struct FixedPoint {
    Vec centroid;
    int iterations = 0;
    bool converged = false;
};

// Iterates x <- h_N(x) until a step is no longer than epsilon. On
// non-convergence the last iterate is returned with converged = false.
FixedPoint fixed_point(const PointSet& points, const statfn::KernelSpec& kernel,
                       std::span<const double> init, double epsilon, int max_iter = 100);

// Indices of the points whose offset from `centroid` the marking test accepts.
std::vector<std::size_t> mark(const PointSet& points, std::span<const double> centroid,
                              const wald::WaldConfig& marking);

struct FusionResult {
    std::vector<Vec> centroids;
    std::vector<double> counts;
    // Index in the input list of the estimate each survivor descends from.
    std::vector<std::size_t> origin;
};

// Pairwise fusion: while some pair k1 < k2 satisfies
// |c_k1 - c_k2| <= r sqrt(1/n_k1 + 1/n_k2) mu(gamma), the first such pair in
// lexicographic order is replaced by its midpoint (kept at k1, counts summed)
// and the scan restarts.
FusionResult fuse(std::vector<Vec> centroids, std::vector<double> counts, double r, double gamma, int dim);

// Nearest-centroid labels; ties go to the lowest index.
std::vector<int> classify(const PointSet& points, const std::vector<Vec>& centroids);

struct Options {
    double gamma = 1e-3;
    double epsilon = 1e-2;
    int max_iter = 100;
    // Scale of the marking test; 1 is the large-cluster limit of sqrt(1 + r^2 / N_k).
    double marking_sigma0 = 1.0;
    // Kernel in the normalized frame. Defaults to the Wald p-value kernel.
    std::optional<statfn::KernelSpec> kernel;
    // Overrides the quadrature value of r^2 used by the fusion test.
    std::optional<double> r_squared;
    std::uint64_t seed = 0;
};

// Trace of the estimation loop, in the normalized frame.
struct ClusteringState {
    std::vector<bool> marked;
    std::vector<Vec> centroids;
    std::vector<std::vector<std::size_t>> marked_sets;
    std::vector<std::size_t> initializations;
    double epsilon = 0.0;
    int max_iter = 0;
};

// Full pipeline. Centroids in the result use the units of data.points.
ClusteringResult run_centrex(const Dataset& data, const Options& options, ClusteringState* trace = nullptr);

// min_{k != l} |theta_k - theta_l| / mu(gamma).
double sigma_lim(const std::vector<Vec>& true_centroids, double gamma, int dim);

// sqrt( sum_n |Y_n - c(Y_n)|^2 / (N d) ) in raw units.
double estimate_sigma_post(const Dataset& data, const ClusteringResult& result);

}  // namespace wclust::centrex
