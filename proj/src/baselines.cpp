#include "wclust/baselines.hpp"

#include "wclust/centrex.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace wclust::baselines {
namespace {

void check_k(const PointSet& points, std::size_t k) {
    if (k == 0) throw std::invalid_argument("kmeans: k must be positive");
    if (k > points.size()) {
        throw std::invalid_argument("kmeans: k = " + std::to_string(k) + " exceeds the number of points (" +
                                    std::to_string(points.size()) + ")");
    }
}

Vec to_vec(std::span<const double> s) { return Vec(s.begin(), s.end()); }

int nearest(std::span<const double> y, const std::vector<Vec>& centroids) {
    int best = 0;
    double best_d = squared_distance(y, centroids[0]);
    for (std::size_t k = 1; k < centroids.size(); ++k) {
        const double dk = squared_distance(y, centroids[k]);
        if (dk < best_d) {
            best_d = dk;
            best = static_cast<int>(k);
        }
    }
    return best;
}

double sse(const PointSet& points, const std::vector<Vec>& centroids, const std::vector<int>& labels) {
    double acc = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        acc += squared_distance(points.row(i), centroids[static_cast<std::size_t>(labels[i])]);
    }
    return acc;
}

}  // namespace

std::vector<Vec> uniform_seed(const PointSet& points, std::size_t k, Rng& rng) {
    check_k(points, k);
    std::vector<std::size_t> idx(points.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<Vec> seeds;
    for (std::size_t j = 0; j < k; ++j) {
        const std::size_t pick = j + uniform_index(rng, idx.size() - j);
        std::swap(idx[j], idx[pick]);
        seeds.push_back(to_vec(points.row(idx[j])));
    }
    return seeds;
}

std::vector<Vec> kmeanspp_seed(const PointSet& points, std::size_t k, Rng& rng) {
    check_k(points, k);
    const std::size_t n = points.size();
    std::vector<bool> chosen(n, false);
    std::vector<double> d2(n, std::numeric_limits<double>::infinity());
    std::vector<Vec> seeds;

    std::size_t next = uniform_index(rng, n);
    for (std::size_t j = 0; j < k; ++j) {
        chosen[next] = true;
        seeds.push_back(to_vec(points.row(next)));
        if (j + 1 == k) break;

        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            d2[i] = std::min(d2[i], squared_distance(points.row(i), seeds.back()));
            if (!chosen[i]) total += d2[i];
        }
        if (total > 0.0) {
            const double target = uniform_unit(rng) * total;
            double run = 0.0;
            next = n;
            std::size_t last_positive = n;
            for (std::size_t i = 0; i < n; ++i) {
                if (chosen[i] || d2[i] <= 0.0) continue;
                last_positive = i;
                run += d2[i];
                if (run > target) {
                    next = i;
                    break;
                }
            }
            if (next == n) next = last_positive;
        } else {
            // Every remaining point duplicates a seed; pick uniformly among them.
            std::vector<std::size_t> rest;
            for (std::size_t i = 0; i < n; ++i) {
                if (!chosen[i]) rest.push_back(i);
            }
            next = rest[uniform_index(rng, rest.size())];
        }
    }
    return seeds;
}

LloydRun lloyd(const PointSet& points, std::vector<Vec> seeds, int max_iter) {
    check_k(points, seeds.size());
    const std::size_t n = points.size();
    const std::size_t d = points.dim();
    const std::size_t k = seeds.size();

    LloydRun run;
    std::vector<Vec>& centroids = seeds;
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = nearest(points.row(i), centroids);

    std::vector<std::size_t> sizes(k);
    for (int it = 1; it <= max_iter; ++it) {
        run.iterations = it;
        // Update step, repairing clusters left without points.
        for (bool repaired = true; repaired;) {
            repaired = false;
            std::fill(sizes.begin(), sizes.end(), 0);
            for (int l : labels) ++sizes[static_cast<std::size_t>(l)];
            for (std::size_t c = 0; c < k && !repaired; ++c) {
                if (sizes[c] != 0) continue;
                std::size_t far = 0;
                double far_d = -1.0;
                for (std::size_t i = 0; i < n; ++i) {
                    if (sizes[static_cast<std::size_t>(labels[i])] < 2) continue;
                    const double di = squared_distance(points.row(i), centroids[static_cast<std::size_t>(labels[i])]);
                    if (di > far_d) {
                        far_d = di;
                        far = i;
                    }
                }
                centroids[c] = to_vec(points.row(far));
                labels[far] = static_cast<int>(c);
                repaired = true;
            }
        }
        for (auto& c : centroids) std::fill(c.begin(), c.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            auto& c = centroids[static_cast<std::size_t>(labels[i])];
            const auto y = points.row(i);
            for (std::size_t j = 0; j < d; ++j) c[j] += y[j];
        }
        for (std::size_t c = 0; c < k; ++c) {
            for (double& v : centroids[c]) v /= static_cast<double>(sizes[c]);
        }
        run.sse_history.push_back(sse(points, centroids, labels));

        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            const int l = nearest(points.row(i), centroids);
            if (l != labels[i]) {
                labels[i] = l;
                changed = true;
            }
        }
        if (!changed) break;
    }

    run.result.assignments = std::move(labels);
    run.result.support_counts.assign(k, 0);
    for (int l : run.result.assignments) ++run.result.support_counts[static_cast<std::size_t>(l)];
    run.result.centroids = std::move(centroids);
    run.result.k_hat = k;
    run.result.iterations_per_centroid.assign(k, run.iterations);
    run.objective = mean_distance(points, run.result.centroids, run.result.assignments);
    return run;
}

namespace {
LloydRun replicate(const PointSet& points, const KMeansConfig& config, std::size_t index) {
    Rng rng(derive_seed(config.seed, {index}));
    auto seeds = config.init == KMeansInit::PlusPlus ? kmeanspp_seed(points, config.k, rng)
                                                     : uniform_seed(points, config.k, rng);
    return lloyd(points, std::move(seeds), config.max_iter);
}
}  // namespace

LloydRun kmeans_lloyd(const PointSet& points, const KMeansConfig& config) {
    check_k(points, config.k);
    return replicate(points, config, 0);
}

ClusteringResult kmeans_lloyd(const Dataset& data, const KMeansConfig& config) {
    data.validate();
    return kmeans_lloyd(data.points, config).result;
}

ClusteringResult kmeans_replicated(const Dataset& data, const KMeansConfig& config) {
    data.validate();
    check_k(data.points, config.k);
    if (config.replicates < 1) throw std::invalid_argument("kmeans: replicates must be at least 1");
    LloydRun best = replicate(data.points, config, 0);
    for (int r = 1; r < config.replicates; ++r) {
        LloydRun cand = replicate(data.points, config, static_cast<std::size_t>(r));
        if (cand.objective < best.objective) best = std::move(cand);
    }
    return std::move(best.result);
}

ClusteringResult centrex_gaussian(const Dataset& data, double gamma, double epsilon, double beta,
                                  std::uint64_t seed) {
    if (!(beta > 0.0)) throw std::invalid_argument("centrex_gaussian: beta must be positive");
    centrex::Options opt;
    opt.gamma = gamma;
    opt.epsilon = epsilon;
    opt.seed = seed;
    // The pipeline works on raw / sigma, where exp(-beta |x_raw|^2 / sigma^2)
    // becomes exp(-beta |x|^2).
    opt.kernel = statfn::KernelSpec::gaussian(static_cast<int>(data.dim()), beta, 1.0);
    return centrex::run_centrex(data, opt);
}

double mean_distance(const PointSet& points, const std::vector<Vec>& centroids, const std::vector<int>& assignments) {
    double acc = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        acc += distance(points.row(i), centroids[static_cast<std::size_t>(assignments[i])]);
    }
    return acc / static_cast<double>(points.size());
}

}  // namespace wclust::baselines
