#include "wclust/centrex.hpp"

#include "wclust/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace wclust::centrex {

void h_map(const PointSet& points, const statfn::KernelSpec& kernel, std::span<const double> x,
           std::span<double> out) {
    const std::size_t n = points.size();
    const std::size_t d = points.dim();
    if (n == 0) {
        throw std::invalid_argument("h_map: empty point set");
    }
    if (x.size() != d || out.size() != d) {
        throw std::invalid_argument("h_map: dimension mismatch");
    }

    thread_local std::vector<double> log_w;
    log_w.resize(n);
    double max_log = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        log_w[i] = statfn::log_weight(kernel, squared_distance(points.row(i), x));
        max_log = std::max(max_log, log_w[i]);
    }

    // Accumulate into a local buffer so that `out` may alias `x`.
    thread_local Vec acc;
    acc.assign(d, 0.0);
    double denom = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = std::exp(log_w[i] - max_log);
        if (w == 0.0) continue;
        denom += w;
        const auto y = points.row(i);
        for (std::size_t k = 0; k < d; ++k) {
            acc[k] += w * y[k];
        }
    }
    for (std::size_t k = 0; k < d; ++k) {
        out[k] = acc[k] / denom;
    }
}

Vec h_map(const PointSet& points, const statfn::KernelSpec& kernel, std::span<const double> x) {
    Vec out(points.dim());
    h_map(points, kernel, x, out);
    return out;
}

FixedPoint fixed_point(const PointSet& points, const statfn::KernelSpec& kernel,
                       std::span<const double> init, double epsilon, int max_iter) {
    if (!(epsilon > 0.0)) {
        throw std::invalid_argument("fixed_point: epsilon must be positive");
    }
    if (max_iter < 1) {
        throw std::invalid_argument("fixed_point: max_iter must be at least 1");
    }
    FixedPoint fp;
    fp.centroid.assign(init.begin(), init.end());
    Vec next(fp.centroid.size());
    for (int it = 1; it <= max_iter; ++it) {
        h_map(points, kernel, fp.centroid, next);
        const double step = distance(next, fp.centroid);
        fp.centroid.swap(next);
        fp.iterations = it;
        if (step <= epsilon) {
            fp.converged = true;
            break;
        }
    }
    return fp;
}

std::vector<std::size_t> mark(const PointSet& points, std::span<const double> centroid,
                              const wald::WaldConfig& marking) {
    if (static_cast<std::size_t>(marking.dim) != points.dim() || centroid.size() != points.dim()) {
        throw std::invalid_argument("mark: dimension mismatch");
    }
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (wald::decide_norm(marking, distance(points.row(i), centroid)) == wald::Decision::AcceptH0) {
            out.push_back(i);
        }
    }
    return out;
}

FusionResult fuse(std::vector<Vec> centroids, std::vector<double> counts, double r, double gamma, int dim) {
    if (centroids.empty()) {
        throw std::invalid_argument("fuse: no centroids");
    }
    if (counts.size() != centroids.size()) {
        throw std::invalid_argument("fuse: one support count per centroid is required");
    }
    for (double c : counts) {
        if (!(c > 0.0)) throw std::invalid_argument("fuse: support counts must be positive");
    }
    const double mu = statfn::threshold_mu(dim, gamma);

    FusionResult out;
    out.origin.resize(centroids.size());
    for (std::size_t i = 0; i < out.origin.size(); ++i) out.origin[i] = i;

    bool merged = true;
    while (merged) {
        merged = false;
        for (std::size_t k1 = 0; k1 < centroids.size() && !merged; ++k1) {
            for (std::size_t k2 = k1 + 1; k2 < centroids.size(); ++k2) {
                const double limit = wald::fusion_sigma(r, counts[k1], counts[k2]) * mu;
                if (distance(centroids[k1], centroids[k2]) > limit) continue;
                for (std::size_t k = 0; k < centroids[k1].size(); ++k) {
                    centroids[k1][k] = 0.5 * (centroids[k1][k] + centroids[k2][k]);
                }
                counts[k1] += counts[k2];
                centroids.erase(centroids.begin() + static_cast<std::ptrdiff_t>(k2));
                counts.erase(counts.begin() + static_cast<std::ptrdiff_t>(k2));
                out.origin.erase(out.origin.begin() + static_cast<std::ptrdiff_t>(k2));
                merged = true;
                break;
            }
        }
    }
    out.centroids = std::move(centroids);
    out.counts = std::move(counts);
    return out;
}

std::vector<int> classify(const PointSet& points, const std::vector<Vec>& centroids) {
    if (centroids.empty()) {
        throw std::invalid_argument("classify: no centroids");
    }
    std::vector<int> labels(points.size(), 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto y = points.row(i);
        double best = squared_distance(y, centroids[0]);
        for (std::size_t k = 1; k < centroids.size(); ++k) {
            const double dk = squared_distance(y, centroids[k]);
            if (dk < best) {
                best = dk;
                labels[i] = static_cast<int>(k);
            }
        }
    }
    return labels;
}

ClusteringResult run_centrex(const Dataset& data, const Options& options, ClusteringState* trace) {
    data.validate();
    const PointSet points = data.normalized_points();
    const std::size_t n = points.size();
    const int dim = static_cast<int>(points.dim());

    const statfn::KernelSpec kernel = options.kernel.value_or(statfn::KernelSpec::wald(dim));
    kernel.validate();
    if (kernel.dim != dim) {
        throw std::invalid_argument("run_centrex: kernel dimension " + std::to_string(kernel.dim) +
                                    " does not match data dimension " + std::to_string(dim));
    }
    const auto marking = wald::WaldConfig::make(dim, options.gamma, options.marking_sigma0);

    ClusteringState state;
    state.marked.assign(n, false);
    state.epsilon = options.epsilon;
    state.max_iter = options.max_iter;

    Rng rng(options.seed);
    ClusteringResult result;
    std::vector<double> supports;
    std::vector<std::size_t> unmarked(n);
    for (std::size_t i = 0; i < n; ++i) unmarked[i] = i;

    while (!unmarked.empty()) {
        const std::size_t star = unmarked[uniform_index(rng, unmarked.size())];
        FixedPoint fp = fixed_point(points, kernel, points.row(star), options.epsilon, options.max_iter);

        auto accepted = mark(points, fp.centroid, marking);
        if (!std::binary_search(accepted.begin(), accepted.end(), star)) {
            accepted.insert(std::lower_bound(accepted.begin(), accepted.end(), star), star);
        }
        for (std::size_t i : accepted) state.marked[i] = true;

        supports.push_back(static_cast<double>(accepted.size()));
        result.iterations_per_centroid.push_back(fp.iterations);
        state.centroids.push_back(fp.centroid);
        state.marked_sets.push_back(std::move(accepted));
        state.initializations.push_back(star);

        std::erase_if(unmarked, [&](std::size_t i) { return state.marked[i]; });
    }

    const double r2 = options.r_squared.value_or(statfn::r_squared(kernel).value);
    FusionResult fused = fuse(state.centroids, supports, std::sqrt(r2), options.gamma, dim);
    result.assignments = classify(points, fused.centroids);

    const double scale = data.normalized ? 1.0 : data.sigma;
    result.centroids = std::move(fused.centroids);
    for (auto& c : result.centroids) {
        for (double& v : c) v *= scale;
    }
    for (double c : fused.counts) {
        result.support_counts.push_back(static_cast<std::size_t>(std::llround(c)));
    }
    result.k_hat = result.centroids.size();

    if (trace) *trace = std::move(state);
    return result;
}

double sigma_lim(const std::vector<Vec>& true_centroids, double gamma, int dim) {
    if (true_centroids.size() < 2) {
        throw std::invalid_argument("sigma_lim: at least two centroids are required");
    }
    double min_dist = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < true_centroids.size(); ++k) {
        for (std::size_t l = k + 1; l < true_centroids.size(); ++l) {
            min_dist = std::min(min_dist, distance(true_centroids[k], true_centroids[l]));
        }
    }
    return min_dist / statfn::threshold_mu(dim, gamma);
}

double estimate_sigma_post(const Dataset& data, const ClusteringResult& result) {
    const std::size_t n = data.size();
    const std::size_t d = data.dim();
    if (result.assignments.size() != n) {
        throw std::invalid_argument("estimate_sigma_post: one assignment per point is required");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const int a = result.assignments[i];
        if (a < 0 || static_cast<std::size_t>(a) >= result.centroids.size()) {
            throw std::invalid_argument("estimate_sigma_post: assignment out of range");
        }
        acc += squared_distance(data.points.row(i), result.centroids[static_cast<std::size_t>(a)]);
    }
    const double unit = data.normalized ? data.sigma : 1.0;
    return unit * std::sqrt(acc / static_cast<double>(n * d));
}

}  // namespace wclust::centrex
