#include "wclust/centrex.hpp"
#include "wclust/harness.hpp"
#include "wclust/metrics.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace wclust;
using namespace wclust::centrex;

namespace {

const std::vector<Vec> kSquare{{10, 20}, {20, 10}, {10, 10}, {20, 20}};
const std::vector<Vec> kSkewed{{13, 20}, {20, 10}, {10, 10}, {17, 20}};

Dataset balanced(const std::vector<Vec>& centroids, int per_cluster, double sigma, std::uint64_t seed) {
    return harness::generate_dataset(centroids, std::vector<int>(centroids.size(), per_cluster), sigma, seed);
}

double pe_of(const Dataset& data, const ClusteringResult& r) {
    return metrics::classification_error(*data.labels, r.assignments, 4, r.k_hat);
}

}  // namespace

TEST_CASE("h_map small cases") {
    const auto k = statfn::KernelSpec::wald(2);
    const auto single = PointSet::from_rows({{3.0, -1.0}});
    for (Vec x : {Vec{0, 0}, Vec{100, 100}, Vec{3, -1}}) {
        const auto h = h_map(single, k, x);
        CHECK(h[0] == doctest::Approx(3.0));
        CHECK(h[1] == doctest::Approx(-1.0));
    }
    const auto sym = PointSet::from_rows({{1.5, -2.0}, {-1.5, 2.0}});
    const auto h0 = h_map(sym, k, Vec{0, 0});
    CHECK(std::abs(h0[0]) < 1e-15);
    CHECK(std::abs(h0[1]) < 1e-15);
    CHECK_THROWS(h_map(PointSet(2), k, Vec{0, 0}));
}

TEST_CASE("h_map matches a direct evaluation") {
    std::mt19937_64 rng(42);
    std::normal_distribution<double> g(0.0, 2.0);
    std::vector<Vec> rows(10, Vec(2));
    for (auto& r : rows) {
        for (auto& v : r) v = g(rng);
    }
    const auto pts = PointSet::from_rows(rows);
    for (Vec x : {Vec{0, 0}, Vec{1, -1}, Vec{3, 2.5}}) {
        const auto h = h_map(pts, statfn::KernelSpec::wald(2), x);
        const auto ref = oracles::direct_weighted_mean(rows, x);
        CHECK(std::abs(h[0] - ref[0]) < 1e-12);
        CHECK(std::abs(h[1] - ref[1]) < 1e-12);
    }
}

TEST_CASE("h_map far from every point is still finite") {
    const auto pts = PointSet::from_rows({{0, 0}, {1, 0}});
    const auto h = h_map(pts, statfn::KernelSpec::wald(2), Vec{1e4, 0});
    CHECK(std::isfinite(h[0]));
    CHECK(h[0] == doctest::Approx(1.0));
}

TEST_CASE("fixed_point") {
    const auto k = statfn::KernelSpec::wald(2);
    const auto single = PointSet::from_rows({{2.0, 5.0}});
    const auto fp = fixed_point(single, k, Vec{2.0, 5.0}, 1e-2);
    CHECK(fp.iterations == 1);
    CHECK(fp.converged);
    CHECK(fp.centroid == Vec{2.0, 5.0});
    CHECK_THROWS(fixed_point(single, k, Vec{0, 0}, 0.0));

    int close = 0;
    for (int t = 0; t < 100; ++t) {
        const auto data = harness::generate_dataset({{10, 10}}, {400}, 1.0, 500 + t);
        const auto pts = data.normalized_points();
        std::mt19937_64 rng(t);
        const auto start = pts.row(std::uniform_int_distribution<std::size_t>(0, 399)(rng));
        const auto r = fixed_point(pts, k, start, 1e-2);
        close += distance(r.centroid, Vec{10, 10}) < 0.5;
        if (r.converged) {
            CHECK(distance(h_map(pts, k, r.centroid), r.centroid) <= 1e-2);
        }
    }
    CHECK(close >= 99);
}

TEST_CASE("fixed_point reports non-convergence without throwing") {
    const auto pts = PointSet::from_rows({{0, 0}, {6, 0}});
    const auto r = fixed_point(pts, statfn::KernelSpec::wald(2), Vec{2.0, 0.0}, 1e-300, 3);
    CHECK_FALSE(r.converged);
    CHECK(r.iterations == 3);
}

TEST_CASE("mark") {
    const auto cfg = wald::WaldConfig::make(2, 1e-3);
    const auto pts = PointSet::from_rows({{1, 1}, {1 + 2 * cfg.threshold, 1}});
    const auto m = mark(pts, Vec{1, 1}, cfg);
    REQUIRE(m.size() == 1);
    CHECK(m[0] == 0);

    const auto data = harness::generate_dataset({{5, -5}}, {10000}, 1.0, 77);
    const double frac = mark(data.points, Vec{5, -5}, cfg).size() / 10000.0;
    CHECK(std::abs(frac - 0.999) <= 4 * std::sqrt(0.999 * 0.001 / 10000));
}

TEST_CASE("fuse") {
    const double r = std::sqrt(1.125);
    auto same = fuse({{1, 2}, {1, 2}}, {10, 10}, r, 1e-3, 2);
    REQUIRE(same.centroids.size() == 1);
    CHECK(same.centroids[0] == Vec{1, 2});
    CHECK(same.counts[0] == 20);

    auto far = fuse({{0, 0}, {1e6, 0}}, {5, 5}, r, 1e-3, 2);
    CHECK(far.centroids.size() == 2);

    auto near = fuse({{0, 0}, {0.30, 0}}, {100, 100}, r, 1e-3, 2);
    REQUIRE(near.centroids.size() == 1);
    CHECK(near.centroids[0][0] == doctest::Approx(0.15));
    CHECK(near.origin[0] == 0);

    auto apart = fuse({{0, 0}, {0.56, 0}}, {100, 100}, r, 1e-3, 2);
    CHECK(apart.centroids.size() == 2);
}

TEST_CASE("classify") {
    const std::vector<Vec> c{{0, 0}, {2, 0}, {5, 5}};
    const auto pts = PointSet::from_rows({{5, 5}, {1, 0}, {2, 0.1}});
    CHECK(classify(pts, c) == std::vector<int>{2, 0, 1});

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-5, 5);
    for (int inst = 0; inst < 1000; ++inst) {
        std::vector<Vec> cs(1 + inst % 6, Vec(3));
        for (auto& v : cs) {
            for (auto& x : v) x = u(rng);
        }
        std::vector<Vec> rows(20, Vec(3));
        for (auto& v : rows) {
            for (auto& x : v) x = u(rng);
        }
        const auto got = classify(PointSet::from_rows(rows), cs);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            int best = 0;
            for (std::size_t k = 1; k < cs.size(); ++k) {
                if (squared_distance(rows[i], cs[k]) < squared_distance(rows[i], cs[best])) best = static_cast<int>(k);
            }
            CHECK(got[i] == best);
        }
    }
}

TEST_CASE("run_centrex on well separated clusters") {
    int good = 0;
    for (int t = 0; t < 100; ++t) {
        const auto data = balanced(kSquare, 100, 1.0, 1000 + t);
        Options opt;
        opt.seed = t;
        const auto r = run_centrex(data, opt);
        good += r.k_hat == 4 && pe_of(data, r) < 0.01;
    }
    CHECK(good >= 95);
}

TEST_CASE("run_centrex merges close clusters above sigma_lim") {
    int fewer = 0;
    for (int t = 0; t < 30; ++t) {
        const auto data = balanced(kSkewed, 100, 2.0, 2000 + t);
        Options opt;
        opt.seed = t;
        fewer += run_centrex(data, opt).k_hat < 4;
    }
    CHECK(fewer > 15);
}

TEST_CASE("run_centrex degenerate input and termination") {
    Dataset one;
    one.points = PointSet::from_rows({{4, 2}});
    one.sigma = 2.0;
    const auto r = run_centrex(one, {});
    CHECK(r.k_hat == 1);
    CHECK(r.centroids[0] == Vec{4, 2});

    Dataset dup;
    dup.points = PointSet::from_rows({{1, 1}, {1, 1}, {1, 1}});
    ClusteringState st;
    const auto rd = run_centrex(dup, {}, &st);
    CHECK(rd.k_hat == 1);
    CHECK(st.centroids.size() == 1);

    // Every round marks its own seed, so rounds never exceed N.
    const auto data = balanced(kSquare, 10, 3.0, 9);
    run_centrex(data, {}, &st);
    CHECK(st.centroids.size() <= data.size());
    for (std::size_t k = 0; k < st.initializations.size(); ++k) {
        const auto& s = st.marked_sets[k];
        CHECK(std::find(s.begin(), s.end(), st.initializations[k]) != s.end());
    }
}

TEST_CASE("run_centrex is scale consistent and deterministic") {
    const auto raw = balanced(kSquare, 50, 1.7, 4);
    Dataset norm;
    norm.points = raw.normalized_points();
    norm.sigma = 1.0;
    norm.normalized = true;
    Options opt;
    opt.seed = 99;
    const auto a = run_centrex(raw, opt);
    const auto b = run_centrex(norm, opt);
    CHECK(a.assignments == b.assignments);
    REQUIRE(a.k_hat == b.k_hat);
    for (std::size_t k = 0; k < a.k_hat; ++k) {
        CHECK(a.centroids[k][0] == doctest::Approx(b.centroids[k][0] * 1.7).epsilon(1e-12));
        CHECK(a.centroids[k][1] == doctest::Approx(b.centroids[k][1] * 1.7).epsilon(1e-12));
    }
    const auto c = run_centrex(raw, opt);
    CHECK(c.centroids == a.centroids);
    CHECK(c.assignments == a.assignments);
}

TEST_CASE("sigma_lim") {
    CHECK(std::abs(sigma_lim(kSquare, 1e-3, 2) - 2.69) <= 0.01);
    CHECK(std::abs(sigma_lim(kSkewed, 1e-3, 2) - 1.08) <= 0.01);
    std::vector<Vec> scaled = kSkewed;
    for (auto& c : scaled) {
        for (auto& v : c) v *= 3.5;
    }
    CHECK(sigma_lim(scaled, 1e-3, 2) == doctest::Approx(3.5 * sigma_lim(kSkewed, 1e-3, 2)));
    CHECK_THROWS(sigma_lim({{1, 1}}, 1e-3, 2));
}

TEST_CASE("estimate_sigma_post") {
    ClusteringResult exact;
    exact.centroids = {{1, 1}, {5, 5}};
    exact.assignments = {0, 1, 0};
    exact.k_hat = 2;
    Dataset d;
    d.points = PointSet::from_rows({{1, 1}, {5, 5}, {1, 1}});
    CHECK(estimate_sigma_post(d, exact) == 0.0);

    const auto data = harness::generate_dataset({{3, 3}}, {10000}, 1.0, 8);
    ClusteringResult truth;
    truth.centroids = {{3, 3}};
    truth.assignments.assign(10000, 0);
    truth.k_hat = 1;
    CHECK(std::abs(estimate_sigma_post(data, truth) - 1.0) <= 0.02);
}

TEST_CASE("post-clustering sigma is underestimated below sigma_lim") {
    double sum = 0.0;
    const int trials = 20;
    for (int t = 0; t < trials; ++t) {
        const auto data = balanced(kSquare, 100, 1.5, 3000 + t);
        Options opt;
        opt.seed = t;
        sum += estimate_sigma_post(data, run_centrex(data, opt));
    }
    CHECK(sum / trials <= 1.5);
}
