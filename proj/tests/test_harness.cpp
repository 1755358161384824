#include "wclust/centrex.hpp"
#include "wclust/harness.hpp"
#include "wclust/metrics.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

using namespace wclust;
using namespace wclust::harness;

TEST_CASE("classification_error examples") {
    const std::vector<int> truth{0, 0, 1, 1, 2, 2, 3, 3};
    CHECK(metrics::classification_error(truth, {2, 2, 0, 0, 3, 3, 1, 1}, 4, 4) == 0.0);
    CHECK(metrics::classification_error(truth, std::vector<int>(8, 0), 4, 1) == doctest::Approx(0.75));
    CHECK(metrics::classification_error(truth, {0, 1, 2, 3, 4, 5, 6, 7}, 4, 8) == doctest::Approx(0.5));
    CHECK_THROWS(metrics::classification_error(truth, {0, 1}, 4, 4));
    CHECK_THROWS(metrics::classification_error(truth, std::vector<int>(8, 5), 4, 4));
}

TEST_CASE("classification_error is invariant under relabeling") {
    std::mt19937_64 rng(2);
    for (int inst = 0; inst < 200; ++inst) {
        const int kt = 2 + inst % 4, kh = 1 + inst % 6;
        std::vector<int> t(60), a(60);
        for (auto& v : t) v = static_cast<int>(rng() % kt);
        for (auto& v : a) v = static_cast<int>(rng() % kh);
        std::vector<int> pt(kt), ph(kh);
        std::iota(pt.begin(), pt.end(), 0);
        std::iota(ph.begin(), ph.end(), 0);
        std::shuffle(pt.begin(), pt.end(), rng);
        std::shuffle(ph.begin(), ph.end(), rng);
        auto t2 = t, a2 = a;
        for (auto& v : t2) v = pt[v];
        for (auto& v : a2) v = ph[v];
        CHECK(metrics::classification_error(t, a, kt, kh) == metrics::classification_error(t2, a2, kt, kh));
    }
}

TEST_CASE("matching agrees with exhaustive search") {
    std::mt19937_64 rng(8);
    for (int inst = 0; inst < 500; ++inst) {
        const std::size_t r = 1 + rng() % 6, c = 1 + rng() % 6;
        metrics::CountMatrix m(r, std::vector<long long>(c));
        for (auto& row : m) {
            for (auto& v : row) v = static_cast<long long>(rng() % 50);
        }
        const auto got = metrics::max_weight_matching(m);
        CHECK(got.total == oracles::brute_force_matching(m));
        long long s = 0;
        std::vector<bool> used(c, false);
        for (std::size_t i = 0; i < r; ++i) {
            if (got.match[i] < 0) continue;
            CHECK_FALSE(used[got.match[i]]);
            used[got.match[i]] = true;
            s += m[i][got.match[i]];
        }
        CHECK(s == got.total);
    }
}

TEST_CASE("distortion") {
    const auto pts = PointSet::from_rows({{1, 1}, {2, 2}});
    CHECK(metrics::distortion(pts, {{1, 1}, {2, 2}}, {0, 1}) == 0.0);
    CHECK(metrics::distortion(pts, {{1, 1}}, {0, 0}) == doctest::Approx(std::sqrt(2.0) / 2));
    CHECK(metrics::distortion(pts, {{1, 1}}, {0, 0}, true) == doctest::Approx(1.0));

    const auto d = generate_dataset({{4, -4}}, {10000}, 1.0, 3);
    const double D = metrics::distortion(d.points, {{4, -4}}, std::vector<int>(10000, 0));
    CHECK(std::abs(D - std::sqrt(M_PI / 2)) <= 0.03);
}

TEST_CASE("distortion scales with sigma below sigma_lim") {
    const std::vector<Vec> sq{{10, 20}, {20, 10}, {10, 10}, {20, 20}};
    double d1 = 0, d2 = 0;
    for (int t = 0; t < 10; ++t) {
        centrex::Options o;
        o.seed = t;
        const auto a = generate_dataset(sq, {100, 100, 100, 100}, 0.5, 60 + t);
        const auto b = generate_dataset(sq, {100, 100, 100, 100}, 1.0, 60 + t);
        const auto ra = centrex::run_centrex(a, o);
        const auto rb = centrex::run_centrex(b, o);
        d1 += metrics::distortion(a.points, ra.centroids, ra.assignments);
        d2 += metrics::distortion(b.points, rb.centroids, rb.assignments);
    }
    CHECK(d2 / d1 == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("generate_dataset") {
    ExperimentConfig c;
    c.finalize();
    const auto layout = resolve_centroids(c);
    CHECK(layout == std::vector<Vec>{{10, 20}, {20, 10}, {10, 10}, {20, 20}});

    const auto zero = generate_dataset(c, 0.0, 1);
    REQUIRE(zero.size() == 400);
    for (std::size_t i = 0; i < zero.size(); ++i) {
        const auto& th = layout[(*zero.labels)[i]];
        CHECK(zero.points.row(i)[0] == th[0]);
        CHECK(zero.points.row(i)[1] == th[1]);
    }

    const auto big = generate_dataset({{1, -2, 3}}, {10000}, 2.0, 9);
    for (std::size_t j = 0; j < 3; ++j) {
        double m = 0;
        for (std::size_t i = 0; i < big.size(); ++i) m += big.points.row(i)[j] / big.size();
        CHECK(std::abs(m - std::vector<double>{1, -2, 3}[j]) <= 4 * 2.0 / 100.0);
    }

    CHECK_THROWS(generate_dataset({{1, 2}, {3}}, {5, 5}, 1.0, 0));
    CHECK_THROWS(generate_dataset({{1, 2}}, {5, 5}, 1.0, 0));
    CHECK_THROWS(generate_dataset({{1, 2}}, {5}, -1.0, 0));
}

TEST_CASE("high-dimensional layout") {
    ExperimentConfig c;
    c.scenario = Scenario::Dim100K10;
    c.finalize();
    CHECK(c.d == 100);
    CHECK(c.K == 10);
    CHECK(c.N == 100);
    const auto a = resolve_centroids(c);
    const auto b = resolve_centroids(c);
    CHECK(a == b);
    REQUIRE(a.size() == 10);
    double ss = 0;
    for (const auto& v : a) {
        for (double x : v) ss += x * x;
    }
    CHECK(std::sqrt(ss / 1000) == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("config parsing") {
    const auto c = parse_config(R"({"scenario":"dim2k4","sigmas":[1,2],"trials":3,
        "algorithms":["centrex","kmeans100",{"name":"decentrex","label":"dx","T":100,"L":10}],
        "decentrex":{"fanout":2},"seed":12})");
    CHECK(c.N == 400);
    CHECK(c.gamma == 1e-3);
    CHECK(c.epsilon == 1e-2);
    REQUIRE(c.algorithms.size() == 3);
    CHECK(c.algorithms[1].kind == AlgorithmKind::KMeans);
    CHECK(c.algorithms[1].replicates == 100);
    CHECK(c.algorithms[2].label == "dx");
    CHECK(c.algorithms[2].slots == 100);
    CHECK(c.algorithms[2].update_threshold == 10);
    CHECK(c.algorithms[2].fanout == 2);

    const auto custom = parse_config(R"({"scenario":"custom","centroids":[[0,0,0],[5,5,5]],"N":10})");
    CHECK(custom.d == 3);
    CHECK(custom.K == 2);
    CHECK(custom.algorithms.size() == 1);

    CHECK_THROWS_AS(parse_config("{"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config(R"({"sigmas":[1],"bogus":1})"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config(R"({"N":401})"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config(R"({"sigmas":[0]})"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config(R"({"trials":0})"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config(R"({"algorithm":"dbscan"})"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config(R"({"algorithms":["centrex","centrex"]})"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config(R"({"d":3})"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config(R"({"algorithm":"decentrex","decentrex":{"L":500}})"), std::invalid_argument);
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), std::runtime_error);
}

TEST_CASE("seed override from the environment") {
    auto c = parse_config(R"({"seed":4})");
    ::setenv("WCLUST_SEED", "991", 1);
    apply_env_overrides(c);
    CHECK(c.seed == 991);
    ::setenv("WCLUST_SEED", "x1", 1);
    CHECK_THROWS(apply_env_overrides(c));
    ::unsetenv("WCLUST_SEED");
    apply_env_overrides(c);
    CHECK(c.seed == 991);
}

TEST_CASE("seed streams are distinct and stable") {
    CHECK(data_seed(1, 0, 0) != data_seed(1, 0, 1));
    CHECK(data_seed(1, 0, 0) != data_seed(1, 1, 0));
    CHECK(algorithm_seed(1, 0, 0, "centrex") != algorithm_seed(1, 0, 0, "kmeans10"));
    CHECK(algorithm_seed(1, 2, 3, "centrex") == algorithm_seed(1, 2, 3, "centrex"));
}

TEST_CASE("run_experiment") {
    auto c = parse_config(R"({"sigmas":[1.5],"trials":1,"algorithms":["centrex","kmeans10","decentrex"],"seed":2})");
    const auto r = run_experiment(c);
    REQUIRE(r.records.size() == 3);
    CHECK(r.records[0].algorithm == "centrex");
    CHECK(r.records[2].metrics.messages > 0);
    CHECK(r.records[0].metrics.messages == 0);
    CHECK(r.records[0].metrics.runtime_s == 0.0);

    auto multi = parse_config(R"({"sigmas":[1.0,2.0],"trials":3,"algorithms":["centrex","kmeans"],"seed":5})");
    std::ostringstream a, b, p;
    write_csv(a, run_experiment(multi).records);
    write_csv(b, run_experiment(multi).records);
    CHECK(a.str() == b.str());
    multi.threads = 3;
    write_csv(p, run_experiment(multi).records);
    CHECK(p.str() == a.str());
    CHECK(a.str().rfind("algorithm,sigma,trial,k_hat,pe,distortion,messages,runtime_s\n", 0) == 0);

    std::ostringstream js;
    write_summary_json(js, run_experiment(multi).records);
    const auto j = nlohmann::json::parse(js.str());
    REQUIRE(j["groups"].size() == 4);
    CHECK(j["groups"][0]["trials"] == 3);
    CHECK(j["groups"][0]["pe"].contains("mean"));
    CHECK(j["groups"][0]["pe"].contains("std"));

    multi.record_runtime = true;
    multi.threads = 1;
    CHECK(run_experiment(multi).records[0].metrics.runtime_s > 0.0);
}

TEST_CASE("results are written to disk") {
    const auto dir = std::filesystem::temp_directory_path() / "wclust_test_results";
    std::filesystem::remove_all(dir);
    auto c = parse_config(R"({"sigmas":[1.0],"trials":2})");
    write_results(dir, run_experiment(c));
    CHECK(std::filesystem::exists(dir / "results.csv"));
    CHECK(std::filesystem::exists(dir / "summary.json"));
    std::filesystem::remove_all(dir);
    CHECK_THROWS_AS(write_results("/proc/wclust/forbidden", run_experiment(c)), std::runtime_error);
}

TEST_CASE("dataset csv round trip") {
    const auto d = generate_dataset({{1, 2}, {-3, 0.5}}, {3, 4}, 0.7, 11);
    std::stringstream ss;
    write_dataset_csv(ss, d);
    const auto back = read_dataset_csv(ss, 0.7);
    REQUIRE(back.size() == d.size());
    CHECK(back.labels == d.labels);
    for (std::size_t i = 0; i < d.size(); ++i) {
        CHECK(back.points.row(i)[0] == d.points.row(i)[0]);
        CHECK(back.points.row(i)[1] == d.points.row(i)[1]);
    }

    std::istringstream unlabeled("a,b,c\n1,2,3\n4, 5 ,6\r\n\n");
    const auto u = read_dataset_csv(unlabeled, 1.0);
    CHECK(u.dim() == 3);
    CHECK(u.size() == 2);
    CHECK_FALSE(u.labels.has_value());

    std::istringstream empty("");
    CHECK_THROWS_AS(read_dataset_csv(empty, 1.0), std::invalid_argument);
    std::istringstream ragged("x,y\n1,2\n3\n");
    CHECK_THROWS_AS(read_dataset_csv(ragged, 1.0), std::invalid_argument);
    std::istringstream bad("x,y\n1,abc\n");
    CHECK_THROWS_AS(read_dataset_csv(bad, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(read_dataset_csv(std::filesystem::path("/nonexistent.csv"), 1.0), std::runtime_error);
}
