#include "wclust/harness.hpp"

#include "wclust/centrex.hpp"
#include "wclust/metrics.hpp"
#include "wclust/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace wclust::harness {

using nlohmann::json;

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

decentrex::FusionSupport parse_fusion_support(const std::string& s) {
    const auto v = lower(s);
    if (v == "network_size" || v == "networksize") return decentrex::FusionSupport::NetworkSize;
    if (v == "aggregated") return decentrex::FusionSupport::Aggregated;
    throw std::invalid_argument("unknown fusion_support '" + s + "' (expected network_size or aggregated)");
}

baselines::KMeansInit parse_init(const std::string& s) {
    const auto v = lower(s);
    if (v == "uniform" || v == "random") return baselines::KMeansInit::UniformRandom;
    if (v == "plusplus" || v == "kmeans++" || v == "pp") return baselines::KMeansInit::PlusPlus;
    throw std::invalid_argument("unknown k-means init '" + s + "' (expected uniform or plusplus)");
}

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) throw std::invalid_argument("unknown key '" + key + "' in " + where);
    }
}

struct AlgorithmDefaults {
    double beta = 0.5;
    int slots = 300;
    int update_threshold = 30;
    int fanout = 1;
    decentrex::FusionSupport fusion_support = decentrex::FusionSupport::Aggregated;
};

AlgorithmSpec spec_from_json(const json& j, const AlgorithmDefaults& def) {
    AlgorithmSpec spec;
    if (j.is_string()) {
        spec = AlgorithmSpec::parse(j.get<std::string>());
    } else if (j.is_object()) {
        reject_unknown_keys(j, {"name", "label", "replicates", "init", "beta", "T", "L", "fanout", "fusion_support"},
                            "algorithm entry");
        if (!j.contains("name")) throw std::invalid_argument("algorithm entry needs a 'name'");
        spec = AlgorithmSpec::parse(j.at("name").get<std::string>());
    } else {
        throw std::invalid_argument("algorithm entries must be strings or objects");
    }
    spec.beta = def.beta;
    spec.slots = def.slots;
    spec.update_threshold = def.update_threshold;
    spec.fanout = def.fanout;
    spec.fusion_support = def.fusion_support;
    if (j.is_object()) {
        if (j.contains("label")) spec.label = j["label"].get<std::string>();
        if (j.contains("replicates")) spec.replicates = j["replicates"].get<int>();
        if (j.contains("init")) spec.init = parse_init(j["init"].get<std::string>());
        if (j.contains("beta")) spec.beta = j["beta"].get<double>();
        if (j.contains("T")) spec.slots = j["T"].get<int>();
        if (j.contains("L")) spec.update_threshold = j["L"].get<int>();
        if (j.contains("fanout")) spec.fanout = j["fanout"].get<int>();
        if (j.contains("fusion_support")) spec.fusion_support = parse_fusion_support(j["fusion_support"].get<std::string>());
    }
    return spec;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

}  // namespace

AlgorithmSpec AlgorithmSpec::parse(const std::string& name) {
    AlgorithmSpec spec;
    spec.label = name;
    const auto n = lower(name);
    if (n == "centrex") {
        spec.kind = AlgorithmKind::Centrex;
    } else if (n == "centrex_gaussian") {
        spec.kind = AlgorithmKind::CentrexGaussian;
    } else if (n == "decentrex") {
        spec.kind = AlgorithmKind::Decentrex;
    } else if (n == "kmeanspp" || n == "kmeans++") {
        spec.kind = AlgorithmKind::KMeans;
        spec.init = baselines::KMeansInit::PlusPlus;
    } else if (n.rfind("kmeans", 0) == 0) {
        spec.kind = AlgorithmKind::KMeans;
        const auto digits = n.substr(6);
        if (!digits.empty()) {
            int r = 0;
            const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), r);
            if (ec != std::errc() || ptr != digits.data() + digits.size() || r < 1) {
                throw std::invalid_argument("bad replicate count in algorithm '" + name + "'");
            }
            spec.replicates = r;
        }
    } else {
        throw std::invalid_argument("unknown algorithm '" + name +
                                    "' (expected centrex, centrex_gaussian, kmeans<R>, kmeanspp or decentrex)");
    }
    return spec;
}

void ExperimentConfig::finalize() {
    auto set_or_check = [](int& field, int value, const char* name) {
        if (field == 0) field = value;
        if (field != value) {
            throw std::invalid_argument(std::string("config: ") + name + " = " + std::to_string(field) +
                                        " conflicts with the scenario (" + std::to_string(value) + ")");
        }
    };
    switch (scenario) {
    case Scenario::Dim2K4: {
        set_or_check(d, 2, "d");
        set_or_check(K, 4, "K");
        if (N == 0) N = 400;
        if (!A) A = 10.0;
        if (!centroids.empty()) throw std::invalid_argument("config: the Dim2K4 scenario has a fixed layout; use Custom");
        break;
    }
    case Scenario::Dim100K10:
        set_or_check(d, 100, "d");
        set_or_check(K, 10, "K");
        if (N == 0) N = 100;
        if (!A) A = 2.0;
        if (!centroids.empty()) throw std::invalid_argument("config: the Dim100K10 scenario has a Gaussian layout; use Custom");
        break;
    case Scenario::Custom:
        if (!centroids.empty()) {
            set_or_check(K, static_cast<int>(centroids.size()), "K");
            set_or_check(d, static_cast<int>(centroids[0].size()), "d");
            for (const auto& c : centroids) {
                if (static_cast<int>(c.size()) != d) throw std::invalid_argument("config: centroids differ in dimension");
            }
        } else if (d <= 0 || K <= 0 || !A) {
            throw std::invalid_argument("config: Custom scenario needs explicit centroids or d, K and A");
        }
        break;
    }
    if (A && !(*A > 0.0)) throw std::invalid_argument("config: A must be positive");
    if (!cluster_sizes.empty()) {
        if (static_cast<int>(cluster_sizes.size()) != K) throw std::invalid_argument("config: cluster_sizes needs K entries");
        int total = 0;
        for (int s : cluster_sizes) {
            if (s < 0) throw std::invalid_argument("config: negative cluster size");
            total += s;
        }
        if (N == 0) N = total;
        if (N != total) throw std::invalid_argument("config: cluster_sizes do not sum to N");
    } else if (N <= 0 || N % K != 0) {
        throw std::invalid_argument("config: N = " + std::to_string(N) + " is not a positive multiple of K = " +
                                    std::to_string(K));
    }
    if (sigmas.empty()) throw std::invalid_argument("config: sigmas must not be empty");
    for (double s : sigmas) {
        if (!(s > 0.0) || !std::isfinite(s)) throw std::invalid_argument("config: every sigma must be positive");
    }
    if (trials < 1) throw std::invalid_argument("config: trials must be positive");
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("config: gamma must lie in (0, 1)");
    if (!(epsilon > 0.0)) throw std::invalid_argument("config: epsilon must be positive");
    if (threads < 1) throw std::invalid_argument("config: threads must be at least 1");
    if (algorithms.empty()) algorithms.push_back(AlgorithmSpec::parse("centrex"));
    std::set<std::string> labels;
    for (const auto& a : algorithms) {
        if (!labels.insert(a.label).second) throw std::invalid_argument("config: duplicate algorithm label '" + a.label + "'");
        if (a.kind == AlgorithmKind::Decentrex) {
            decentrex::NetworkConfig nc;
            nc.slots = a.slots;
            nc.update_threshold = a.update_threshold;
            nc.fanout = a.fanout;
            nc.validate(static_cast<std::size_t>(N));
        }
        if (a.kind == AlgorithmKind::KMeans && a.replicates < 1) throw std::invalid_argument("config: replicates must be positive");
        if (a.kind == AlgorithmKind::CentrexGaussian && !(a.beta > 0.0)) throw std::invalid_argument("config: beta must be positive");
    }
}

ExperimentConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: malformed JSON: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
    reject_unknown_keys(j,
                        {"scenario", "d", "K", "N", "centroids", "A", "layout_seed", "cluster_sizes", "sigmas", "sigma",
                         "trials", "gamma", "epsilon", "algorithm", "algorithms", "beta", "decentrex", "seed", "threads",
                         "record_runtime", "distortion_squared", "data_file", "event_log"},
                        "config");
    ExperimentConfig c;
    try {
        if (j.contains("scenario")) {
            const auto s = lower(j["scenario"].get<std::string>());
            if (s == "dim2k4") c.scenario = Scenario::Dim2K4;
            else if (s == "dim100k10") c.scenario = Scenario::Dim100K10;
            else if (s == "custom") c.scenario = Scenario::Custom;
            else throw std::invalid_argument("config: unknown scenario '" + s + "'");
        }
        if (j.contains("d")) c.d = j["d"].get<int>();
        if (j.contains("K")) c.K = j["K"].get<int>();
        if (j.contains("N")) c.N = j["N"].get<int>();
        if (j.contains("centroids")) c.centroids = j["centroids"].get<std::vector<Vec>>();
        if (j.contains("A")) c.A = j["A"].get<double>();
        if (j.contains("layout_seed")) c.layout_seed = j["layout_seed"].get<std::uint64_t>();
        if (j.contains("cluster_sizes")) c.cluster_sizes = j["cluster_sizes"].get<std::vector<int>>();
        if (j.contains("sigmas")) c.sigmas = j["sigmas"].get<std::vector<double>>();
        if (j.contains("sigma")) c.sigmas = {j["sigma"].get<double>()};
        if (j.contains("trials")) c.trials = j["trials"].get<int>();
        if (j.contains("gamma")) c.gamma = j["gamma"].get<double>();
        if (j.contains("epsilon")) c.epsilon = j["epsilon"].get<double>();
        if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("threads")) c.threads = j["threads"].get<int>();
        if (j.contains("record_runtime")) c.record_runtime = j["record_runtime"].get<bool>();
        if (j.contains("distortion_squared")) c.distortion_squared = j["distortion_squared"].get<bool>();
        if (j.contains("data_file")) c.data_file = j["data_file"].get<std::string>();
        if (j.contains("event_log")) c.event_log = j["event_log"].get<std::string>();

        AlgorithmDefaults def;
        if (j.contains("beta")) def.beta = j["beta"].get<double>();
        if (j.contains("decentrex")) {
            const auto& dj = j["decentrex"];
            reject_unknown_keys(dj, {"T", "L", "fanout", "fusion_support"}, "decentrex block");
            if (dj.contains("T")) def.slots = dj["T"].get<int>();
            if (dj.contains("L")) def.update_threshold = dj["L"].get<int>();
            if (dj.contains("fanout")) def.fanout = dj["fanout"].get<int>();
            if (dj.contains("fusion_support")) def.fusion_support = parse_fusion_support(dj["fusion_support"].get<std::string>());
        }
        if (j.contains("algorithm")) c.algorithms.push_back(spec_from_json(j["algorithm"], def));
        if (j.contains("algorithms")) {
            if (!j["algorithms"].is_array()) throw std::invalid_argument("config: 'algorithms' must be an array");
            for (const auto& a : j["algorithms"]) c.algorithms.push_back(spec_from_json(a, def));
        }
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    c.finalize();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        auto c = parse_config(ss.str());
        // Relative data paths are taken relative to the config file.
        if (c.data_file && c.data_file->is_relative()) c.data_file = path.parent_path() / *c.data_file;
        return c;
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(path.string() + ": " + e.what());
    }
}

void apply_env_overrides(ExperimentConfig& config) {
    const char* s = std::getenv("WCLUST_SEED");
    if (s == nullptr || *s == '\0') return;
    std::uint64_t v = 0;
    const std::string_view sv(s);
    const auto [ptr, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), v);
    if (ec != std::errc() || ptr != sv.data() + sv.size()) {
        throw std::invalid_argument("WCLUST_SEED must be an unsigned integer, got '" + std::string(sv) + "'");
    }
    config.seed = v;
}

std::vector<Vec> resolve_centroids(const ExperimentConfig& config) {
    if (!config.centroids.empty()) return config.centroids;
    const std::size_t d = static_cast<std::size_t>(config.d);
    const std::size_t K = static_cast<std::size_t>(config.K);
    const double A = config.A.value_or(1.0);
    if (config.scenario == Scenario::Dim2K4) {
        return {{A, 2 * A}, {2 * A, A}, {A, A}, {2 * A, 2 * A}};
    }
    Rng rng(config.layout_seed.value_or(derive_seed(config.seed, {stream_id("layout")})));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<Vec> out(K, Vec(d));
    for (auto& c : out) {
        for (auto& v : c) v = A * normal(rng);
    }
    return out;
}

Dataset generate_dataset(const std::vector<Vec>& centroids, const std::vector<int>& sizes, double sigma,
                         std::uint64_t seed) {
    if (centroids.empty()) throw std::invalid_argument("generate_dataset: no centroids");
    if (sizes.size() != centroids.size()) throw std::invalid_argument("generate_dataset: one size per centroid required");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("generate_dataset: sigma must be >= 0");
    const std::size_t d = centroids[0].size();
    if (d == 0) throw std::invalid_argument("generate_dataset: zero-dimensional centroids");
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Dataset out;
    out.points = PointSet(d);
    out.sigma = sigma;
    std::vector<int> labels;
    Vec y(d);
    for (std::size_t k = 0; k < centroids.size(); ++k) {
        if (centroids[k].size() != d) throw std::invalid_argument("generate_dataset: centroids differ in dimension");
        if (sizes[k] < 0) throw std::invalid_argument("generate_dataset: negative cluster size");
        for (int i = 0; i < sizes[k]; ++i) {
            for (std::size_t j = 0; j < d; ++j) y[j] = centroids[k][j] + sigma * normal(rng);
            out.points.push_back(y);
            labels.push_back(static_cast<int>(k));
        }
    }
    out.labels = std::move(labels);
    return out;
}

Dataset generate_dataset(const ExperimentConfig& config, double sigma, std::uint64_t trial_seed) {
    std::vector<int> sizes = config.cluster_sizes;
    if (sizes.empty()) {
        if (config.K <= 0 || config.N % config.K != 0) throw std::invalid_argument("generate_dataset: N must be a multiple of K");
        sizes.assign(static_cast<std::size_t>(config.K), config.N / config.K);
    }
    return generate_dataset(resolve_centroids(config), sizes, sigma, trial_seed);
}

std::uint64_t data_seed(std::uint64_t root, std::size_t sigma_index, std::size_t trial) {
    return derive_seed(root, {sigma_index, trial, 0});
}

std::uint64_t algorithm_seed(std::uint64_t root, std::size_t sigma_index, std::size_t trial, const std::string& label) {
    return derive_seed(root, {sigma_index, trial, stream_id(label)});
}

AlgorithmRun run_algorithm(const AlgorithmSpec& spec, const ExperimentConfig& config, const Dataset& data,
                           std::uint64_t seed, const decentrex::EventSink& sink) {
    AlgorithmRun run;
    switch (spec.kind) {
    case AlgorithmKind::Centrex: {
        centrex::Options opt;
        opt.gamma = config.gamma;
        opt.epsilon = config.epsilon;
        opt.seed = seed;
        run.result = centrex::run_centrex(data, opt);
        break;
    }
    case AlgorithmKind::CentrexGaussian:
        run.result = baselines::centrex_gaussian(data, config.gamma, config.epsilon, spec.beta, seed);
        break;
    case AlgorithmKind::KMeans: {
        if (config.K <= 0) throw std::invalid_argument("k-means needs K");
        baselines::KMeansConfig kc;
        kc.k = static_cast<std::size_t>(config.K);
        kc.init = spec.init;
        kc.replicates = spec.replicates;
        kc.seed = seed;
        run.result = baselines::kmeans_replicated(data, kc);
        break;
    }
    case AlgorithmKind::Decentrex: {
        decentrex::NetworkConfig nc;
        nc.slots = spec.slots;
        nc.update_threshold = spec.update_threshold;
        nc.fanout = spec.fanout;
        nc.fusion_support = spec.fusion_support;
        nc.seed = seed;
        auto res = decentrex::run_decentrex(data, nc, config.gamma, std::nullopt, sink);
        run.messages = res.total_messages;
        run.result = std::move(res.global);
        break;
    }
    }
    return run;
}

Metrics evaluate(const Dataset& data, const AlgorithmRun& run, bool distortion_squared) {
    Metrics m;
    m.k_hat = run.result.k_hat;
    m.messages = run.messages;
    m.distortion = metrics::distortion(data.points, run.result.centroids, run.result.assignments, distortion_squared);
    if (data.labels) {
        const auto& t = *data.labels;
        const int k_true = t.empty() ? 0 : *std::max_element(t.begin(), t.end()) + 1;
        m.pe = metrics::classification_error(t, run.result.assignments, static_cast<std::size_t>(k_true),
                                             run.result.k_hat);
    } else {
        m.pe = std::nan("");
    }
    return m;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    ExperimentConfig cfg = config;
    cfg.finalize();
    const std::size_t n_sigma = cfg.sigmas.size();
    const std::size_t n_trials = static_cast<std::size_t>(cfg.trials);
    const std::size_t n_alg = cfg.algorithms.size();
    const std::size_t units = n_sigma * n_trials;

    std::ofstream event_out;
    if (cfg.event_log) {
        event_out.open(*cfg.event_log);
        if (!event_out) throw std::runtime_error("cannot open event log " + cfg.event_log->string());
    }

    std::vector<TrialRecord> records(units * n_alg);
    auto run_unit = [&](std::size_t u) {
        const std::size_t s = u / n_trials;
        const std::size_t t = u % n_trials;
        const double sigma = cfg.sigmas[s];
        const Dataset data = generate_dataset(cfg, sigma, data_seed(cfg.seed, s, t));
        for (std::size_t a = 0; a < n_alg; ++a) {
            const auto& spec = cfg.algorithms[a];
            decentrex::EventSink sink;
            if (event_out.is_open()) {
                sink = [&event_out](const decentrex::UpdateEvent& e) { decentrex::write_event_json(event_out, e); };
            }
            const auto t0 = std::chrono::steady_clock::now();
            const auto run = run_algorithm(spec, cfg, data, algorithm_seed(cfg.seed, s, t, spec.label), sink);
            const auto t1 = std::chrono::steady_clock::now();
            auto& rec = records[u * n_alg + a];
            rec.algorithm = spec.label;
            rec.sigma = sigma;
            rec.trial = static_cast<int>(t);
            rec.metrics = evaluate(data, run, cfg.distortion_squared);
            rec.metrics.runtime_s = cfg.record_runtime ? std::chrono::duration<double>(t1 - t0).count() : 0.0;
        }
    };

    // The event log is a single ordered stream, so it forces sequential runs.
    const std::size_t workers = event_out.is_open() ? 1 : std::min<std::size_t>(static_cast<std::size_t>(cfg.threads), units);
    if (workers <= 1) {
        for (std::size_t u = 0; u < units; ++u) run_unit(u);
    } else {
        std::atomic<std::size_t> next{0};
        std::mutex err_mu;
        std::exception_ptr err;
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t u = next++; u < units; u = next++) {
                    try {
                        run_unit(u);
                    } catch (...) {
                        std::lock_guard lock(err_mu);
                        if (!err) err = std::current_exception();
                    }
                }
            });
        }
        for (auto& th : pool) th.join();
        if (err) std::rethrow_exception(err);
    }
    return {std::move(records)};
}

void write_csv(std::ostream& os, const std::vector<TrialRecord>& records) {
    os << "algorithm,sigma,trial,k_hat,pe,distortion,messages,runtime_s\n";
    for (const auto& r : records) {
        os << r.algorithm << ',' << format_double(r.sigma) << ',' << r.trial << ',' << r.metrics.k_hat << ','
           << format_double(r.metrics.pe) << ',' << format_double(r.metrics.distortion) << ',' << r.metrics.messages
           << ',' << format_double(r.metrics.runtime_s) << '\n';
    }
}

void write_summary_json(std::ostream& os, const std::vector<TrialRecord>& records) {
    // Groups in order of first appearance of (algorithm, sigma).
    std::vector<std::pair<std::string, double>> keys;
    for (const auto& r : records) {
        const std::pair<std::string, double> k{r.algorithm, r.sigma};
        if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
    }
    std::stable_sort(keys.begin(), keys.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

    auto stats = [](const std::vector<double>& v) {
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        double ss = 0.0;
        for (double x : v) ss += (x - mean) * (x - mean);
        const double sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
        return json{{"mean", mean}, {"std", sd}};
    };

    json groups = json::array();
    for (const auto& [alg, sigma] : keys) {
        std::vector<double> pe, dist, k, msg, rt;
        for (const auto& r : records) {
            if (r.algorithm != alg || r.sigma != sigma) continue;
            pe.push_back(r.metrics.pe);
            dist.push_back(r.metrics.distortion);
            k.push_back(static_cast<double>(r.metrics.k_hat));
            msg.push_back(static_cast<double>(r.metrics.messages));
            rt.push_back(r.metrics.runtime_s);
        }
        groups.push_back({{"algorithm", alg},
                          {"sigma", sigma},
                          {"trials", pe.size()},
                          {"k_hat", stats(k)},
                          {"pe", stats(pe)},
                          {"distortion", stats(dist)},
                          {"messages", stats(msg)},
                          {"runtime_s", stats(rt)}});
    }
    os << json{{"groups", groups}}.dump(2) << '\n';
}

void write_results(const std::filesystem::path& dir, const ExperimentResult& result) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
    const auto csv = dir / "results.csv";
    std::ofstream c(csv);
    if (!c) throw std::runtime_error("cannot write " + csv.string());
    write_csv(c, result.records);
    const auto js = dir / "summary.json";
    std::ofstream j(js);
    if (!j) throw std::runtime_error("cannot write " + js.string());
    write_summary_json(j, result.records);
    if (!c || !j) throw std::runtime_error("write failed under " + dir.string());
}

Dataset read_dataset_csv(std::istream& is, double sigma) {
    std::string line;
    std::size_t line_no = 0;
    auto next_line = [&]() -> bool {
        while (std::getline(is, line)) {
            ++line_no;
            if (!trim(line).empty()) return true;
        }
        return false;
    };
    if (!next_line()) throw std::invalid_argument("dataset csv: missing header row");
    const auto header = split(line);
    const bool has_label = lower(std::string(header.back())) == "label";
    const std::size_t d = header.size() - (has_label ? 1 : 0);
    if (d == 0) throw std::invalid_argument("dataset csv: no coordinate columns");

    Dataset out;
    out.points = PointSet(d);
    out.sigma = sigma;
    std::vector<int> labels;
    Vec y(d);
    while (next_line()) {
        const auto cells = split(line);
        if (cells.size() != header.size()) {
            throw std::invalid_argument("dataset csv line " + std::to_string(line_no) + ": expected " +
                                        std::to_string(header.size()) + " columns, got " + std::to_string(cells.size()));
        }
        for (std::size_t j = 0; j < d; ++j) {
            const auto cell = cells[j];
            const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), y[j]);
            if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(y[j])) {
                throw std::invalid_argument("dataset csv line " + std::to_string(line_no) + ": bad number '" +
                                            std::string(cell) + "'");
            }
        }
        out.points.push_back(y);
        if (has_label) {
            const auto cell = cells[d];
            int l = 0;
            const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), l);
            if (ec != std::errc() || ptr != cell.data() + cell.size() || l < 0) {
                throw std::invalid_argument("dataset csv line " + std::to_string(line_no) + ": bad label '" +
                                            std::string(cell) + "'");
            }
            labels.push_back(l);
        }
    }
    if (out.points.empty()) throw std::invalid_argument("dataset csv: no data rows");
    if (has_label) out.labels = std::move(labels);
    return out;
}

Dataset read_dataset_csv(const std::filesystem::path& path, double sigma) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset " + path.string());
    try {
        return read_dataset_csv(in, sigma);
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(path.string() + ": " + e.what());
    }
}

void write_dataset_csv(std::ostream& os, const Dataset& data) {
    const std::size_t d = data.dim();
    for (std::size_t j = 0; j < d; ++j) os << (j ? "," : "") << 'x' << j;
    if (data.labels) os << ",label";
    os << '\n';
    char buf[64];
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto y = data.points.row(i);
        for (std::size_t j = 0; j < d; ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", y[j]);
            os << (j ? "," : "") << buf;
        }
        if (data.labels) os << ',' << (*data.labels)[i];
        os << '\n';
    }
}

}  // namespace wclust::harness
