#pragma once

#include "wclust/baselines.hpp"
#include "wclust/clustering_result.hpp"
#include "wclust/decentrex.hpp"
#include "wclust/point_set.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace wclust::harness {

enum class Scenario { Dim2K4, Dim100K10, Custom };

enum class AlgorithmKind { Centrex, CentrexGaussian, KMeans, Decentrex };

struct AlgorithmSpec {
    std::string label;
    AlgorithmKind kind = AlgorithmKind::Centrex;
    // KMeans
    int replicates = 1;
    baselines::KMeansInit init = baselines::KMeansInit::UniformRandom;
    // CentrexGaussian
    double beta = 0.5;
    // Decentrex
    int slots = 300;
    int update_threshold = 30;
    int fanout = 1;
    decentrex::FusionSupport fusion_support = decentrex::FusionSupport::Aggregated;

    // "centrex", "centrex_gaussian", "kmeans" (one run), "kmeans<R>",
    // "kmeanspp", "decentrex". Parameters other than R take config defaults.
    static AlgorithmSpec parse(const std::string& name);
};

struct ExperimentConfig {
    Scenario scenario = Scenario::Dim2K4;
    // Zero / unset fields take the scenario defaults in finalize():
    // Dim2K4 is d=2, K=4, N=400, A=10; Dim100K10 is d=100, K=10, N=100, A=2.
    int d = 0;
    int K = 0;
    int N = 0;
    std::vector<Vec> centroids;      // explicit layout; otherwise Gaussian with scale A
    std::optional<double> A;
    std::optional<std::uint64_t> layout_seed;
    std::vector<int> cluster_sizes;  // explicit counts; empty means N/K each
    std::vector<double> sigmas{1.0};
    int trials = 1;
    double gamma = 1e-3;
    double epsilon = 1e-2;
    std::vector<AlgorithmSpec> algorithms;
    std::uint64_t seed = 0;
    int threads = 1;
    bool record_runtime = false;
    bool distortion_squared = false;
    std::optional<std::filesystem::path> data_file;
    std::optional<std::filesystem::path> event_log;

    // Fills scenario defaults (d, K, N, A, layout) and checks invariants.
    // Throws std::invalid_argument on an inconsistent configuration.
    void finalize();
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);
// WCLUST_SEED, when set, replaces the root seed.
void apply_env_overrides(ExperimentConfig& config);

// Centroid layout of the configuration (raw units).
std::vector<Vec> resolve_centroids(const ExperimentConfig& config);

// Points drawn as theta_k + sigma * N(0, I), cluster by cluster, labels attached.
Dataset generate_dataset(const std::vector<Vec>& centroids, const std::vector<int>& sizes, double sigma,
                         std::uint64_t seed);
Dataset generate_dataset(const ExperimentConfig& config, double sigma, std::uint64_t trial_seed);

// Seed derivation. Every stream descends from config.seed:
//   data of (sigma index s, trial t)          -> derive_seed(seed, {s, t, 0})
//   algorithm `label` on that dataset         -> derive_seed(seed, {s, t, stream_id(label)})
std::uint64_t data_seed(std::uint64_t root, std::size_t sigma_index, std::size_t trial);
std::uint64_t algorithm_seed(std::uint64_t root, std::size_t sigma_index, std::size_t trial,
                             const std::string& label);

struct Metrics {
    double pe = 0.0;
    double distortion = 0.0;
    std::size_t k_hat = 0;
    double runtime_s = 0.0;
    std::size_t messages = 0;
};

struct TrialRecord {
    std::string algorithm;
    double sigma = 0.0;
    int trial = 0;
    Metrics metrics;
};

struct AlgorithmRun {
    ClusteringResult result;
    std::size_t messages = 0;
};

// Runs one algorithm on the dataset; σ is taken from the dataset.
AlgorithmRun run_algorithm(const AlgorithmSpec& spec, const ExperimentConfig& config, const Dataset& data,
                           std::uint64_t seed, const decentrex::EventSink& sink = {});

Metrics evaluate(const Dataset& data, const AlgorithmRun& run, bool distortion_squared);

struct ExperimentResult {
    std::vector<TrialRecord> records;  // ordered by (sigma, trial, algorithm)
};

ExperimentResult run_experiment(const ExperimentConfig& config);

void write_csv(std::ostream& os, const std::vector<TrialRecord>& records);
// {"groups":[{"algorithm":..,"sigma":..,"trials":..,"pe":{"mean":..,"std":..},..}]}
void write_summary_json(std::ostream& os, const std::vector<TrialRecord>& records);
// results.csv and summary.json under `dir` (created if missing).
void write_results(const std::filesystem::path& dir, const ExperimentResult& result);

// Header row required; d numeric columns and an optional final `label` column.
Dataset read_dataset_csv(std::istream& is, double sigma);
Dataset read_dataset_csv(const std::filesystem::path& path, double sigma);
void write_dataset_csv(std::ostream& os, const Dataset& data);

}  // namespace wclust::harness
