#include "wclust/centrex.hpp"
#include "wclust/harness.hpp"
#include "wclust/metrics.hpp"
#include "wclust/statfn.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace wclust;

namespace {

enum ExitCode { Ok = 0, Failure = 1, ConfigError = 2, IoError = 3 };

harness::ExperimentConfig load(const fs::path& path) {
    auto cfg = harness::load_config(path);
    harness::apply_env_overrides(cfg);
    return cfg;
}

// Keeps the configured algorithms of the requested kind, or falls back to
// `fallback` when the config lists none.
void restrict_algorithms(harness::ExperimentConfig& cfg, harness::AlgorithmKind kind, const std::string& fallback) {
    std::vector<harness::AlgorithmSpec> keep;
    for (const auto& a : cfg.algorithms) {
        if (a.kind == kind || (kind == harness::AlgorithmKind::Centrex && a.kind == harness::AlgorithmKind::CentrexGaussian)) {
            keep.push_back(a);
        }
    }
    if (keep.empty()) keep.push_back(harness::AlgorithmSpec::parse(fallback));
    cfg.algorithms = std::move(keep);
}

void write_clustering(const fs::path& dir, const ClusteringResult& res) {
    fs::create_directories(dir);
    std::ofstream a(dir / "assignments.csv");
    std::ofstream c(dir / "centroids.csv");
    if (!a || !c) throw std::runtime_error("cannot write clustering output under " + dir.string());
    a << "index,cluster\n";
    for (std::size_t i = 0; i < res.assignments.size(); ++i) a << i << ',' << res.assignments[i] << '\n';
    const std::size_t d = res.centroids.empty() ? 0 : res.centroids[0].size();
    for (std::size_t j = 0; j < d; ++j) c << (j ? "," : "") << 'x' << j;
    c << ",support\n";
    char buf[64];
    for (std::size_t k = 0; k < res.centroids.size(); ++k) {
        for (std::size_t j = 0; j < d; ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", res.centroids[k][j]);
            c << (j ? "," : "") << buf;
        }
        c << ',' << (k < res.support_counts.size() ? res.support_counts[k] : 0) << '\n';
    }
}

// With a data file: cluster it once per algorithm and report. Otherwise run
// the configured sweep and print the CSV (or write it under `out`).
int run_single(harness::ExperimentConfig cfg, const std::string& out) {
    if (!cfg.data_file) {
        const auto result = harness::run_experiment(cfg);
        if (out.empty()) {
            harness::write_csv(std::cout, result.records);
        } else {
            harness::write_results(out, result);
        }
        return Ok;
    }

    const double sigma = cfg.sigmas.front();
    const auto data = harness::read_dataset_csv(*cfg.data_file, sigma);
    std::ofstream events;
    decentrex::EventSink sink;
    if (cfg.event_log) {
        events.open(*cfg.event_log);
        if (!events) throw std::runtime_error("cannot open event log " + cfg.event_log->string());
        sink = [&events](const decentrex::UpdateEvent& e) { decentrex::write_event_json(events, e); };
    }
    nlohmann::json report = nlohmann::json::array();
    for (const auto& spec : cfg.algorithms) {
        const auto run = harness::run_algorithm(spec, cfg, data, harness::algorithm_seed(cfg.seed, 0, 0, spec.label), sink);
        const auto m = harness::evaluate(data, run, cfg.distortion_squared);
        nlohmann::json entry{{"algorithm", spec.label},
                             {"k_hat", m.k_hat},
                             {"distortion", m.distortion},
                             {"messages", m.messages},
                             {"sigma_post", centrex::estimate_sigma_post(data, run.result)}};
        if (data.labels) entry["pe"] = m.pe;
        report.push_back(entry);
        if (!out.empty()) write_clustering(fs::path(out) / spec.label, run.result);
    }
    std::cout << report.dump(2) << '\n';
    return Ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Clustering with an unknown number of clusters via Wald-test weighted M-estimation"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;

    struct RunCommand {
        const char* name;
        const char* help;
        harness::AlgorithmKind kind;
        const char* fallback;
    };
    const RunCommand commands[] = {
        {"centrex", "Centralized clustering", harness::AlgorithmKind::Centrex, "centrex"},
        {"decentrex", "Decentralized clustering (network simulation)", harness::AlgorithmKind::Decentrex, "decentrex"},
        {"kmeans", "K-means baseline with known K", harness::AlgorithmKind::KMeans, "kmeans10"},
    };
    std::vector<std::pair<CLI::App*, const RunCommand*>> run_cmds;
    for (const auto& c : commands) {
        auto* top = app.add_subcommand(c.name, c.help);
        top->require_subcommand(1);
        auto* run = top->add_subcommand("run", "Run on the configured data file or generated trials");
        run->add_option("--config", config_path, "JSON configuration")->required()->check(CLI::ExistingFile);
        run->add_option("--out", out_dir, "Output directory");
        run_cmds.emplace_back(run, &c);
    }

    auto* sweep = app.add_subcommand("sweep", "Sigma sweep over all configured algorithms");
    sweep->add_option("--config", config_path, "JSON configuration")->required()->check(CLI::ExistingFile);
    sweep->add_option("--out", out_dir, "Output directory for results.csv and summary.json")->required();

    int rsq_dim = 0;
    std::string rsq_method = "quadrature";
    std::size_t rsq_samples = 10000;
    std::uint64_t rsq_seed = 0;
    auto* rsq = app.add_subcommand("rsq", "Asymptotic variance factor r^2 of the Wald kernel");
    rsq->add_option("--dim", rsq_dim, "Dimension d")->required()->check(CLI::PositiveNumber);
    rsq->add_option("--method", rsq_method, "quadrature or montecarlo")
        ->check(CLI::IsMember({"quadrature", "montecarlo"}));
    rsq->add_option("--samples", rsq_samples, "Monte-Carlo sample count");
    rsq->add_option("--seed", rsq_seed, "Monte-Carlo seed");

    CLI11_PARSE(app, argc, argv);

    try {
        for (const auto& [cmd, spec] : run_cmds) {
            if (cmd->parsed()) {
                auto cfg = load(config_path);
                restrict_algorithms(cfg, spec->kind, spec->fallback);
                return run_single(std::move(cfg), out_dir);
            }
        }
        if (sweep->parsed()) {
            const auto cfg = load(config_path);
            harness::write_results(out_dir, harness::run_experiment(cfg));
            std::cout << "wrote " << (fs::path(out_dir) / "results.csv").string() << " and "
                      << (fs::path(out_dir) / "summary.json").string() << '\n';
            return Ok;
        }
        if (rsq->parsed()) {
            const auto method = rsq_method == "montecarlo" ? statfn::RSquaredMethod::MonteCarlo
                                                           : statfn::RSquaredMethod::Quadrature;
            const auto r = statfn::r_squared(rsq_dim, method, rsq_samples, rsq_seed);
            std::printf("%.12g\n", r.value);
            return Ok;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return ConfigError;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return IoError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return Failure;
    }
    return Failure;
}
