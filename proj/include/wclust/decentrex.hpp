#pragma once

#include "wclust/clustering_result.hpp"
#include "wclust/point_set.hpp"
#include "wclust/random.hpp"
#include "wclust/statfn.hpp"
#include "wclust/wald.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <vector>

// Slot-synchronous simulator of the decentralized protocol. Each sensor owns
// one observation. Centroids are estimated in rounds: a broadcast seed, then
// T slots in which sensors push partial sums (P, Q, c) of weighted
// observations and refresh their estimate to P / Q once c >= L contributions
// have been aggregated. Links are lossless.
namespace wclust::decentrex {

enum class ExchangePolicy { RandomPush };

// How a sensor approximates the cluster supports N_k in its local fusion test.
enum class FusionSupport {
    NetworkSize,  // N / |Phi_n|, with N known to every sensor
    Aggregated,   // c at the estimate's last refresh / |Phi_n|
};

struct NetworkConfig {
    int slots = 300;             // T
    int update_threshold = 30;   // L
    ExchangePolicy exchange = ExchangePolicy::RandomPush;
    int fanout = 1;
    std::uint64_t seed = 0;
    FusionSupport fusion_support = FusionSupport::Aggregated;
    double marking_sigma0 = 1.0;
    // Keep the (sensor, epoch) list of every contribution inside each
    // accumulator. Test instrumentation; costs memory proportional to c.
    bool track_provenance = false;

    void validate(std::size_t n_sensors) const;
};

struct Contribution {
    std::size_t sensor = 0;
    std::uint64_t epoch = 0;
    auto operator<=>(const Contribution&) const = default;
};

struct SensorState {
    std::size_t id = 0;
    Vec y;                          // normalized observation
    std::vector<Vec> centroids;     // Phi_n, normalized
    std::vector<double> supports;   // c at the last refresh of each entry of Phi_n
    bool marked = false;
    Vec estimate;
    Vec P;
    double Q = 0.0;
    std::uint64_t c = 0;
    std::uint64_t epoch = 0;        // fresh contributions issued so far
    std::uint64_t last_refresh_count = 0;
    std::vector<Contribution> provenance;
};

struct UpdateEvent {
    std::size_t round = 0;
    int slot = 0;
    std::size_t sensor = 0;
    std::uint64_t c = 0;
    Vec estimate;  // normalized frame
};

using EventSink = std::function<void(const UpdateEvent&)>;

// One JSON object per line: {"round":..,"slot":..,"sensor":..,"c":..,"estimate":[..]}.
void write_event_json(std::ostream& os, const UpdateEvent& event);

struct SlotStats {
    std::size_t messages = 0;
    std::uint64_t pushed_count = 0;    // sum of c over packets leaving their sender
    std::uint64_t received_count = 0;  // sum of c over packets delivered
    std::size_t updates = 0;
};

// Sensors built from the normalized observations, all unmarked.
std::vector<SensorState> make_sensors(const PointSet& normalized);

// Starts a round from a uniformly chosen unmarked sensor: every sensor takes
// its observation as the estimate and resets (P, Q, c) to its own fresh
// contribution. Returns the chosen sensor's index. Throws std::logic_error
// when every sensor is already marked.
std::size_t init_round(std::vector<SensorState>& sensors, const statfn::KernelSpec& kernel, Rng& rng,
                       bool track_provenance = false);

// One slot: every sensor hands its accumulator to `fanout` distinct random
// peers and restarts from its fresh contribution; receivers add what arrives;
// then every sensor holding c >= L refreshes its estimate to P / Q and
// restarts from a fresh contribution at the new estimate.
SlotStats slot_step(std::vector<SensorState>& sensors, const NetworkConfig& config,
                    const statfn::KernelSpec& kernel, Rng& rng, const EventSink& sink = {},
                    std::size_t round = 0, int slot = 0);

struct RoundLog {
    std::size_t round = 0;
    std::size_t initiator = 0;
    std::size_t messages_sent = 0;
    std::vector<std::size_t> updates_per_sensor;
    std::vector<Vec> final_estimates;  // normalized frame
};

struct SensorOutcome {
    std::vector<Vec> centroids;       // after local fusion, input units
    std::vector<std::size_t> origin;  // round that produced each fused centroid
    std::size_t k_hat = 0;
    int assignment = 0;               // index into `centroids`
    std::size_t label = 0;            // origin round of the chosen centroid
};

struct DecentrexResult {
    std::vector<SensorOutcome> sensors;
    std::vector<RoundLog> rounds;
    std::size_t total_messages = 0;
    // Network-wide view: points labelled by the origin round of the centroid
    // each sensor chose, compacted to [0, k). Each centroid is the mean of
    // the chosen centroids carrying that label.
    ClusteringResult global;
};

class Simulator {
public:
    Simulator(const Dataset& data, NetworkConfig config, double gamma,
              std::optional<statfn::KernelSpec> kernel = std::nullopt);

    std::vector<SensorState>& sensors() noexcept { return sensors_; }
    const std::vector<SensorState>& sensors() const noexcept { return sensors_; }
    const std::vector<RoundLog>& rounds() const noexcept { return rounds_; }
    const statfn::KernelSpec& kernel() const noexcept { return kernel_; }

    void set_event_sink(EventSink sink) { sink_ = std::move(sink); }

    bool all_marked() const noexcept;
    // Seed, T slots, then each sensor stores its estimate and tests its own
    // observation against it. The seeding sensor is always marked.
    const RoundLog& run_round();
    // Local fusion and classification of every sensor's own observation.
    DecentrexResult finish() const;
    // Rounds until every sensor is marked, then finish().
    DecentrexResult run();

private:
    std::size_t n_;
    int dim_;
    double gamma_;
    double scale_;
    NetworkConfig config_;
    statfn::KernelSpec kernel_;
    wald::WaldConfig marking_;
    double r_;
    Rng rng_;
    std::vector<SensorState> sensors_;
    std::vector<RoundLog> rounds_;
    EventSink sink_;
};

DecentrexResult run_decentrex(const Dataset& data, const NetworkConfig& config, double gamma,
                              std::optional<statfn::KernelSpec> kernel = std::nullopt,
                              const EventSink& sink = {});

struct ConsensusReport {
    std::map<std::size_t, std::size_t> k_hat_histogram;
    double max_centroid_spread = 0.0;  // input units
    std::size_t total_messages = 0;
    std::size_t rounds = 0;
};

// Centroids are matched across sensors by origin round.
ConsensusReport consensus_diagnostics(const DecentrexResult& result);

}  // namespace wclust::decentrex
