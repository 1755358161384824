#include "wclust/decentrex.hpp"

#include "wclust/centrex.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

namespace wclust::decentrex {

void NetworkConfig::validate(std::size_t n_sensors) const {
    if (slots < 1) throw std::invalid_argument("NetworkConfig: T must be positive");
    if (update_threshold < 1 || static_cast<std::size_t>(update_threshold) > n_sensors) {
        throw std::invalid_argument("NetworkConfig: L must lie in [1, N], got " + std::to_string(update_threshold));
    }
    if (fanout < 1) throw std::invalid_argument("NetworkConfig: fanout must be at least 1");
    if (!(marking_sigma0 > 0.0)) throw std::invalid_argument("NetworkConfig: marking sigma0 must be positive");
}

void write_event_json(std::ostream& os, const UpdateEvent& event) {
    nlohmann::json j;
    j["round"] = event.round;
    j["slot"] = event.slot;
    j["sensor"] = event.sensor;
    j["c"] = event.c;
    j["estimate"] = event.estimate;
    os << j.dump() << '\n';
}

std::vector<SensorState> make_sensors(const PointSet& normalized) {
    std::vector<SensorState> sensors(normalized.size());
    for (std::size_t i = 0; i < sensors.size(); ++i) {
        sensors[i].id = i;
        sensors[i].y.assign(normalized.row(i).begin(), normalized.row(i).end());
        sensors[i].estimate = sensors[i].y;
        sensors[i].P.assign(normalized.dim(), 0.0);
    }
    return sensors;
}

namespace {

// Replaces the accumulator with the sensor's own contribution at its current estimate.
void reset_to_fresh(SensorState& s, const statfn::KernelSpec& kernel, bool track) {
    const double w = statfn::weight(kernel, squared_distance(s.y, s.estimate));
    s.P.resize(s.y.size());
    for (std::size_t k = 0; k < s.y.size(); ++k) {
        s.P[k] = w * s.y[k];
    }
    s.Q = w;
    s.c = 1;
    ++s.epoch;
    if (track) {
        s.provenance.assign(1, Contribution{s.id, s.epoch});
    }
}

// `count` distinct peers of `self`, uniformly. Small fanouts use rejection,
// large ones a partial Fisher-Yates shuffle.
void pick_peers(Rng& rng, std::size_t n, std::size_t self, std::size_t count, std::vector<std::size_t>& pool,
                std::vector<std::size_t>& out) {
    out.clear();
    if (4 * count < n) {
        while (out.size() < count) {
            std::size_t j = uniform_index(rng, n - 1);
            if (j >= self) ++j;
            if (std::find(out.begin(), out.end(), j) == out.end()) out.push_back(j);
        }
        return;
    }
    pool.clear();
    for (std::size_t i = 0; i < n; ++i) {
        if (i != self) pool.push_back(i);
    }
    for (std::size_t k = 0; k < count; ++k) {
        const std::size_t j = k + uniform_index(rng, pool.size() - k);
        std::swap(pool[k], pool[j]);
        out.push_back(pool[k]);
    }
}

}  // namespace

std::size_t init_round(std::vector<SensorState>& sensors, const statfn::KernelSpec& kernel, Rng& rng,
                       bool track_provenance) {
    std::vector<std::size_t> unmarked;
    for (const auto& s : sensors) {
        if (!s.marked) unmarked.push_back(s.id);
    }
    if (unmarked.empty()) {
        throw std::logic_error("init_round: every sensor is already marked");
    }
    const std::size_t chosen = unmarked[uniform_index(rng, unmarked.size())];
    const Vec seed = sensors[chosen].y;
    for (auto& s : sensors) {
        s.estimate = seed;
        s.last_refresh_count = 0;
        reset_to_fresh(s, kernel, track_provenance);
    }
    return chosen;
}

SlotStats slot_step(std::vector<SensorState>& sensors, const NetworkConfig& config,
                    const statfn::KernelSpec& kernel, Rng& rng, const EventSink& sink, std::size_t round,
                    int slot) {
    const std::size_t n = sensors.size();
    const bool track = config.track_provenance;
    const std::size_t fanout = std::min<std::size_t>(static_cast<std::size_t>(config.fanout), n > 0 ? n - 1 : 0);
    SlotStats stats;

    const std::size_t d = sensors.empty() ? 0 : sensors[0].y.size();
    thread_local std::vector<double> inbox_p;
    thread_local std::vector<double> inbox_q;
    thread_local std::vector<std::uint64_t> inbox_c;
    std::vector<std::vector<Contribution>> inbox_prov(track ? n : 0);

    std::vector<std::size_t> pool;
    std::vector<std::size_t> peers;
    if (fanout > 0) {
        inbox_p.assign(n * d, 0.0);
        inbox_q.assign(n, 0.0);
        inbox_c.assign(n, 0);
        for (auto& s : sensors) {
            pick_peers(rng, n, s.id, fanout, pool, peers);
            stats.pushed_count += s.c;
            for (std::size_t t : peers) {
                double* box = inbox_p.data() + t * d;
                for (std::size_t k = 0; k < d; ++k) box[k] += s.P[k];
                inbox_q[t] += s.Q;
                inbox_c[t] += s.c;
                if (track) inbox_prov[t].insert(inbox_prov[t].end(), s.provenance.begin(), s.provenance.end());
                stats.received_count += s.c;
                ++stats.messages;
            }
            reset_to_fresh(s, kernel, track);
        }
        for (std::size_t t = 0; t < n; ++t) {
            SensorState& s = sensors[t];
            const double* box = inbox_p.data() + t * d;
            for (std::size_t k = 0; k < d; ++k) s.P[k] += box[k];
            s.Q += inbox_q[t];
            s.c += inbox_c[t];
            if (track) s.provenance.insert(s.provenance.end(), inbox_prov[t].begin(), inbox_prov[t].end());
        }
    }

    const auto threshold = static_cast<std::uint64_t>(config.update_threshold);
    for (auto& s : sensors) {
        if (s.c < threshold) continue;
        // A ratio of underflowed weights carries no information; keep accumulating.
        if (!(s.Q > 0.0) || !std::isfinite(s.Q)) continue;
        for (std::size_t k = 0; k < s.P.size(); ++k) s.estimate[k] = s.P[k] / s.Q;
        s.last_refresh_count = s.c;
        ++stats.updates;
        if (sink) sink(UpdateEvent{round, slot, s.id, s.c, s.estimate});
        reset_to_fresh(s, kernel, track);
    }
    return stats;
}

Simulator::Simulator(const Dataset& data, NetworkConfig config, double gamma,
                     std::optional<statfn::KernelSpec> kernel)
    : n_(data.size()),
      dim_(static_cast<int>(data.dim())),
      gamma_(gamma),
      scale_(data.normalized ? 1.0 : data.sigma),
      config_(config),
      kernel_(kernel.value_or(statfn::KernelSpec::wald(static_cast<int>(data.dim())))),
      rng_(config.seed) {
    data.validate();
    config_.validate(n_);
    kernel_.validate();
    if (kernel_.dim != dim_) {
        throw std::invalid_argument("Simulator: kernel dimension does not match the data");
    }
    marking_ = wald::WaldConfig::make(dim_, gamma_, config_.marking_sigma0);
    r_ = std::sqrt(statfn::r_squared(kernel_).value);
    sensors_ = make_sensors(data.normalized_points());
}

bool Simulator::all_marked() const noexcept {
    return std::all_of(sensors_.begin(), sensors_.end(), [](const SensorState& s) { return s.marked; });
}

const RoundLog& Simulator::run_round() {
    RoundLog log;
    log.round = rounds_.size();
    log.updates_per_sensor.assign(n_, 0);
    log.initiator = init_round(sensors_, kernel_, rng_, config_.track_provenance);

    EventSink counting = [&](const UpdateEvent& e) {
        ++log.updates_per_sensor[e.sensor];
        if (sink_) sink_(e);
    };
    for (int t = 0; t < config_.slots; ++t) {
        log.messages_sent += slot_step(sensors_, config_, kernel_, rng_, counting, log.round, t).messages;
    }

    for (auto& s : sensors_) {
        s.centroids.push_back(s.estimate);
        s.supports.push_back(static_cast<double>(std::max<std::uint64_t>(s.last_refresh_count, 1)));
        if (wald::decide_norm(marking_, distance(s.y, s.estimate)) == wald::Decision::AcceptH0) {
            s.marked = true;
        }
        log.final_estimates.push_back(s.estimate);
    }
    sensors_[log.initiator].marked = true;

    rounds_.push_back(std::move(log));
    return rounds_.back();
}

DecentrexResult Simulator::finish() const {
    DecentrexResult out;
    out.rounds = rounds_;
    for (const auto& r : rounds_) out.total_messages += r.messages_sent;

    out.sensors.resize(n_);
    std::vector<std::size_t> labels(n_, 0);
    for (std::size_t i = 0; i < n_; ++i) {
        const SensorState& s = sensors_[i];
        SensorOutcome& o = out.sensors[i];
        if (s.centroids.empty()) {
            // Never took part in a round: its own observation is its only centroid.
            o.centroids = {s.y};
            o.origin = {0};
        } else {
            const double k_local = static_cast<double>(s.centroids.size());
            std::vector<double> counts(s.centroids.size());
            for (std::size_t k = 0; k < counts.size(); ++k) {
                counts[k] = config_.fusion_support == FusionSupport::NetworkSize
                                ? static_cast<double>(n_) / k_local
                                : s.supports[k] / k_local;
            }
            auto fused = centrex::fuse(s.centroids, counts, r_, gamma_, dim_);
            o.centroids = std::move(fused.centroids);
            o.origin = std::move(fused.origin);
        }
        o.k_hat = o.centroids.size();
        PointSet own(s.y.size());
        own.push_back(s.y);
        o.assignment = centrex::classify(own, o.centroids).front();
        o.label = o.origin[static_cast<std::size_t>(o.assignment)];
        for (auto& c : o.centroids) {
            for (double& v : c) v *= scale_;
        }
        labels[i] = o.label;
    }

    std::vector<std::size_t> distinct = labels;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    ClusteringResult& g = out.global;
    g.k_hat = distinct.size();
    g.centroids.assign(distinct.size(), Vec(static_cast<std::size_t>(dim_), 0.0));
    g.support_counts.assign(distinct.size(), 0);
    g.assignments.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) {
        const auto k = static_cast<std::size_t>(
            std::lower_bound(distinct.begin(), distinct.end(), labels[i]) - distinct.begin());
        g.assignments[i] = static_cast<int>(k);
        const Vec& chosen = out.sensors[i].centroids[static_cast<std::size_t>(out.sensors[i].assignment)];
        for (std::size_t j = 0; j < chosen.size(); ++j) g.centroids[k][j] += chosen[j];
        ++g.support_counts[k];
    }
    for (std::size_t k = 0; k < g.centroids.size(); ++k) {
        for (double& v : g.centroids[k]) v /= static_cast<double>(g.support_counts[k]);
    }
    return out;
}

DecentrexResult Simulator::run() {
    while (!all_marked()) {
        run_round();
    }
    return finish();
}

DecentrexResult run_decentrex(const Dataset& data, const NetworkConfig& config, double gamma,
                              std::optional<statfn::KernelSpec> kernel, const EventSink& sink) {
    Simulator sim(data, config, gamma, kernel);
    if (sink) sim.set_event_sink(sink);
    return sim.run();
}

ConsensusReport consensus_diagnostics(const DecentrexResult& result) {
    ConsensusReport report;
    report.total_messages = result.total_messages;
    report.rounds = result.rounds.size();
    std::map<std::size_t, std::vector<const Vec*>> by_origin;
    for (const auto& s : result.sensors) {
        ++report.k_hat_histogram[s.k_hat];
        for (std::size_t k = 0; k < s.centroids.size(); ++k) {
            by_origin[s.origin[k]].push_back(&s.centroids[k]);
        }
    }
    for (const auto& [origin, list] : by_origin) {
        for (std::size_t a = 0; a < list.size(); ++a) {
            for (std::size_t b = a + 1; b < list.size(); ++b) {
                report.max_centroid_spread = std::max(report.max_centroid_spread, distance(*list[a], *list[b]));
            }
        }
    }
    return report;
}

}  // namespace wclust::decentrex
