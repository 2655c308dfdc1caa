#pragma once

#include "graphsurv/events.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <unordered_map>

namespace graphsurv {

// Per-feature exponential decay rates, units 1/time.
struct DecayConfig {
    double gamma_deg = 1.0;
    double gamma_vol = 1.0;
    double gamma_cn = 1.0;
};

// Dense edge feature vector: decayed degree of both endpoints, decayed dyad
// volume, decayed common-neighbor mass, and a constant bias.
inline constexpr std::size_t kFeatureDim = 5;
inline constexpr std::size_t kFeatDegSrc = 0;
inline constexpr std::size_t kFeatDegDst = 1;
inline constexpr std::size_t kFeatVolume = 2;
inline constexpr std::size_t kFeatCommonNeighbors = 3;
inline constexpr std::size_t kFeatBias = 4;

using FeatureVector = std::array<double, kFeatureDim>;

// Incremental decayed statistics over an event stream. Accumulators are only
// re-decayed when an entity is touched (lazy decay), so one update costs O(1)
// amortized plus the neighbor-map writes. Queries never mutate the state.
class FeatureState {
public:
    explicit FeatureState(const DecayConfig& decay);

    const DecayConfig& decay() const noexcept { return decay_; }
    double clock() const noexcept { return clock_; }

    // Applies one event; ev.time must be >= clock().
    void update(const Event& ev);

    // Features of directed edge (u, v) at time t >= clock(). Degree and
    // common-neighbor terms treat interactions direction-agnostically; the
    // volume term sums events between the unordered pair {u, v}.
    FeatureVector query(NodeId u, NodeId v, double t) const;

    // Decayed degree of a single node at time t >= clock().
    double degree(NodeId u, double t) const;

    std::string to_json() const;
    static FeatureState from_json(const std::string& text);

private:
    struct Accum {
        double last_time;
        double value;
    };

    double decayed(const Accum& a, double gamma, double t) const;

    DecayConfig decay_;
    double clock_;
    std::unordered_map<NodeId, Accum> node_degree_;
    std::unordered_map<std::uint64_t, Accum> pair_volume_;
    std::unordered_map<NodeId, std::unordered_map<NodeId, double>> last_contact_;
};

// Packs an unordered node pair into one map key.
std::uint64_t pair_key(NodeId a, NodeId b);

// One forward pass over the history. For each event m the callback sees the
// state holding events 1..m-1 only, i.e. features at t_m^- are queryable for
// any dyad.
void sweep_history(const EventHistory& h, const DecayConfig& decay,
                   const std::function<void(const FeatureState&, const Event&, std::size_t)>& visit);

// Feature vector of each event's own dyad frozen just before the event.
std::vector<FeatureVector> snapshot_at_events(const EventHistory& h, const DecayConfig& decay);

// Z-scoring of the four history features; the bias coordinate passes through.
struct FeatureStandardizer {
    std::array<double, 4> mean{0.0, 0.0, 0.0, 0.0};
    std::array<double, 4> stddev{1.0, 1.0, 1.0, 1.0};

    FeatureVector apply(const FeatureVector& x) const {
        FeatureVector out = x;
        for (std::size_t i = 0; i < 4; ++i) {
            out[i] = (x[i] - mean[i]) / stddev[i];
        }
        return out;
    }
};

// Moments of the frozen per-event feature vectors of a training history.
FeatureStandardizer compute_standardizer(const EventHistory& h, const DecayConfig& decay);

} // namespace graphsurv
