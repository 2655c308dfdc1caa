#pragma once

#include "graphsurv/events.hpp"
#include "graphsurv/features.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace graphsurv {

double softplus(double x);
double sigmoid(double x);

enum class ModelKind { kPoisson, kMarkovPwc };

// "poisson" / "markov_pwc", as used in checkpoints and CLI options.
std::string model_kind_name(ModelKind kind);
ModelKind model_kind_from_name(const std::string& name);

// Latent-space base rate: softplus(2c + alpha_u + alpha_v - ||z_u - z_v||).
struct PoissonParams {
    double offset = 0.0;
    int embedding_dim = 0;
    std::vector<double> alpha;       // one sociality coefficient per node
    std::vector<double> embeddings;  // node-major, embedding_dim per node

    std::size_t num_nodes() const noexcept { return alpha.size(); }
    std::span<const double> embedding(NodeId u) const {
        return {embeddings.data() + static_cast<std::size_t>(u) * embedding_dim,
                static_cast<std::size_t>(embedding_dim)};
    }
    std::span<double> embedding(NodeId u) {
        return {embeddings.data() + static_cast<std::size_t>(u) * embedding_dim,
                static_cast<std::size_t>(embedding_dim)};
    }
    void validate() const;
};

double embedding_distance(const PoissonParams& p, NodeId u, NodeId v);
double poisson_rate(const PoissonParams& p, NodeId u, NodeId v);

// Piecewise-constant transition hazard on elapsed time since the last edge
// event: rate exp(theta_j . x) on interval I_j. `cuts` holds the J-1 interior
// boundaries; the implicit outer boundaries are 0 and infinity.
struct PwcHazard {
    std::vector<double> cuts;
    std::vector<FeatureVector> theta;

    std::size_t pieces() const noexcept { return theta.size(); }
    std::size_t piece_index(double tau) const;
    double log_rate(std::size_t piece, const FeatureVector& x) const;
    double rate(double tau, const FeatureVector& x) const;
    // Exact integral of the hazard over elapsed time [tau_a, tau_b).
    double integral(double tau_a, double tau_b, const FeatureVector& x) const;
    // Overlap length of [tau_a, tau_b) with each hazard interval it touches.
    std::vector<std::pair<std::size_t, double>> piece_overlaps(double tau_a, double tau_b) const;
    // Supremum of the hazard over all elapsed times, for thinning bounds.
    double max_rate(const FeatureVector& x) const;
    void validate() const;
};

// Per-dyad time of the most recent event together with the feature vector
// frozen just before that event (raw, unstandardized).
struct EdgeState {
    double last_time;
    FeatureVector features;
};

class EdgeLastEventMap {
public:
    const EdgeState* find(NodeId src, NodeId dst) const;
    void record(NodeId src, NodeId dst, double t, const FeatureVector& frozen);
    std::size_t size() const noexcept { return map_.size(); }

    template <typename Fn>
    void for_each(Fn&& fn) const {
        for (const auto& [key, state] : map_) {
            fn(static_cast<NodeId>(key >> 32), static_cast<NodeId>(key & 0xffffffffu), state);
        }
    }

private:
    std::unordered_map<std::uint64_t, EdgeState> map_;
};

// Composite conditional-intensity model. Without a hazard it is the plain
// edge Poisson process; with one, each dyad switches to the transition hazard
// after its first event.
struct MarkovModel {
    std::shared_ptr<const NodeTable> nodes;
    std::vector<NodeId> sources;
    std::vector<NodeId> destinations;
    PoissonParams base;
    std::optional<PwcHazard> hazard;
    DecayConfig decay;
    std::optional<FeatureStandardizer> standardizer;

    bool is_markov() const noexcept { return hazard.has_value(); }
    FeatureVector standardized(const FeatureVector& x) const {
        return standardizer ? standardizer->apply(x) : x;
    }
    void validate() const;
};

// lambda^(e)(t | H_t): the base rate while the dyad has no history, the
// transition hazard at elapsed time t - t_n afterwards.
double edge_intensity(const MarkovModel& m, NodeId u, NodeId v, double t,
                      const EdgeLastEventMap& last);

// Exact integral of edge_intensity over [t_a, t_b); the interval must not
// contain an event of the dyad, and `last` must reflect the state at t_a.
double edge_compensator(const MarkovModel& m, NodeId u, NodeId v, double t_a, double t_b,
                        const EdgeLastEventMap& last);

std::string checkpoint_json(const MarkovModel& m);
MarkovModel model_from_json(const std::string& text);
void save_checkpoint(const MarkovModel& m, const std::string& path);
MarkovModel load_checkpoint(const std::string& path);

// Interior cut-points at the j/J quantiles of the samples, deduplicated and
// restricted to positive values.
std::vector<double> quantile_cuts(std::vector<double> samples, std::size_t pieces);

// Inter-arrival times of each dyad's event sequence, pooled network-wide.
std::vector<double> pooled_interarrival_times(const EventHistory& h);

} // namespace graphsurv
