#include "graphsurv/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "graphsurv/errors.hpp"
#include "graphsurv/rng.hpp"

namespace graphsurv {

namespace {

std::uint64_t directed_key(NodeId u, NodeId v) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(u)) << 32) |
           static_cast<std::uint64_t>(static_cast<std::uint32_t>(v));
}

// Walker alias table for O(1) draws proportional to fixed weights.
class AliasTable {
public:
    explicit AliasTable(const std::vector<double>& weights) {
        const std::size_t n = weights.size();
        if (n == 0) {
            throw std::invalid_argument("alias table needs at least one weight");
        }
        double total = 0.0;
        for (double w : weights) {
            if (!(w >= 0.0) || !std::isfinite(w)) {
                throw std::invalid_argument("alias weights must be finite and non-negative");
            }
            total += w;
        }
        if (!(total > 0.0)) {
            throw std::invalid_argument("alias weights must not all be zero");
        }
        prob_.assign(n, 1.0);
        alias_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            alias_[i] = i;
        }
        std::vector<double> scaled(n);
        std::vector<std::size_t> small;
        std::vector<std::size_t> large;
        for (std::size_t i = 0; i < n; ++i) {
            scaled[i] = weights[i] * static_cast<double>(n) / total;
            (scaled[i] < 1.0 ? small : large).push_back(i);
        }
        while (!small.empty() && !large.empty()) {
            const std::size_t s = small.back();
            small.pop_back();
            const std::size_t l = large.back();
            prob_[s] = scaled[s];
            alias_[s] = l;
            scaled[l] = (scaled[l] + scaled[s]) - 1.0;
            if (scaled[l] < 1.0) {
                large.pop_back();
                small.push_back(l);
            }
        }
    }

    std::size_t draw(Rng& rng) const {
        const std::size_t i = static_cast<std::size_t>(rng.below(prob_.size()));
        return rng.uniform() < prob_[i] ? i : alias_[i];
    }

private:
    std::vector<double> prob_;
    std::vector<std::size_t> alias_;
};

struct ActiveEntry {
    NodeId u;
    NodeId v;
    double mu;
    double max_rate;
    double last_time;
    FeatureVector x_std;
};

// Sequential thinning loop state. Active dyads live in a vector in first
// activation order so that every sum and every attribution walk is evaluated
// in a reproducible order.
class Engine {
public:
    Engine(const MarkovModel& m, const SimConfig& cfg)
        : model_(m), rng_(cfg.seed), feats_(m.decay) {
        grid_cols_ = model_.destinations.size();
        base_rates_.reserve(model_.sources.size() * grid_cols_);
        bool uniform = true;
        double first_rate = -1.0;
        base_total_ = 0.0;
        for (NodeId u : model_.sources) {
            for (NodeId v : model_.destinations) {
                double mu = 0.0;
                if (u != v) {
                    mu = poisson_rate(model_.base, u, v);
                    if (first_rate < 0.0) {
                        first_rate = mu;
                    } else if (mu != first_rate) {
                        uniform = false;
                    }
                }
                base_rates_.push_back(mu);
                base_total_ += mu;
            }
        }
        if (!(base_total_ >= 0.0) || !std::isfinite(base_total_)) {
            throw std::runtime_error("base-rate total is not finite; check model parameters");
        }
        uniform_base_ = uniform && first_rate > 0.0;
        if (!uniform_base_ && base_total_ > 0.0) {
            alias_.emplace(base_rates_);
        }
        if (cfg.warm_start != nullptr) {
            replay(*cfg.warm_start, cfg.t0);
        }
    }

    SimulationResult run(const SimConfig& cfg) {
        std::vector<Event> out;
        double t = cfg.t0;
        std::size_t proposals = 0;
        std::size_t accepted = 0;
        while (true) {
            const double lambda_star = bound();
            if (!std::isfinite(lambda_star)) {
                throw std::runtime_error("thinning bound is not finite (lambda_star = " +
                                         std::to_string(lambda_star) +
                                         "); model rates overflow");
            }
            if (lambda_star <= 0.0) {
                break;
            }
            double s = t + rng_.exponential(lambda_star);
            if (s <= t) {
                // The gap underflowed below one ulp of the clock; advance to
                // the next representable instant to keep times strictly
                // increasing.
                s = std::nextafter(t, std::numeric_limits<double>::infinity());
            }
            if (s > cfg.horizon) {
                break;
            }
            ++proposals;
            const double lambda_s = intensity_at(s);
            if (lambda_s > lambda_star) {
                throw std::logic_error("thinning bound violated: lambda(s) > lambda_star");
            }
            t = s;
            if (rng_.uniform() * lambda_star < lambda_s) {
                const auto [u, v] = attribute(lambda_s);
                out.push_back({u, v, s});
                apply_event(u, v, s);
                ++accepted;
                if (accepted >= cfg.max_events) {
                    break;
                }
            }
        }
        EventHistory history(std::move(out), model_.nodes, model_.sources, model_.destinations,
                             cfg.t0, cfg.horizon);
        return {std::move(history), proposals, accepted};
    }

private:
    void replay(const EventHistory& prefix, double t0) {
        if (!prefix.empty() && prefix.events().back().time > t0) {
            throw InputError("warm-start history extends past the simulation start time");
        }
        if (model_.base.num_nodes() < prefix.nodes().size()) {
            throw InputError("model does not cover all nodes of the warm-start history");
        }
        for (const Event& ev : prefix.events()) {
            apply_event(ev.src, ev.dst, ev.time);
        }
    }

    // lambda_star = base total + sum over active dyads of (sup hazard - mu).
    // The per-proposal intensity sums the same entries in the same order with
    // rate <= max_rate termwise, so lambda(s) <= lambda_star holds exactly.
    double bound() const {
        if (!model_.is_markov()) {
            return base_total_;
        }
        double b = base_total_;
        for (const ActiveEntry& e : active_) {
            b += e.max_rate - e.mu;
        }
        return b;
    }

    double intensity_at(double s) {
        if (!model_.is_markov()) {
            return base_total_;
        }
        scratch_rates_.resize(active_.size());
        double lambda = base_total_;
        for (std::size_t i = 0; i < active_.size(); ++i) {
            const ActiveEntry& e = active_[i];
            const double h = model_.hazard->rate(s - e.last_time, e.x_std);
            scratch_rates_[i] = h;
            lambda += h - e.mu;
        }
        return lambda;
    }

    // Multinomial attribution: walk the active dyads with their current
    // rates, then fall through to the inactive bucket, drawn from the base
    // rates with rejection against the active set.
    std::pair<NodeId, NodeId> attribute(double lambda_s) {
        const double r = rng_.uniform() * lambda_s;
        double cum = 0.0;
        for (std::size_t i = 0; i < active_.size(); ++i) {
            cum += scratch_rates_[i];
            if (r < cum) {
                return {active_[i].u, active_[i].v};
            }
        }
        if (active_.size() == grid_size_nonself()) {
            // Every dyad is active; only rounding can land here.
            const ActiveEntry& e = active_.back();
            return {e.u, e.v};
        }
        return draw_inactive();
    }

    std::size_t grid_size_nonself() const {
        std::size_t self_cells = 0;
        for (std::size_t i = 0; i < base_rates_.size(); ++i) {
            const auto [u, v] = cell_pair(i);
            if (u == v) {
                ++self_cells;
            }
        }
        return base_rates_.size() - self_cells;
    }

    std::pair<NodeId, NodeId> cell_pair(std::size_t idx) const {
        return {model_.sources[idx / grid_cols_], model_.destinations[idx % grid_cols_]};
    }

    std::pair<NodeId, NodeId> draw_inactive() {
        for (int attempt = 0; attempt < 10000; ++attempt) {
            std::size_t idx;
            if (uniform_base_) {
                idx = static_cast<std::size_t>(rng_.below(base_rates_.size()));
                if (base_rates_[idx] == 0.0) {
                    continue;
                }
            } else {
                idx = alias_->draw(rng_);
            }
            const auto [u, v] = cell_pair(idx);
            if (active_index_.find(directed_key(u, v)) == active_index_.end()) {
                return {u, v};
            }
        }
        // Nearly everything is active; fall back to an exact linear scan.
        double inactive_total = 0.0;
        for (std::size_t i = 0; i < base_rates_.size(); ++i) {
            const auto [u, v] = cell_pair(i);
            if (u != v && active_index_.find(directed_key(u, v)) == active_index_.end()) {
                inactive_total += base_rates_[i];
            }
        }
        const double target = rng_.uniform() * inactive_total;
        double cum = 0.0;
        std::pair<NodeId, NodeId> pick{-1, -1};
        for (std::size_t i = 0; i < base_rates_.size(); ++i) {
            const auto [u, v] = cell_pair(i);
            if (u != v && active_index_.find(directed_key(u, v)) == active_index_.end()) {
                pick = {u, v};
                cum += base_rates_[i];
                if (target < cum) {
                    break;
                }
            }
        }
        if (pick.first < 0) {
            throw std::logic_error("no inactive dyad available for attribution");
        }
        return pick;
    }

    // Freeze the dyad's covariates strictly before the event, then advance
    // the stream state.
    void apply_event(NodeId u, NodeId v, double s) {
        if (model_.is_markov()) {
            const FeatureVector x_std = model_.standardized(feats_.query(u, v, s));
            const auto key = directed_key(u, v);
            const auto it = active_index_.find(key);
            if (it == active_index_.end()) {
                const std::size_t grid_idx = locate_cell(u, v);
                active_index_.emplace(key, active_.size());
                active_.push_back(
                    {u, v, base_rates_[grid_idx], model_.hazard->max_rate(x_std), s, x_std});
            } else {
                ActiveEntry& e = active_[it->second];
                e.max_rate = model_.hazard->max_rate(x_std);
                e.last_time = s;
                e.x_std = x_std;
            }
        }
        feats_.update({u, v, s});
    }

    std::size_t locate_cell(NodeId u, NodeId v) const {
        const auto su = std::lower_bound(model_.sources.begin(), model_.sources.end(), u);
        const auto dv =
            std::lower_bound(model_.destinations.begin(), model_.destinations.end(), v);
        if (su == model_.sources.end() || *su != u || dv == model_.destinations.end() ||
            *dv != v) {
            throw InputError("event dyad outside the model's source/destination sets");
        }
        return static_cast<std::size_t>(su - model_.sources.begin()) * grid_cols_ +
               static_cast<std::size_t>(dv - model_.destinations.begin());
    }

    const MarkovModel& model_;
    Rng rng_;
    FeatureState feats_;
    std::size_t grid_cols_;
    std::vector<double> base_rates_;  // row-major sources x destinations, 0 on the diagonal
    double base_total_;
    bool uniform_base_;
    std::optional<AliasTable> alias_;
    std::vector<ActiveEntry> active_;
    std::unordered_map<std::uint64_t, std::size_t> active_index_;
    std::vector<double> scratch_rates_;
};

}  // namespace

double total_intensity(const MarkovModel& m, double t, const EdgeLastEventMap& last) {
    double s_base = 0.0;
    for (NodeId u : m.sources) {
        for (NodeId v : m.destinations) {
            if (u != v) {
                s_base += poisson_rate(m.base, u, v);
            }
        }
    }
    if (!m.is_markov() || last.size() == 0) {
        return s_base;
    }
    std::vector<std::pair<std::pair<NodeId, NodeId>, EdgeState>> entries;
    entries.reserve(last.size());
    last.for_each([&](NodeId u, NodeId v, const EdgeState& es) {
        entries.push_back({{u, v}, es});
    });
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    double adjust = 0.0;
    for (const auto& [uv, es] : entries) {
        if (t < es.last_time) {
            throw std::invalid_argument("total intensity queried before a dyad's last event");
        }
        adjust += m.hazard->rate(t - es.last_time, m.standardized(es.features)) -
                  poisson_rate(m.base, uv.first, uv.second);
    }
    return s_base + adjust;
}

ThinningBound local_upper_bound(const MarkovModel& m, double t, const EdgeLastEventMap& last) {
    const double inf = std::numeric_limits<double>::infinity();
    double s_base = 0.0;
    for (NodeId u : m.sources) {
        for (NodeId v : m.destinations) {
            if (u != v) {
                s_base += poisson_rate(m.base, u, v);
            }
        }
    }
    if (!m.is_markov() || last.size() == 0) {
        return {s_base, inf};
    }
    std::vector<std::pair<std::pair<NodeId, NodeId>, EdgeState>> entries;
    entries.reserve(last.size());
    last.for_each([&](NodeId u, NodeId v, const EdgeState& es) {
        entries.push_back({{u, v}, es});
    });
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    double bound = s_base;
    for (const auto& [uv, es] : entries) {
        if (t < es.last_time) {
            throw std::invalid_argument("bound queried before a dyad's last event");
        }
        bound += m.hazard->max_rate(m.standardized(es.features)) -
                 poisson_rate(m.base, uv.first, uv.second);
    }
    return {bound, inf};
}

SimulationResult simulate(const MarkovModel& m, const SimConfig& config) {
    m.validate();
    if (!(config.t0 >= 0.0) || !(config.t0 < config.horizon) || !std::isfinite(config.t0) ||
        !std::isfinite(config.horizon)) {
        throw std::invalid_argument("simulation window needs 0 <= t0 < horizon, both finite");
    }
    if (config.max_events == 0) {
        throw std::invalid_argument("max_events must be at least 1");
    }
    Engine engine(m, config);
    return engine.run(config);
}

}  // namespace graphsurv
