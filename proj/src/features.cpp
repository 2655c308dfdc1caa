#include "graphsurv/features.hpp"

#include "graphsurv/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace graphsurv {

std::uint64_t pair_key(NodeId a, NodeId b) {
    const std::uint32_t lo = static_cast<std::uint32_t>(std::min(a, b));
    const std::uint32_t hi = static_cast<std::uint32_t>(std::max(a, b));
    return (static_cast<std::uint64_t>(hi) << 32) | lo;
}

FeatureState::FeatureState(const DecayConfig& decay)
    : decay_(decay), clock_(-std::numeric_limits<double>::infinity()) {
    if (!(decay_.gamma_deg > 0.0 && decay_.gamma_vol > 0.0 && decay_.gamma_cn > 0.0)) {
        throw std::invalid_argument("decay rates must be strictly positive");
    }
}

double FeatureState::decayed(const Accum& a, double gamma, double t) const {
    return a.value * std::exp(-gamma * (t - a.last_time));
}

void FeatureState::update(const Event& ev) {
    if (ev.time < clock_) {
        throw std::invalid_argument("out-of-order feature update: event at " +
                                    std::to_string(ev.time) + " before clock " +
                                    std::to_string(clock_));
    }
    for (NodeId node : {ev.src, ev.dst}) {
        auto [it, fresh] = node_degree_.try_emplace(node, Accum{ev.time, 0.0});
        if (!fresh) {
            it->second.value = decayed(it->second, decay_.gamma_deg, ev.time);
            it->second.last_time = ev.time;
        }
        it->second.value += 1.0;
    }
    auto [pit, fresh] = pair_volume_.try_emplace(pair_key(ev.src, ev.dst), Accum{ev.time, 0.0});
    if (!fresh) {
        pit->second.value = decayed(pit->second, decay_.gamma_vol, ev.time);
        pit->second.last_time = ev.time;
    }
    pit->second.value += 1.0;

    last_contact_[ev.src][ev.dst] = ev.time;
    last_contact_[ev.dst][ev.src] = ev.time;
    clock_ = ev.time;
}

double FeatureState::degree(NodeId u, double t) const {
    if (t < clock_) {
        throw std::invalid_argument("feature query before state clock");
    }
    auto it = node_degree_.find(u);
    return it == node_degree_.end() ? 0.0 : decayed(it->second, decay_.gamma_deg, t);
}

FeatureVector FeatureState::query(NodeId u, NodeId v, double t) const {
    if (t < clock_) {
        throw std::invalid_argument("feature query before state clock");
    }
    FeatureVector x{0.0, 0.0, 0.0, 0.0, 1.0};
    if (auto it = node_degree_.find(u); it != node_degree_.end()) {
        x[kFeatDegSrc] = decayed(it->second, decay_.gamma_deg, t);
    }
    if (auto it = node_degree_.find(v); it != node_degree_.end()) {
        x[kFeatDegDst] = decayed(it->second, decay_.gamma_deg, t);
    }
    if (auto it = pair_volume_.find(pair_key(u, v)); it != pair_volume_.end()) {
        x[kFeatVolume] = decayed(it->second, decay_.gamma_vol, t);
    }

    const auto nu = last_contact_.find(u);
    const auto nv = last_contact_.find(v);
    if (nu != last_contact_.end() && nv != last_contact_.end()) {
        const auto& small = nu->second.size() <= nv->second.size() ? nu->second : nv->second;
        const auto& large = nu->second.size() <= nv->second.size() ? nv->second : nu->second;
        double cn = 0.0;
        for (const auto& [w, t_small] : small) {
            auto jt = large.find(w);
            if (jt == large.end()) {
                continue;
            }
            // Last interaction between either endpoint and the common
            // neighbor; the more recent one counts.
            const double t_last = std::max(t_small, jt->second);
            cn += std::exp(-decay_.gamma_cn * (t - t_last));
        }
        x[kFeatCommonNeighbors] = cn;
    }
    return x;
}

std::string FeatureState::to_json() const {
    nlohmann::json j;
    j["format"] = "graphsurv-feature-state";
    j["version"] = 1;
    j["decay"] = {{"deg", decay_.gamma_deg}, {"vol", decay_.gamma_vol}, {"cn", decay_.gamma_cn}};
    j["clock"] = std::isfinite(clock_) ? nlohmann::json(clock_) : nlohmann::json();

    auto degree = nlohmann::json::array();
    std::vector<NodeId> nodes;
    nodes.reserve(node_degree_.size());
    for (const auto& [node, _] : node_degree_) {
        nodes.push_back(node);
    }
    std::sort(nodes.begin(), nodes.end());
    for (NodeId node : nodes) {
        const Accum& a = node_degree_.at(node);
        degree.push_back({node, a.last_time, a.value});
    }
    j["degree"] = std::move(degree);

    auto volume = nlohmann::json::array();
    std::vector<std::uint64_t> keys;
    keys.reserve(pair_volume_.size());
    for (const auto& [key, _] : pair_volume_) {
        keys.push_back(key);
    }
    std::sort(keys.begin(), keys.end());
    for (std::uint64_t key : keys) {
        const Accum& a = pair_volume_.at(key);
        volume.push_back({static_cast<NodeId>(key & 0xffffffffu),
                          static_cast<NodeId>(key >> 32), a.last_time, a.value});
    }
    j["volume"] = std::move(volume);

    auto contacts = nlohmann::json::array();
    std::vector<NodeId> owners;
    owners.reserve(last_contact_.size());
    for (const auto& [node, _] : last_contact_) {
        owners.push_back(node);
    }
    std::sort(owners.begin(), owners.end());
    for (NodeId owner : owners) {
        const auto& neighbors = last_contact_.at(owner);
        std::vector<NodeId> ws;
        ws.reserve(neighbors.size());
        for (const auto& [w, _] : neighbors) {
            ws.push_back(w);
        }
        std::sort(ws.begin(), ws.end());
        for (NodeId w : ws) {
            contacts.push_back({owner, w, neighbors.at(w)});
        }
    }
    j["last_contact"] = std::move(contacts);
    return j.dump(2);
}

FeatureState FeatureState::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw CheckpointError(std::string("feature state is not valid JSON: ") + e.what());
    }
    try {
        if (j.at("format") != "graphsurv-feature-state") {
            throw CheckpointError("not a feature-state checkpoint");
        }
        DecayConfig decay;
        decay.gamma_deg = j.at("decay").at("deg").get<double>();
        decay.gamma_vol = j.at("decay").at("vol").get<double>();
        decay.gamma_cn = j.at("decay").at("cn").get<double>();
        FeatureState state(decay);
        if (!j.at("clock").is_null()) {
            state.clock_ = j.at("clock").get<double>();
        }
        for (const auto& row : j.at("degree")) {
            state.node_degree_[row.at(0).get<NodeId>()] =
                Accum{row.at(1).get<double>(), row.at(2).get<double>()};
        }
        for (const auto& row : j.at("volume")) {
            const auto a = row.at(0).get<NodeId>();
            const auto b = row.at(1).get<NodeId>();
            state.pair_volume_[pair_key(a, b)] =
                Accum{row.at(2).get<double>(), row.at(3).get<double>()};
        }
        for (const auto& row : j.at("last_contact")) {
            state.last_contact_[row.at(0).get<NodeId>()][row.at(1).get<NodeId>()] =
                row.at(2).get<double>();
        }
        return state;
    } catch (const nlohmann::json::exception& e) {
        throw CheckpointError(std::string("malformed feature-state checkpoint: ") + e.what());
    }
}

void sweep_history(const EventHistory& h, const DecayConfig& decay,
                   const std::function<void(const FeatureState&, const Event&, std::size_t)>& visit) {
    FeatureState state(decay);
    std::size_t index = 0;
    for (const Event& ev : h.events()) {
        visit(state, ev, index);
        state.update(ev);
        ++index;
    }
}

std::vector<FeatureVector> snapshot_at_events(const EventHistory& h, const DecayConfig& decay) {
    std::vector<FeatureVector> out;
    out.reserve(h.size());
    sweep_history(h, decay, [&](const FeatureState& state, const Event& ev, std::size_t) {
        out.push_back(state.query(ev.src, ev.dst, ev.time));
    });
    return out;
}

FeatureStandardizer compute_standardizer(const EventHistory& h, const DecayConfig& decay) {
    FeatureStandardizer s;
    const auto snapshots = snapshot_at_events(h, decay);
    if (snapshots.empty()) {
        return s;
    }
    const double n = static_cast<double>(snapshots.size());
    for (std::size_t i = 0; i < 4; ++i) {
        double mean = 0.0;
        for (const auto& x : snapshots) {
            mean += x[i];
        }
        mean /= n;
        double var = 0.0;
        for (const auto& x : snapshots) {
            var += (x[i] - mean) * (x[i] - mean);
        }
        var /= n;
        s.mean[i] = mean;
        s.stddev[i] = var > 1e-24 ? std::sqrt(var) : 1.0;
    }
    return s;
}

} // namespace graphsurv
