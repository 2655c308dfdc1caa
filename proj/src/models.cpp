#include "graphsurv/models.hpp"

#include "graphsurv/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace graphsurv {

double softplus(double x) {
    if (x > 0.0) {
        return x + std::log1p(std::exp(-x));
    }
    return std::log1p(std::exp(x));
}

std::string model_kind_name(ModelKind kind) {
    return kind == ModelKind::kMarkovPwc ? "markov_pwc" : "poisson";
}

ModelKind model_kind_from_name(const std::string& name) {
    if (name == "markov_pwc") {
        return ModelKind::kMarkovPwc;
    }
    if (name == "poisson") {
        return ModelKind::kPoisson;
    }
    throw std::invalid_argument("unknown model kind: " + name);
}

double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

void PoissonParams::validate() const {
    if (embedding_dim < 0) {
        throw std::invalid_argument("embedding dimension must be non-negative");
    }
    if (embeddings.size() != alpha.size() * static_cast<std::size_t>(embedding_dim)) {
        throw std::invalid_argument("embedding matrix shape does not match node count");
    }
    if (!std::isfinite(offset)) {
        throw std::invalid_argument("offset must be finite");
    }
    for (double a : alpha) {
        if (!std::isfinite(a)) {
            throw std::invalid_argument("sociality coefficients must be finite");
        }
    }
    for (double z : embeddings) {
        if (!std::isfinite(z)) {
            throw std::invalid_argument("embeddings must be finite");
        }
    }
}

namespace {

void check_node(const PoissonParams& p, NodeId u) {
    if (u < 0 || static_cast<std::size_t>(u) >= p.num_nodes()) {
        throw std::invalid_argument("unknown node id " + std::to_string(u));
    }
}

} // namespace

double embedding_distance(const PoissonParams& p, NodeId u, NodeId v) {
    double sq = 0.0;
    const auto zu = p.embedding(u);
    const auto zv = p.embedding(v);
    for (int i = 0; i < p.embedding_dim; ++i) {
        const double d = zu[static_cast<std::size_t>(i)] - zv[static_cast<std::size_t>(i)];
        sq += d * d;
    }
    return std::sqrt(sq);
}

double poisson_rate(const PoissonParams& p, NodeId u, NodeId v) {
    check_node(p, u);
    check_node(p, v);
    const double s = 2.0 * p.offset + p.alpha[static_cast<std::size_t>(u)] +
                     p.alpha[static_cast<std::size_t>(v)] - embedding_distance(p, u, v);
    return softplus(s);
}

std::size_t PwcHazard::piece_index(double tau) const {
    if (!(tau >= 0.0)) {
        throw std::invalid_argument("elapsed time must be non-negative");
    }
    return static_cast<std::size_t>(
        std::upper_bound(cuts.begin(), cuts.end(), tau) - cuts.begin());
}

double PwcHazard::log_rate(std::size_t piece, const FeatureVector& x) const {
    const FeatureVector& row = theta[piece];
    double dot = 0.0;
    for (std::size_t i = 0; i < kFeatureDim; ++i) {
        dot += row[i] * x[i];
    }
    return dot;
}

double PwcHazard::rate(double tau, const FeatureVector& x) const {
    return std::exp(log_rate(piece_index(tau), x));
}

double PwcHazard::integral(double tau_a, double tau_b, const FeatureVector& x) const {
    if (!(tau_a >= 0.0) || !(tau_b >= tau_a)) {
        throw std::invalid_argument("hazard integral needs 0 <= tau_a <= tau_b");
    }
    if (tau_b == tau_a) {
        return 0.0;
    }
    double total = 0.0;
    const std::size_t n_pieces = pieces();
    for (std::size_t j = piece_index(tau_a); j < n_pieces; ++j) {
        const double lo = j == 0 ? 0.0 : cuts[j - 1];
        const double hi = j + 1 == n_pieces ? std::numeric_limits<double>::infinity() : cuts[j];
        const double a = std::max(lo, tau_a);
        const double b = std::min(hi, tau_b);
        if (b > a) {
            total += std::exp(log_rate(j, x)) * (b - a);
        }
        if (hi >= tau_b) {
            break;
        }
    }
    return total;
}

std::vector<std::pair<std::size_t, double>> PwcHazard::piece_overlaps(double tau_a,
                                                                     double tau_b) const {
    if (!(tau_a >= 0.0) || !(tau_b >= tau_a)) {
        throw std::invalid_argument("hazard overlap needs 0 <= tau_a <= tau_b");
    }
    std::vector<std::pair<std::size_t, double>> out;
    if (tau_b == tau_a) {
        return out;
    }
    const std::size_t n_pieces = pieces();
    for (std::size_t j = piece_index(tau_a); j < n_pieces; ++j) {
        const double lo = j == 0 ? 0.0 : cuts[j - 1];
        const double hi = j + 1 == n_pieces ? std::numeric_limits<double>::infinity() : cuts[j];
        const double a = std::max(lo, tau_a);
        const double b = std::min(hi, tau_b);
        if (b > a) {
            out.emplace_back(j, b - a);
        }
        if (hi >= tau_b) {
            break;
        }
    }
    return out;
}

double PwcHazard::max_rate(const FeatureVector& x) const {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < pieces(); ++j) {
        best = std::max(best, log_rate(j, x));
    }
    return std::exp(best);
}

void PwcHazard::validate() const {
    if (theta.empty()) {
        throw std::invalid_argument("hazard needs at least one piece");
    }
    if (cuts.size() + 1 != theta.size()) {
        throw std::invalid_argument("hazard has " + std::to_string(theta.size()) +
                                    " pieces but " + std::to_string(cuts.size()) + " cuts");
    }
    double prev = 0.0;
    for (double c : cuts) {
        if (!(c > prev) || !std::isfinite(c)) {
            throw std::invalid_argument("hazard cuts must be finite, positive, strictly increasing");
        }
        prev = c;
    }
    for (const auto& row : theta) {
        for (double v : row) {
            if (!std::isfinite(v)) {
                throw std::invalid_argument("hazard coefficients must be finite");
            }
        }
    }
}

namespace {

std::uint64_t directed_key(NodeId src, NodeId dst) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(src)) << 32) |
           static_cast<std::uint32_t>(dst);
}

} // namespace

const EdgeState* EdgeLastEventMap::find(NodeId src, NodeId dst) const {
    auto it = map_.find(directed_key(src, dst));
    return it == map_.end() ? nullptr : &it->second;
}

void EdgeLastEventMap::record(NodeId src, NodeId dst, double t, const FeatureVector& frozen) {
    map_[directed_key(src, dst)] = EdgeState{t, frozen};
}

void MarkovModel::validate() const {
    if (!nodes) {
        throw std::invalid_argument("model requires a node table");
    }
    if (base.num_nodes() != nodes->size()) {
        throw std::invalid_argument("parameter arrays do not match node table size");
    }
    base.validate();
    if (hazard) {
        hazard->validate();
    }
    if (!(decay.gamma_deg > 0.0 && decay.gamma_vol > 0.0 && decay.gamma_cn > 0.0)) {
        throw std::invalid_argument("decay rates must be strictly positive");
    }
    const auto check_ids = [&](const std::vector<NodeId>& ids, const char* what) {
        NodeId prev = -1;
        for (NodeId id : ids) {
            if (id < 0 || static_cast<std::size_t>(id) >= nodes->size()) {
                throw std::invalid_argument(std::string(what) + " id outside the node table");
            }
            if (id <= prev) {
                throw std::invalid_argument(std::string(what) +
                                            " ids must be sorted and distinct");
            }
            prev = id;
        }
    };
    check_ids(sources, "source");
    check_ids(destinations, "destination");
}

double edge_intensity(const MarkovModel& m, NodeId u, NodeId v, double t,
                      const EdgeLastEventMap& last) {
    if (m.is_markov()) {
        if (const EdgeState* es = last.find(u, v)) {
            if (t < es->last_time) {
                throw std::invalid_argument("intensity queried before the dyad's last event");
            }
            return m.hazard->rate(t - es->last_time, m.standardized(es->features));
        }
    }
    return poisson_rate(m.base, u, v);
}

double edge_compensator(const MarkovModel& m, NodeId u, NodeId v, double t_a, double t_b,
                        const EdgeLastEventMap& last) {
    if (!(t_a <= t_b)) {
        throw std::invalid_argument("compensator needs t_a <= t_b");
    }
    if (m.is_markov()) {
        if (const EdgeState* es = last.find(u, v)) {
            if (es->last_time > t_a) {
                throw std::invalid_argument(
                    "compensator interval contains an event of the dyad; split at events");
            }
            return m.hazard->integral(t_a - es->last_time, t_b - es->last_time,
                                      m.standardized(es->features));
        }
    }
    return poisson_rate(m.base, u, v) * (t_b - t_a);
}

std::string checkpoint_json(const MarkovModel& m) {
    m.validate();
    nlohmann::json j;
    j["format"] = "graphsurv-model";
    j["version"] = 1;
    j["kind"] = m.is_markov() ? "markov_pwc" : "poisson";
    auto labels = nlohmann::json::array();
    for (std::size_t i = 0; i < m.nodes->size(); ++i) {
        labels.push_back(m.nodes->label(static_cast<NodeId>(i)));
    }
    j["nodes"] = std::move(labels);
    j["sources"] = m.sources;
    j["destinations"] = m.destinations;
    j["offset"] = m.base.offset;
    j["embedding_dim"] = m.base.embedding_dim;
    j["alpha"] = m.base.alpha;
    j["embeddings"] = m.base.embeddings;
    j["decay"] = {{"deg", m.decay.gamma_deg}, {"vol", m.decay.gamma_vol}, {"cn", m.decay.gamma_cn}};
    if (m.hazard) {
        j["hazard"] = {{"cuts", m.hazard->cuts}, {"theta", m.hazard->theta}};
    } else {
        j["hazard"] = nullptr;
    }
    if (m.standardizer) {
        j["standardizer"] = {{"mean", m.standardizer->mean}, {"std", m.standardizer->stddev}};
    } else {
        j["standardizer"] = nullptr;
    }
    return j.dump(2);
}

MarkovModel model_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw CheckpointError(std::string("checkpoint is not valid JSON: ") + e.what());
    }
    try {
        if (j.at("format") != "graphsurv-model") {
            throw CheckpointError("not a graphsurv model checkpoint");
        }
        if (j.at("version").get<int>() != 1) {
            throw CheckpointError("unsupported checkpoint version");
        }
        MarkovModel m;
        auto table = std::make_shared<NodeTable>();
        for (const auto& label : j.at("nodes")) {
            table->intern(label.get<std::string>());
        }
        m.nodes = table;
        m.sources = j.at("sources").get<std::vector<NodeId>>();
        m.destinations = j.at("destinations").get<std::vector<NodeId>>();
        m.base.offset = j.at("offset").get<double>();
        m.base.embedding_dim = j.at("embedding_dim").get<int>();
        m.base.alpha = j.at("alpha").get<std::vector<double>>();
        m.base.embeddings = j.at("embeddings").get<std::vector<double>>();
        m.decay.gamma_deg = j.at("decay").at("deg").get<double>();
        m.decay.gamma_vol = j.at("decay").at("vol").get<double>();
        m.decay.gamma_cn = j.at("decay").at("cn").get<double>();
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "markov_pwc") {
            PwcHazard hz;
            hz.cuts = j.at("hazard").at("cuts").get<std::vector<double>>();
            hz.theta = j.at("hazard").at("theta").get<std::vector<FeatureVector>>();
            m.hazard = std::move(hz);
        } else if (kind != "poisson") {
            throw CheckpointError("unknown model kind: " + kind);
        }
        if (!j.at("standardizer").is_null()) {
            FeatureStandardizer s;
            s.mean = j.at("standardizer").at("mean").get<std::array<double, 4>>();
            s.stddev = j.at("standardizer").at("std").get<std::array<double, 4>>();
            m.standardizer = s;
        }
        m.validate();
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw CheckpointError(std::string("malformed model checkpoint: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw CheckpointError(std::string("invalid model checkpoint: ") + e.what());
    }
}

void save_checkpoint(const MarkovModel& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw InputError("cannot open checkpoint file for writing: " + path);
    }
    out << checkpoint_json(m) << '\n';
    if (!out) {
        throw InputError("failed writing checkpoint: " + path);
    }
}

MarkovModel load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw CheckpointError("cannot open checkpoint file: " + path);
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return model_from_json(buffer.str());
}

std::vector<double> quantile_cuts(std::vector<double> samples, std::size_t pieces) {
    std::vector<double> cuts;
    if (pieces <= 1 || samples.empty()) {
        return cuts;
    }
    std::sort(samples.begin(), samples.end());
    const std::size_t n = samples.size();
    for (std::size_t j = 1; j < pieces; ++j) {
        const double q = static_cast<double>(j) / static_cast<double>(pieces);
        const std::size_t idx = static_cast<std::size_t>(
            std::llround(q * static_cast<double>(n - 1)));
        const double value = samples[idx];
        if (value > 0.0 && (cuts.empty() || value > cuts.back())) {
            cuts.push_back(value);
        }
    }
    return cuts;
}

std::vector<double> pooled_interarrival_times(const EventHistory& h) {
    std::vector<double> gaps;
    std::unordered_map<std::uint64_t, double> last_by_dyad;
    for (const Event& ev : h.events()) {
        const std::uint64_t key = directed_key(ev.src, ev.dst);
        auto it = last_by_dyad.find(key);
        if (it != last_by_dyad.end()) {
            gaps.push_back(ev.time - it->second);
            it->second = ev.time;
        } else {
            last_by_dyad.emplace(key, ev.time);
        }
    }
    return gaps;
}

} // namespace graphsurv
