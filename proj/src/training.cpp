#include "graphsurv/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <utility>

#include "graphsurv/errors.hpp"
#include "graphsurv/rng.hpp"

namespace graphsurv {

namespace {

constexpr double kDistEpsilon = 1e-12;

double dot_features(const FeatureVector& a, const FeatureVector& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < kFeatureDim; ++i) {
        s += a[i] * b[i];
    }
    return s;
}

double linear_score(const PoissonParams& p, NodeId u, NodeId v) {
    return 2.0 * p.offset + p.alpha[static_cast<std::size_t>(u)] +
           p.alpha[static_cast<std::size_t>(v)] - embedding_distance(p, u, v);
}

// Parameter-independent pieces of the NLL, precomputed once per epoch so that
// shuffled batches can be revisited without replaying the event stream.
// Positive (event) terms and integral terms are kept separate because they
// differentiate differently.
struct PoissonLogTerm {
    NodeId u, v;
};
struct HazardLogTerm {
    NodeId u, v;
    std::size_t piece;
    FeatureVector x;
};
struct PoissonIntTerm {
    NodeId u, v;
    double weighted_len;
};
struct HazardIntTerm {
    NodeId u, v;
    FeatureVector x;
    double weight;
    std::vector<std::pair<std::size_t, double>> overlaps;
};

struct TermBatch {
    std::vector<PoissonLogTerm> log_poisson;
    std::vector<HazardLogTerm> log_hazard;
    std::vector<PoissonIntTerm> int_poisson;
    std::vector<HazardIntTerm> int_hazard;
};

void emit_integral(const MarkovModel& m, const EdgeLastEventMap& last, TermBatch& batch, NodeId u,
                   NodeId v, double a, double b, double weight) {
    if (m.is_markov()) {
        if (const EdgeState* es = last.find(u, v)) {
            batch.int_hazard.push_back({u, v, m.standardized(es->features), weight,
                                        m.hazard->piece_overlaps(a - es->last_time,
                                                                 b - es->last_time)});
            return;
        }
    }
    batch.int_poisson.push_back({u, v, weight * (b - a)});
}

// One forward sweep over the history. Slice s_m = [t_{m-1}, t_m) contributes
// integral terms for every (or every sampled) ordered dyad, evaluated against
// the pre-event state; event m contributes one log term. The window tail
// [t_M, horizon] forms a final slice without a log term.
std::vector<TermBatch> build_batches(const MarkovModel& m, const EventHistory& h,
                                     const std::optional<ContrastiveConfig>& contrastive,
                                     std::size_t batch_size, Rng* sample_rng, bool* warned) {
    if (m.base.num_nodes() < h.nodes().size()) {
        throw InputError("model does not cover all nodes of the history");
    }
    if (batch_size == 0) {
        throw std::invalid_argument("batch_size must be positive");
    }
    const std::vector<NodeId>& sources = h.sources();
    const std::vector<NodeId>& dests = h.destinations();
    const std::size_t edge_space = h.edge_space_size();

    bool sample = false;
    std::size_t k = 0;
    if (contrastive) {
        k = contrastive->samples_per_slice;
        if (k == 0) {
            throw std::invalid_argument("samples_per_slice must be positive");
        }
        if (k >= edge_space) {
            if (warned != nullptr && !*warned) {
                std::fprintf(stderr,
                             "graphsurv: contrastive k=%zu >= |E|=%zu, using the exact integral\n",
                             k, edge_space);
                *warned = true;
            }
        } else {
            sample = true;
        }
    }
    const double weight =
        sample ? static_cast<double>(edge_space) / static_cast<double>(k) : 1.0;

    const std::size_t n_slices = h.size() + 1;
    const std::size_t bs = std::min(batch_size, n_slices);
    std::vector<TermBatch> batches((n_slices + bs - 1) / bs);

    EdgeLastEventMap last;
    double prev_t = h.begin();
    std::size_t slice = 0;

    auto add_slice_integrals = [&](TermBatch& batch, double a, double b) {
        if (!(b > a)) {
            return;
        }
        if (sample) {
            for (std::size_t i = 0; i < k; ++i) {
                NodeId u, v;
                do {
                    u = sources[sample_rng->below(sources.size())];
                    v = dests[sample_rng->below(dests.size())];
                } while (u == v);
                emit_integral(m, last, batch, u, v, a, b, weight);
            }
        } else {
            for (NodeId u : sources) {
                for (NodeId v : dests) {
                    if (u != v) {
                        emit_integral(m, last, batch, u, v, a, b, 1.0);
                    }
                }
            }
        }
    };

    sweep_history(h, m.decay, [&](const FeatureState& fs, const Event& ev, std::size_t) {
        TermBatch& batch = batches[slice / bs];
        add_slice_integrals(batch, prev_t, ev.time);
        const EdgeState* es = last.find(ev.src, ev.dst);
        if (m.is_markov() && es != nullptr) {
            const double tau = ev.time - es->last_time;
            batch.log_hazard.push_back(
                {ev.src, ev.dst, m.hazard->piece_index(tau), m.standardized(es->features)});
        } else {
            batch.log_poisson.push_back({ev.src, ev.dst});
        }
        last.record(ev.src, ev.dst, ev.time, fs.query(ev.src, ev.dst, ev.time));
        prev_t = ev.time;
        ++slice;
    });
    add_slice_integrals(batches[slice / bs], prev_t, h.horizon());
    return batches;
}

[[noreturn]] void throw_nonfinite(const MarkovModel& m, NodeId u, NodeId v, const char* what) {
    throw TrainingError(std::string("non-finite ") + what + " for edge (" +
                        m.nodes->label(u) + ", " + m.nodes->label(v) + ")");
}

// ds/dz_u is -(z_u - z_v)/dist; at dist ~ 0 the subgradient 0 is used.
void add_poisson_grad(const MarkovModel& m, GradientBuffer& g, NodeId u, NodeId v, double coeff) {
    g.offset += 2.0 * coeff;
    g.alpha[static_cast<std::size_t>(u)] += coeff;
    g.alpha[static_cast<std::size_t>(v)] += coeff;
    const double dist = embedding_distance(m.base, u, v);
    if (dist <= kDistEpsilon) {
        return;
    }
    const auto zu = m.base.embedding(u);
    const auto zv = m.base.embedding(v);
    const std::size_t d = static_cast<std::size_t>(m.base.embedding_dim);
    double* gu = g.embeddings.data() + static_cast<std::size_t>(u) * d;
    double* gv = g.embeddings.data() + static_cast<std::size_t>(v) * d;
    for (std::size_t i = 0; i < d; ++i) {
        const double unit = (zu[i] - zv[i]) / dist;
        gu[i] -= coeff * unit;
        gv[i] += coeff * unit;
    }
}

NllTerms eval_batch(const MarkovModel& m, const TermBatch& batch, GradientBuffer* grad) {
    NllTerms out;
    for (const PoissonLogTerm& t : batch.log_poisson) {
        const double s = linear_score(m.base, t.u, t.v);
        const double mu = softplus(s);
        const double term = -std::log(mu);
        if (!std::isfinite(term)) {
            throw_nonfinite(m, t.u, t.v, "log base rate");
        }
        out.l_pos += term;
        if (grad != nullptr) {
            add_poisson_grad(m, *grad, t.u, t.v, -sigmoid(s) / mu);
        }
    }
    for (const HazardLogTerm& t : batch.log_hazard) {
        const double term = -dot_features(m.hazard->theta[t.piece], t.x);
        if (!std::isfinite(term)) {
            throw_nonfinite(m, t.u, t.v, "log hazard");
        }
        out.l_pos += term;
        if (grad != nullptr) {
            FeatureVector& g = grad->theta[t.piece];
            for (std::size_t i = 0; i < kFeatureDim; ++i) {
                g[i] -= t.x[i];
            }
        }
    }
    for (const PoissonIntTerm& t : batch.int_poisson) {
        const double s = linear_score(m.base, t.u, t.v);
        const double term = softplus(s) * t.weighted_len;
        if (!std::isfinite(term)) {
            throw_nonfinite(m, t.u, t.v, "base-rate integral");
        }
        out.l_neg += term;
        if (grad != nullptr) {
            add_poisson_grad(m, *grad, t.u, t.v, sigmoid(s) * t.weighted_len);
        }
    }
    for (const HazardIntTerm& t : batch.int_hazard) {
        for (const auto& [piece, len] : t.overlaps) {
            const double c = t.weight * std::exp(dot_features(m.hazard->theta[piece], t.x)) * len;
            if (!std::isfinite(c)) {
                throw_nonfinite(m, t.u, t.v, "hazard integral");
            }
            out.l_neg += c;
            if (grad != nullptr) {
                FeatureVector& g = grad->theta[piece];
                for (std::size_t i = 0; i < kFeatureDim; ++i) {
                    g[i] += c * t.x[i];
                }
            }
        }
    }
    return out;
}

struct AdamState {
    double step = 0.0;
    GradientBuffer m;
    GradientBuffer v;

    explicit AdamState(const MarkovModel& model)
        : m(GradientBuffer::like(model)), v(GradientBuffer::like(model)) {}
};

void adam_update(double& param, double& m1, double& m2, double g, double bc1, double bc2,
                 const OptimizerConfig& opt, double decay) {
    m1 = opt.beta1 * m1 + (1.0 - opt.beta1) * g;
    m2 = opt.beta2 * m2 + (1.0 - opt.beta2) * g * g;
    const double step_dir = (m1 / bc1) / (std::sqrt(m2 / bc2) + opt.epsilon);
    param -= opt.learning_rate * (step_dir + decay * param);
}

// Decoupled weight decay, applied to the embeddings only.
void adam_step(MarkovModel& model, const GradientBuffer& g, AdamState& s,
               const OptimizerConfig& opt) {
    s.step += 1.0;
    const double bc1 = 1.0 - std::pow(opt.beta1, s.step);
    const double bc2 = 1.0 - std::pow(opt.beta2, s.step);
    adam_update(model.base.offset, s.m.offset, s.v.offset, g.offset, bc1, bc2, opt, 0.0);
    for (std::size_t i = 0; i < g.alpha.size(); ++i) {
        adam_update(model.base.alpha[i], s.m.alpha[i], s.v.alpha[i], g.alpha[i], bc1, bc2, opt,
                    0.0);
    }
    for (std::size_t i = 0; i < g.embeddings.size(); ++i) {
        adam_update(model.base.embeddings[i], s.m.embeddings[i], s.v.embeddings[i],
                    g.embeddings[i], bc1, bc2, opt, opt.weight_decay);
    }
    if (model.hazard) {
        for (std::size_t j = 0; j < g.theta.size(); ++j) {
            for (std::size_t i = 0; i < kFeatureDim; ++i) {
                adam_update(model.hazard->theta[j][i], s.m.theta[j][i], s.v.theta[j][i],
                            g.theta[j][i], bc1, bc2, opt, 0.0);
            }
        }
    }
}

bool parameters_finite(const MarkovModel& m) {
    if (!std::isfinite(m.base.offset)) {
        return false;
    }
    for (double a : m.base.alpha) {
        if (!std::isfinite(a)) {
            return false;
        }
    }
    for (double z : m.base.embeddings) {
        if (!std::isfinite(z)) {
            return false;
        }
    }
    if (m.hazard) {
        for (const FeatureVector& row : m.hazard->theta) {
            for (double t : row) {
                if (!std::isfinite(t)) {
                    return false;
                }
            }
        }
    }
    return true;
}

void check_optimizer(const OptimizerConfig& opt) {
    if (!(opt.learning_rate > 0.0) || !(opt.weight_decay >= 0.0) || !(opt.epsilon > 0.0) ||
        !(opt.beta1 >= 0.0 && opt.beta1 < 1.0) || !(opt.beta2 >= 0.0 && opt.beta2 < 1.0)) {
        throw std::invalid_argument("invalid optimizer configuration");
    }
    if (opt.batch_size == 0) {
        throw std::invalid_argument("batch_size must be positive");
    }
}

}  // namespace

GradientBuffer GradientBuffer::like(const MarkovModel& model) {
    GradientBuffer g;
    g.alpha.assign(model.base.alpha.size(), 0.0);
    g.embeddings.assign(model.base.embeddings.size(), 0.0);
    if (model.hazard) {
        g.theta.assign(model.hazard->theta.size(), FeatureVector{});
    }
    return g;
}

void GradientBuffer::zero() {
    offset = 0.0;
    std::fill(alpha.begin(), alpha.end(), 0.0);
    std::fill(embeddings.begin(), embeddings.end(), 0.0);
    std::fill(theta.begin(), theta.end(), FeatureVector{});
}

NllTerms nll_exact(const MarkovModel& model, const EventHistory& history) {
    model.validate();
    const auto batches = build_batches(model, history, std::nullopt,
                                       std::numeric_limits<std::size_t>::max(), nullptr, nullptr);
    NllTerms total;
    for (const TermBatch& b : batches) {
        const NllTerms r = eval_batch(model, b, nullptr);
        total.l_pos += r.l_pos;
        total.l_neg += r.l_neg;
    }
    return total;
}

NllTerms nll_contrastive(const MarkovModel& model, const EventHistory& history,
                         const ContrastiveConfig& contrastive) {
    model.validate();
    Rng rng(contrastive.seed);
    bool warned = false;
    const auto batches = build_batches(model, history, contrastive,
                                       std::numeric_limits<std::size_t>::max(), &rng, &warned);
    NllTerms total;
    for (const TermBatch& b : batches) {
        const NllTerms r = eval_batch(model, b, nullptr);
        total.l_pos += r.l_pos;
        total.l_neg += r.l_neg;
    }
    return total;
}

GradientBuffer grad_nll(const MarkovModel& model, const EventHistory& history,
                        const std::optional<ContrastiveConfig>& contrastive, NllTerms* loss_out) {
    model.validate();
    std::optional<Rng> rng;
    if (contrastive) {
        rng.emplace(contrastive->seed);
    }
    bool warned = false;
    const auto batches =
        build_batches(model, history, contrastive, std::numeric_limits<std::size_t>::max(),
                      rng ? &*rng : nullptr, &warned);
    GradientBuffer grad = GradientBuffer::like(model);
    NllTerms total;
    for (const TermBatch& b : batches) {
        const NllTerms r = eval_batch(model, b, &grad);
        total.l_pos += r.l_pos;
        total.l_neg += r.l_neg;
    }
    if (loss_out != nullptr) {
        *loss_out = total;
    }
    return grad;
}

FitResult fit(const MarkovModel& initial, const EventHistory& train, const OptimizerConfig& opt,
              const std::optional<ContrastiveConfig>& contrastive, const EpochCallback& on_epoch) {
    initial.validate();
    check_optimizer(opt);

    FitResult result{initial, {}};
    MarkovModel& model = result.model;
    AdamState adam(model);
    GradientBuffer grad = GradientBuffer::like(model);
    Rng sample_rng(contrastive ? contrastive->seed : 0);
    Rng shuffle_rng(opt.seed);
    bool warned = false;
    double last_finite = std::numeric_limits<double>::quiet_NaN();

    for (std::size_t epoch = 0; epoch < opt.epochs; ++epoch) {
        const auto batches =
            build_batches(model, train, contrastive, opt.batch_size, &sample_rng, &warned);
        std::vector<std::size_t> order(batches.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[shuffle_rng.below(i)]);
        }
        for (std::size_t pos = 0; pos < order.size(); ++pos) {
            grad.zero();
            NllTerms loss;
            try {
                loss = eval_batch(model, batches[order[pos]], &grad);
            } catch (const TrainingError& e) {
                throw TrainingError(e.what(), last_finite);
            }
            const double total = loss.total();
            if (!std::isfinite(total)) {
                throw TrainingError("training diverged: non-finite loss at epoch " +
                                        std::to_string(epoch),
                                    last_finite);
            }
            last_finite = total;
            adam_step(model, grad, adam, opt);
            if (!parameters_finite(model)) {
                throw TrainingError("training diverged: non-finite parameter at epoch " +
                                        std::to_string(epoch),
                                    last_finite);
            }
            result.trace.push_back({epoch, pos, loss.l_pos, loss.l_neg, total});
        }
        if (on_epoch) {
            on_epoch(epoch, model);
        }
        if (opt.checkpoint_every > 0 && !opt.checkpoint_prefix.empty() &&
            (epoch + 1) % opt.checkpoint_every == 0) {
            save_checkpoint(model,
                            opt.checkpoint_prefix + "epoch" + std::to_string(epoch + 1) + ".json");
        }
    }
    return result;
}

MarkovModel make_initial_model(const EventHistory& train, const ModelInitConfig& config) {
    if (config.embedding_dim <= 0) {
        throw std::invalid_argument("embedding_dim must be positive");
    }
    MarkovModel m;
    m.nodes = train.nodes_ptr();
    m.sources = train.sources();
    m.destinations = train.destinations();
    m.decay = config.decay;

    const std::size_t n = train.nodes().size();
    m.base.offset = 0.0;
    m.base.embedding_dim = config.embedding_dim;
    m.base.alpha.assign(n, 0.0);
    m.base.embeddings.resize(n * static_cast<std::size_t>(config.embedding_dim));
    Rng rng(config.seed);
    for (double& z : m.base.embeddings) {
        z = rng.uniform_symmetric(config.embedding_init_scale);
    }

    if (config.kind == ModelKind::kMarkovPwc) {
        if (config.hazard_pieces == 0) {
            throw std::invalid_argument("hazard_pieces must be positive");
        }
        PwcHazard hazard;
        if (!config.explicit_cuts.empty()) {
            hazard.cuts = config.explicit_cuts;
        } else if (config.hazard_pieces > 1) {
            hazard.cuts = quantile_cuts(pooled_interarrival_times(train), config.hazard_pieces);
            if (hazard.cuts.empty()) {
                // No dyad has repeat events to take quantiles from; fall back
                // to an even grid over the observation window.
                const double span = train.horizon() - train.begin();
                if (span > 0.0) {
                    for (std::size_t j = 1; j < config.hazard_pieces; ++j) {
                        hazard.cuts.push_back(span * static_cast<double>(j) /
                                              static_cast<double>(config.hazard_pieces));
                    }
                }
            }
        }
        hazard.theta.assign(hazard.cuts.size() + 1, FeatureVector{});
        m.hazard = std::move(hazard);
        if (config.standardize_features) {
            m.standardizer = compute_standardizer(train, config.decay);
        }
    }
    m.validate();
    return m;
}

void write_trace_csv(const std::vector<TraceRow>& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw InputError("cannot open output file: " + path);
    }
    out << "epoch,batch,l_pos,l_neg,total\n";
    char buf[128];
    for (const TraceRow& row : trace) {
        std::snprintf(buf, sizeof(buf), "%zu,%zu,%.17g,%.17g,%.17g\n", row.epoch, row.batch,
                      row.l_pos, row.l_neg, row.total);
        out << buf;
    }
    if (!out) {
        throw InputError("failed writing trace file: " + path);
    }
}

}  // namespace graphsurv
