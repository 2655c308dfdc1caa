#include "graphsurv/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <thread>
#include <unordered_map>

#include "graphsurv/errors.hpp"
#include "graphsurv/rng.hpp"

#include "json.hpp"

namespace graphsurv {

namespace {

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw InputError("cannot open output file: " + path);
    }
    return out;
}

void finish_output(std::ofstream& out, const std::string& path) {
    out.flush();
    if (!out) {
        throw InputError("failed writing output file: " + path);
    }
}

}  // namespace

std::pair<double, double> burstiness(const std::vector<double>& times) {
    if (times.size() < 3) {
        throw std::invalid_argument("burstiness needs at least 3 event times");
    }
    std::vector<double> gaps(times.size() - 1);
    for (std::size_t i = 0; i + 1 < times.size(); ++i) {
        gaps[i] = times[i + 1] - times[i];
        if (!(gaps[i] >= 0.0)) {
            throw std::invalid_argument("burstiness needs nondecreasing times");
        }
    }
    const double mean =
        std::accumulate(gaps.begin(), gaps.end(), 0.0) / static_cast<double>(gaps.size());
    if (!(mean > 0.0)) {
        throw std::invalid_argument("burstiness undefined for a zero mean inter-arrival");
    }
    double ss = 0.0;
    for (double g : gaps) {
        const double d = g - mean;
        ss += d * d;
    }
    const double cv =
        std::sqrt(ss / (static_cast<double>(gaps.size() - 1) * mean * mean));
    return {cv, (cv - 1.0) / (cv + 1.0)};
}

BurstinessReport burstiness_report(const EventHistory& h, std::size_t min_events,
                                   std::size_t bins) {
    if (bins == 0) {
        throw std::invalid_argument("histogram needs at least one bin");
    }
    min_events = std::max<std::size_t>(min_events, 3);

    std::map<std::pair<NodeId, NodeId>, std::vector<double>> by_dyad;
    for (const Event& ev : h.events()) {
        by_dyad[{ev.src, ev.dst}].push_back(ev.time);
    }

    BurstinessReport report;
    report.bin_edges.resize(bins + 1);
    for (std::size_t i = 0; i <= bins; ++i) {
        report.bin_edges[i] = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(bins);
    }
    report.bin_counts.assign(bins, 0);

    for (const auto& [dyad, times] : by_dyad) {
        if (times.size() < min_events) {
            continue;
        }
        const auto [cv, b] = burstiness(times);
        report.rows.push_back({dyad.first, dyad.second, times.size(), cv, b});
        auto bin = static_cast<std::size_t>((b + 1.0) / 2.0 * static_cast<double>(bins));
        if (bin >= bins) {
            bin = bins - 1;
        }
        ++report.bin_counts[bin];
    }
    return report;
}

void write_burstiness_rows_csv(const BurstinessReport& report, const EventHistory& h,
                               const std::string& path) {
    std::ofstream out = open_output(path);
    out << "src,dst,n_events,cv,b\n";
    char buf[128];
    for (const BurstinessRow& row : report.rows) {
        std::snprintf(buf, sizeof(buf), ",%zu,%.17g,%.17g\n", row.n_events, row.cv, row.b);
        out << h.nodes().label(row.src) << ',' << h.nodes().label(row.dst) << buf;
    }
    finish_output(out, path);
}

void write_burstiness_histogram_csv(const BurstinessReport& report, const std::string& path) {
    std::ofstream out = open_output(path);
    out << "bin_lo,bin_hi,count\n";
    char buf[128];
    for (std::size_t i = 0; i < report.bin_counts.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%zu\n", report.bin_edges[i],
                      report.bin_edges[i + 1], report.bin_counts[i]);
        out << buf;
    }
    finish_output(out, path);
}

std::vector<LabeledPair> make_labeled_pairs(const EventHistory& h_eval, std::size_t n_neg,
                                            std::uint64_t seed) {
    const std::vector<NodeId>& dests = h_eval.destinations();
    if (dests.size() < 3) {
        throw EvalError("negative sampling needs at least 3 destination nodes");
    }
    if (n_neg == 0) {
        throw std::invalid_argument("n_neg must be positive");
    }
    Rng rng(seed);
    std::vector<LabeledPair> pairs;
    pairs.reserve(h_eval.size() * (1 + n_neg));
    for (const Event& ev : h_eval.events()) {
        pairs.push_back({ev, ev.dst, 1});
        for (std::size_t i = 0; i < n_neg; ++i) {
            NodeId neg;
            do {
                neg = dests[rng.below(dests.size())];
            } while (neg == ev.src || neg == ev.dst);
            pairs.push_back({ev, neg, 0});
        }
    }
    return pairs;
}

std::string scorer_name(ScorerKind kind) {
    switch (kind) {
        case ScorerKind::kPoisson:
            return "poisson";
        case ScorerKind::kMarkovPwc:
            return "markov_pwc";
        case ScorerKind::kPreferentialAttachment:
            return "preferential_attachment";
        case ScorerKind::kRandom:
            return "random";
    }
    throw std::invalid_argument("unknown scorer kind");
}

ScorerKind scorer_from_name(const std::string& name) {
    if (name == "poisson") {
        return ScorerKind::kPoisson;
    }
    if (name == "markov_pwc") {
        return ScorerKind::kMarkovPwc;
    }
    if (name == "preferential_attachment") {
        return ScorerKind::kPreferentialAttachment;
    }
    if (name == "random") {
        return ScorerKind::kRandom;
    }
    throw std::invalid_argument("unknown scorer: " + name);
}

std::vector<double> score_pairs(const ScorerSpec& scorer, const EventHistory& stream,
                                const std::vector<LabeledPair>& pairs, std::uint64_t seed) {
    const bool needs_model =
        scorer.kind == ScorerKind::kPoisson || scorer.kind == ScorerKind::kMarkovPwc;
    if (needs_model && scorer.model == nullptr) {
        throw EvalError("scorer " + scorer_name(scorer.kind) + " needs a model");
    }
    if (scorer.kind == ScorerKind::kMarkovPwc && !scorer.model->is_markov()) {
        throw EvalError("markov_pwc scorer needs a model with a hazard");
    }

    // Checkpoint-loaded models carry their own node table; translate the
    // stream's ids by label once.
    std::vector<NodeId> to_model;
    if (needs_model) {
        to_model.resize(stream.nodes().size());
        for (std::size_t i = 0; i < to_model.size(); ++i) {
            const auto id = scorer.model->nodes->find(stream.nodes().label(static_cast<NodeId>(i)));
            if (!id) {
                throw EvalError("model lacks node " +
                                stream.nodes().label(static_cast<NodeId>(i)));
            }
            to_model[i] = *id;
        }
    }

    Rng rng(seed);
    FeatureState feats(scorer.model != nullptr ? scorer.model->decay : DecayConfig{});
    EdgeLastEventMap last;
    std::unordered_map<NodeId, double> degree;

    const std::vector<Event>& events = stream.events();
    std::size_t cursor = 0;
    double prev_time = -std::numeric_limits<double>::infinity();

    std::vector<double> scores;
    scores.reserve(pairs.size());
    for (const LabeledPair& pair : pairs) {
        const double t = pair.event.time;
        if (t < prev_time) {
            throw EvalError("pairs out of time order; scoring state would look ahead");
        }
        prev_time = t;
        while (cursor < events.size() && events[cursor].time < t) {
            const Event& ev = events[cursor];
            if (scorer.kind == ScorerKind::kMarkovPwc) {
                const NodeId mu = to_model[static_cast<std::size_t>(ev.src)];
                const NodeId mv = to_model[static_cast<std::size_t>(ev.dst)];
                last.record(mu, mv, ev.time, feats.query(mu, mv, ev.time));
                feats.update({mu, mv, ev.time});
            } else if (scorer.kind == ScorerKind::kPreferentialAttachment) {
                degree[ev.src] += 1.0;
                degree[ev.dst] += 1.0;
            }
            ++cursor;
        }

        double score = 0.0;
        switch (scorer.kind) {
            case ScorerKind::kPoisson:
                score = poisson_rate(scorer.model->base,
                                     to_model[static_cast<std::size_t>(pair.event.src)],
                                     to_model[static_cast<std::size_t>(pair.dst)]);
                break;
            case ScorerKind::kMarkovPwc:
                score = edge_intensity(*scorer.model,
                                       to_model[static_cast<std::size_t>(pair.event.src)],
                                       to_model[static_cast<std::size_t>(pair.dst)], t, last);
                break;
            case ScorerKind::kPreferentialAttachment: {
                const auto du = degree.find(pair.event.src);
                const auto dv = degree.find(pair.dst);
                score = (du == degree.end() ? 0.0 : du->second) *
                        (dv == degree.end() ? 0.0 : dv->second);
                break;
            }
            case ScorerKind::kRandom:
                score = rng.uniform();
                break;
        }
        if (!std::isfinite(score)) {
            throw EvalError("non-finite score from scorer " + scorer_name(scorer.kind));
        }
        scores.push_back(score);
    }
    return scores;
}

RocResult roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) {
        throw std::invalid_argument("scores and labels must have equal length");
    }
    std::size_t n_pos = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 0 && labels[i] != 1) {
            throw std::invalid_argument("labels must be 0 or 1");
        }
        if (!std::isfinite(scores[i])) {
            throw std::invalid_argument("scores must be finite");
        }
        n_pos += static_cast<std::size_t>(labels[i]);
    }
    const std::size_t n_neg = labels.size() - n_pos;
    if (n_pos == 0 || n_neg == 0) {
        throw EvalError("AUC needs at least one positive and one negative label");
    }

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores[a] < scores[b];
    });

    // Midrank sum over positives; ranks are 1-based.
    double rank_sum = 0.0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) {
            ++j;
        }
        const double midrank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) {
            if (labels[order[k]] == 1) {
                rank_sum += midrank;
            }
        }
        i = j + 1;
    }
    const double np = static_cast<double>(n_pos);
    const double nn = static_cast<double>(n_neg);

    RocResult out;
    out.auc = (rank_sum - np * (np + 1.0) / 2.0) / (np * nn);

    // ROC sweep from the highest threshold down; ties advance together.
    out.thresholds.push_back(std::numeric_limits<double>::infinity());
    out.fpr.push_back(0.0);
    out.tpr.push_back(0.0);
    std::size_t tp = 0;
    std::size_t fp = 0;
    for (std::size_t i = order.size(); i > 0;) {
        std::size_t j = i;
        const double s = scores[order[i - 1]];
        while (j > 0 && scores[order[j - 1]] == s) {
            --j;
            if (labels[order[j]] == 1) {
                ++tp;
            } else {
                ++fp;
            }
        }
        out.thresholds.push_back(s);
        out.tpr.push_back(static_cast<double>(tp) / np);
        out.fpr.push_back(static_cast<double>(fp) / nn);
        i = j;
    }
    return out;
}

void write_roc_csv(const RocResult& roc, const std::string& path) {
    std::ofstream out = open_output(path);
    out << "fpr,tpr\n";
    char buf[96];
    for (std::size_t i = 0; i < roc.fpr.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", roc.fpr[i], roc.tpr[i]);
        out << buf;
    }
    finish_output(out, path);
}

LinkPredictionResult run_link_prediction(const EventHistory& stream,
                                         const EventHistory& eval_slice,
                                         const std::vector<ScorerSpec>& scorers,
                                         const LinkPredictionConfig& config) {
    if (eval_slice.empty()) {
        throw EvalError("evaluation slice has no events");
    }
    if (scorers.empty()) {
        throw std::invalid_argument("no scorers requested");
    }
    if (config.num_seeds == 0) {
        throw std::invalid_argument("num_seeds must be positive");
    }

    LinkPredictionResult result;
    result.scorers.resize(scorers.size());
    for (std::size_t s = 0; s < scorers.size(); ++s) {
        result.scorers[s].kind = scorers[s].kind;
        result.scorers[s].aucs.assign(config.num_seeds, 0.0);
    }

    // Seeds are independent; per-seed results land in preassigned slots, so
    // the outcome is identical for any worker count.
    std::vector<std::size_t> pair_counts(config.num_seeds, 0);
    const auto run_seed = [&](std::size_t i) {
        const std::uint64_t pair_seed = config.base_seed + i;
        const auto pairs = make_labeled_pairs(eval_slice, config.n_neg, pair_seed);
        pair_counts[i] = pairs.size();
        std::vector<int> labels(pairs.size());
        for (std::size_t p = 0; p < pairs.size(); ++p) {
            labels[p] = pairs[p].label;
        }
        for (std::size_t s = 0; s < scorers.size(); ++s) {
            // Decorrelate the random scorer's stream from the pair sampler.
            const std::uint64_t scorer_seed = pair_seed ^ 0x9e3779b97f4a7c15ull;
            const auto scores = score_pairs(scorers[s], stream, pairs, scorer_seed);
            RocResult roc = roc_auc(scores, labels);
            result.scorers[s].aucs[i] = roc.auc;
            if (i == 0) {
                result.scorers[s].roc = std::move(roc);
            }
        }
    };

    const std::size_t workers = std::max<std::size_t>(
        1, std::min(config.jobs, config.num_seeds));
    if (workers == 1) {
        for (std::size_t i = 0; i < config.num_seeds; ++i) {
            run_seed(i);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::mutex error_mutex;
        std::exception_ptr first_error;
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < config.num_seeds;
                     i = next.fetch_add(1)) {
                    try {
                        run_seed(i);
                    } catch (...) {
                        const std::lock_guard<std::mutex> lock(error_mutex);
                        if (!first_error) {
                            first_error = std::current_exception();
                        }
                    }
                }
            });
        }
        for (std::thread& t : pool) {
            t.join();
        }
        if (first_error) {
            std::rethrow_exception(first_error);
        }
    }
    result.pairs_per_seed = pair_counts[0];

    for (ScorerResult& sr : result.scorers) {
        const double n = static_cast<double>(sr.aucs.size());
        const double mean = std::accumulate(sr.aucs.begin(), sr.aucs.end(), 0.0) / n;
        double ss = 0.0;
        for (double a : sr.aucs) {
            ss += (a - mean) * (a - mean);
        }
        sr.auc_mean = mean;
        sr.auc_std = sr.aucs.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    }
    return result;
}

std::string link_prediction_json(const LinkPredictionResult& result,
                                 const LinkPredictionConfig& config) {
    nlohmann::json j;
    j["n_neg"] = config.n_neg;
    j["num_seeds"] = config.num_seeds;
    j["base_seed"] = config.base_seed;
    j["pairs_per_seed"] = result.pairs_per_seed;
    nlohmann::json scorers = nlohmann::json::object();
    for (const ScorerResult& sr : result.scorers) {
        nlohmann::json entry;
        entry["auc_mean"] = sr.auc_mean;
        entry["auc_std"] = sr.auc_std;
        entry["aucs"] = sr.aucs;
        scorers[scorer_name(sr.kind)] = std::move(entry);
    }
    j["scorers"] = std::move(scorers);
    return j.dump(2) + "\n";
}

}  // namespace graphsurv
