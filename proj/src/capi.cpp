#include "graphsurv.h"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <new>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "graphsurv/errors.hpp"
#include "graphsurv/evaluation.hpp"
#include "graphsurv/hash.hpp"
#include "graphsurv/models.hpp"
#include "graphsurv/simulation.hpp"
#include "graphsurv/training.hpp"

#include "json.hpp"

struct gs_history {
    graphsurv::EventHistory value;
};

struct gs_model {
    graphsurv::MarkovModel value;
};

namespace {

using nlohmann::json;

thread_local std::string g_last_error;

void set_error(const std::string& message) { g_last_error = message; }

// Runs fn inside the library's exception-to-status mapping; fn only runs
// after the null checks its caller performed.
template <typename Fn>
gs_status guarded(Fn&& fn) {
    try {
        fn();
        return GS_OK;
    } catch (const graphsurv::ParseError& e) {
        set_error(e.what());
        return GS_ERROR_INPUT;
    } catch (const graphsurv::InputError& e) {
        set_error(e.what());
        return GS_ERROR_INPUT;
    } catch (const graphsurv::TrainingError& e) {
        set_error(e.what());
        return GS_ERROR_TRAINING;
    } catch (const graphsurv::CheckpointError& e) {
        set_error(e.what());
        return GS_ERROR_CHECKPOINT;
    } catch (const graphsurv::EvalError& e) {
        set_error(e.what());
        return GS_ERROR_EVAL;
    } catch (const json::exception& e) {
        set_error(std::string("bad options: ") + e.what());
        return GS_ERROR_INPUT;
    } catch (const std::invalid_argument& e) {
        set_error(e.what());
        return GS_ERROR_INPUT;
    } catch (const std::bad_alloc&) {
        set_error("out of memory");
        return GS_ERROR;
    } catch (const std::exception& e) {
        set_error(e.what());
        return GS_ERROR;
    }
}

gs_status require(bool ok, const char* message) {
    if (!ok) {
        set_error(message);
        return GS_ERROR_INPUT;
    }
    return GS_OK;
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out == nullptr) {
        throw std::bad_alloc();
    }
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

json parse_options(const char* options_json) {
    if (options_json == nullptr || *options_json == '\0') {
        return json::object();
    }
    json j = json::parse(options_json);
    if (!j.is_object()) {
        throw graphsurv::InputError("options must be a JSON object");
    }
    return j;
}

void check_keys(const json& j, std::initializer_list<const char*> allowed) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* key : allowed) {
            if (it.key() == key) {
                known = true;
                break;
            }
        }
        if (!known) {
            throw graphsurv::InputError("unknown option key: " + it.key());
        }
    }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
        return fallback;
    }
    return it->get<T>();
}

// Fingerprint of the resolved options, key order normalized, for manifests.
std::string options_hash(const json& j) {
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx",
                  static_cast<unsigned long long>(graphsurv::fnv1a64(j.dump())));
    return hex;
}

graphsurv::DecayConfig decay_from(const json& j) {
    graphsurv::DecayConfig decay;
    const auto it = j.find("decay");
    if (it != j.end() && !it->is_null()) {
        check_keys(*it, {"deg", "vol", "cn"});
        decay.gamma_deg = get_or(*it, "deg", decay.gamma_deg);
        decay.gamma_vol = get_or(*it, "vol", decay.gamma_vol);
        decay.gamma_cn = get_or(*it, "cn", decay.gamma_cn);
    }
    return decay;
}

std::optional<graphsurv::ContrastiveConfig> contrastive_from(const json& j) {
    const auto it = j.find("contrastive");
    if (it == j.end() || it->is_null()) {
        return std::nullopt;
    }
    check_keys(*it, {"samples_per_slice", "seed"});
    graphsurv::ContrastiveConfig c;
    c.samples_per_slice = get_or<std::size_t>(*it, "samples_per_slice", c.samples_per_slice);
    c.seed = get_or<std::uint64_t>(*it, "seed", c.seed);
    return c;
}

}  // namespace

extern "C" {

const char* gs_version(void) { return "0.1.0"; }

const char* gs_last_error(void) { return g_last_error.c_str(); }

void gs_string_free(char* s) { std::free(s); }

gs_status gs_history_load_csv(const char* path, const char* options_json, gs_history** out) {
    if (gs_status st = require(path != nullptr && out != nullptr,
                               "gs_history_load_csv: path and out must not be NULL")) {
        return st;
    }
    return guarded([&] {
        const json j = parse_options(options_json);
        check_keys(j, {"delimiter", "src_column", "dst_column", "time_column", "has_header",
                       "dedup_simultaneous", "max_events", "jitter_ties"});
        graphsurv::CsvFormat format;
        const std::string delim = get_or<std::string>(j, "delimiter", "");
        if (delim.size() > 1) {
            throw graphsurv::InputError("delimiter must be one character or empty");
        }
        format.delimiter = delim.empty() ? '\0' : delim[0];
        format.src_column = get_or(j, "src_column", format.src_column);
        format.dst_column = get_or(j, "dst_column", format.dst_column);
        format.time_column = get_or(j, "time_column", format.time_column);
        format.has_header = get_or(j, "has_header", format.has_header);
        // Tie policy applies at parse time, while raw timestamps still carry
        // the tie structure.
        graphsurv::PreprocessOptions opts;
        opts.dedup_simultaneous = get_or(j, "dedup_simultaneous", false);
        if (j.contains("max_events") && !j["max_events"].is_null()) {
            opts.max_events = j["max_events"].get<std::size_t>();
        }
        if (j.contains("jitter_ties") && !j["jitter_ties"].is_null()) {
            opts.jitter_ties = j["jitter_ties"].get<double>();
        }
        *out = new gs_history{graphsurv::ingest_csv(path, format, opts)};
    });
}

gs_status gs_history_preprocess(const gs_history* h, const char* options_json, gs_history** out) {
    if (gs_status st = require(h != nullptr && out != nullptr,
                               "gs_history_preprocess: history and out must not be NULL")) {
        return st;
    }
    return guarded([&] {
        const json j = parse_options(options_json);
        check_keys(j, {"dedup_simultaneous", "max_events", "jitter_ties", "rescale"});
        graphsurv::PreprocessOptions opts;
        opts.dedup_simultaneous = get_or(j, "dedup_simultaneous", false);
        if (j.contains("max_events") && !j["max_events"].is_null()) {
            opts.max_events = j["max_events"].get<std::size_t>();
        }
        if (j.contains("jitter_ties") && !j["jitter_ties"].is_null()) {
            opts.jitter_ties = j["jitter_ties"].get<double>();
        }
        graphsurv::EventHistory result = graphsurv::preprocess(h->value, opts);
        if (j.contains("rescale") && !j["rescale"].is_null()) {
            result = graphsurv::rescale_times(result, j["rescale"].get<double>());
        }
        *out = new gs_history{std::move(result)};
    });
}

gs_status gs_history_split(const gs_history* h, const char* options_json, gs_history** train,
                           gs_history** val, gs_history** test) {
    if (gs_status st = require(h != nullptr && train != nullptr && val != nullptr &&
                                   test != nullptr,
                               "gs_history_split: all arguments must not be NULL")) {
        return st;
    }
    return guarded([&] {
        const json j = parse_options(options_json);
        check_keys(j, {"t_train", "t_val", "t_test", "f_train", "f_val"});
        graphsurv::SplitSpec spec{};
        if (j.contains("f_train")) {
            if (j.contains("t_train") || j.contains("t_val") || j.contains("t_test")) {
                throw graphsurv::InputError("give either fraction or time cut-offs, not both");
            }
            spec = graphsurv::split_spec_from_fractions(h->value, j["f_train"].get<double>(),
                                                        get_or(j, "f_val", 1.0));
        } else {
            if (!j.contains("t_train")) {
                throw graphsurv::InputError("split needs t_train or f_train");
            }
            spec.t_train = j["t_train"].get<double>();
            spec.t_val = get_or(j, "t_val", h->value.horizon());
            spec.t_test = get_or(j, "t_test", h->value.horizon());
        }
        graphsurv::SplitResult parts = graphsurv::split(h->value, spec);
        *train = new gs_history{std::move(parts.train)};
        *val = new gs_history{std::move(parts.val)};
        *test = new gs_history{std::move(parts.test)};
    });
}

gs_status gs_history_save(const gs_history* h, const char* path) {
    if (gs_status st = require(h != nullptr && path != nullptr,
                               "gs_history_save: history and path must not be NULL")) {
        return st;
    }
    return guarded([&] { graphsurv::write_canonical(h->value, path); });
}

gs_status gs_history_summary_json(const gs_history* h, char** out_json) {
    if (gs_status st = require(h != nullptr && out_json != nullptr,
                               "gs_history_summary_json: history and out must not be NULL")) {
        return st;
    }
    return guarded([&] { *out_json = dup_string(graphsurv::summary_json(h->value)); });
}

size_t gs_history_event_count(const gs_history* h) { return h == nullptr ? 0 : h->value.size(); }

size_t gs_history_node_count(const gs_history* h) {
    return h == nullptr ? 0 : h->value.nodes().size();
}

double gs_history_begin(const gs_history* h) {
    return h == nullptr ? std::nan("") : h->value.begin();
}

double gs_history_horizon(const gs_history* h) {
    return h == nullptr ? std::nan("") : h->value.horizon();
}

void gs_history_free(gs_history* h) { delete h; }

gs_status gs_model_init(const gs_history* train, const char* options_json, gs_model** out) {
    if (gs_status st = require(train != nullptr && out != nullptr,
                               "gs_model_init: history and out must not be NULL")) {
        return st;
    }
    return guarded([&] {
        const json j = parse_options(options_json);
        check_keys(j, {"kind", "embedding_dim", "hazard_pieces", "cuts", "decay",
                       "standardize_features", "embedding_init_scale", "seed"});
        graphsurv::ModelInitConfig config;
        config.kind =
            graphsurv::model_kind_from_name(get_or<std::string>(j, "kind", "markov_pwc"));
        config.embedding_dim = get_or(j, "embedding_dim", config.embedding_dim);
        config.hazard_pieces = get_or<std::size_t>(j, "hazard_pieces", config.hazard_pieces);
        config.explicit_cuts = get_or(j, "cuts", config.explicit_cuts);
        config.decay = decay_from(j);
        config.standardize_features =
            get_or(j, "standardize_features", config.standardize_features);
        config.embedding_init_scale =
            get_or(j, "embedding_init_scale", config.embedding_init_scale);
        config.seed = get_or<std::uint64_t>(j, "seed", config.seed);
        *out = new gs_model{graphsurv::make_initial_model(train->value, config)};
    });
}

gs_status gs_model_load(const char* path, gs_model** out) {
    if (gs_status st = require(path != nullptr && out != nullptr,
                               "gs_model_load: path and out must not be NULL")) {
        return st;
    }
    return guarded([&] { *out = new gs_model{graphsurv::load_checkpoint(path)}; });
}

gs_status gs_model_save(const gs_model* m, const char* path) {
    if (gs_status st = require(m != nullptr && path != nullptr,
                               "gs_model_save: model and path must not be NULL")) {
        return st;
    }
    return guarded([&] { graphsurv::save_checkpoint(m->value, path); });
}

gs_status gs_model_kind(const gs_model* m, char** out_kind) {
    if (gs_status st = require(m != nullptr && out_kind != nullptr,
                               "gs_model_kind: model and out must not be NULL")) {
        return st;
    }
    return guarded([&] {
        *out_kind = dup_string(graphsurv::model_kind_name(
            m->value.is_markov() ? graphsurv::ModelKind::kMarkovPwc
                                 : graphsurv::ModelKind::kPoisson));
    });
}

gs_status gs_model_fit(const gs_model* m, const gs_history* train, const char* options_json,
                       gs_model** fitted, char** summary_json) {
    if (gs_status st = require(m != nullptr && train != nullptr && fitted != nullptr,
                               "gs_model_fit: model, history and out must not be NULL")) {
        return st;
    }
    return guarded([&] {
        const json j = parse_options(options_json);
        check_keys(j, {"learning_rate", "weight_decay", "beta1", "beta2", "epsilon", "epochs",
                       "batch_size", "seed", "checkpoint_every", "checkpoint_prefix",
                       "contrastive", "trace_csv"});
        graphsurv::OptimizerConfig opt;
        opt.learning_rate = get_or(j, "learning_rate", opt.learning_rate);
        opt.weight_decay = get_or(j, "weight_decay", opt.weight_decay);
        opt.beta1 = get_or(j, "beta1", opt.beta1);
        opt.beta2 = get_or(j, "beta2", opt.beta2);
        opt.epsilon = get_or(j, "epsilon", opt.epsilon);
        opt.epochs = get_or<std::size_t>(j, "epochs", opt.epochs);
        opt.batch_size = get_or<std::size_t>(j, "batch_size", opt.batch_size);
        opt.seed = get_or<std::uint64_t>(j, "seed", opt.seed);
        opt.checkpoint_every = get_or<std::size_t>(j, "checkpoint_every", opt.checkpoint_every);
        opt.checkpoint_prefix = get_or<std::string>(j, "checkpoint_prefix", "");
        const auto contrastive = contrastive_from(j);

        graphsurv::FitResult result = graphsurv::fit(m->value, train->value, opt, contrastive);
        const std::string trace_path = get_or<std::string>(j, "trace_csv", "");
        if (!trace_path.empty()) {
            graphsurv::write_trace_csv(result.trace, trace_path);
        }
        if (summary_json != nullptr) {
            json summary;
            summary["config_hash"] = options_hash(j);
            summary["epochs"] = opt.epochs;
            summary["batches"] = result.trace.size();
            if (result.trace.empty()) {
                summary["first"] = nullptr;
                summary["final"] = nullptr;
            } else {
                const auto row_json = [](const graphsurv::TraceRow& row) {
                    json r;
                    r["l_pos"] = row.l_pos;
                    r["l_neg"] = row.l_neg;
                    r["total"] = row.total;
                    return r;
                };
                summary["first"] = row_json(result.trace.front());
                summary["final"] = row_json(result.trace.back());
            }
            *summary_json = dup_string(summary.dump(2) + "\n");
        }
        *fitted = new gs_model{std::move(result.model)};
    });
}

gs_status gs_model_nll(const gs_model* m, const gs_history* h, const char* options_json,
                       double* l_pos, double* l_neg) {
    if (gs_status st = require(m != nullptr && h != nullptr && l_pos != nullptr &&
                                   l_neg != nullptr,
                               "gs_model_nll: all arguments must not be NULL")) {
        return st;
    }
    return guarded([&] {
        const json j = parse_options(options_json);
        check_keys(j, {"contrastive"});
        const auto contrastive = contrastive_from(j);
        const graphsurv::NllTerms terms =
            contrastive ? graphsurv::nll_contrastive(m->value, h->value, *contrastive)
                        : graphsurv::nll_exact(m->value, h->value);
        *l_pos = terms.l_pos;
        *l_neg = terms.l_neg;
    });
}

void gs_model_free(gs_model* m) { delete m; }

gs_status gs_simulate(const gs_model* m, const char* options_json, const gs_history* warm_start,
                      gs_history** out, char** manifest_json) {
    if (gs_status st = require(m != nullptr && out != nullptr,
                               "gs_simulate: model and out must not be NULL")) {
        return st;
    }
    return guarded([&] {
        const json j = parse_options(options_json);
        check_keys(j, {"t0", "horizon", "max_events", "seed"});
        graphsurv::SimConfig config;
        config.t0 = get_or(j, "t0", config.t0);
        config.horizon = get_or(j, "horizon", config.horizon);
        config.max_events = get_or<std::size_t>(j, "max_events", config.max_events);
        config.seed = get_or<std::uint64_t>(j, "seed", config.seed);
        if (warm_start != nullptr) {
            config.warm_start = &warm_start->value;
        }
        graphsurv::SimulationResult result = graphsurv::simulate(m->value, config);
        if (manifest_json != nullptr) {
            char hash[17];
            std::snprintf(hash, sizeof(hash), "%016llx",
                          static_cast<unsigned long long>(
                              graphsurv::fnv1a64(graphsurv::checkpoint_json(m->value))));
            json manifest;
            manifest["config_hash"] = options_hash(j);
            manifest["t0"] = config.t0;
            manifest["horizon"] = config.horizon;
            manifest["max_events"] = config.max_events;
            manifest["seed"] = config.seed;
            manifest["accepted"] = result.accepted;
            manifest["proposals"] = result.proposals;
            manifest["acceptance_rate"] = result.acceptance_rate();
            manifest["model_hash"] = hash;
            manifest["warm_start_events"] =
                warm_start == nullptr ? 0 : warm_start->value.size();
            *manifest_json = dup_string(manifest.dump(2) + "\n");
        }
        *out = new gs_history{std::move(result.history)};
    });
}

gs_status gs_burstiness_report(const gs_history* h, const char* options_json,
                               char** report_json) {
    if (gs_status st = require(h != nullptr && report_json != nullptr,
                               "gs_burstiness_report: history and out must not be NULL")) {
        return st;
    }
    return guarded([&] {
        const json j = parse_options(options_json);
        check_keys(j, {"min_events", "bins", "rows_csv", "histogram_csv"});
        const auto min_events = get_or<std::size_t>(j, "min_events", 3);
        const auto bins = get_or<std::size_t>(j, "bins", 40);
        const graphsurv::BurstinessReport report =
            graphsurv::burstiness_report(h->value, min_events, bins);
        const std::string rows_csv = get_or<std::string>(j, "rows_csv", "");
        if (!rows_csv.empty()) {
            graphsurv::write_burstiness_rows_csv(report, h->value, rows_csv);
        }
        const std::string histogram_csv = get_or<std::string>(j, "histogram_csv", "");
        if (!histogram_csv.empty()) {
            graphsurv::write_burstiness_histogram_csv(report, histogram_csv);
        }
        json out;
        out["dyads_reported"] = report.rows.size();
        out["histogram"]["edges"] = report.bin_edges;
        out["histogram"]["counts"] = report.bin_counts;
        *report_json = dup_string(out.dump(2) + "\n");
    });
}

gs_status gs_eval_link_prediction(const gs_history* stream, const gs_history* eval_slice,
                                  const gs_model* markov_model, const gs_model* poisson_model,
                                  const char* options_json, char** report_json) {
    if (gs_status st = require(stream != nullptr && eval_slice != nullptr &&
                                   report_json != nullptr,
                               "gs_eval_link_prediction: stream, slice and out must not be NULL")) {
        return st;
    }
    return guarded([&] {
        const json j = parse_options(options_json);
        check_keys(j, {"scorers", "n_neg", "num_seeds", "seed", "roc_csv_prefix", "jobs"});
        graphsurv::LinkPredictionConfig config;
        config.n_neg = get_or<std::size_t>(j, "n_neg", config.n_neg);
        config.num_seeds = get_or<std::size_t>(j, "num_seeds", config.num_seeds);
        config.base_seed = get_or<std::uint64_t>(j, "seed", config.base_seed);
        config.jobs = get_or<std::size_t>(j, "jobs", config.jobs);

        std::vector<std::string> names = get_or<std::vector<std::string>>(
            j, "scorers", {"poisson", "markov_pwc", "preferential_attachment", "random"});
        std::vector<graphsurv::ScorerSpec> scorers;
        for (const std::string& name : names) {
            graphsurv::ScorerSpec spec;
            spec.kind = graphsurv::scorer_from_name(name);
            if (spec.kind == graphsurv::ScorerKind::kMarkovPwc) {
                if (markov_model == nullptr) {
                    throw graphsurv::EvalError("markov_pwc scorer needs a model");
                }
                spec.model = &markov_model->value;
            } else if (spec.kind == graphsurv::ScorerKind::kPoisson) {
                const gs_model* backing =
                    poisson_model != nullptr ? poisson_model : markov_model;
                if (backing == nullptr) {
                    throw graphsurv::EvalError("poisson scorer needs a model");
                }
                spec.model = &backing->value;
            }
            scorers.push_back(spec);
        }

        const graphsurv::LinkPredictionResult result =
            graphsurv::run_link_prediction(stream->value, eval_slice->value, scorers, config);
        const std::string prefix = get_or<std::string>(j, "roc_csv_prefix", "");
        if (!prefix.empty()) {
            for (const graphsurv::ScorerResult& sr : result.scorers) {
                graphsurv::write_roc_csv(sr.roc, prefix + graphsurv::scorer_name(sr.kind) +
                                                     ".csv");
            }
        }
        *report_json = dup_string(graphsurv::link_prediction_json(result, config));
    });
}

}  // extern "C"
