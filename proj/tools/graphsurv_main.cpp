// Command-line frontend. All core work goes through the C API in
// graphsurv.h; this file only resolves options (flag > config file > env >
// default), writes returned strings to files, and maps status codes to exit
// codes (0 ok, 2 input, 3 training, 4 checkpoint, 5 evaluation).

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "graphsurv.h"

namespace {

using nlohmann::json;

int fail(gs_status st) {
    std::fprintf(stderr, "graphsurv: %s\n", gs_last_error());
    return static_cast<int>(st);
}

int fail_input(const std::string& message) {
    std::fprintf(stderr, "graphsurv: %s\n", message.c_str());
    return static_cast<int>(GS_ERROR_INPUT);
}

struct OwnedString {
    char* ptr = nullptr;
    ~OwnedString() { gs_string_free(ptr); }
    std::string str() const { return ptr == nullptr ? std::string() : std::string(ptr); }
};

struct OwnedHistory {
    gs_history* h = nullptr;
    ~OwnedHistory() { gs_history_free(h); }
};

struct OwnedModel {
    gs_model* m = nullptr;
    ~OwnedModel() { gs_model_free(m); }
};

bool write_file(const std::string& path, const std::string& content, std::string* error) {
    std::ofstream out(path);
    out << content;
    out.flush();
    if (!out) {
        *error = "cannot write " + path;
        return false;
    }
    return true;
}

std::optional<std::uint64_t> parse_env_seed(std::string* error) {
    const char* raw = std::getenv("GRAPHSURV_SEED");
    if (raw == nullptr || *raw == '\0') {
        return std::nullopt;
    }
    errno = 0;
    char* end = nullptr;
    const unsigned long long value = std::strtoull(raw, &end, 10);
    if (errno != 0 || end == raw || *end != '\0') {
        *error = std::string("GRAPHSURV_SEED is not an unsigned integer: ") + raw;
        return std::nullopt;
    }
    return static_cast<std::uint64_t>(value);
}

// Option precedence: explicit flag, then the command's section in the config
// file, then the fallback.
template <typename T>
T pick(const std::optional<T>& flag, const json& section, const char* key, T fallback) {
    if (flag) {
        return *flag;
    }
    const auto it = section.find(key);
    if (it != section.end() && !it->is_null()) {
        return it->get<T>();
    }
    return fallback;
}

template <typename T>
std::optional<T> pick_optional(const std::optional<T>& flag, const json& section,
                               const char* key) {
    if (flag) {
        return flag;
    }
    const auto it = section.find(key);
    if (it != section.end() && !it->is_null()) {
        return it->get<T>();
    }
    return std::nullopt;
}

std::uint64_t pick_seed(const std::optional<std::uint64_t>& flag, const json& section,
                        const char* key, const std::optional<std::uint64_t>& env_fallback) {
    if (const auto v = pick_optional(flag, section, key)) {
        return *v;
    }
    return env_fallback.value_or(0);
}

void check_section_keys(const json& section, const std::string& name,
                        std::initializer_list<const char*> allowed) {
    for (auto it = section.begin(); it != section.end(); ++it) {
        bool known = false;
        for (const char* key : allowed) {
            if (it.key() == key) {
                known = true;
                break;
            }
        }
        if (!known) {
            throw std::runtime_error("unknown config key in \"" + name + "\": " + it.key());
        }
    }
}

// "markov-pwc" on the command line, "markov_pwc" in files.
std::string normalize_kind(std::string kind) {
    for (char& c : kind) {
        if (c == '-') {
            c = '_';
        }
    }
    return kind;
}

// --cuts takes a policy name ("quantiles", alias "deciles") or an explicit
// comma-separated list of boundaries.
bool parse_cuts(const std::string& text, std::vector<double>* cuts, std::string* error) {
    if (text.empty() || text == "quantiles" || text == "deciles") {
        cuts->clear();
        return true;
    }
    std::stringstream ss(text);
    std::string item;
    cuts->clear();
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            cuts->push_back(std::stod(item, &used));
            if (used != item.size()) {
                throw std::invalid_argument(item);
            }
        } catch (const std::exception&) {
            *error = "bad --cuts entry: " + item;
            return false;
        }
    }
    if (cuts->empty()) {
        *error = "--cuts list is empty";
        return false;
    }
    return true;
}

json load_config(const std::string& path, const std::string& section_name) {
    json config = json::object();
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) {
            throw std::runtime_error("cannot open config file: " + path);
        }
        config = json::parse(in);
        if (!config.is_object()) {
            throw std::runtime_error("config file must hold a JSON object");
        }
        check_section_keys(config, "config",
                           {"ingest", "fit", "simulate", "burstiness", "eval"});
    }
    return config.contains(section_name) ? config[section_name] : json::object();
}

struct CsvFlags {
    std::optional<std::string> delimiter;
    std::optional<int> src_col;
    std::optional<int> dst_col;
    std::optional<int> time_col;
    std::optional<bool> header;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--delimiter", delimiter,
                        "Field delimiter; default splits on whitespace or commas");
        cmd->add_option("--src-col", src_col, "Source column index (default 0)");
        cmd->add_option("--dst-col", dst_col, "Destination column index (default 1)");
        cmd->add_option("--time-col", time_col, "Timestamp column index (default 2)");
        cmd->add_flag_callback(
            "--header", [this] { header = true; }, "Skip one header line");
    }

    json resolve(const json& section) const {
        json j;
        j["delimiter"] = pick<std::string>(delimiter, section, "delimiter", "");
        j["src_column"] = pick(src_col, section, "src_column", 0);
        j["dst_column"] = pick(dst_col, section, "dst_column", 1);
        j["time_column"] = pick(time_col, section, "time_column", 2);
        j["has_header"] = pick(header, section, "has_header", false);
        return j;
    }
};

int load_history(const std::string& path, const json& load_opts, OwnedHistory* out) {
    if (gs_status st = gs_history_load_csv(path.c_str(), load_opts.dump().c_str(), &out->h)) {
        return fail(st);
    }
    return 0;
}

// ---------------------------------------------------------------- ingest --

struct IngestArgs {
    std::optional<std::string> input;
    std::optional<std::string> output;
    std::optional<std::string> summary;
    CsvFlags csv;
    std::optional<bool> dedup;
    std::optional<std::size_t> max_events;
    std::optional<double> jitter_ties;
    std::optional<double> rescale;
};

int run_ingest(const IngestArgs& args, const json& section) {
    check_section_keys(section, "ingest",
                       {"input", "output", "summary", "delimiter", "src_column", "dst_column",
                        "time_column", "has_header", "dedup_simultaneous", "max_events",
                        "jitter_ties", "rescale"});
    const std::string input = pick<std::string>(args.input, section, "input", "");
    if (input.empty()) {
        return fail_input("ingest needs --input");
    }
    const std::string output = pick<std::string>(args.output, section, "output", "events.csv");
    const std::string summary_path =
        pick<std::string>(args.summary, section, "summary", output + ".summary.json");

    // Tie policy rides along with the parse so it sees raw timestamps.
    json load_opts = args.csv.resolve(section);
    load_opts["dedup_simultaneous"] = pick(args.dedup, section, "dedup_simultaneous", false);
    if (const auto v = pick_optional(args.max_events, section, "max_events")) {
        load_opts["max_events"] = *v;
    }
    if (const auto v = pick_optional(args.jitter_ties, section, "jitter_ties")) {
        load_opts["jitter_ties"] = *v;
    }
    OwnedHistory raw;
    if (int rc = load_history(input, load_opts, &raw)) {
        return rc;
    }

    gs_history* clean_view = raw.h;
    OwnedHistory rescaled;
    if (const auto v = pick_optional(args.rescale, section, "rescale")) {
        json pre;
        pre["rescale"] = *v;
        if (gs_status st = gs_history_preprocess(raw.h, pre.dump().c_str(), &rescaled.h)) {
            return fail(st);
        }
        clean_view = rescaled.h;
    }
    if (gs_status st = gs_history_save(clean_view, output.c_str())) {
        return fail(st);
    }
    OwnedString summary;
    if (gs_status st = gs_history_summary_json(clean_view, &summary.ptr)) {
        return fail(st);
    }
    std::string error;
    if (!write_file(summary_path, summary.str() + "\n", &error)) {
        return fail_input(error);
    }

    const json s = json::parse(summary.str());
    std::printf("events=%zu sources=%zu destinations=%zu window=[%.17g, %.17g]\n",
                s["M"].get<std::size_t>(), s["num_sources"].get<std::size_t>(),
                s["num_destinations"].get<std::size_t>(), s["t_min"].get<double>(),
                s["T"].get<double>());
    std::printf("wrote %s and %s\n", output.c_str(), summary_path.c_str());
    return 0;
}

// ------------------------------------------------------------------- fit --

struct FitArgs {
    std::optional<std::string> input;
    CsvFlags csv;
    std::optional<std::string> ckpt_out;
    std::optional<std::string> trace;
    std::optional<double> f_train;
    std::optional<double> t_train;
    std::optional<std::string> kind;
    std::optional<int> dim;
    std::optional<std::size_t> pieces;
    std::optional<std::string> cuts;
    std::optional<double> gamma_deg;
    std::optional<double> gamma_vol;
    std::optional<double> gamma_cn;
    std::optional<bool> standardize;
    std::optional<double> init_scale;
    std::optional<std::uint64_t> init_seed;
    std::optional<double> lr;
    std::optional<double> weight_decay;
    std::optional<double> beta1;
    std::optional<double> beta2;
    std::optional<double> epsilon;
    std::optional<std::size_t> epochs;
    std::optional<std::size_t> batch_size;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> checkpoint_every;
    std::optional<std::string> checkpoint_prefix;
    std::optional<std::size_t> k;
    std::optional<std::uint64_t> contrastive_seed;
};

int run_fit(const FitArgs& args, const json& section,
            const std::optional<std::uint64_t>& env_seed) {
    check_section_keys(
        section, "fit",
        {"input", "delimiter", "src_column", "dst_column", "time_column", "has_header",
         "checkpoint", "trace_csv", "f_train", "t_train", "kind", "embedding_dim",
         "hazard_pieces", "cuts", "decay", "standardize_features", "embedding_init_scale",
         "init_seed", "learning_rate", "weight_decay", "beta1", "beta2", "epsilon", "epochs",
         "batch_size", "seed", "checkpoint_every", "checkpoint_prefix", "samples_per_slice",
         "contrastive_seed"});
    const std::string input = pick<std::string>(args.input, section, "input", "");
    if (input.empty()) {
        return fail_input("fit needs --input");
    }
    const std::string ckpt_out =
        pick<std::string>(args.ckpt_out, section, "checkpoint", "model.json");

    OwnedHistory full;
    if (int rc = load_history(input, args.csv.resolve(section), &full)) {
        return rc;
    }

    // Optional cut-off so that fitting uses only the training part of a
    // full history.
    gs_history* train_view = full.h;
    OwnedHistory train_part, val_part, test_part;
    const auto f_train = pick_optional(args.f_train, section, "f_train");
    const auto t_train = pick_optional(args.t_train, section, "t_train");
    if (f_train || t_train) {
        json split;
        if (f_train) {
            split["f_train"] = *f_train;
            split["f_val"] = 1.0;
        } else {
            split["t_train"] = *t_train;
        }
        if (gs_status st = gs_history_split(full.h, split.dump().c_str(), &train_part.h,
                                            &val_part.h, &test_part.h)) {
            return fail(st);
        }
        train_view = train_part.h;
    }

    json init;
    init["kind"] = normalize_kind(pick<std::string>(args.kind, section, "kind", "markov_pwc"));
    init["embedding_dim"] = pick(args.dim, section, "embedding_dim", 20);
    init["hazard_pieces"] = pick<std::size_t>(args.pieces, section, "hazard_pieces", 10);
    std::vector<double> explicit_cuts;
    if (section.contains("cuts") && section["cuts"].is_array()) {
        explicit_cuts = section["cuts"].get<std::vector<double>>();
    }
    if (args.cuts) {
        std::string error;
        if (!parse_cuts(*args.cuts, &explicit_cuts, &error)) {
            return fail_input(error);
        }
    }
    if (!explicit_cuts.empty()) {
        init["cuts"] = explicit_cuts;
    }
    json decay;
    const json decay_section =
        section.contains("decay") && section["decay"].is_object() ? section["decay"]
                                                                  : json::object();
    decay["deg"] = pick(args.gamma_deg, decay_section, "deg", 1.0);
    decay["vol"] = pick(args.gamma_vol, decay_section, "vol", 1.0);
    decay["cn"] = pick(args.gamma_cn, decay_section, "cn", 1.0);
    init["decay"] = decay;
    init["standardize_features"] = pick(args.standardize, section, "standardize_features", true);
    init["embedding_init_scale"] = pick(args.init_scale, section, "embedding_init_scale", 0.1);
    init["seed"] = pick_seed(args.init_seed, section, "init_seed", env_seed);

    OwnedModel initial;
    if (gs_status st = gs_model_init(train_view, init.dump().c_str(), &initial.m)) {
        return fail(st);
    }

    json fit_opts;
    fit_opts["learning_rate"] = pick(args.lr, section, "learning_rate", 0.8);
    fit_opts["weight_decay"] = pick(args.weight_decay, section, "weight_decay", 0.9);
    fit_opts["beta1"] = pick(args.beta1, section, "beta1", 0.9);
    fit_opts["beta2"] = pick(args.beta2, section, "beta2", 0.999);
    fit_opts["epsilon"] = pick(args.epsilon, section, "epsilon", 1e-8);
    fit_opts["epochs"] = pick<std::size_t>(args.epochs, section, "epochs", 30);
    fit_opts["batch_size"] = pick<std::size_t>(args.batch_size, section, "batch_size", 1024);
    fit_opts["seed"] = pick_seed(args.seed, section, "seed", env_seed);
    fit_opts["checkpoint_every"] =
        pick<std::size_t>(args.checkpoint_every, section, "checkpoint_every", 0);
    const std::string prefix =
        pick<std::string>(args.checkpoint_prefix, section, "checkpoint_prefix", "");
    if (!prefix.empty()) {
        fit_opts["checkpoint_prefix"] = prefix;
    }
    const std::size_t k = pick<std::size_t>(args.k, section, "samples_per_slice", 5);
    if (k > 0) {
        json contrastive;
        contrastive["samples_per_slice"] = k;
        contrastive["seed"] = pick_seed(args.contrastive_seed, section, "contrastive_seed",
                                        env_seed);
        fit_opts["contrastive"] = contrastive;
    }
    const std::string trace_path = pick<std::string>(args.trace, section, "trace_csv", "");
    if (!trace_path.empty()) {
        fit_opts["trace_csv"] = trace_path;
    }

    OwnedModel fitted;
    OwnedString summary;
    if (gs_status st =
            gs_model_fit(initial.m, train_view, fit_opts.dump().c_str(), &fitted.m,
                         &summary.ptr)) {
        return fail(st);
    }
    if (gs_status st = gs_model_save(fitted.m, ckpt_out.c_str())) {
        return fail(st);
    }

    const json s = json::parse(summary.str());
    if (s["final"].is_null()) {
        std::printf("no training batches ran (epochs=0); checkpoint equals initialization\n");
    } else {
        std::printf("final nll: total=%.17g l_pos=%.17g l_neg=%.17g\n",
                    s["final"]["total"].get<double>(), s["final"]["l_pos"].get<double>(),
                    s["final"]["l_neg"].get<double>());
    }
    std::printf("wrote %s\n", ckpt_out.c_str());
    return 0;
}

// -------------------------------------------------------------- simulate --

struct SimulateArgs {
    std::optional<std::string> ckpt;
    std::optional<std::string> output;
    std::optional<std::string> manifest;
    std::optional<std::string> warm_start;
    CsvFlags csv;
    std::optional<double> t0;
    std::optional<double> t_max;
    std::optional<std::size_t> max_events;
    std::optional<std::uint64_t> seed;
};

int run_simulate(const SimulateArgs& args, const json& section,
                 const std::optional<std::uint64_t>& env_seed) {
    check_section_keys(section, "simulate",
                       {"checkpoint", "output", "manifest", "warm_start", "delimiter",
                        "src_column", "dst_column", "time_column", "has_header", "t0", "horizon",
                        "max_events", "seed"});
    const std::string ckpt = pick<std::string>(args.ckpt, section, "checkpoint", "");
    if (ckpt.empty()) {
        return fail_input("simulate needs --ckpt");
    }
    const std::string output = pick<std::string>(args.output, section, "output", "simulated.csv");
    const std::string manifest_path =
        pick<std::string>(args.manifest, section, "manifest", output + ".manifest.json");

    OwnedModel model;
    if (gs_status st = gs_model_load(ckpt.c_str(), &model.m)) {
        return fail(st);
    }

    OwnedHistory warm;
    const std::string warm_path = pick<std::string>(args.warm_start, section, "warm_start", "");
    if (!warm_path.empty()) {
        if (int rc = load_history(warm_path, args.csv.resolve(section), &warm)) {
            return rc;
        }
    }

    json sim;
    sim["t0"] = pick(args.t0, section, "t0", 0.0);
    sim["horizon"] = pick(args.t_max, section, "horizon", 1.0);
    sim["max_events"] = pick<std::size_t>(args.max_events, section, "max_events", 100000);
    sim["seed"] = pick_seed(args.seed, section, "seed", env_seed);

    OwnedHistory out;
    OwnedString manifest;
    if (gs_status st =
            gs_simulate(model.m, sim.dump().c_str(), warm.h, &out.h, &manifest.ptr)) {
        return fail(st);
    }
    if (gs_status st = gs_history_save(out.h, output.c_str())) {
        return fail(st);
    }
    std::string error;
    if (!write_file(manifest_path, manifest.str(), &error)) {
        return fail_input(error);
    }
    const json m = json::parse(manifest.str());
    std::printf("accepted=%zu proposals=%zu acceptance_rate=%.17g\n",
                m["accepted"].get<std::size_t>(), m["proposals"].get<std::size_t>(),
                m["acceptance_rate"].get<double>());
    std::printf("wrote %s and %s\n", output.c_str(), manifest_path.c_str());
    return 0;
}

// ------------------------------------------------------------ burstiness --

struct BurstinessArgs {
    std::optional<std::string> input;
    CsvFlags csv;
    std::optional<std::size_t> min_events;
    std::optional<std::size_t> bins;
    std::optional<std::string> rows_out;
    std::optional<std::string> histogram_out;
};

int run_burstiness(const BurstinessArgs& args, const json& section) {
    check_section_keys(section, "burstiness",
                       {"input", "delimiter", "src_column", "dst_column", "time_column",
                        "has_header", "min_events", "bins", "rows_csv", "histogram_csv"});
    const std::string input = pick<std::string>(args.input, section, "input", "");
    if (input.empty()) {
        return fail_input("burstiness needs --input");
    }
    OwnedHistory h;
    if (int rc = load_history(input, args.csv.resolve(section), &h)) {
        return rc;
    }

    json opts;
    opts["min_events"] = pick<std::size_t>(args.min_events, section, "min_events", 3);
    opts["bins"] = pick<std::size_t>(args.bins, section, "bins", 40);
    opts["rows_csv"] =
        pick<std::string>(args.rows_out, section, "rows_csv", "burstiness_edges.csv");
    opts["histogram_csv"] = pick<std::string>(args.histogram_out, section, "histogram_csv",
                                              "burstiness_hist.csv");

    OwnedString report;
    if (gs_status st = gs_burstiness_report(h.h, opts.dump().c_str(), &report.ptr)) {
        return fail(st);
    }
    const json r = json::parse(report.str());
    std::printf("dyads_reported=%zu\n", r["dyads_reported"].get<std::size_t>());
    std::printf("wrote %s and %s\n", opts["rows_csv"].get<std::string>().c_str(),
                opts["histogram_csv"].get<std::string>().c_str());
    return 0;
}

// ------------------------------------------------------------------ eval --

struct EvalArgs {
    std::optional<std::string> input;
    CsvFlags csv;
    std::optional<std::string> ckpt;
    std::optional<std::string> poisson_ckpt;
    std::optional<double> f_train;
    std::optional<double> f_val;
    std::optional<double> t_train;
    std::optional<double> t_val;
    std::optional<double> t_test;
    std::optional<std::string> slice;
    std::optional<std::string> scorers;
    std::optional<std::size_t> n_neg;
    std::optional<std::size_t> num_seeds;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> roc_prefix;
    std::optional<std::size_t> jobs;
};

int run_eval(const EvalArgs& args, const json& section,
             const std::optional<std::uint64_t>& env_seed) {
    check_section_keys(section, "eval",
                       {"input", "delimiter", "src_column", "dst_column", "time_column",
                        "has_header", "checkpoint", "poisson_checkpoint", "f_train", "f_val",
                        "t_train", "t_val", "t_test", "slice", "scorers", "n_neg", "num_seeds",
                        "seed", "output", "roc_csv_prefix", "jobs"});
    const std::string input = pick<std::string>(args.input, section, "input", "");
    if (input.empty()) {
        return fail_input("eval needs --input");
    }
    OwnedHistory full;
    if (int rc = load_history(input, args.csv.resolve(section), &full)) {
        return rc;
    }

    json split;
    const auto t_train = pick_optional(args.t_train, section, "t_train");
    if (t_train) {
        split["t_train"] = *t_train;
        if (const auto v = pick_optional(args.t_val, section, "t_val")) {
            split["t_val"] = *v;
        }
        if (const auto v = pick_optional(args.t_test, section, "t_test")) {
            split["t_test"] = *v;
        }
    } else {
        split["f_train"] = pick(args.f_train, section, "f_train", 0.7);
        split["f_val"] = pick(args.f_val, section, "f_val", 0.85);
    }
    OwnedHistory train, val, test;
    if (gs_status st =
            gs_history_split(full.h, split.dump().c_str(), &train.h, &val.h, &test.h)) {
        return fail(st);
    }
    const std::string slice = pick<std::string>(args.slice, section, "slice", "test");
    gs_history* eval_slice = nullptr;
    if (slice == "test") {
        eval_slice = test.h;
    } else if (slice == "val") {
        eval_slice = val.h;
    } else {
        return fail_input("--slice must be val or test");
    }

    std::vector<std::string> scorer_names = {"poisson", "markov_pwc", "preferential_attachment",
                                             "random"};
    if (const auto names = pick_optional(args.scorers, section, "scorers")) {
        scorer_names.clear();
        std::stringstream ss(*names);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (!item.empty()) {
                scorer_names.push_back(normalize_kind(item));
            }
        }
        if (scorer_names.empty()) {
            return fail_input("--scorers list is empty");
        }
    } else if (section.contains("scorers") && section["scorers"].is_array()) {
        scorer_names = section["scorers"].get<std::vector<std::string>>();
    }

    bool needs_model = false;
    for (const std::string& name : scorer_names) {
        if (name == "poisson" || name == "markov_pwc") {
            needs_model = true;
        }
    }
    OwnedModel markov, poisson;
    const std::string ckpt = pick<std::string>(args.ckpt, section, "checkpoint", "");
    if (!ckpt.empty()) {
        if (gs_status st = gs_model_load(ckpt.c_str(), &markov.m)) {
            return fail(st);
        }
    } else if (needs_model) {
        return fail_input("eval with model scorers needs --ckpt");
    }
    const std::string pckpt =
        pick<std::string>(args.poisson_ckpt, section, "poisson_checkpoint", "");
    if (!pckpt.empty()) {
        if (gs_status st = gs_model_load(pckpt.c_str(), &poisson.m)) {
            return fail(st);
        }
    }

    json opts;
    opts["scorers"] = scorer_names;
    opts["n_neg"] = pick<std::size_t>(args.n_neg, section, "n_neg", 1);
    opts["num_seeds"] = pick<std::size_t>(args.num_seeds, section, "num_seeds", 10);
    opts["seed"] = pick_seed(args.seed, section, "seed", env_seed);
    opts["jobs"] = pick<std::size_t>(args.jobs, section, "jobs", 1);
    const std::string roc_prefix =
        pick<std::string>(args.roc_prefix, section, "roc_csv_prefix", "");
    if (!roc_prefix.empty()) {
        opts["roc_csv_prefix"] = roc_prefix;
    }

    OwnedString report;
    if (gs_status st = gs_eval_link_prediction(full.h, eval_slice, markov.m, poisson.m,
                                               opts.dump().c_str(), &report.ptr)) {
        return fail(st);
    }
    const std::string out_path = pick<std::string>(args.out, section, "output", "auc.json");
    std::string error;
    if (!write_file(out_path, report.str(), &error)) {
        return fail_input(error);
    }

    const json r = json::parse(report.str());
    for (const std::string& name : scorer_names) {
        const json& entry = r["scorers"][name];
        std::printf("%s: auc=%.4f +/- %.4f\n", name.c_str(), entry["auc_mean"].get<double>(),
                    entry["auc_std"].get<double>());
    }
    std::printf("wrote %s\n", out_path.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Survival-analysis intensity models for temporal networks"};
    app.set_version_flag("--version", std::string(gs_version()));
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "JSON config file; flags override its values")
        ->expected(1);

    IngestArgs ingest;
    CLI::App* cmd_ingest =
        app.add_subcommand("ingest", "Normalize a raw event file into canonical form");
    cmd_ingest->add_option("--input,-i", ingest.input, "Raw delimited event file");
    cmd_ingest->add_option("--output,-o", ingest.output, "Canonical output path");
    cmd_ingest->add_option("--summary", ingest.summary, "Summary sidecar path");
    ingest.csv.add_to(cmd_ingest);
    cmd_ingest->add_flag_callback(
        "--dedup", [&ingest] { ingest.dedup = true; },
        "Keep only the first event at each timestamp");
    cmd_ingest->add_option("--max-events", ingest.max_events, "Keep only the first N events");
    cmd_ingest->add_option("--jitter-ties", ingest.jitter_ties,
                           "Shift cross-edge ties forward by this epsilon");
    cmd_ingest->add_option("--rescale", ingest.rescale, "Rescale times to [0, X]");

    FitArgs fit;
    CLI::App* cmd_fit = app.add_subcommand("fit", "Fit a model to an event history");
    cmd_fit->add_option("--input,-i", fit.input, "Canonical event file");
    fit.csv.add_to(cmd_fit);
    cmd_fit->add_option("--ckpt-out,-o", fit.ckpt_out, "Checkpoint output path");
    cmd_fit->add_option("--trace", fit.trace, "Loss trace CSV path");
    cmd_fit->add_option("--f-train", fit.f_train,
                        "Train on the first fraction of events only");
    cmd_fit->add_option("--t-train", fit.t_train, "Train on events up to this time only");
    cmd_fit->add_option("--model", fit.kind, "Model kind: poisson or markov-pwc");
    cmd_fit->add_option("--dim", fit.dim, "Embedding dimension (default 20)");
    cmd_fit->add_option("--j", fit.pieces, "Number of hazard pieces (default 10)");
    cmd_fit->add_option("--cuts", fit.cuts,
                        "Cut policy: \"quantiles\" (default) or explicit list a,b,c");
    cmd_fit->add_option("--gamma-deg", fit.gamma_deg, "Degree feature decay rate");
    cmd_fit->add_option("--gamma-vol", fit.gamma_vol, "Volume feature decay rate");
    cmd_fit->add_option("--gamma-cn", fit.gamma_cn, "Common-neighbor feature decay rate");
    cmd_fit->add_option("--standardize", fit.standardize, "Z-score hazard features");
    cmd_fit->add_option("--init-scale", fit.init_scale, "Embedding init half-width");
    cmd_fit->add_option("--init-seed", fit.init_seed, "Model initialization seed");
    cmd_fit->add_option("--lr", fit.lr, "Learning rate (default 0.8)");
    cmd_fit->add_option("--weight-decay", fit.weight_decay,
                        "Decoupled weight decay on embeddings (default 0.9)");
    cmd_fit->add_option("--beta1", fit.beta1, "Adam beta1");
    cmd_fit->add_option("--beta2", fit.beta2, "Adam beta2");
    cmd_fit->add_option("--epsilon", fit.epsilon, "Adam epsilon");
    cmd_fit->add_option("--epochs", fit.epochs, "Training epochs (default 30)");
    cmd_fit->add_option("--batch-size", fit.batch_size, "Slices per batch (default 1024)");
    cmd_fit->add_option("--seed", fit.seed, "Batch-shuffle seed");
    cmd_fit->add_option("--checkpoint-every", fit.checkpoint_every,
                        "Write a checkpoint every N epochs");
    cmd_fit->add_option("--checkpoint-prefix", fit.checkpoint_prefix,
                        "Path prefix for periodic checkpoints");
    cmd_fit->add_option("--k", fit.k,
                        "Contrastive samples per slice; 0 trains with the exact integral");
    cmd_fit->add_option("--contrastive-seed", fit.contrastive_seed, "Negative-sampling seed");

    SimulateArgs simulate;
    CLI::App* cmd_simulate =
        app.add_subcommand("simulate", "Sample a history from a fitted model");
    cmd_simulate->add_option("--ckpt", simulate.ckpt, "Model checkpoint");
    cmd_simulate->add_option("--output,-o", simulate.output, "Event output path");
    cmd_simulate->add_option("--manifest", simulate.manifest, "Run manifest path");
    cmd_simulate->add_option("--warm-start", simulate.warm_start,
                             "Event file to condition the simulation on");
    simulate.csv.add_to(cmd_simulate);
    cmd_simulate->add_option("--t0", simulate.t0, "Start time (default 0)");
    cmd_simulate->add_option("--t-max", simulate.t_max, "Horizon (default 1)");
    cmd_simulate->add_option("--max-events", simulate.max_events,
                             "Stop after this many accepted events");
    cmd_simulate->add_option("--seed", simulate.seed, "Simulation seed");

    BurstinessArgs burstiness;
    CLI::App* cmd_burstiness =
        app.add_subcommand("burstiness", "Per-dyad burstiness report and histogram");
    cmd_burstiness->add_option("--input,-i", burstiness.input, "Canonical event file");
    burstiness.csv.add_to(cmd_burstiness);
    cmd_burstiness->add_option("--min-events", burstiness.min_events,
                               "Minimum events per dyad (default 3)");
    cmd_burstiness->add_option("--bins", burstiness.bins, "Histogram bins (default 40)");
    cmd_burstiness->add_option("--rows-out", burstiness.rows_out, "Per-dyad CSV path");
    cmd_burstiness->add_option("--histogram-out", burstiness.histogram_out,
                               "Histogram CSV path");

    EvalArgs eval;
    CLI::App* cmd_eval =
        app.add_subcommand("eval", "Future-link-prediction AUC benchmark");
    cmd_eval->add_option("--input,-i", eval.input, "Full canonical event file");
    eval.csv.add_to(cmd_eval);
    cmd_eval->add_option("--ckpt", eval.ckpt, "Checkpoint for the markov_pwc scorer");
    cmd_eval->add_option("--poisson-ckpt", eval.poisson_ckpt,
                         "Separate checkpoint for the poisson scorer");
    cmd_eval->add_option("--f-train", eval.f_train, "Train fraction (default 0.7)");
    cmd_eval->add_option("--f-val", eval.f_val, "Train+val fraction (default 0.85)");
    cmd_eval->add_option("--t-train", eval.t_train, "Train cut-off time");
    cmd_eval->add_option("--t-val", eval.t_val, "Validation cut-off time");
    cmd_eval->add_option("--t-test", eval.t_test, "Test cut-off time");
    cmd_eval->add_option("--slice", eval.slice, "Slice to evaluate: val or test");
    cmd_eval->add_option("--scorers", eval.scorers, "Comma-separated scorer list");
    cmd_eval->add_option("--n-neg", eval.n_neg, "Negatives per event (default 1)");
    cmd_eval->add_option("--num-seeds", eval.num_seeds, "Negative-sampling seeds (default 10)");
    cmd_eval->add_option("--seed", eval.seed, "Base seed");
    cmd_eval->add_option("--out", eval.out, "AUC report JSON path");
    cmd_eval->add_option("--roc-prefix", eval.roc_prefix, "Path prefix for ROC CSVs");
    cmd_eval->add_option("--jobs", eval.jobs, "Worker threads for the seed fan-out");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(GS_ERROR_INPUT);
    }

    try {
        std::string error;
        const auto env = parse_env_seed(&error);
        if (!error.empty()) {
            return fail_input(error);
        }
        if (cmd_ingest->parsed()) {
            return run_ingest(ingest, load_config(config_path, "ingest"));
        }
        if (cmd_fit->parsed()) {
            return run_fit(fit, load_config(config_path, "fit"), env);
        }
        if (cmd_simulate->parsed()) {
            return run_simulate(simulate, load_config(config_path, "simulate"), env);
        }
        if (cmd_burstiness->parsed()) {
            return run_burstiness(burstiness, load_config(config_path, "burstiness"));
        }
        if (cmd_eval->parsed()) {
            return run_eval(eval, load_config(config_path, "eval"), env);
        }
    } catch (const json::exception& e) {
        return fail_input(std::string("bad config: ") + e.what());
    } catch (const std::exception& e) {
        return fail_input(e.what());
    }
    return 0;
}
