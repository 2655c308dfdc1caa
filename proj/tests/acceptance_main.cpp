// Release gate: every numbered check below must print PASS for the build to
// be considered correct. Each check recomputes its reference with an
// independent oracle (finite differences, quadrature, brute-force counting)
// or a closed form, with pinned seeds and tolerances. Run with the CLI
// binary's path as argv[1]; the determinism check shells out to it.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <numeric>
#include <string>
#include <vector>

#include "graphsurv/errors.hpp"
#include "graphsurv/evaluation.hpp"
#include "graphsurv/events.hpp"
#include "graphsurv/features.hpp"
#include "graphsurv/models.hpp"
#include "graphsurv/rng.hpp"
#include "graphsurv/simulation.hpp"
#include "graphsurv/training.hpp"

#include "oracles.hpp"
#include "tmpdir.hpp"

using namespace graphsurv;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string format(const char* fmt, ...) {
    char buf[512];
    va_list args;
    va_start(args, fmt);
    std::vsnprintf(buf, sizeof(buf), fmt, args);
    va_end(args);
    return buf;
}

// Single ordered dyad (0 -> 1) firing at exactly the requested base rate.
MarkovModel single_dyad(double rate) {
    MarkovModel m;
    m.nodes = oracles::node_table(2);
    m.sources = {0};
    m.destinations = {1};
    m.base.embedding_dim = 0;
    m.base.alpha = {0.0, 0.0};
    m.base.offset = 0.5 * std::log(std::expm1(rate));
    m.decay = {1.0, 1.0, 1.0};
    return m;
}

// Bias-only piecewise hazard with the given per-piece levels.
PwcHazard levels_hazard(const std::vector<double>& cuts, const std::vector<double>& levels) {
    PwcHazard hz;
    hz.cuts = cuts;
    hz.theta.assign(levels.size(), FeatureVector{});
    for (std::size_t j = 0; j < levels.size(); ++j) {
        hz.theta[j][kFeatBias] = std::log(levels[j]);
    }
    return hz;
}

// Coarse Adam pass to get near the optimum, then a low-rate pass to shrink
// the steady-state oscillation well below the recovery tolerances.
MarkovModel fit_two_stage(MarkovModel m, const EventHistory& h, std::uint64_t seed,
                          std::size_t batch_size = 1u << 14,
                          const std::optional<ContrastiveConfig>& contrastive = std::nullopt,
                          std::size_t coarse_epochs = 150, std::size_t fine_epochs = 250) {
    OptimizerConfig coarse;
    coarse.learning_rate = 0.1;
    coarse.weight_decay = 0.0;
    coarse.epochs = coarse_epochs;
    coarse.batch_size = batch_size;
    coarse.seed = seed;
    m = fit(m, h, coarse, contrastive).model;
    OptimizerConfig fine = coarse;
    fine.learning_rate = 0.01;
    fine.epochs = fine_epochs;
    return fit(m, h, fine, contrastive).model;
}

// Rolls the stream into the per-dyad last-event map, applying events strictly
// before t.
EdgeLastEventMap last_events_before(const MarkovModel& m, const EventHistory& h, double t) {
    FeatureState feats(m.decay);
    EdgeLastEventMap last;
    for (const Event& ev : h.events()) {
        if (ev.time >= t) {
            break;
        }
        last.record(ev.src, ev.dst, ev.time, feats.query(ev.src, ev.dst, ev.time));
        feats.update(ev);
    }
    return last;
}

// ---------------------------------------------------------------------------
// 1. Analytic gradients of the exact NLL against central finite differences.

bool criterion_gradient(std::string* detail) {
    const auto start = std::chrono::steady_clock::now();
    Rng rng(101);
    double worst = 0.0;
    for (int i = 0; i < 10; ++i) {
        const std::size_t n_nodes = 3 + rng.below(3);  // 3..5 nodes
        const MarkovModel m = oracles::random_model(rng, n_nodes, i % 2 == 1);
        const EventHistory h = oracles::random_history(rng, n_nodes, 30, 12.0);
        const GradientBuffer got = grad_nll(m, h);
        const GradientBuffer want = oracles::fd_gradient(
            m, [&](const MarkovModel& x) { return nll_exact(x, h).total(); }, 1e-5);
        worst = std::max(worst, oracles::gradient_rel_error(got, want));
    }
    const double elapsed = seconds_since(start);
    *detail = format(
        "exact-NLL gradient vs central differences (step 1e-5), 10 instances: "
        "max rel err %.3g (limit 1e-5), %.2f s (limit 10 s)",
        worst, elapsed);
    return worst < 1e-5 && elapsed < 10.0;
}

// ---------------------------------------------------------------------------
// 2. Closed-form compensator against adaptive quadrature of the intensity.

bool criterion_compensator(std::string* detail) {
    const auto start = std::chrono::steady_clock::now();
    Rng rng(202);
    double worst = 0.0;
    int done = 0;
    while (done < 100) {
        const std::size_t n_nodes = 3 + rng.below(3);
        const MarkovModel m = oracles::random_model(rng, n_nodes, done % 5 != 4);
        const EventHistory h = oracles::random_history(rng, n_nodes, 25, 10.0);
        const NodeId u = static_cast<NodeId>(rng.below(n_nodes));
        NodeId v = u;
        while (v == u) {
            v = static_cast<NodeId>(rng.below(n_nodes));
        }
        std::vector<double> bounds{h.begin()};
        for (const Event& ev : h.events()) {
            if (ev.src == u && ev.dst == v) {
                bounds.push_back(ev.time);
            }
        }
        bounds.push_back(h.horizon());
        const std::size_t slice = rng.below(bounds.size() - 1);
        const double lo = bounds[slice];
        const double hi = bounds[slice + 1];
        if (!(hi - lo > 1e-6)) {
            continue;
        }
        const double t_a = lo + (0.05 + 0.4 * rng.uniform()) * (hi - lo);
        const double t_b = t_a + (0.05 + 0.5 * rng.uniform()) * (hi - t_a);

        const EdgeLastEventMap last = last_events_before(m, h, t_a);
        const double exact = edge_compensator(m, u, v, t_a, t_b, last);
        const double quad = oracles::quadrature(
            [&](double t) { return edge_intensity(m, u, v, t, last); }, t_a, t_b, 1e-13);
        worst = std::max(worst, std::abs(exact - quad) / std::max(std::abs(quad), 1e-12));
        ++done;
    }
    const double elapsed = seconds_since(start);
    *detail = format(
        "compensator vs adaptive quadrature, 100 random (model, interval) cases: "
        "max rel err %.3g (limit 1e-8), %.2f s (limit 5 s)",
        worst, elapsed);
    return worst < 1e-8 && elapsed < 5.0;
}

// ---------------------------------------------------------------------------
// 3. Contrastive integral estimate is unbiased on a 6-dyad network.

bool criterion_contrastive(std::string* detail) {
    Rng rng(303);
    const MarkovModel m = oracles::random_model(rng, 3, true);  // 6 ordered dyads
    const EventHistory h = oracles::random_history(rng, 3, 40, 20.0);
    const double exact = nll_exact(m, h).l_neg;

    const std::size_t n = 10000;
    double sum = 0.0;
    double sumsq = 0.0;
    for (std::size_t seed = 0; seed < n; ++seed) {
        const double sample = nll_contrastive(m, h, ContrastiveConfig{2, seed}).l_neg;
        sum += sample;
        sumsq += sample * sample;
    }
    const double mean = sum / static_cast<double>(n);
    const double var = (sumsq - static_cast<double>(n) * mean * mean) /
                       (static_cast<double>(n) - 1.0);
    const double se = std::sqrt(var / static_cast<double>(n));
    const double gap = std::abs(mean - exact);
    *detail = format(
        "contrastive l_neg over 10^4 seeds (k=2): mean %.6f vs exact %.6f, "
        "|gap| %.4g <= 3 SE = %.4g",
        mean, exact, gap, 3.0 * se);
    return gap <= 3.0 * se && se > 0.0;
}

// ---------------------------------------------------------------------------
// 4. Thinning on a single-edge homogeneous Poisson process.

bool criterion_thinning(std::string* detail) {
    const double rate = 2.0;
    const double horizon = 1000.0;
    const MarkovModel m = single_dyad(rate);
    int passes = 0;
    double worst_p = 1.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        SimConfig cfg;
        cfg.horizon = horizon;
        cfg.max_events = 1u << 20;
        cfg.seed = 4000 + seed;
        const SimulationResult r = simulate(m, cfg);
        std::vector<double> gaps;
        double prev = 0.0;
        for (const Event& ev : r.history.events()) {
            gaps.push_back(ev.time - prev);
            prev = ev.time;
        }
        const double d = oracles::ks_statistic(
            gaps, [&](double x) { return -std::expm1(-rate * x); });
        const double p = oracles::ks_pvalue(d, gaps.size());
        worst_p = std::min(worst_p, p);
        const double count_gap =
            std::abs(static_cast<double>(r.history.size()) - rate * horizon);
        if (p >= 0.01 && count_gap <= 3.0 * std::sqrt(rate * horizon)) {
            ++passes;
        }
    }
    *detail = format(
        "single-edge Poisson (rate 2, T=1000): KS vs Exponential(2) at 0.01 and "
        "count within 3*sqrt(2000): %d/10 seeds pass (need >= 9; min p %.3f)",
        passes, worst_p);
    return passes >= 9;
}

// ---------------------------------------------------------------------------
// 5. Simulate-then-fit parameter recovery.

bool criterion_recovery(std::string* detail) {
    const auto start = std::chrono::steady_clock::now();

    // (a) Latent-space Poisson: recover every dyad rate.
    MarkovModel truth;
    truth.nodes = oracles::node_table(3);
    truth.sources = oracles::all_ids(3);
    truth.destinations = oracles::all_ids(3);
    truth.base.embedding_dim = 0;
    truth.base.offset = 0.0;
    truth.base.alpha = {0.3, 0.0, -0.3};
    truth.decay = {1.0, 1.0, 1.0};

    double total_rate = 0.0;
    for (NodeId u = 0; u < 3; ++u) {
        for (NodeId v = 0; v < 3; ++v) {
            if (u != v) {
                total_rate += poisson_rate(truth.base, u, v);
            }
        }
    }
    SimConfig sim_a;
    sim_a.horizon = 5000.0 / total_rate;
    sim_a.max_events = 8000;
    sim_a.seed = 501;
    const SimulationResult run_a = simulate(truth, sim_a);

    ModelInitConfig init_a;
    init_a.kind = ModelKind::kPoisson;
    init_a.embedding_dim = 2;
    init_a.seed = 5;
    const MarkovModel fit_a =
        fit_two_stage(make_initial_model(run_a.history, init_a), run_a.history, 5);

    double worst_rate = 0.0;
    for (NodeId u = 0; u < 3; ++u) {
        for (NodeId v = 0; v < 3; ++v) {
            if (u != v) {
                const double want = poisson_rate(truth.base, u, v);
                const double got = poisson_rate(fit_a.base, u, v);
                worst_rate = std::max(worst_rate, std::abs(got - want) / want);
            }
        }
    }

    // (b) Markov-PWC with three known hazard levels on one dyad.
    const std::vector<double> cuts = {0.25, 0.8};
    const std::vector<double> levels = {3.0, 1.0, 0.5};
    MarkovModel truth_b = single_dyad(1.0);
    truth_b.hazard = levels_hazard(cuts, levels);

    SimConfig sim_b;
    sim_b.horizon = 4650.0;
    sim_b.max_events = 5500;
    sim_b.seed = 502;
    const SimulationResult run_b = simulate(truth_b, sim_b);

    ModelInitConfig init_b;
    init_b.kind = ModelKind::kMarkovPwc;
    init_b.embedding_dim = 2;
    init_b.hazard_pieces = 3;
    init_b.explicit_cuts = cuts;
    init_b.seed = 6;
    const MarkovModel fit_b =
        fit_two_stage(make_initial_model(run_b.history, init_b), run_b.history, 6);

    // Recovered level of piece j: geometric mean of the fitted hazard over
    // the feature states the data actually visited.
    FeatureState feats(fit_b.decay);
    std::vector<FeatureVector> frozen;
    for (const Event& ev : run_b.history.events()) {
        frozen.push_back(fit_b.standardized(feats.query(ev.src, ev.dst, ev.time)));
        feats.update(ev);
    }
    double worst_level = 0.0;
    std::vector<double> recovered(levels.size(), 0.0);
    for (std::size_t j = 0; j < levels.size(); ++j) {
        double log_sum = 0.0;
        for (const FeatureVector& x : frozen) {
            double dot = 0.0;
            for (std::size_t f = 0; f < kFeatureDim; ++f) {
                dot += fit_b.hazard->theta[j][f] * x[f];
            }
            log_sum += dot;
        }
        recovered[j] = std::exp(log_sum / static_cast<double>(frozen.size()));
        worst_level = std::max(worst_level, std::abs(recovered[j] - levels[j]) / levels[j]);
    }

    const double elapsed = seconds_since(start);
    *detail = format(
        "simulate-then-fit at ~5000 events: Poisson rates max rel err %.3f, "
        "hazard levels (%.2f, %.2f, %.2f) vs (3, 1, 0.5) max rel err %.3f "
        "(limit 0.10 each), %.1f s (limit 120 s)",
        worst_rate, recovered[0], recovered[1], recovered[2], worst_level, elapsed);
    return worst_rate < 0.10 && worst_level < 0.10 && elapsed < 120.0;
}

// ---------------------------------------------------------------------------
// 6. Burstiness formula against closed forms.

bool criterion_burstiness_formula(std::string* detail) {
    std::vector<double> periodic;
    for (int i = 0; i < 50; ++i) {
        periodic.push_back(0.5 * i);
    }
    const bool periodic_ok = burstiness(periodic).second == -1.0;

    Rng rng(606);
    std::vector<double> exp_times{0.0};
    for (int i = 0; i < 10000; ++i) {
        exp_times.push_back(exp_times.back() + rng.exponential(1.0));
    }
    const double b_exp = burstiness(exp_times).second;

    // Gaps 1, 1, 4: mean 2, sample variance 3, cv = sqrt(3)/2.
    const double cv_ref = std::sqrt(0.75);
    const double b_ref = (cv_ref - 1.0) / (cv_ref + 1.0);
    const double b_hand = burstiness({0.0, 1.0, 2.0, 6.0}).second;
    const bool hand_ok = std::abs(b_hand - b_ref) <= 1e-12;

    *detail = format(
        "burstiness closed forms: periodic B = -1 %s, 10^4 exponential gaps "
        "|B| = %.4f (limit 0.05), hand example |B - ref| = %.2g (limit 1e-12)",
        periodic_ok ? "exactly" : "VIOLATED", std::abs(b_exp), std::abs(b_hand - b_ref));
    return periodic_ok && std::abs(b_exp) < 0.05 && hand_ok;
}

// ---------------------------------------------------------------------------
// 7. Self-exciting simulation populates burstiness in (0, 1).

bool criterion_simulated_burstiness(std::string* detail) {
    const double base = 0.1;
    const double excited = 1.0;  // 10x the base rate in the first piece
    MarkovModel m;
    m.nodes = oracles::node_table(6);
    m.sources = oracles::all_ids(6);
    m.destinations = oracles::all_ids(6);
    m.base.embedding_dim = 0;
    m.base.alpha.assign(6, 0.0);
    m.base.offset = 0.5 * std::log(std::expm1(base));
    m.decay = {1.0, 1.0, 1.0};
    m.hazard = levels_hazard({0.5}, {excited, base});

    SimConfig cfg;
    cfg.horizon = 400.0;
    cfg.max_events = 20000;
    cfg.seed = 707;
    const SimulationResult r = simulate(m, cfg);

    const BurstinessReport report = burstiness_report(r.history, 3, 40);
    std::size_t in_range = 0;
    for (const BurstinessRow& row : report.rows) {
        if (row.b > 0.0 && row.b < 1.0) {
            ++in_range;
        }
    }
    const double frac = report.rows.empty()
                            ? 0.0
                            : static_cast<double>(in_range) /
                                  static_cast<double>(report.rows.size());
    *detail = format(
        "markov simulation, first-piece hazard %.0fx base: %zu/%zu eligible dyads "
        "with B in (0,1) (%.0f%%, need >= 20%%)",
        excited / base, in_range, report.rows.size(), 100.0 * frac);
    return report.rows.size() >= 10 && frac >= 0.20;
}

// ---------------------------------------------------------------------------
// 8. Rank AUC equals brute-force pairwise counting exactly.

bool criterion_auc(std::string* detail) {
    Rng rng(808);
    int mismatches = 0;
    std::size_t biggest = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 2 + rng.below(199);  // up to 200 pairs
        std::vector<double> scores;
        std::vector<int> labels;
        const bool coarse = trial % 2 == 0;  // every other instance is tie-heavy
        for (std::size_t i = 0; i < n; ++i) {
            scores.push_back(coarse ? 0.125 * static_cast<double>(rng.below(9))
                                    : rng.uniform());
            labels.push_back(rng.below(2) == 0 ? 0 : 1);
        }
        if (std::count(labels.begin(), labels.end(), 1) == 0) {
            labels[0] = 1;
        }
        if (std::count(labels.begin(), labels.end(), 0) == 0) {
            labels[0] = 0;
        }
        if (roc_auc(scores, labels).auc != oracles::brute_auc(scores, labels)) {
            ++mismatches;
        }
        biggest = std::max(biggest, n);
    }
    *detail = format(
        "rank AUC vs brute-force pairwise counting, 50 instances up to %zu pairs "
        "with ties: %d mismatches (must be 0, exact equality)",
        biggest, mismatches);
    return mismatches == 0;
}

// ---------------------------------------------------------------------------
// 9. Link-prediction benchmark. With prepped datasets present this gates the
// published targets; without them a synthetic stream gates the method
// ordering and the targets are reported as not measurable.

struct AucSummary {
    double markov = 0.0;
    double pa = 0.0;
    double poisson = 0.0;
    double random = 0.0;
};

AucSummary run_benchmark(const EventHistory& h, std::size_t coarse_epochs,
                         std::size_t fine_epochs, std::size_t k_neg, std::size_t dim,
                         std::size_t pieces) {
    const SplitResult parts = split(h, split_spec_from_fractions(h, 0.7, 0.85));

    std::optional<ContrastiveConfig> contrastive;
    if (k_neg > 0) {
        contrastive = ContrastiveConfig{k_neg, 9};
    }

    ModelInitConfig markov_init;
    markov_init.kind = ModelKind::kMarkovPwc;
    markov_init.embedding_dim = static_cast<int>(dim);
    markov_init.hazard_pieces = pieces;
    markov_init.seed = 9;
    MarkovModel markov = make_initial_model(parts.train, markov_init);
    markov = fit_two_stage(std::move(markov), parts.train, 9, 1024, contrastive,
                           coarse_epochs, fine_epochs);

    ModelInitConfig poisson_init;
    poisson_init.kind = ModelKind::kPoisson;
    poisson_init.embedding_dim = static_cast<int>(dim);
    poisson_init.seed = 9;
    MarkovModel poisson = make_initial_model(parts.train, poisson_init);
    poisson = fit_two_stage(std::move(poisson), parts.train, 9, 1024, contrastive,
                            coarse_epochs, fine_epochs);

    LinkPredictionConfig cfg;
    cfg.n_neg = 1;
    cfg.num_seeds = 10;
    cfg.base_seed = 17;
    cfg.jobs = 4;
    const LinkPredictionResult res = run_link_prediction(
        h, parts.test,
        {{ScorerKind::kMarkovPwc, &markov},
         {ScorerKind::kPreferentialAttachment, nullptr},
         {ScorerKind::kPoisson, &poisson},
         {ScorerKind::kRandom, nullptr}},
        cfg);
    AucSummary out;
    out.markov = res.scorers[0].auc_mean;
    out.pa = res.scorers[1].auc_mean;
    out.poisson = res.scorers[2].auc_mean;
    out.random = res.scorers[3].auc_mean;
    return out;
}

bool criterion_link_prediction(std::string* detail) {
    const char* env = std::getenv("GRAPHSURV_DATA_DIR");
    const std::string data_dir = env != nullptr ? env : "data";
    struct Dataset {
        const char* file;
        const char* name;
        double target;
    };
    const Dataset datasets[] = {{"enron.csv", "enron", 0.78},
                                {"collegemsg.csv", "collegemsg", 0.72}};

    bool any_data = false;
    bool ok = true;
    std::string lines;
    for (const Dataset& ds : datasets) {
        const std::string path = data_dir + "/" + ds.file;
        if (!std::filesystem::exists(path)) {
            continue;
        }
        any_data = true;
        CsvFormat csv;
        csv.delimiter = ',';
        const EventHistory h = ingest_csv(path, csv);
        const AucSummary s = run_benchmark(h, 15, 15, 5, 20, 10);
        const bool ordering = s.markov > s.pa && s.pa > s.poisson &&
                              s.poisson > s.random && std::abs(s.random - 0.5) <= 0.05;
        const bool absolute = s.markov >= ds.target;
        ok = ok && ordering && absolute;
        lines += format(
            " %s: markov %.4f (target >= %.2f), pa %.4f, poisson %.4f, random %.4f,"
            " ordering %s;",
            ds.name, s.markov, ds.target, s.pa, s.poisson, s.random,
            ordering ? "holds" : "VIOLATED");
    }
    if (any_data) {
        *detail = "link prediction on prepped datasets (10 sampling seeds):" + lines;
        return ok;
    }

    // Synthetic fallback: a heterogeneous self-exciting stream. Binding
    // checks are the model-vs-baseline ordering and chance-level random
    // scoring; the published per-dataset targets cannot be measured here.
    // Base rates are kept small enough that many dyads never activate
    // within the horizon, so node propensities stay visible in the test
    // slice instead of every dyad collapsing onto the same renewal law.
    MarkovModel gen;
    gen.nodes = oracles::node_table(16);
    gen.sources = oracles::all_ids(16);
    gen.destinations = oracles::all_ids(16);
    gen.base.embedding_dim = 0;
    gen.base.offset = -2.5;
    gen.base.alpha.resize(16);
    for (std::size_t i = 0; i < 16; ++i) {
        gen.base.alpha[i] = -1.2 + 2.4 * static_cast<double>(i) / 15.0;
    }
    gen.decay = {1.0, 1.0, 1.0};
    gen.hazard = levels_hazard({0.4}, {2.0, 0.08});

    SimConfig cfg;
    cfg.horizon = 150.0;
    cfg.max_events = 8000;
    cfg.seed = 909;
    const SimulationResult r = simulate(gen, cfg);
    const AucSummary s = run_benchmark(r.history, 40, 60, 24, 2, 3);

    const bool model_wins = s.markov > s.pa && s.markov > s.poisson && s.markov > s.random;
    const bool baselines_beat_chance = s.pa > s.random && s.poisson > s.random;
    const bool random_chance = std::abs(s.random - 0.5) <= 0.05;
    *detail = format(
        "datasets not found under %s; synthetic self-exciting stream (%zu events): "
        "markov %.4f > {pa %.4f, poisson %.4f} > random %.4f in [0.45, 0.55]; "
        "reference targets (enron >= 0.78, collegemsg >= 0.72) not measurable "
        "without data",
        data_dir.c_str(), r.history.size(), s.markov, s.pa, s.poisson, s.random);
    return model_wins && baselines_beat_chance && random_chance;
}

// ---------------------------------------------------------------------------
// 10. CLI re-runs with identical config produce byte-identical outputs.

bool run_cli(const std::string& cli, const std::string& args) {
    const std::string cmd = cli + " " + args + " > /dev/null 2>&1";
    return std::system(cmd.c_str()) == 0;
}

bool run_pipeline(const std::string& cli, const testutil::TempDir& dir,
                  const std::string& raw, const std::string& tag) {
    const auto out = [&](const std::string& name) { return dir.file(tag + name); };
    return run_cli(cli, "ingest --input " + raw + " --output " + out("events.csv") +
                            " --summary " + out("summary.json") + " --dedup --rescale 100") &&
           run_cli(cli, "fit --input " + out("events.csv") + " -o " + out("model.json") +
                            " --trace " + out("trace.csv") +
                            " --model markov-pwc --dim 2 --j 3 --lr 0.05"
                            " --weight-decay 0.1 --epochs 6 --batch-size 64"
                            " --seed 3 --init-seed 3") &&
           run_cli(cli, "simulate --ckpt " + out("model.json") + " -o " + out("sim.csv") +
                            " --manifest " + out("manifest.json") +
                            " --t-max 20 --max-events 200 --seed 9") &&
           run_cli(cli, "burstiness --input " + out("events.csv") + " --rows-out " +
                            out("rows.csv") + " --histogram-out " + out("hist.csv")) &&
           run_cli(cli, "eval --input " + out("events.csv") + " --ckpt " +
                            out("model.json") + " --out " + out("auc.json") +
                            " --roc-prefix " + out("roc_") +
                            " --num-seeds 3 --seed 7 --jobs 2");
}

bool criterion_cli_determinism(const std::string& cli, std::string* detail) {
    if (cli.empty() || !std::filesystem::exists(cli)) {
        *detail = "CLI binary path missing (pass it as argv[1])";
        return false;
    }
    testutil::TempDir dir;
    // A raw file with duplicate timestamps, exercising the tie policy.
    std::string raw_body;
    Rng rng(1010);
    double t = 0.0;
    for (int i = 0; i < 240; ++i) {
        t += 0.25 * static_cast<double>(1 + rng.below(8));
        const std::size_t u = rng.below(8);
        std::size_t v = u;
        while (v == u) {
            v = rng.below(8);
        }
        raw_body += format("n%zu n%zu %.2f\n", u, v, t);
        if (i % 17 == 0) {  // a simultaneous event on another dyad
            raw_body += format("n%zu n%zu %.2f\n", v, (v + 1) % 8 == u ? (v + 2) % 8
                                                                       : (v + 1) % 8, t);
        }
    }
    const std::string raw = dir.write("raw.txt", raw_body);

    if (!run_pipeline(cli, dir, raw, "a_") || !run_pipeline(cli, dir, raw, "b_")) {
        *detail = "CLI pipeline (ingest/fit/simulate/burstiness/eval) failed to run";
        return false;
    }

    const char* names[] = {"events.csv",   "summary.json", "model.json",
                           "trace.csv",    "sim.csv",      "manifest.json",
                           "rows.csv",     "hist.csv",     "auc.json",
                           "roc_markov_pwc.csv", "roc_random.csv"};
    std::size_t compared = 0;
    for (const char* name : names) {
        const std::string a = testutil::TempDir::read(dir.file(std::string("a_") + name));
        const std::string b = testutil::TempDir::read(dir.file(std::string("b_") + name));
        if (a.empty() || a != b) {
            *detail = format("output %s differs between identical runs", name);
            return false;
        }
        ++compared;
    }
    *detail = format(
        "full CLI pipeline re-run with identical config and seeds: %zu/%zu outputs "
        "byte-identical",
        compared, sizeof(names) / sizeof(names[0]));
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    const std::string cli = argc > 1 ? argv[1] : "";
    int failed = 0;
    const auto report = [&](int number, bool ok, const std::string& detail) {
        std::printf("%s criterion %2d: %s\n", ok ? "PASS" : "FAIL", number, detail.c_str());
        std::fflush(stdout);
        if (!ok) {
            ++failed;
        }
    };

    std::string detail;
    report(1, criterion_gradient(&detail), detail);
    report(2, criterion_compensator(&detail), detail);
    report(3, criterion_contrastive(&detail), detail);
    report(4, criterion_thinning(&detail), detail);
    report(5, criterion_recovery(&detail), detail);
    report(6, criterion_burstiness_formula(&detail), detail);
    report(7, criterion_simulated_burstiness(&detail), detail);
    report(8, criterion_auc(&detail), detail);
    report(9, criterion_link_prediction(&detail), detail);
    report(10, criterion_cli_determinism(cli, &detail), detail);

    if (failed == 0) {
        std::printf("all 10 acceptance criteria passed\n");
        return 0;
    }
    std::printf("%d of 10 acceptance criteria FAILED\n", failed);
    return 1;
}
