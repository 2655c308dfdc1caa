#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "graphsurv/models.hpp"

namespace graphsurv {

// Coefficient of variation of the inter-arrival times and the burstiness
// score B = (cv - 1) / (cv + 1). Needs >= 3 times (two inter-arrivals) and a
// positive mean gap; B is in [-1, 1), -1 for periodic sequences, near 0 for
// Poisson streams.
std::pair<double, double> burstiness(const std::vector<double>& times);

struct BurstinessRow {
    NodeId src;
    NodeId dst;
    std::size_t n_events;
    double cv;
    double b;
};

struct BurstinessReport {
    std::vector<BurstinessRow> rows;  // dyads with enough events, sorted by (src, dst)
    std::vector<double> bin_edges;    // bins + 1 edges spanning [-1, 1]
    std::vector<std::size_t> bin_counts;
};

// Per-dyad burstiness over the history. min_events below 3 is raised to 3,
// the smallest count with a defined cv.
BurstinessReport burstiness_report(const EventHistory& h, std::size_t min_events = 3,
                                   std::size_t bins = 40);

void write_burstiness_rows_csv(const BurstinessReport& report, const EventHistory& h,
                               const std::string& path);
void write_burstiness_histogram_csv(const BurstinessReport& report, const std::string& path);

// One scored candidate: the observed event for label 1, the same (src, time)
// with a corrupted destination for label 0.
struct LabeledPair {
    Event event;  // the observed event this pair derives from
    NodeId dst;   // destination being scored
    int label;    // 1 observed, 0 negative
};

// Per observed event, n_neg negatives drawn uniformly from the destination
// set minus {src, true dst}. Requires |V| >= 3.
std::vector<LabeledPair> make_labeled_pairs(const EventHistory& h_eval, std::size_t n_neg,
                                            std::uint64_t seed);

enum class ScorerKind { kPoisson, kMarkovPwc, kPreferentialAttachment, kRandom };

std::string scorer_name(ScorerKind kind);
ScorerKind scorer_from_name(const std::string& name);

// Scoring rule plus the fitted model it needs; the preferential-attachment
// and random baselines leave model null.
struct ScorerSpec {
    ScorerKind kind = ScorerKind::kRandom;
    const MarkovModel* model = nullptr;
};

// Scores each pair with state built from the stream's events strictly before
// the pair's time. Pairs must be in nondecreasing time order; the stream is
// rolled forward once (degree counters for preferential attachment, feature
// state and last-event map for the hazard scorer).
std::vector<double> score_pairs(const ScorerSpec& scorer, const EventHistory& stream,
                                const std::vector<LabeledPair>& pairs, std::uint64_t seed);

struct RocResult {
    std::vector<double> thresholds;  // descending score cutoffs
    std::vector<double> fpr;
    std::vector<double> tpr;
    double auc = 0.0;
};

// Mann-Whitney AUC with midrank tie handling; needs at least one positive
// and one negative label.
RocResult roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

void write_roc_csv(const RocResult& roc, const std::string& path);

struct LinkPredictionConfig {
    std::size_t n_neg = 1;
    std::size_t num_seeds = 10;
    std::uint64_t base_seed = 0;
    // Worker threads for the per-seed fan-out; results do not depend on it.
    std::size_t jobs = 1;
};

struct ScorerResult {
    ScorerKind kind = ScorerKind::kRandom;
    double auc_mean = 0.0;
    double auc_std = 0.0;            // sample standard deviation over seeds
    std::vector<double> aucs;        // per seed
    RocResult roc;                   // from the first seed
};

struct LinkPredictionResult {
    std::vector<ScorerResult> scorers;
    std::size_t pairs_per_seed = 0;
};

// Repeats negative sampling over num_seeds seeds (pair seed base_seed + i)
// and reports per-scorer AUC mean and spread. `stream` supplies the history
// rolled through scoring; `eval_slice` supplies the events to predict.
LinkPredictionResult run_link_prediction(const EventHistory& stream,
                                         const EventHistory& eval_slice,
                                         const std::vector<ScorerSpec>& scorers,
                                         const LinkPredictionConfig& config);

std::string link_prediction_json(const LinkPredictionResult& result,
                                 const LinkPredictionConfig& config);

}  // namespace graphsurv
