#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "graphsurv/models.hpp"

namespace graphsurv {

// Negative log-likelihood split into its two sums. l_pos collects the
// -log lambda terms of the observed (positive) events; l_neg is the
// compensator integral, the part a contrastive estimator approximates with
// sampled non-events. Computed exactly, l_neg >= 0.
struct NllTerms {
    double l_pos = 0.0;
    double l_neg = 0.0;

    double total() const { return l_pos + l_neg; }
};

// Sampled approximation of the integral term. Per inter-event slice,
// samples_per_slice dyads are drawn uniformly (with replacement) from the
// ordered dyad space and reweighted by |E| / k. Values >= |E| fall back to
// the exact sum.
struct ContrastiveConfig {
    std::size_t samples_per_slice = 5;
    std::uint64_t seed = 0;
};

struct OptimizerConfig {
    double learning_rate = 0.8;
    double weight_decay = 0.9;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::size_t epochs = 30;
    // Number of inter-event slices per batch.
    std::size_t batch_size = 1024;
    // Seed for the per-epoch batch-order shuffle.
    std::uint64_t seed = 0;
    // When > 0, a checkpoint is written every that-many epochs to
    // checkpoint_prefix + "epoch" + N + ".json".
    std::size_t checkpoint_every = 0;
    std::string checkpoint_prefix;
};

// Dense gradient with the same layout as the model parameters.
struct GradientBuffer {
    double offset = 0.0;
    std::vector<double> alpha;
    std::vector<double> embeddings;
    std::vector<FeatureVector> theta;

    static GradientBuffer like(const MarkovModel& model);
    void zero();
};

// Exact NLL over [begin, horizon]: sum over ordered dyads of the compensator
// plus minus-log-intensity at each event.
NllTerms nll_exact(const MarkovModel& model, const EventHistory& history);

// Contrastive NLL; the event part is always exact, only the integral part is
// sampled.
NllTerms nll_contrastive(const MarkovModel& model, const EventHistory& history,
                         const ContrastiveConfig& contrastive);

// Analytic gradient of the (optionally contrastive) NLL. When loss_out is
// given the matching loss value is stored there.
GradientBuffer grad_nll(const MarkovModel& model, const EventHistory& history,
                        const std::optional<ContrastiveConfig>& contrastive = std::nullopt,
                        NllTerms* loss_out = nullptr);

struct TraceRow {
    std::size_t epoch = 0;
    std::size_t batch = 0;
    double l_pos = 0.0;
    double l_neg = 0.0;
    double total = 0.0;
};

struct FitResult {
    MarkovModel model;
    std::vector<TraceRow> trace;
};

using EpochCallback = std::function<void(std::size_t epoch, const MarkovModel& model)>;

// AdamW with decoupled weight decay applied to the embeddings only. Batches
// are contiguous runs of inter-event slices processed in a shuffled order
// that is redrawn each epoch; without a contrastive config the integral term
// is exact. Deterministic for a fixed seed.
FitResult fit(const MarkovModel& initial, const EventHistory& train, const OptimizerConfig& opt,
              const std::optional<ContrastiveConfig>& contrastive = std::nullopt,
              const EpochCallback& on_epoch = nullptr);

struct ModelInitConfig {
    ModelKind kind = ModelKind::kMarkovPwc;
    int embedding_dim = 20;
    // Number of hazard pieces; interior cut points come from the deciles of
    // pooled per-dyad inter-arrival times unless explicit_cuts is set.
    std::size_t hazard_pieces = 10;
    std::vector<double> explicit_cuts;
    DecayConfig decay;
    bool standardize_features = true;
    double embedding_init_scale = 0.1;
    std::uint64_t seed = 0;
};

// Fresh model over the node universe of the training history: zero biases and
// hazard coefficients, small uniform random embeddings.
MarkovModel make_initial_model(const EventHistory& train, const ModelInitConfig& config);

void write_trace_csv(const std::vector<TraceRow>& trace, const std::string& path);

}  // namespace graphsurv
