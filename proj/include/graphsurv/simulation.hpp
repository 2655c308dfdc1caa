#pragma once

#include <cstddef>
#include <cstdint>

#include "graphsurv/models.hpp"

namespace graphsurv {

struct SimConfig {
    double t0 = 0.0;
    double horizon = 1.0;
    // Bound on accepted events, not proposals.
    std::size_t max_events = 100000;
    std::uint64_t seed = 0;
    // Optional observed prefix (all event times <= t0) the simulation
    // continues from; the output contains only the new events.
    const EventHistory* warm_start = nullptr;
};

// Upper bound on the total intensity, valid on [t, valid_until]. Because
// each active dyad's intensity depends only on elapsed time through frozen
// covariates, the exact supremum over all future pieces is available and the
// bound holds until the next accepted event changes the state.
struct ThinningBound {
    double lambda_star = 0.0;
    double valid_until = 0.0;
};

// Sum of edge_intensity over the model's ordered dyad space: the base-rate
// total adjusted per active dyad.
double total_intensity(const MarkovModel& m, double t, const EdgeLastEventMap& last);

ThinningBound local_upper_bound(const MarkovModel& m, double t, const EdgeLastEventMap& last);

struct SimulationResult {
    EventHistory history;
    std::size_t proposals = 0;
    std::size_t accepted = 0;

    double acceptance_rate() const {
        return proposals == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(proposals);
    }
};

// Ogata's modified thinning: propose from an exact local bound, accept with
// probability lambda(s)/lambda_star, attribute the event to a dyad with
// probability proportional to its intensity, then update the feature state.
// Deterministic for a fixed seed.
SimulationResult simulate(const MarkovModel& m, const SimConfig& config);

}  // namespace graphsurv
