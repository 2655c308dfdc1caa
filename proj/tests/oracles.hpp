// Independent reference implementations used to check the library: features
// and intensities recomputed from scratch by full scans, integrals by
// adaptive quadrature, gradients by central differences, AUC by pairwise
// counting. Deliberately slow and simple.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <utility>
#include <vector>

#include "graphsurv/events.hpp"
#include "graphsurv/features.hpp"
#include "graphsurv/models.hpp"
#include "graphsurv/rng.hpp"
#include "graphsurv/training.hpp"

namespace oracles {

using graphsurv::DecayConfig;
using graphsurv::Event;
using graphsurv::EventHistory;
using graphsurv::FeatureVector;
using graphsurv::MarkovModel;
using graphsurv::NodeId;

// Features of (u, v) at time t from the first n_applied events, each term
// recomputed by a full scan.
inline FeatureVector brute_features(const std::vector<Event>& events, std::size_t n_applied,
                                    NodeId u, NodeId v, double t, const DecayConfig& decay) {
    FeatureVector x{0.0, 0.0, 0.0, 0.0, 1.0};
    for (std::size_t i = 0; i < n_applied; ++i) {
        const Event& ev = events[i];
        if (ev.src == u || ev.dst == u) {
            x[graphsurv::kFeatDegSrc] += std::exp(-decay.gamma_deg * (t - ev.time));
        }
        if (ev.src == v || ev.dst == v) {
            x[graphsurv::kFeatDegDst] += std::exp(-decay.gamma_deg * (t - ev.time));
        }
        const bool on_pair = (ev.src == u && ev.dst == v) || (ev.src == v && ev.dst == u);
        if (on_pair) {
            x[graphsurv::kFeatVolume] += std::exp(-decay.gamma_vol * (t - ev.time));
        }
    }
    // Common neighbors: any w that interacted with both endpoints; the most
    // recent of the two last contacts sets the decay.
    std::set<NodeId> others;
    for (std::size_t i = 0; i < n_applied; ++i) {
        others.insert(events[i].src);
        others.insert(events[i].dst);
    }
    for (NodeId w : others) {
        if (w == u || w == v) {
            continue;
        }
        double last_u = -1.0;
        double last_v = -1.0;
        for (std::size_t i = 0; i < n_applied; ++i) {
            const Event& ev = events[i];
            const bool uw = (ev.src == u && ev.dst == w) || (ev.src == w && ev.dst == u);
            const bool vw = (ev.src == v && ev.dst == w) || (ev.src == w && ev.dst == v);
            if (uw) {
                last_u = std::max(last_u, ev.time);
            }
            if (vw) {
                last_v = std::max(last_v, ev.time);
            }
        }
        if (last_u >= 0.0 && last_v >= 0.0) {
            x[graphsurv::kFeatCommonNeighbors] +=
                std::exp(-decay.gamma_cn * (t - std::max(last_u, last_v)));
        }
    }
    return x;
}

// Intensity of dyad (u, v) at time t given the first n_applied events.
inline double brute_intensity(const MarkovModel& m, const std::vector<Event>& events,
                              std::size_t n_applied, NodeId u, NodeId v, double t) {
    double last_time = -1.0;
    std::size_t last_index = 0;
    for (std::size_t i = 0; i < n_applied; ++i) {
        if (events[i].src == u && events[i].dst == v) {
            last_time = events[i].time;
            last_index = i;
        }
    }
    if (!m.is_markov() || last_time < 0.0) {
        return graphsurv::poisson_rate(m.base, u, v);
    }
    const FeatureVector x =
        brute_features(events, last_index, u, v, last_time, m.decay);
    return m.hazard->rate(t - last_time, m.standardized(x));
}

// Total intensity at time t: number of applied events grows with t.
inline double brute_total_intensity(const MarkovModel& m, const std::vector<Event>& events,
                                    double t) {
    std::size_t n_applied = 0;
    while (n_applied < events.size() && events[n_applied].time < t) {
        ++n_applied;
    }
    double total = 0.0;
    for (NodeId u : m.sources) {
        for (NodeId v : m.destinations) {
            if (u != v) {
                total += brute_intensity(m, events, n_applied, u, v, t);
            }
        }
    }
    return total;
}

// Adaptive Simpson quadrature. Handles the piecewise-constant jumps of the
// hazard by recursing onto them; depth 60 pushes the bracketing error far
// below tol.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double fa, double fm, double fb, double whole, double tol,
                               int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol) {
        return left + right + (left + right - whole) / 15.0;
    }
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double quadrature(const std::function<double(double)>& f, double a, double b,
                         double tol = 1e-12, int depth = 60) {
    if (b <= a) {
        return 0.0;
    }
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, depth);
}

// Exact NLL recomputed from first principles: -log intensity at each event
// plus the per-dyad intensity integral by quadrature.
inline graphsurv::NllTerms brute_nll(const MarkovModel& m, const EventHistory& h,
                                     double tol = 1e-11) {
    graphsurv::NllTerms out;
    const auto& events = h.events();
    for (std::size_t i = 0; i < events.size(); ++i) {
        out.l_pos -=
            std::log(brute_intensity(m, events, i, events[i].src, events[i].dst,
                                     events[i].time));
    }
    for (NodeId u : m.sources) {
        for (NodeId v : m.destinations) {
            if (u == v) {
                continue;
            }
            // Integrate between this dyad's own events so that each piece is
            // a fixed-state hazard; quadrature handles the interior cut
            // jumps.
            std::vector<double> breaks{h.begin()};
            for (const Event& ev : events) {
                if (ev.src == u && ev.dst == v) {
                    breaks.push_back(ev.time);
                }
            }
            breaks.push_back(h.horizon());
            for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
                std::size_t n_applied = 0;
                while (n_applied < events.size() && events[n_applied].time <= breaks[k]) {
                    ++n_applied;
                }
                const std::size_t frozen = n_applied;
                out.l_neg += quadrature(
                    [&](double t) {
                        return brute_intensity(m, events, frozen, u, v, t);
                    },
                    breaks[k], breaks[k + 1], tol);
            }
        }
    }
    return out;
}

// Central-difference gradient of fn over every scalar parameter of the
// model, in GradientBuffer layout.
inline graphsurv::GradientBuffer fd_gradient(const MarkovModel& model,
                                             const std::function<double(const MarkovModel&)>& fn,
                                             double step = 1e-5) {
    graphsurv::GradientBuffer g = graphsurv::GradientBuffer::like(model);
    const auto central = [&](MarkovModel& scratch, double* p) {
        const double saved = *p;
        *p = saved + step;
        const double hi = fn(scratch);
        *p = saved - step;
        const double lo = fn(scratch);
        *p = saved;
        return (hi - lo) / (2.0 * step);
    };
    MarkovModel scratch = model;
    g.offset = central(scratch, &scratch.base.offset);
    for (std::size_t i = 0; i < scratch.base.alpha.size(); ++i) {
        g.alpha[i] = central(scratch, &scratch.base.alpha[i]);
    }
    for (std::size_t i = 0; i < scratch.base.embeddings.size(); ++i) {
        g.embeddings[i] = central(scratch, &scratch.base.embeddings[i]);
    }
    if (scratch.hazard) {
        for (std::size_t j = 0; j < scratch.hazard->theta.size(); ++j) {
            for (std::size_t i = 0; i < graphsurv::kFeatureDim; ++i) {
                g.theta[j][i] = central(scratch, &scratch.hazard->theta[j][i]);
            }
        }
    }
    return g;
}

// Max relative mismatch between two gradients, coordinates compared against
// max(1, |reference|).
inline double gradient_rel_error(const graphsurv::GradientBuffer& got,
                                 const graphsurv::GradientBuffer& want) {
    double worst = 0.0;
    const auto cmp = [&](double a, double b) {
        worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(b)));
    };
    cmp(got.offset, want.offset);
    for (std::size_t i = 0; i < want.alpha.size(); ++i) {
        cmp(got.alpha[i], want.alpha[i]);
    }
    for (std::size_t i = 0; i < want.embeddings.size(); ++i) {
        cmp(got.embeddings[i], want.embeddings[i]);
    }
    for (std::size_t j = 0; j < want.theta.size(); ++j) {
        for (std::size_t i = 0; i < graphsurv::kFeatureDim; ++i) {
            cmp(got.theta[j][i], want.theta[j][i]);
        }
    }
    return worst;
}

// Kolmogorov-Smirnov p-value via the asymptotic series with the small-sample
// correction of the effective sample size.
inline double ks_pvalue(double d, std::size_t n) {
    const double sn = std::sqrt(static_cast<double>(n));
    const double x = (sn + 0.12 + 0.11 / sn) * d;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * x * x);
        sum += (k % 2 == 1 ? term : -term);
        if (term < 1e-18) {
            break;
        }
    }
    return std::min(1.0, std::max(0.0, 2.0 * sum));
}

// KS distance of a sample against a continuous CDF.
inline double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double c = cdf(sample[i]);
        d = std::max(d, std::abs(c - static_cast<double>(i) / n));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - c));
    }
    return d;
}

// AUC by direct pairwise counting with half credit for ties.
inline double brute_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    double wins = 0.0;
    std::size_t np = 0;
    std::size_t nn = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] == 1) {
            ++np;
            for (std::size_t j = 0; j < scores.size(); ++j) {
                if (labels[j] == 0) {
                    if (scores[i] > scores[j]) {
                        wins += 1.0;
                    } else if (scores[i] == scores[j]) {
                        wins += 0.5;
                    }
                }
            }
        } else {
            ++nn;
        }
    }
    return wins / (static_cast<double>(np) * static_cast<double>(nn));
}

// --- random test instances -----------------------------------------------

inline std::shared_ptr<graphsurv::NodeTable> node_table(std::size_t n) {
    auto table = std::make_shared<graphsurv::NodeTable>();
    for (std::size_t i = 0; i < n; ++i) {
        table->intern("n" + std::to_string(i));
    }
    return table;
}

inline std::vector<NodeId> all_ids(std::size_t n) {
    std::vector<NodeId> ids(n);
    for (std::size_t i = 0; i < n; ++i) {
        ids[i] = static_cast<NodeId>(i);
    }
    return ids;
}

// Random strictly increasing event sequence over n_nodes, no self loops.
inline EventHistory random_history(graphsurv::Rng& rng, std::size_t n_nodes,
                                   std::size_t n_events, double horizon) {
    std::vector<Event> events;
    events.reserve(n_events);
    double t = 0.0;
    for (std::size_t i = 0; i < n_events; ++i) {
        t += rng.exponential(static_cast<double>(n_events + 1) / horizon);
        if (t >= horizon) {
            break;
        }
        const NodeId u = static_cast<NodeId>(rng.below(n_nodes));
        NodeId v = u;
        while (v == u) {
            v = static_cast<NodeId>(rng.below(n_nodes));
        }
        events.push_back({u, v, t});
    }
    return EventHistory(std::move(events), node_table(n_nodes), all_ids(n_nodes),
                        all_ids(n_nodes), 0.0, horizon);
}

// Random model over n_nodes with moderate parameter magnitudes; markov adds
// a 3-piece hazard and, optionally, a nontrivial standardizer.
inline MarkovModel random_model(graphsurv::Rng& rng, std::size_t n_nodes, bool markov,
                                bool standardize = true, int dim = 2,
                                std::size_t pieces = 3) {
    MarkovModel m;
    m.nodes = node_table(n_nodes);
    m.sources = all_ids(n_nodes);
    m.destinations = all_ids(n_nodes);
    m.base.offset = rng.uniform_symmetric(0.5);
    m.base.embedding_dim = dim;
    m.base.alpha.resize(n_nodes);
    for (double& a : m.base.alpha) {
        a = rng.uniform_symmetric(0.5);
    }
    m.base.embeddings.resize(n_nodes * static_cast<std::size_t>(dim));
    for (double& z : m.base.embeddings) {
        z = rng.uniform_symmetric(1.0);
    }
    m.decay = {0.5 + rng.uniform(), 0.5 + rng.uniform(), 0.5 + rng.uniform()};
    if (markov) {
        graphsurv::PwcHazard hz;
        for (std::size_t j = 1; j < pieces; ++j) {
            hz.cuts.push_back(0.3 * static_cast<double>(j));
        }
        hz.theta.resize(pieces);
        for (auto& row : hz.theta) {
            for (double& w : row) {
                w = rng.uniform_symmetric(0.4);
            }
        }
        m.hazard = std::move(hz);
        if (standardize) {
            graphsurv::FeatureStandardizer s;
            for (std::size_t i = 0; i < 4; ++i) {
                s.mean[i] = rng.uniform_symmetric(0.5);
                s.stddev[i] = 0.5 + rng.uniform();
            }
            m.standardizer = s;
        }
    }
    return m;
}

}  // namespace oracles
