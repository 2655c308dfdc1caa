#include "graphsurv/events.hpp"

#include "graphsurv/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <unordered_set>

#include <json.hpp>

namespace graphsurv {

NodeId NodeTable::intern(const std::string& label) {
    auto it = ids_.find(label);
    if (it != ids_.end()) {
        return it->second;
    }
    const NodeId id = static_cast<NodeId>(labels_.size());
    labels_.push_back(label);
    ids_.emplace(label, id);
    return id;
}

std::optional<NodeId> NodeTable::find(const std::string& label) const {
    auto it = ids_.find(label);
    if (it == ids_.end()) {
        return std::nullopt;
    }
    return it->second;
}

const std::string& NodeTable::label(NodeId id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= labels_.size()) {
        throw std::out_of_range("node id " + std::to_string(id) + " outside node table");
    }
    return labels_[static_cast<std::size_t>(id)];
}

EventHistory::EventHistory(std::vector<Event> events,
                           std::shared_ptr<const NodeTable> nodes,
                           std::vector<NodeId> sources,
                           std::vector<NodeId> destinations,
                           double begin,
                           double horizon)
    : events_(std::move(events)),
      nodes_(std::move(nodes)),
      sources_(std::move(sources)),
      destinations_(std::move(destinations)),
      begin_(begin),
      horizon_(horizon) {
    if (!nodes_) {
        throw std::invalid_argument("EventHistory requires a node table");
    }
    if (!(begin_ <= horizon_)) {
        throw std::invalid_argument("history begin must not exceed horizon");
    }
    double prev = -std::numeric_limits<double>::infinity();
    for (const Event& ev : events_) {
        if (!std::isfinite(ev.time) || ev.time < 0.0) {
            throw std::invalid_argument("event times must be finite and non-negative");
        }
        if (!(ev.time > prev)) {
            throw std::invalid_argument("event times must be strictly increasing");
        }
        if (ev.time < begin_ || ev.time > horizon_) {
            throw std::invalid_argument("event time outside [begin, horizon]");
        }
        prev = ev.time;
    }
}

std::size_t EventHistory::edge_space_size() const noexcept {
    std::size_t overlap = 0;
    std::unordered_set<NodeId> dsts(destinations_.begin(), destinations_.end());
    for (NodeId u : sources_) {
        if (dsts.count(u) != 0) {
            ++overlap;
        }
    }
    return sources_.size() * destinations_.size() - overlap;
}

std::vector<Event> EventHistory::edge_events(NodeId src, NodeId dst) const {
    std::vector<Event> out;
    for (const Event& ev : events_) {
        if (ev.src == src && ev.dst == dst) {
            out.push_back(ev);
        }
    }
    return out;
}

namespace {

std::vector<std::string> tokenize(const std::string& line, char delimiter) {
    std::vector<std::string> fields;
    if (delimiter == '\0') {
        // Any run of whitespace or commas separates fields.
        std::string current;
        for (char c : line) {
            if (c == ' ' || c == '\t' || c == ',' || c == '\r') {
                if (!current.empty()) {
                    fields.push_back(std::move(current));
                    current.clear();
                }
            } else {
                current.push_back(c);
            }
        }
        if (!current.empty()) {
            fields.push_back(std::move(current));
        }
    } else {
        std::string current;
        for (char c : line) {
            if (c == '\r') {
                continue;
            }
            if (c == delimiter) {
                fields.push_back(current);
                current.clear();
            } else {
                current.push_back(c);
            }
        }
        fields.push_back(current);
    }
    return fields;
}

std::vector<NodeId> sorted_unique(std::vector<NodeId> ids) {
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

void collect_roles(const std::vector<Event>& events,
                   std::vector<NodeId>& sources,
                   std::vector<NodeId>& destinations) {
    sources.clear();
    destinations.clear();
    for (const Event& ev : events) {
        sources.push_back(ev.src);
        destinations.push_back(ev.dst);
    }
    sources = sorted_unique(std::move(sources));
    destinations = sorted_unique(std::move(destinations));
}

// Tie resolution over time-sorted events: exact (src,dst,t) duplicates go,
// then remaining ties are dropped (dedup_simultaneous) or spread forward,
// then the count cap applies. Shared by ingest and preprocess.
std::vector<Event> resolve_ties(const std::vector<Event>& sorted, const PreprocessOptions& opts) {
    std::vector<Event> deduped;
    deduped.reserve(sorted.size());
    std::set<std::pair<NodeId, NodeId>> dyads_at_time;
    double current_time = -std::numeric_limits<double>::infinity();
    for (const Event& ev : sorted) {
        if (ev.time != current_time) {
            dyads_at_time.clear();
            current_time = ev.time;
        }
        if (!dyads_at_time.insert({ev.src, ev.dst}).second) {
            continue; // exact duplicate
        }
        deduped.push_back(ev);
    }

    std::vector<Event> ordered;
    ordered.reserve(deduped.size());
    for (const Event& ev : deduped) {
        if (ordered.empty() || ev.time > ordered.back().time) {
            ordered.push_back(ev);
            continue;
        }
        if (opts.dedup_simultaneous) {
            continue; // drop simultaneous cross-edge event
        }
        Event shifted = ev;
        if (opts.jitter_ties.has_value()) {
            shifted.time = ordered.back().time + *opts.jitter_ties;
        } else {
            shifted.time = std::nextafter(ordered.back().time,
                                          std::numeric_limits<double>::infinity());
        }
        ordered.push_back(shifted);
    }

    if (opts.max_events.has_value() && ordered.size() > *opts.max_events) {
        ordered.resize(*opts.max_events);
    }
    return ordered;
}

} // namespace

EventHistory ingest_csv(const std::string& path, const CsvFormat& format,
                        IngestReport* report) {
    return ingest_csv(path, format, PreprocessOptions{}, report);
}

EventHistory ingest_csv(const std::string& path, const CsvFormat& format,
                        const PreprocessOptions& opts, IngestReport* report) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open event file: " + path);
    }
    const int max_column = std::max({format.src_column, format.dst_column, format.time_column});
    if (std::min({format.src_column, format.dst_column, format.time_column}) < 0) {
        throw InputError("column indices must be non-negative");
    }

    auto table = std::make_shared<NodeTable>();
    std::vector<Event> events;
    IngestReport rep;

    std::string line;
    std::size_t line_number = 0;
    bool skipped_header = !format.has_header;
    while (std::getline(in, line)) {
        ++line_number;
        if (!skipped_header) {
            skipped_header = true;
            continue;
        }
        const auto fields = tokenize(line, format.delimiter);
        if (fields.empty() || (fields.size() == 1 && fields[0].empty())) {
            continue;
        }
        if (static_cast<int>(fields.size()) <= max_column) {
            throw ParseError("row has " + std::to_string(fields.size()) +
                                 " fields, need at least " + std::to_string(max_column + 1),
                             line_number);
        }
        const std::string& src_label = fields[static_cast<std::size_t>(format.src_column)];
        const std::string& dst_label = fields[static_cast<std::size_t>(format.dst_column)];
        const std::string& time_text = fields[static_cast<std::size_t>(format.time_column)];
        if (src_label.empty() || dst_label.empty()) {
            throw ParseError("empty node label", line_number);
        }
        double t = 0.0;
        try {
            std::size_t pos = 0;
            t = std::stod(time_text, &pos);
            if (pos != time_text.size()) {
                throw std::invalid_argument(time_text);
            }
        } catch (const std::exception&) {
            throw ParseError("timestamp '" + time_text + "' is not numeric", line_number);
        }
        if (!std::isfinite(t) || t < 0.0) {
            throw ParseError("timestamp must be finite and non-negative", line_number);
        }
        ++rep.raw_rows;
        if (src_label == dst_label) {
            ++rep.self_loops_dropped;
            continue;
        }
        events.push_back(Event{table->intern(src_label), table->intern(dst_label), t});
    }
    if (rep.raw_rows == 0) {
        throw InputError("event file is empty: " + path);
    }
    if (events.empty()) {
        throw InputError("no usable events after dropping self-loops: " + path);
    }

    std::stable_sort(events.begin(), events.end(),
                     [](const Event& a, const Event& b) { return a.time < b.time; });
    std::vector<Event> ordered = resolve_ties(events, opts);
    if (ordered.empty()) {
        throw InputError("no events left after preprocessing: " + path);
    }

    std::vector<NodeId> sources;
    std::vector<NodeId> destinations;
    collect_roles(ordered, sources, destinations);
    const double horizon = ordered.back().time;

    if (report != nullptr) {
        *report = rep;
    }
    return EventHistory(std::move(ordered), std::move(table), std::move(sources),
                        std::move(destinations), 0.0, horizon);
}

EventHistory preprocess(const EventHistory& h, const PreprocessOptions& opts) {
    const bool truncating = opts.max_events.has_value() && h.size() > *opts.max_events;
    std::vector<Event> ordered = resolve_ties(h.events(), opts);

    double horizon = h.horizon();
    if (!ordered.empty()) {
        horizon = truncating ? ordered.back().time : std::max(horizon, ordered.back().time);
    }

    std::vector<NodeId> sources;
    std::vector<NodeId> destinations;
    collect_roles(ordered, sources, destinations);
    return EventHistory(std::move(ordered), h.nodes_ptr(), std::move(sources),
                        std::move(destinations), h.begin(), horizon);
}

EventHistory rescale_times(const EventHistory& h, double scale) {
    if (!(scale > 0.0)) {
        throw std::invalid_argument("rescale target must be positive");
    }
    if (h.empty()) {
        throw std::invalid_argument("cannot rescale an empty history");
    }
    const double t_min = h.events().front().time;
    const double t_max = h.events().back().time;
    const double span = t_max - t_min;
    if (!(span > 0.0)) {
        throw std::invalid_argument("cannot rescale a history with zero time span");
    }
    std::vector<Event> events = h.events();
    for (Event& ev : events) {
        ev.time = (ev.time - t_min) / span * scale;
    }
    // Division can still produce ties when raw gaps are tiny; restore order.
    for (std::size_t i = 1; i < events.size(); ++i) {
        if (!(events[i].time > events[i - 1].time)) {
            events[i].time = std::nextafter(events[i - 1].time,
                                            std::numeric_limits<double>::infinity());
        }
    }
    const double horizon = std::max(scale, events.back().time);
    return EventHistory(std::move(events), h.nodes_ptr(),
                        std::vector<NodeId>(h.sources()),
                        std::vector<NodeId>(h.destinations()), 0.0, horizon);
}

SplitSpec split_spec_from_fractions(const EventHistory& h, double f_train, double f_val) {
    if (!(f_train > 0.0 && f_train <= f_val && f_val <= 1.0)) {
        throw std::invalid_argument("split fractions must satisfy 0 < f_train <= f_val <= 1");
    }
    if (h.empty()) {
        throw std::invalid_argument("cannot derive split cut-offs from an empty history");
    }
    const std::size_t m = h.size();
    const auto cut_time = [&](double f) {
        std::size_t k = static_cast<std::size_t>(std::llround(f * static_cast<double>(m)));
        if (k == 0) {
            k = 1;
        }
        if (k > m) {
            k = m;
        }
        return h.events()[k - 1].time;
    };
    return SplitSpec{cut_time(f_train), cut_time(f_val), h.horizon()};
}

SplitResult split(const EventHistory& h, const SplitSpec& spec) {
    if (!(spec.t_train > h.begin() && spec.t_train <= spec.t_val &&
          spec.t_val <= spec.t_test && spec.t_test <= h.horizon())) {
        throw InputError("split cut-offs out of range: need begin < t_train <= t_val <= t_test <= horizon");
    }
    std::vector<Event> train_ev;
    std::vector<Event> val_ev;
    std::vector<Event> test_ev;
    for (const Event& ev : h.events()) {
        if (ev.time <= spec.t_train) {
            train_ev.push_back(ev);
        } else if (ev.time <= spec.t_val) {
            val_ev.push_back(ev);
        } else {
            test_ev.push_back(ev);
        }
    }
    // Sub-histories keep the parent node universe so that models and
    // evaluators see one consistent index space.
    auto make = [&](std::vector<Event> ev, double begin, double horizon) {
        return EventHistory(std::move(ev), h.nodes_ptr(),
                            std::vector<NodeId>(h.sources()),
                            std::vector<NodeId>(h.destinations()), begin, horizon);
    };
    return SplitResult{
        make(std::move(train_ev), h.begin(), spec.t_train),
        make(std::move(val_ev), spec.t_train, spec.t_val),
        make(std::move(test_ev), spec.t_val, h.horizon()),
    };
}

void write_canonical(const EventHistory& h, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw InputError("cannot open output file: " + path);
    }
    char buffer[64];
    for (const Event& ev : h.events()) {
        std::snprintf(buffer, sizeof(buffer), "%.17g", ev.time);
        out << h.nodes().label(ev.src) << ',' << h.nodes().label(ev.dst) << ','
            << buffer << '\n';
    }
    if (!out) {
        throw InputError("failed writing event file: " + path);
    }
}

std::string summary_json(const EventHistory& h) {
    nlohmann::json j;
    j["M"] = h.size();
    j["num_sources"] = h.sources().size();
    j["num_destinations"] = h.destinations().size();
    j["T"] = h.horizon();
    j["t_min"] = h.empty() ? h.begin() : h.events().front().time;
    return j.dump(2);
}

void write_summary_sidecar(const EventHistory& h, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw InputError("cannot open output file: " + path);
    }
    out << summary_json(h) << '\n';
}

} // namespace graphsurv
