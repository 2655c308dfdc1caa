#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace graphsurv {

using NodeId = std::int32_t;

// Bijective map between external node labels and dense 0-based indices.
class NodeTable {
public:
    NodeId intern(const std::string& label);
    std::optional<NodeId> find(const std::string& label) const;
    const std::string& label(NodeId id) const;
    std::size_t size() const noexcept { return labels_.size(); }

private:
    std::vector<std::string> labels_;
    std::unordered_map<std::string, NodeId> ids_;
};

struct Event {
    NodeId src;
    NodeId dst;
    double time;
};

// Time-ordered dyadic event sequence over a fixed observation window
// [begin, horizon]. Immutable after construction; the node table is shared
// so that sub-histories produced by split() keep the same index space.
class EventHistory {
public:
    EventHistory(std::vector<Event> events,
                 std::shared_ptr<const NodeTable> nodes,
                 std::vector<NodeId> sources,
                 std::vector<NodeId> destinations,
                 double begin,
                 double horizon);

    const std::vector<Event>& events() const noexcept { return events_; }
    std::size_t size() const noexcept { return events_.size(); }
    bool empty() const noexcept { return events_.empty(); }
    double begin() const noexcept { return begin_; }
    double horizon() const noexcept { return horizon_; }

    const NodeTable& nodes() const noexcept { return *nodes_; }
    std::shared_ptr<const NodeTable> nodes_ptr() const noexcept { return nodes_; }

    // Distinct node ids observed as sources (U) and destinations (V) in the
    // history this one descends from; sorted ascending.
    const std::vector<NodeId>& sources() const noexcept { return sources_; }
    const std::vector<NodeId>& destinations() const noexcept { return destinations_; }

    // |U x V| minus self-pairs.
    std::size_t edge_space_size() const noexcept;

    std::vector<Event> edge_events(NodeId src, NodeId dst) const;

private:
    std::vector<Event> events_;
    std::shared_ptr<const NodeTable> nodes_;
    std::vector<NodeId> sources_;
    std::vector<NodeId> destinations_;
    double begin_;
    double horizon_;
};

// Column layout of a delimited event file. delimiter '\0' means "any run of
// whitespace or commas", which covers both SNAP-style and csv files.
struct CsvFormat {
    char delimiter = '\0';
    int src_column = 0;
    int dst_column = 1;
    int time_column = 2;
    bool has_header = false;
};

struct IngestReport {
    std::size_t raw_rows = 0;
    std::size_t self_loops_dropped = 0;
};

struct PreprocessOptions {
    // Keep only the first event at each timestamp; removes simultaneous
    // cross-edge events (broadcasts) on top of the always-on duplicate drop.
    bool dedup_simultaneous = false;
    std::optional<std::size_t> max_events;
    // Shift remaining ties forward by this epsilon instead of the default
    // smallest-representable bump. Exact (src,dst,t) duplicates are always
    // dropped.
    std::optional<double> jitter_ties;
};

// Parses and time-orders a delimited event file. Tie policy must act here:
// the raw timestamps carry the tie structure, and the returned history is
// already strictly increasing.
EventHistory ingest_csv(const std::string& path, const CsvFormat& format,
                        const PreprocessOptions& opts, IngestReport* report = nullptr);

EventHistory ingest_csv(const std::string& path, const CsvFormat& format,
                        IngestReport* report = nullptr);

// Re-applies the policy to an existing history. Duplicate and tie handling
// see the stored (already strict) times, so on ingested histories this is
// only useful for max_events truncation.
EventHistory preprocess(const EventHistory& h, const PreprocessOptions& opts);

// Affine time rescale: [t_min, t_max] -> [0, scale]; horizon becomes scale.
EventHistory rescale_times(const EventHistory& h, double scale);

struct SplitSpec {
    double t_train;
    double t_val;
    double t_test;
};

// Cut-off times at event-count quantiles, so fractions (0.7, 0.85) give a
// 70/15/15 event split.
SplitSpec split_spec_from_fractions(const EventHistory& h, double f_train, double f_val);

struct SplitResult {
    EventHistory train;
    EventHistory val;
    EventHistory test;
};

// train = [begin, t_train], val = (t_train, t_val], test = (t_val, horizon].
SplitResult split(const EventHistory& h, const SplitSpec& spec);

// Canonical event file: "src,dst,time" rows, label form, %.17g times.
void write_canonical(const EventHistory& h, const std::string& path);

// {M, |U|, |V|, T, t_min} sidecar.
std::string summary_json(const EventHistory& h);

void write_summary_sidecar(const EventHistory& h, const std::string& path);

} // namespace graphsurv
