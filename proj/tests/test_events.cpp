#include "doctest.h"

#include <cmath>
#include <limits>

#include "graphsurv/errors.hpp"
#include "graphsurv/events.hpp"
#include "tmpdir.hpp"

using namespace graphsurv;
using testutil::TempDir;

TEST_CASE("ingest parses mixed whitespace and comma separators") {
    TempDir tmp;
    const auto path = tmp.write("raw.txt", "a b 1.0\nb,c,2.5\n  c\ta  3\n");
    IngestReport report;
    const EventHistory h = ingest_csv(path, CsvFormat{}, &report);
    REQUIRE(h.size() == 3);
    CHECK(report.raw_rows == 3);
    CHECK(report.self_loops_dropped == 0);
    CHECK(h.nodes().size() == 3);
    // Interning follows first appearance.
    CHECK(h.nodes().label(0) == "a");
    CHECK(h.nodes().label(1) == "b");
    CHECK(h.nodes().label(2) == "c");
    CHECK(h.events()[0].src == 0);
    CHECK(h.events()[0].dst == 1);
    CHECK(h.events()[1].time == 2.5);
    CHECK(h.begin() == 0.0);
    CHECK(h.horizon() == 3.0);
}

TEST_CASE("ingest honors header flag and column layout") {
    TempDir tmp;
    const auto path = tmp.write("cols.csv", "time;src;dst\n1.5;x;y\n2.5;y;x\n");
    CsvFormat fmt;
    fmt.delimiter = ';';
    fmt.time_column = 0;
    fmt.src_column = 1;
    fmt.dst_column = 2;
    fmt.has_header = true;
    const EventHistory h = ingest_csv(path, fmt, nullptr);
    REQUIRE(h.size() == 2);
    CHECK(h.nodes().label(h.events()[0].src) == "x");
    CHECK(h.events()[0].time == 1.5);
}

TEST_CASE("ingest sorts by time and bumps exact ties minimally") {
    TempDir tmp;
    const auto path = tmp.write("raw.txt", "a b 2\nb c 1\nc a 2\n");
    const EventHistory h = ingest_csv(path, CsvFormat{}, nullptr);
    REQUIRE(h.size() == 3);
    CHECK(h.events()[0].time == 1.0);
    CHECK(h.events()[1].time == 2.0);
    CHECK(h.events()[2].time == std::nextafter(2.0, 3.0));
    // Stable sort keeps the file order of tied rows.
    CHECK(h.nodes().label(h.events()[1].src) == "a");
    CHECK(h.nodes().label(h.events()[2].src) == "c");
}

TEST_CASE("ingest drops self loops and reports them") {
    TempDir tmp;
    const auto path = tmp.write("raw.txt", "a a 1\na b 2\n");
    IngestReport report;
    const EventHistory h = ingest_csv(path, CsvFormat{}, &report);
    CHECK(h.size() == 1);
    CHECK(report.raw_rows == 2);
    CHECK(report.self_loops_dropped == 1);
}

TEST_CASE("ingest rejects malformed rows with the line number") {
    TempDir tmp;
    SUBCASE("short row") {
        const auto path = tmp.write("bad.txt", "a b 1\na b\n");
        CHECK_THROWS_WITH_AS(ingest_csv(path, CsvFormat{}, nullptr),
                             doctest::Contains("line 2"), ParseError);
    }
    SUBCASE("non-numeric time") {
        const auto path = tmp.write("bad.txt", "a b xyz\n");
        CHECK_THROWS_WITH_AS(ingest_csv(path, CsvFormat{}, nullptr),
                             doctest::Contains("not numeric"), ParseError);
    }
    SUBCASE("negative time") {
        const auto path = tmp.write("bad.txt", "a b -1\n");
        CHECK_THROWS_AS(ingest_csv(path, CsvFormat{}, nullptr), ParseError);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(ingest_csv(tmp.file("nope.txt"), CsvFormat{}, nullptr), InputError);
    }
    SUBCASE("empty file") {
        const auto path = tmp.write("empty.txt", "\n\n");
        CHECK_THROWS_AS(ingest_csv(path, CsvFormat{}, nullptr), InputError);
    }
}

TEST_CASE("history constructor enforces ordering invariants") {
    auto table = std::make_shared<NodeTable>();
    table->intern("a");
    table->intern("b");
    const std::vector<NodeId> ids{0, 1};
    CHECK_NOTHROW(EventHistory({{0, 1, 1.0}, {1, 0, 2.0}}, table, ids, ids, 0.0, 2.0));
    CHECK_THROWS_AS(EventHistory({{0, 1, 2.0}, {1, 0, 1.0}}, table, ids, ids, 0.0, 2.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(EventHistory({{0, 1, 1.0}, {1, 0, 1.0}}, table, ids, ids, 0.0, 2.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(EventHistory({{0, 1, 3.0}}, table, ids, ids, 0.0, 2.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        EventHistory({{0, 1, std::numeric_limits<double>::quiet_NaN()}}, table, ids, ids, 0.0,
                     2.0),
        std::invalid_argument);
}

TEST_CASE("edge space size subtracts the role overlap") {
    auto table = std::make_shared<NodeTable>();
    for (const char* l : {"a", "b", "c"}) {
        table->intern(l);
    }
    // U = {0, 1}, V = {1, 2}; only node 1 can self-pair.
    const EventHistory h({{0, 1, 1.0}, {1, 2, 2.0}}, table, {0, 1}, {1, 2}, 0.0, 2.0);
    CHECK(h.edge_space_size() == 3);
}

TEST_CASE("ingest tie policy drops duplicates and resolves simultaneous events") {
    TempDir tmp;
    const auto path = tmp.write("raw.txt", "a b 1\na b 1\nb c 1\na b 2\n");

    SUBCASE("default drops the exact duplicate and bumps the cross-edge tie") {
        const EventHistory out = ingest_csv(path, CsvFormat{}, nullptr);
        REQUIRE(out.size() == 3);
        CHECK(out.events()[0].time == 1.0);
        CHECK(out.events()[1].time == std::nextafter(1.0, 2.0));
        CHECK(out.nodes().label(out.events()[1].src) == "b");
    }
    SUBCASE("dedup_simultaneous keeps only the first event per timestamp") {
        PreprocessOptions opts;
        opts.dedup_simultaneous = true;
        const EventHistory out = ingest_csv(path, CsvFormat{}, opts, nullptr);
        REQUIRE(out.size() == 2);
        CHECK(out.events()[0].time == 1.0);
        CHECK(out.events()[1].time == 2.0);
        CHECK(out.nodes().label(out.events()[1].src) == "a");
    }
    SUBCASE("jitter_ties spreads the cross-edge tie by a fixed epsilon") {
        PreprocessOptions opts;
        opts.jitter_ties = 0.25;
        const EventHistory out = ingest_csv(path, CsvFormat{}, opts, nullptr);
        REQUIRE(out.size() == 3);
        CHECK(out.events()[1].time == 1.25);
        CHECK(out.events()[2].time == 2.0);
    }
    SUBCASE("max_events truncates after tie handling") {
        PreprocessOptions opts;
        opts.max_events = 2;
        const EventHistory out = ingest_csv(path, CsvFormat{}, opts, nullptr);
        REQUIRE(out.size() == 2);
        CHECK(out.horizon() == out.events().back().time);
    }
}

TEST_CASE("preprocess truncates a strict history and pulls the horizon in") {
    TempDir tmp;
    const auto path = tmp.write("raw.txt", "a b 1\nb c 2\na b 3\na c 4\n");
    const EventHistory raw = ingest_csv(path, CsvFormat{}, nullptr);
    PreprocessOptions opts;
    opts.max_events = 2;
    const EventHistory out = preprocess(raw, opts);
    REQUIRE(out.size() == 2);
    CHECK(out.horizon() == 2.0);
    // Node roles shrink to what the kept events use.
    CHECK(out.sources().size() == 2);
    // Tie options are no-ops on a history that is already strictly ordered.
    PreprocessOptions dedup;
    dedup.dedup_simultaneous = true;
    CHECK(preprocess(raw, dedup).size() == raw.size());
}

TEST_CASE("rescale maps the observed span onto [0, scale]") {
    auto table = std::make_shared<NodeTable>();
    table->intern("a");
    table->intern("b");
    const std::vector<NodeId> ids{0, 1};
    const EventHistory h({{0, 1, 10.0}, {1, 0, 15.0}, {0, 1, 30.0}}, table, ids, ids, 0.0,
                         30.0);
    const EventHistory out = rescale_times(h, 100.0);
    REQUIRE(out.size() == 3);
    CHECK(out.events()[0].time == 0.0);
    CHECK(out.events()[1].time == 25.0);
    CHECK(out.events()[2].time == 100.0);
    CHECK(out.horizon() == 100.0);
    CHECK_THROWS_AS(rescale_times(h, 0.0), std::invalid_argument);
}

TEST_CASE("fraction split lands on event-count quantiles") {
    auto table = std::make_shared<NodeTable>();
    table->intern("a");
    table->intern("b");
    const std::vector<NodeId> ids{0, 1};
    std::vector<Event> events;
    for (int i = 1; i <= 20; ++i) {
        events.push_back({0, 1, static_cast<double>(i)});
    }
    const EventHistory h(std::move(events), table, ids, ids, 0.0, 20.0);
    const SplitSpec spec = split_spec_from_fractions(h, 0.7, 0.85);
    CHECK(spec.t_train == 14.0);
    CHECK(spec.t_val == 17.0);
    CHECK(spec.t_test == 20.0);
    const SplitResult parts = split(h, spec);
    CHECK(parts.train.size() == 14);
    CHECK(parts.val.size() == 3);
    CHECK(parts.test.size() == 3);
    CHECK(parts.train.begin() == 0.0);
    CHECK(parts.train.horizon() == 14.0);
    CHECK(parts.val.begin() == 14.0);
    CHECK(parts.test.horizon() == 20.0);
    // Sub-histories share the parent node universe.
    CHECK(parts.test.sources() == h.sources());
    CHECK(parts.test.nodes_ptr().get() == h.nodes_ptr().get());
    CHECK_THROWS_AS(split(h, SplitSpec{25.0, 26.0, 27.0}), InputError);
    CHECK_THROWS_AS(split_spec_from_fractions(h, 0.9, 0.1), std::invalid_argument);
}

TEST_CASE("canonical write and re-ingest round trips") {
    TempDir tmp;
    const auto path = tmp.write("raw.txt", "alice bob 1.125\nbob carol 2.625\n");
    const EventHistory h = ingest_csv(path, CsvFormat{}, nullptr);
    const auto out = tmp.file("canonical.csv");
    write_canonical(h, out);
    CHECK(TempDir::read(out) == "alice,bob,1.125\nbob,carol,2.625\n");
    const EventHistory again = ingest_csv(out, CsvFormat{}, nullptr);
    REQUIRE(again.size() == h.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
        CHECK(again.events()[i].time == h.events()[i].time);
        CHECK(again.nodes().label(again.events()[i].src) ==
              h.nodes().label(h.events()[i].src));
    }
}

TEST_CASE("summary json reports the window and counts") {
    TempDir tmp;
    const auto path = tmp.write("raw.txt", "a b 1\nb c 4\n");
    const EventHistory h = ingest_csv(path, CsvFormat{}, nullptr);
    const std::string s = summary_json(h);
    CHECK(s.find("\"M\": 2") != std::string::npos);
    CHECK(s.find("\"num_sources\": 2") != std::string::npos);
    CHECK(s.find("\"num_destinations\": 2") != std::string::npos);
    CHECK(s.find("\"T\": 4.0") != std::string::npos);
    CHECK(s.find("\"t_min\": 1.0") != std::string::npos);
}
