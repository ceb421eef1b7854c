#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "ddsop/harness.hpp"
#include "ddsop/random_instance.hpp"
#include "test_util.hpp"

using namespace ddsop;
using namespace ddsop::testing;

namespace {

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

// Writes a generated instance under the system temp dir and returns its path.
std::string write_instance_file(const SopInstance& inst, const std::string& file) {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "ddsop-harness-tests";
  fs::create_directories(dir);
  fs::path path = dir / file;
  std::ofstream out(path);
  REQUIRE(out.good());
  inst.write_tsplib(out);
  return path.string();
}

// A synthetic open run with explicit bounds, for comparison-formula tests.
RunRecord open_record(std::string instance, int width, Cost rb, Cost best, double gap,
                      std::size_t queue) {
  RunRecord r;
  r.instance = std::move(instance);
  r.n = 9;
  r.width = width;
  r.closed = false;
  r.relaxed_bound = rb;
  r.best_value = best;
  r.optimality_gap = gap;
  r.queue_length = queue;
  return r;
}

RunRecord closed_record(std::string instance, int width, Cost best, double seconds) {
  RunRecord r;
  r.instance = std::move(instance);
  r.n = 9;
  r.width = width;
  r.closed = true;
  r.relaxed_bound = best;
  r.best_value = best;
  r.optimality_gap = 0.0;
  r.time_to_close_seconds = seconds;
  return r;
}

}  // namespace

TEST_CASE("algorithm and node-select names round-trip") {
  CHECK(to_string(Algorithm::bnb) == "bnb");
  CHECK(to_string(Algorithm::pnb) == "pnb");
  CHECK(algorithm_from_string("bnb") == Algorithm::bnb);
  CHECK(algorithm_from_string("pnb") == Algorithm::pnb);
  CHECK_THROWS_WITH_AS(algorithm_from_string("fast"),
                       "unknown algorithm 'fast' (expected bnb or pnb)",
                       std::invalid_argument);

  CHECK(to_string(NodeSelect::last_exact) == "last-exact");
  CHECK(to_string(NodeSelect::frontier) == "frontier");
  CHECK(node_select_from_string("last-exact") == NodeSelect::last_exact);
  CHECK(node_select_from_string("frontier") == NodeSelect::frontier);
  CHECK_THROWS_WITH_AS(node_select_from_string("deep"),
                       "unknown node selection 'deep' (expected last-exact or frontier)",
                       std::invalid_argument);
}

TEST_CASE("percent improvement formulas") {
  CHECK(percent_improvement_higher_better(2.0, 11.0) == doctest::Approx(450.0));
  CHECK(percent_improvement_lower_better(30.0, 10.0) == doctest::Approx(200.0));
  CHECK(percent_improvement_lower_better(18373.0, 100.0) == doctest::Approx(18273.0));
  CHECK(percent_improvement_lower_better(23.0, 25.0) == doctest::Approx(-8.0));
  CHECK(percent_improvement_higher_better(40.0, 40.0) == doctest::Approx(0.0));
}

TEST_CASE("optimality gap") {
  CHECK(optimality_gap(30, 40, /*closed=*/false) == doctest::Approx(0.25));
  CHECK(optimality_gap(0, 10, false) == doctest::Approx(1.0));
  CHECK(optimality_gap(12, kCostInfinity, false) == doctest::Approx(1.0));
  CHECK(optimality_gap(0, 0, false) == doctest::Approx(0.0));
  CHECK(optimality_gap(7, 40, /*closed=*/true) == doctest::Approx(0.0));
}

TEST_CASE("run_single fills a consistent record") {
  SopInstance inst = chain_instance(6);
  HarnessOptions options;
  options.width = 8;

  RunRecord rec = run_single(inst, Algorithm::bnb, options);
  CHECK(rec.instance == "chain6");
  CHECK(rec.n == 6);
  CHECK(rec.algorithm == Algorithm::bnb);
  CHECK(rec.width == 8);
  CHECK(rec.node_select == NodeSelect::last_exact);
  CHECK(rec.closed);
  CHECK(rec.best_value == 15);
  CHECK(rec.relaxed_bound == 15);
  CHECK(rec.optimality_gap == doctest::Approx(0.0));
  REQUIRE(rec.time_to_close_seconds.has_value());
  CHECK(*rec.time_to_close_seconds == doctest::Approx(rec.wall_time_seconds));
  CHECK(rec.iterations == 1);
  CHECK(rec.queue_length == 0);
  CHECK(rec.best_sequence == std::vector<Element>{1, 2, 3, 4, 5, 6});
  CHECK_FALSE(rec.events.empty());

  RunRecord peeled = run_single(inst, Algorithm::pnb, options);
  CHECK(peeled.algorithm == Algorithm::pnb);
  CHECK(peeled.closed);
  CHECK(peeled.best_value == 15);
  CHECK(peeled.iterations == 0);
}

TEST_CASE("an open record is honest about what it does not know") {
  SopInstance inst = random_instance(7, 0.2, 9);
  HarnessOptions options;
  options.width = 4;
  options.time_limit_seconds = 0.0;
  RunRecord rec = run_single(inst, Algorithm::bnb, options);
  CHECK_FALSE(rec.closed);
  CHECK(rec.best_value == kCostInfinity);
  CHECK(rec.optimality_gap == doctest::Approx(1.0));
  CHECK_FALSE(rec.time_to_close_seconds.has_value());
  CHECK(rec.queue_length == 1);
  CHECK(rec.best_sequence.empty());
}

TEST_CASE("run_single_file parses headers and rejects missing files") {
  SopInstance inst = random_instance(6, 0.3, 4);
  std::string path = write_instance_file(inst, "roundtrip.sop");
  HarnessOptions options;
  options.width = 4;
  RunRecord rec = run_single_file(path, Algorithm::pnb, options);
  CHECK(rec.instance == "rnd-n6-d30-s4");
  CHECK(rec.n == 6);
  CHECK(rec.closed);
  auto best = brute_force_best(inst);
  REQUIRE(best.has_value());
  CHECK(rec.best_value == best->first);

  CHECK_THROWS_AS(run_single_file("/nonexistent/missing.sop", Algorithm::bnb, options),
                  std::runtime_error);
}

TEST_CASE("record JSON carries the documented fields in order") {
  SopInstance inst = chain_instance(5);
  HarnessOptions options;
  options.width = 4;
  RunRecord rec = run_single(inst, Algorithm::bnb, options);

  std::ostringstream out;
  write_record_json(rec, out);
  auto j = nlohmann::ordered_json::parse(out.str());

  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  CHECK(keys == std::vector<std::string>{
                    "instance", "n", "algorithm", "width", "time_limit_seconds",
                    "node_select", "closed", "best_value", "relaxed_bound",
                    "optimality_gap", "wall_time_seconds", "time_to_close_seconds",
                    "iterations", "queue_length", "best_sequence", "event_count"});

  CHECK(j["instance"] == "chain5");
  CHECK(j["n"] == 5);
  CHECK(j["algorithm"] == "bnb");
  CHECK(j["width"] == 4);
  CHECK(j["time_limit_seconds"].is_null());  // infinity serializes as null
  CHECK(j["node_select"] == "last-exact");
  CHECK(j["closed"] == true);
  CHECK(j["best_value"] == 10);
  CHECK(j["relaxed_bound"] == 10);
  CHECK(j["time_to_close_seconds"].is_number());
  CHECK(j["best_sequence"] == nlohmann::ordered_json({1, 2, 3, 4, 5}));
  CHECK(j["event_count"] == rec.events.size());

  SUBCASE("open runs serialize unknowns as null") {
    HarnessOptions open = options;
    open.time_limit_seconds = 0.0;
    RunRecord stopped = run_single(random_instance(7, 0.2, 9), Algorithm::bnb, open);
    std::ostringstream out2;
    write_record_json(stopped, out2);
    auto j2 = nlohmann::ordered_json::parse(out2.str());
    CHECK(j2["closed"] == false);
    CHECK(j2["best_value"].is_null());
    CHECK(j2["time_to_close_seconds"].is_null());
    CHECK(j2["time_limit_seconds"] == 0.0);
    CHECK(j2["optimality_gap"] == 1.0);
  }
}

TEST_CASE("series ndjson writes one event per line and ends on the closing state") {
  SopInstance inst = random_instance(6, 0.3, 5);
  HarnessOptions options;
  options.width = 4;
  RunRecord rec = run_single(inst, Algorithm::bnb, options);

  std::ostringstream out;
  write_series_ndjson(rec, out);
  std::vector<std::string> lines = split_lines(out.str());
  REQUIRE(lines.size() == rec.events.size());

  for (std::size_t k = 0; k < lines.size(); ++k) {
    auto j = nlohmann::ordered_json::parse(lines[k]);
    CHECK(j["iteration"] == rec.events[k].iteration);
    CHECK(j["queue_length"] == rec.events[k].queue_length);
    CHECK(j["elapsed_seconds"].is_number());
  }
  auto last = nlohmann::ordered_json::parse(lines.back());
  CHECK(last["relaxed_bound"] == rec.relaxed_bound);
  CHECK(last["best_value"] == rec.best_value);
  CHECK(last["queue_length"] == rec.queue_length);
}

TEST_CASE("compare_records computes the improvement columns") {
  SUBCASE("pairing is validated") {
    RunRecord a = open_record("one", 8, 5, 50, 0.9, 4);
    RunRecord b = open_record("two", 8, 5, 50, 0.9, 4);
    CHECK_THROWS_AS(compare_records(a, b), std::invalid_argument);
    RunRecord c = open_record("one", 16, 5, 50, 0.9, 4);
    CHECK_THROWS_AS(compare_records(a, c), std::invalid_argument);
  }

  SUBCASE("both open: bound, solution, gap and queue improvements") {
    RunRecord base = open_record("x", 8, 2, 30, 0.5, 50);
    RunRecord chal = open_record("x", 8, 11, 10, 0.25, 25);
    ComparisonRow row = compare_records(base, chal);
    CHECK(row.instance == "x");
    CHECK(row.width == 8);
    REQUIRE(row.bound_improvement_pct.has_value());
    CHECK(*row.bound_improvement_pct == doctest::Approx(450.0));
    REQUIRE(row.solution_improvement_pct.has_value());
    CHECK(*row.solution_improvement_pct == doctest::Approx(200.0));
    REQUIRE(row.gap_improvement_pct.has_value());
    CHECK(*row.gap_improvement_pct == doctest::Approx(100.0));
    REQUIRE(row.queue_improvement_pct.has_value());
    CHECK(*row.queue_improvement_pct == doctest::Approx(100.0));
    CHECK_FALSE(row.time_improvement_pct.has_value());  // time needs both closed
  }

  SUBCASE("both closed: only the time column is defined") {
    RunRecord base = closed_record("x", 8, 40, 3.0);
    RunRecord chal = closed_record("x", 8, 40, 1.5);
    ComparisonRow row = compare_records(base, chal);
    REQUIRE(row.time_improvement_pct.has_value());
    CHECK(*row.time_improvement_pct == doctest::Approx(100.0));
    CHECK_FALSE(row.bound_improvement_pct.has_value());
    CHECK_FALSE(row.solution_improvement_pct.has_value());
    CHECK_FALSE(row.gap_improvement_pct.has_value());
    CHECK_FALSE(row.queue_improvement_pct.has_value());
  }

  SUBCASE("mixed closed/open defines nothing") {
    ComparisonRow row =
        compare_records(closed_record("x", 8, 40, 3.0), open_record("x", 8, 5, 50, 0.9, 4));
    CHECK_FALSE(row.bound_improvement_pct.has_value());
    CHECK_FALSE(row.solution_improvement_pct.has_value());
    CHECK_FALSE(row.time_improvement_pct.has_value());
    CHECK_FALSE(row.gap_improvement_pct.has_value());
    CHECK_FALSE(row.queue_improvement_pct.has_value());
  }

  SUBCASE("self-comparison reports zero improvement") {
    RunRecord r = open_record("x", 8, 7, 21, 2.0 / 3.0, 9);
    ComparisonRow row = compare_records(r, r);
    CHECK(*row.bound_improvement_pct == doctest::Approx(0.0));
    CHECK(*row.solution_improvement_pct == doctest::Approx(0.0));
    CHECK(*row.gap_improvement_pct == doctest::Approx(0.0));
    CHECK(*row.queue_improvement_pct == doctest::Approx(0.0));
  }

  SUBCASE("degenerate denominators leave columns undefined") {
    // Zero baseline bound, zero challenger solution/gap/queue: no division.
    RunRecord base = open_record("x", 8, 0, 30, 0.5, 50);
    RunRecord chal = open_record("x", 8, 11, 0, 0.0, 0);
    ComparisonRow row = compare_records(base, chal);
    CHECK_FALSE(row.bound_improvement_pct.has_value());
    CHECK_FALSE(row.solution_improvement_pct.has_value());
    CHECK_FALSE(row.gap_improvement_pct.has_value());
    CHECK_FALSE(row.queue_improvement_pct.has_value());
  }
}

TEST_CASE("run_comparison pairs every instance and width") {
  std::vector<std::string> files = {
      write_instance_file(random_instance(7, 0.2, 9), "cmp-a.sop"),
      write_instance_file(random_instance(7, 0.2, 10), "cmp-b.sop"),
  };

  ComparisonOptions options;
  options.widths = {2, 4};
  options.baseline = Algorithm::bnb;
  options.challenger = Algorithm::bnb;  // self-comparison keeps every cell deterministic
  options.run.time_limit_seconds = 0.0;
  options.jobs = 2;

  ComparisonTable table = run_comparison(files, options);
  REQUIRE(table.rows.size() == 4);
  REQUIRE(table.aggregates.size() == 2);
  CHECK(table.aggregates[0].width == 2);
  CHECK(table.aggregates[1].width == 4);

  // Rows are grouped by width, file order inside each block.
  CHECK(table.rows[0].width == 2);
  CHECK(table.rows[1].width == 2);
  CHECK(table.rows[2].width == 4);
  CHECK(table.rows[3].width == 4);
  CHECK(table.rows[0].instance == "rnd-n7-d20-s9");
  CHECK(table.rows[1].instance == "rnd-n7-d20-s10");

  for (const ComparisonRow& row : table.rows) {
    // A zero time limit leaves both sides open at the root subproblem.
    CHECK_FALSE(row.baseline.closed);
    CHECK(row.baseline.relaxed_bound == 0);
    CHECK_FALSE(row.baseline.best_value.has_value());
    CHECK(row.baseline.queue_length == 1);
    CHECK(row.baseline.optimality_gap == doctest::Approx(1.0));
    CHECK(*row.gap_improvement_pct == doctest::Approx(0.0));
    CHECK(*row.queue_improvement_pct == doctest::Approx(0.0));
    CHECK_FALSE(row.bound_improvement_pct.has_value());  // baseline bound is zero
    CHECK_FALSE(row.solution_improvement_pct.has_value());
    CHECK_FALSE(row.time_improvement_pct.has_value());
  }
  for (const ComparisonAggregate& agg : table.aggregates) {
    CHECK(*agg.avg_gap_pct == doctest::Approx(0.0));
    CHECK(*agg.median_gap_pct == doctest::Approx(0.0));
    CHECK(*agg.avg_queue_pct == doctest::Approx(0.0));
    CHECK(*agg.median_queue_pct == doctest::Approx(0.0));
    CHECK_FALSE(agg.avg_bound_pct.has_value());
    CHECK_FALSE(agg.median_time_pct.has_value());
  }

  SUBCASE("the TSV rendering is shaped like the table") {
    std::ostringstream out;
    write_table_tsv(table, out);
    std::vector<std::string> lines = split_lines(out.str());
    // Per width: comment, header, two instance rows, average, median.
    REQUIRE(lines.size() == 12);
    CHECK(lines[0] == "# width 2");
    CHECK(lines[6] == "# width 4");

    std::vector<std::string> header = split_tabs(lines[1]);
    REQUIRE(header.size() == 17);
    CHECK(header[0] == "instance");
    CHECK(header[1] == "n");
    CHECK(header[2] == "bnb_bound");
    CHECK(header[12] == "bound_impr_pct");
    CHECK(header[16] == "queue_impr_pct");

    CHECK(lines[2] ==
          "rnd-n7-d20-s9\t7\t0\t-\t-\t1.0000\t1\t0\t-\t-\t1.0000\t1\t-\t-\t-\t0.00\t0.00");
    std::vector<std::string> avg = split_tabs(lines[4]);
    REQUIRE(avg.size() == 17);
    CHECK(avg[0] == "average");
    CHECK(avg[12] == "-");
    CHECK(avg[15] == "0.00");
    CHECK(split_tabs(lines[5])[0] == "median");
  }
}

TEST_CASE("aggregate rows print hand-checkable numbers") {
  // Hand-built rows: the writer prints exactly what the table holds.
  ComparisonTable table;
  ComparisonRow row;
  row.instance = "hand";
  row.n = 9;
  row.width = 3;
  row.baseline.relaxed_bound = 12;
  row.baseline.optimality_gap = 0.25;
  row.challenger.relaxed_bound = kCostInfinity;  // prints "-"
  row.challenger.best_value = 77;
  row.challenger.optimality_gap = 0.5;
  row.challenger.queue_length = 3;
  row.bound_improvement_pct = 12.5;
  table.rows.push_back(row);
  ComparisonAggregate agg;
  agg.width = 3;
  agg.avg_bound_pct = 12.5;
  agg.median_bound_pct = 12.5;
  agg.avg_time_pct = -8.0;
  table.aggregates.push_back(agg);

  std::ostringstream out;
  write_table_tsv(table, out);
  std::vector<std::string> lines = split_lines(out.str());
  REQUIRE(lines.size() == 5);
  std::vector<std::string> fields = split_tabs(lines[2]);
  REQUIRE(fields.size() == 17);
  CHECK(fields[0] == "hand");
  CHECK(fields[2] == "12");      // baseline bound
  CHECK(fields[5] == "0.2500");  // baseline gap
  CHECK(fields[7] == "-");       // infinite challenger bound
  CHECK(fields[8] == "77");
  CHECK(fields[11] == "3");
  CHECK(fields[12] == "12.50");
  CHECK(fields[13] == "-");

  std::vector<std::string> avg = split_tabs(lines[3]);
  CHECK(avg[12] == "12.50");
  CHECK(avg[14] == "-8.00");
  std::vector<std::string> med = split_tabs(lines[4]);
  CHECK(med[12] == "12.50");
  CHECK(med[14] == "-");
}
