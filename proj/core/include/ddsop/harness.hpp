#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "ddsop/search.hpp"

namespace ddsop {

enum class Algorithm { bnb, pnb };

std::string to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& s);
std::string to_string(NodeSelect s);
NodeSelect node_select_from_string(const std::string& s);

// Everything a single solver run needs beyond the instance itself.
struct HarnessOptions {
  int width = 64;
  double time_limit_seconds = std::numeric_limits<double>::infinity();
  NodeSelect node_select = NodeSelect::last_exact;
  FilterConfig filter;
  std::size_t memory_cap = std::numeric_limits<std::size_t>::max();
};

// A completed run, ready for serialization.
struct RunRecord {
  std::string instance;
  int n = 0;
  Algorithm algorithm = Algorithm::bnb;
  int width = 0;
  double time_limit_seconds = 0.0;
  NodeSelect node_select = NodeSelect::last_exact;
  bool closed = false;
  Cost best_value = kCostInfinity;     // kCostInfinity = no solution found
  Cost relaxed_bound = 0;
  double optimality_gap = 0.0;         // 0 when closed, (BS-RB)/BS open, 1 when no BS
  double wall_time_seconds = 0.0;
  std::optional<double> time_to_close_seconds;  // set only when closed
  std::uint64_t iterations = 0;
  std::size_t queue_length = 0;
  std::vector<Element> best_sequence;
  std::vector<BoundEvent> events;
};

RunRecord run_single(const SopInstance& inst, Algorithm algorithm,
                     const HarnessOptions& options);
// Loads a TSPLIB SOP file first; propagates ParseError / runtime_error.
RunRecord run_single_file(const std::string& path, Algorithm algorithm,
                          const HarnessOptions& options);

// Record as a single JSON object with a fixed, documented field order.
void write_record_json(const RunRecord& record, std::ostream& out);
// Bound-event series, one JSON object per line; the final line restates the
// record's closing bounds and queue length.
void write_series_ndjson(const RunRecord& record, std::ostream& out);

// Percent improvement of challenger over baseline for quantities where higher
// is better: 100 * (challenger - baseline) / baseline.
double percent_improvement_higher_better(double baseline, double challenger);
// Same for quantities where lower is better: 100 * (baseline - challenger) / challenger.
double percent_improvement_lower_better(double baseline, double challenger);
// 0 when closed; (best - bound) / best when open; 1.0 when open with no solution.
double optimality_gap(Cost relaxed_bound, Cost best_value, bool closed);

struct ComparisonCell {
  Cost relaxed_bound = 0;
  std::optional<Cost> best_value;
  std::optional<double> time_to_close_seconds;
  double optimality_gap = 0.0;
  std::size_t queue_length = 0;
  bool closed = false;
};

// One instance at one width: baseline vs challenger plus the improvement
// columns. Bound/solution/gap/queue improvements are defined only when both
// runs stayed open; the time improvement only when both closed.
struct ComparisonRow {
  std::string instance;
  int n = 0;
  int width = 0;
  ComparisonCell baseline, challenger;
  std::optional<double> bound_improvement_pct;
  std::optional<double> solution_improvement_pct;
  std::optional<double> time_improvement_pct;
  std::optional<double> gap_improvement_pct;
  std::optional<double> queue_improvement_pct;
};

struct ComparisonAggregate {
  int width = 0;
  std::optional<double> avg_bound_pct, median_bound_pct;
  std::optional<double> avg_solution_pct, median_solution_pct;
  std::optional<double> avg_time_pct, median_time_pct;
  std::optional<double> avg_gap_pct, median_gap_pct;
  std::optional<double> avg_queue_pct, median_queue_pct;
};

struct ComparisonTable {
  Algorithm baseline = Algorithm::bnb;
  Algorithm challenger = Algorithm::pnb;
  std::vector<ComparisonRow> rows;            // grouped by width, file order inside
  std::vector<ComparisonAggregate> aggregates;  // one per width
};

struct ComparisonOptions {
  std::vector<int> widths = {64};
  Algorithm baseline = Algorithm::bnb;
  Algorithm challenger = Algorithm::pnb;
  HarnessOptions run;  // width field ignored; taken from `widths`
  int jobs = 1;
};

ComparisonRow compare_records(const RunRecord& baseline, const RunRecord& challenger);
ComparisonTable run_comparison(const std::vector<std::string>& instance_files,
                               const ComparisonOptions& options);
// Tab-separated blocks per width: per-instance rows then avg/median rows;
// undefined entries print "-".
void write_table_tsv(const ComparisonTable& table, std::ostream& out);

}  // namespace ddsop
