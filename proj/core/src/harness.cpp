#include "ddsop/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace ddsop {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json cost_or_null(Cost c) {
  if (c >= kCostInfinity) return nullptr;
  return c;
}

ordered_json event_json(const BoundEvent& ev) {
  ordered_json j;
  j["elapsed_seconds"] = ev.elapsed_seconds;
  j["iteration"] = ev.iteration;
  j["relaxed_bound"] = cost_or_null(ev.relaxed_bound);
  j["best_value"] = cost_or_null(ev.best_value);
  j["queue_length"] = ev.queue_length;
  return j;
}

std::optional<double> average(const std::vector<double>& xs) {
  if (xs.empty()) return std::nullopt;
  double s = 0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

std::optional<double> median(std::vector<double> xs) {
  if (xs.empty()) return std::nullopt;
  std::sort(xs.begin(), xs.end());
  std::size_t mid = xs.size() / 2;
  if (xs.size() % 2 == 1) return xs[mid];
  return (xs[mid - 1] + xs[mid]) / 2.0;
}

}  // namespace

std::string to_string(Algorithm a) {
  return a == Algorithm::bnb ? "bnb" : "pnb";
}

Algorithm algorithm_from_string(const std::string& s) {
  if (s == "bnb") return Algorithm::bnb;
  if (s == "pnb") return Algorithm::pnb;
  throw std::invalid_argument("unknown algorithm '" + s + "' (expected bnb or pnb)");
}

std::string to_string(NodeSelect s) {
  return s == NodeSelect::last_exact ? "last-exact" : "frontier";
}

NodeSelect node_select_from_string(const std::string& s) {
  if (s == "last-exact") return NodeSelect::last_exact;
  if (s == "frontier") return NodeSelect::frontier;
  throw std::invalid_argument("unknown node selection '" + s +
                              "' (expected last-exact or frontier)");
}

RunRecord run_single(const SopInstance& inst, Algorithm algorithm,
                     const HarnessOptions& options) {
  SearchConfig config;
  config.width = options.width;
  config.time_limit_seconds = options.time_limit_seconds;
  config.node_select = options.node_select;
  config.filter = options.filter;
  config.memory_cap = options.memory_cap;

  SearchResult res = algorithm == Algorithm::bnb ? branch_and_bound(inst, config)
                                                 : peel_and_bound(inst, config);

  RunRecord rec;
  rec.instance = inst.name();
  rec.n = inst.n();
  rec.algorithm = algorithm;
  rec.width = options.width;
  rec.time_limit_seconds = options.time_limit_seconds;
  rec.node_select = options.node_select;
  rec.closed = res.proved_optimal;
  rec.best_value = res.best_value;
  rec.relaxed_bound = res.relaxed_bound;
  rec.optimality_gap = optimality_gap(res.relaxed_bound, res.best_value, res.proved_optimal);
  rec.wall_time_seconds = res.elapsed_seconds;
  if (res.proved_optimal) rec.time_to_close_seconds = res.elapsed_seconds;
  rec.iterations = res.iterations;
  rec.queue_length = res.final_queue_length;
  rec.best_sequence = res.best_sequence;
  rec.events = res.events;
  return rec;
}

RunRecord run_single_file(const std::string& path, Algorithm algorithm,
                          const HarnessOptions& options) {
  SopInstance inst = SopInstance::parse_tsplib_file(path);
  return run_single(inst, algorithm, options);
}

void write_record_json(const RunRecord& record, std::ostream& out) {
  ordered_json j;
  j["instance"] = record.instance;
  j["n"] = record.n;
  j["algorithm"] = to_string(record.algorithm);
  j["width"] = record.width;
  j["time_limit_seconds"] =
      std::isfinite(record.time_limit_seconds) ? ordered_json(record.time_limit_seconds)
                                               : ordered_json(nullptr);
  j["node_select"] = to_string(record.node_select);
  j["closed"] = record.closed;
  j["best_value"] = cost_or_null(record.best_value);
  j["relaxed_bound"] = cost_or_null(record.relaxed_bound);
  j["optimality_gap"] = record.optimality_gap;
  j["wall_time_seconds"] = record.wall_time_seconds;
  j["time_to_close_seconds"] = record.time_to_close_seconds
                                   ? ordered_json(*record.time_to_close_seconds)
                                   : ordered_json(nullptr);
  j["iterations"] = record.iterations;
  j["queue_length"] = record.queue_length;
  j["best_sequence"] = record.best_sequence;
  j["event_count"] = record.events.size();
  out << j.dump(2) << "\n";
}

void write_series_ndjson(const RunRecord& record, std::ostream& out) {
  for (const BoundEvent& ev : record.events) out << event_json(ev).dump() << "\n";
}

double percent_improvement_higher_better(double baseline, double challenger) {
  return 100.0 * (challenger - baseline) / baseline;
}

double percent_improvement_lower_better(double baseline, double challenger) {
  return 100.0 * (baseline - challenger) / challenger;
}

double optimality_gap(Cost relaxed_bound, Cost best_value, bool closed) {
  if (closed) return 0.0;
  if (best_value >= kCostInfinity) return 1.0;
  if (best_value == 0) return 0.0;
  return static_cast<double>(best_value - relaxed_bound) / static_cast<double>(best_value);
}

namespace {

ComparisonCell cell_of(const RunRecord& r) {
  ComparisonCell c;
  c.relaxed_bound = r.relaxed_bound;
  if (r.best_value < kCostInfinity) c.best_value = r.best_value;
  c.time_to_close_seconds = r.time_to_close_seconds;
  c.optimality_gap = r.optimality_gap;
  c.queue_length = r.queue_length;
  c.closed = r.closed;
  return c;
}

}  // namespace

ComparisonRow compare_records(const RunRecord& baseline, const RunRecord& challenger) {
  if (baseline.instance != challenger.instance || baseline.width != challenger.width)
    throw std::invalid_argument("comparison rows must pair runs of one instance and width");
  ComparisonRow row;
  row.instance = baseline.instance;
  row.n = baseline.n;
  row.width = baseline.width;
  row.baseline = cell_of(baseline);
  row.challenger = cell_of(challenger);

  const ComparisonCell& b = row.baseline;
  const ComparisonCell& c = row.challenger;
  bool both_open = !b.closed && !c.closed;
  bool both_closed = b.closed && c.closed;

  if (both_open) {
    if (b.relaxed_bound > 0 && c.relaxed_bound < kCostInfinity && b.relaxed_bound < kCostInfinity)
      row.bound_improvement_pct = percent_improvement_higher_better(
          static_cast<double>(b.relaxed_bound), static_cast<double>(c.relaxed_bound));
    if (b.best_value && c.best_value && *c.best_value > 0)
      row.solution_improvement_pct = percent_improvement_lower_better(
          static_cast<double>(*b.best_value), static_cast<double>(*c.best_value));
    if (c.optimality_gap > 0)
      row.gap_improvement_pct =
          percent_improvement_lower_better(b.optimality_gap, c.optimality_gap);
    if (c.queue_length > 0)
      row.queue_improvement_pct = percent_improvement_lower_better(
          static_cast<double>(b.queue_length), static_cast<double>(c.queue_length));
  }
  if (both_closed && b.time_to_close_seconds && c.time_to_close_seconds &&
      *c.time_to_close_seconds > 0)
    row.time_improvement_pct = percent_improvement_lower_better(*b.time_to_close_seconds,
                                                                *c.time_to_close_seconds);
  return row;
}

ComparisonTable run_comparison(const std::vector<std::string>& instance_files,
                               const ComparisonOptions& options) {
  ComparisonTable table;
  table.baseline = options.baseline;
  table.challenger = options.challenger;

  struct Task {
    std::size_t row;
    int width;
    std::string file;
    Algorithm algorithm;
    bool is_baseline;
  };
  std::vector<Task> tasks;
  std::size_t row_count = options.widths.size() * instance_files.size();
  std::vector<RunRecord> base_runs(row_count), chal_runs(row_count);
  std::size_t row = 0;
  for (int width : options.widths) {
    for (const std::string& file : instance_files) {
      tasks.push_back({row, width, file, options.baseline, true});
      tasks.push_back({row, width, file, options.challenger, false});
      ++row;
    }
  }

  int jobs = std::max(1, options.jobs);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      std::size_t k = next.fetch_add(1);
      if (k >= tasks.size()) return;
      const Task& t = tasks[k];
      HarnessOptions run = options.run;
      run.width = t.width;
      RunRecord rec = run_single_file(t.file, t.algorithm, run);
      (t.is_baseline ? base_runs : chal_runs)[t.row] = std::move(rec);
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < jobs; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (std::size_t k = 0; k < row_count; ++k)
    table.rows.push_back(compare_records(base_runs[k], chal_runs[k]));

  for (int width : options.widths) {
    ComparisonAggregate agg;
    agg.width = width;
    std::vector<double> bound, solution, time, gap, queue;
    for (const ComparisonRow& r : table.rows) {
      if (r.width != width) continue;
      if (r.bound_improvement_pct) bound.push_back(*r.bound_improvement_pct);
      if (r.solution_improvement_pct) solution.push_back(*r.solution_improvement_pct);
      if (r.time_improvement_pct) time.push_back(*r.time_improvement_pct);
      if (r.gap_improvement_pct) gap.push_back(*r.gap_improvement_pct);
      if (r.queue_improvement_pct) queue.push_back(*r.queue_improvement_pct);
    }
    agg.avg_bound_pct = average(bound);
    agg.median_bound_pct = median(bound);
    agg.avg_solution_pct = average(solution);
    agg.median_solution_pct = median(solution);
    agg.avg_time_pct = average(time);
    agg.median_time_pct = median(time);
    agg.avg_gap_pct = average(gap);
    agg.median_gap_pct = median(gap);
    agg.avg_queue_pct = average(queue);
    agg.median_queue_pct = median(queue);
    table.aggregates.push_back(agg);
  }
  return table;
}

namespace {

std::string fmt_opt(const std::optional<double>& v) {
  if (!v) return "-";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", *v);
  return buf;
}

std::string fmt_cost(Cost c) {
  return c >= kCostInfinity ? "-" : std::to_string(c);
}

std::string fmt_cell_time(const ComparisonCell& c) {
  if (!c.time_to_close_seconds) return "-";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", *c.time_to_close_seconds);
  return buf;
}

std::string fmt_gap(const ComparisonCell& c) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", c.optimality_gap);
  return buf;
}

void write_cell(std::ostream& out, const ComparisonCell& c) {
  out << '\t' << fmt_cost(c.relaxed_bound) << '\t'
      << (c.best_value ? std::to_string(*c.best_value) : "-") << '\t' << fmt_cell_time(c)
      << '\t' << fmt_gap(c) << '\t' << c.queue_length;
}

}  // namespace

void write_table_tsv(const ComparisonTable& table, std::ostream& out) {
  std::string b = to_string(table.baseline);
  std::string c = to_string(table.challenger);
  for (const ComparisonAggregate& agg : table.aggregates) {
    out << "# width " << agg.width << "\n";
    out << "instance\tn";
    for (const std::string& who : {b, c})
      out << '\t' << who << "_bound\t" << who << "_best\t" << who << "_time\t" << who
          << "_gap\t" << who << "_queue";
    out << "\tbound_impr_pct\tbest_impr_pct\ttime_impr_pct\tgap_impr_pct\tqueue_impr_pct\n";
    for (const ComparisonRow& r : table.rows) {
      if (r.width != agg.width) continue;
      out << r.instance << '\t' << r.n;
      write_cell(out, r.baseline);
      write_cell(out, r.challenger);
      out << '\t' << fmt_opt(r.bound_improvement_pct) << '\t'
          << fmt_opt(r.solution_improvement_pct) << '\t' << fmt_opt(r.time_improvement_pct)
          << '\t' << fmt_opt(r.gap_improvement_pct) << '\t'
          << fmt_opt(r.queue_improvement_pct) << "\n";
    }
    out << "average\t-\t-\t-\t-\t-\t-\t-\t-\t-\t-\t-\t" << fmt_opt(agg.avg_bound_pct) << '\t'
        << fmt_opt(agg.avg_solution_pct) << '\t' << fmt_opt(agg.avg_time_pct) << '\t'
        << fmt_opt(agg.avg_gap_pct) << '\t' << fmt_opt(agg.avg_queue_pct) << "\n";
    out << "median\t-\t-\t-\t-\t-\t-\t-\t-\t-\t-\t-\t" << fmt_opt(agg.median_bound_pct)
        << '\t' << fmt_opt(agg.median_solution_pct) << '\t' << fmt_opt(agg.median_time_pct)
        << '\t' << fmt_opt(agg.median_gap_pct) << '\t' << fmt_opt(agg.median_queue_pct)
        << "\n";
  }
}

}  // namespace ddsop
