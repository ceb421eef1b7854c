// ddsop: sequence ordering solver over relaxed decision diagrams.
//
// Subcommands:
//   solve    run one algorithm on one instance, write record + series files
//   compare  run baseline vs challenger over a directory of instances
//   gen      write a random instance (testing aid)
//
// Exit codes: 0 success, 1 usage error, 2 instance load/parse error, 3 runtime error.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "ddsop/harness.hpp"
#include "ddsop/random_instance.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonOpts {
  int width = 64;
  double time_limit = std::numeric_limits<double>::infinity();
  std::string node_select = "last-exact";
  std::string filter_rules = "R1,R2,R3,R4,R5";
  bool rrb = true;
  std::size_t memory_cap = std::numeric_limits<std::size_t>::max();
  std::string out_dir = ".";
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--width", o.width, "Maximum diagram width")->check(CLI::PositiveNumber);
  cmd->add_option("--time-limit", o.time_limit, "Time limit in seconds");
  cmd->add_option("--node-select", o.node_select, "Peel node choice: last-exact | frontier");
  cmd->add_option("--filter-rules", o.filter_rules,
                  "Comma list of arc filter rules to enable (R1..R5)");
  cmd->add_flag("--rrb,!--no-rrb", o.rrb, "Use the rough relaxed bound (default on)");
  cmd->add_option("--memory-cap", o.memory_cap,
                  "Max materialized diagrams in the peel-and-bound queue");
  cmd->add_option("--out-dir", o.out_dir, "Directory for record/series/table files");
}

ddsop::FilterConfig parse_filter(const CommonOpts& o) {
  ddsop::FilterConfig fc;
  fc.rules = {false, false, false, false, false};
  std::stringstream ss(o.filter_rules);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    if (tok == "R1" || tok == "r1")
      fc.rules.r1 = true;
    else if (tok == "R2" || tok == "r2")
      fc.rules.r2 = true;
    else if (tok == "R3" || tok == "r3")
      fc.rules.r3 = true;
    else if (tok == "R4" || tok == "r4")
      fc.rules.r4 = true;
    else if (tok == "R5" || tok == "r5")
      fc.rules.r5 = true;
    else
      throw std::invalid_argument("--filter-rules: unknown rule '" + tok +
                                  "' (expected R1..R5)");
  }
  fc.rrb_enabled = o.rrb;
  return fc;
}

ddsop::HarnessOptions harness_options(const CommonOpts& o) {
  ddsop::HarnessOptions h;
  h.width = o.width;
  h.time_limit_seconds = o.time_limit;
  h.node_select = ddsop::node_select_from_string(o.node_select);
  h.filter = parse_filter(o);
  h.memory_cap = o.memory_cap;
  return h;
}

std::string stem_of(const std::string& path) { return fs::path(path).stem().string(); }

int run_solve(const std::string& instance_path, const std::string& algorithm,
              const CommonOpts& opts) {
  ddsop::Algorithm alg = ddsop::algorithm_from_string(algorithm);
  ddsop::HarnessOptions h = harness_options(opts);

  ddsop::SopInstance inst = ddsop::SopInstance::parse_tsplib_file(instance_path);
  ddsop::RunRecord rec = ddsop::run_single(inst, alg, h);

  fs::create_directories(opts.out_dir);
  std::string base = stem_of(instance_path) + "." + ddsop::to_string(alg) + ".w" +
                     std::to_string(opts.width);
  {
    std::ofstream out(fs::path(opts.out_dir) / (base + ".record.json"));
    ddsop::write_record_json(rec, out);
  }
  {
    std::ofstream out(fs::path(opts.out_dir) / (base + ".series.ndjson"));
    ddsop::write_series_ndjson(rec, out);
  }

  std::cout << rec.instance << " n=" << rec.n << " algorithm=" << ddsop::to_string(alg)
            << " width=" << rec.width << "\n"
            << "  best=" << (rec.best_value >= ddsop::kCostInfinity
                                 ? std::string("none")
                                 : std::to_string(rec.best_value))
            << " bound=" << rec.relaxed_bound << " gap=" << rec.optimality_gap
            << " closed=" << (rec.closed ? "yes" : "no") << "\n"
            << "  time=" << rec.wall_time_seconds << "s iterations=" << rec.iterations
            << " queue=" << rec.queue_length << "\n";
  return 0;
}

int run_compare(const std::string& dir, const std::vector<int>& widths,
                const std::string& baseline, const std::string& challenger, int jobs,
                const CommonOpts& opts) {
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".sop")
      files.push_back(entry.path().string());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw std::runtime_error("no .sop files in " + dir);

  ddsop::ComparisonOptions copts;
  copts.widths = widths;
  copts.baseline = ddsop::algorithm_from_string(baseline);
  copts.challenger = ddsop::algorithm_from_string(challenger);
  copts.run = harness_options(opts);
  copts.jobs = jobs;

  ddsop::ComparisonTable table = ddsop::run_comparison(files, copts);

  fs::create_directories(opts.out_dir);
  fs::path out_path = fs::path(opts.out_dir) / "comparison.tsv";
  std::ofstream out(out_path);
  ddsop::write_table_tsv(table, out);
  ddsop::write_table_tsv(table, std::cout);
  std::cout << "table written to " << out_path.string() << "\n";
  return 0;
}

int run_gen(int n, double density, std::uint64_t seed, long long max_cost,
            const std::string& out_path) {
  ddsop::SopInstance inst = ddsop::random_instance(n, density, seed, max_cost);
  if (out_path == "-") {
    inst.write_tsplib(std::cout);
  } else {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    inst.write_tsplib(out);
    std::cout << "wrote " << inst.name() << " to " << out_path << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sequence ordering solver over relaxed decision diagrams"};
  app.require_subcommand(1);

  CommonOpts opts;

  auto* solve = app.add_subcommand("solve", "Solve one instance");
  std::string instance_path, algorithm = "pnb";
  solve->add_option("instance", instance_path, "TSPLIB SOP instance file")->required();
  solve->add_option("--algorithm", algorithm, "bnb | pnb")->required();
  add_common(solve, opts);

  auto* compare = app.add_subcommand("compare", "Compare two algorithms over a directory");
  std::string dir, baseline = "bnb", challenger = "pnb";
  std::vector<int> widths = {64};
  int jobs = 1;
  compare->add_option("dir", dir, "Directory of .sop files")->required();
  compare->add_option("--widths", widths, "Diagram widths to sweep")->delimiter(',');
  compare->add_option("--baseline", baseline, "Baseline algorithm (default bnb)");
  compare->add_option("--challenger", challenger, "Challenger algorithm (default pnb)");
  compare->add_option("--jobs", jobs, "Parallel runs")->check(CLI::PositiveNumber);
  add_common(compare, opts);

  auto* gen = app.add_subcommand("gen", "Generate a random instance");
  int gen_n = 10;
  double gen_density = 0.2;
  std::uint64_t gen_seed = 1;
  long long gen_max_cost = 100;
  std::string gen_out = "-";
  gen->add_option("--n", gen_n, "Number of elements")->required()->check(CLI::PositiveNumber);
  gen->add_option("--density", gen_density, "Precedence pair probability in [0,1]");
  gen->add_option("--seed", gen_seed, "RNG seed");
  gen->add_option("--max-cost", gen_max_cost, "Maximum transition cost");
  gen->add_option("--out", gen_out, "Output file ('-' for stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (solve->parsed()) return run_solve(instance_path, algorithm, opts);
    if (compare->parsed()) return run_compare(dir, widths, baseline, challenger, jobs, opts);
    if (gen->parsed()) return run_gen(gen_n, gen_density, gen_seed, gen_max_cost, gen_out);
    return 1;
  } catch (const ddsop::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    // Loading failures (missing file) are instance errors, not runtime faults.
    std::string what = e.what();
    return what.find("cannot open instance file") != std::string::npos ? 2 : 3;
  }
  return 0;
}
