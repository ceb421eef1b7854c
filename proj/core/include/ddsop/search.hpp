#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <optional>

#include "ddsop/peel.hpp"
#include "ddsop/relaxation.hpp"
#include "ddsop/restriction.hpp"

namespace ddsop {

enum class NodeSelect { last_exact, frontier };

struct SearchConfig {
  int width = 64;
  double time_limit_seconds = std::numeric_limits<double>::infinity();
  NodeSelect node_select = NodeSelect::last_exact;
  FilterConfig filter;
  // Peel-and-bound only: max queue entries allowed to hold a materialized
  // diagram; the rest are demoted to root states and rebuilt on pop.
  std::size_t memory_cap = std::numeric_limits<std::size_t>::max();
  // Called whenever the reported bounds change, and once at termination.
  std::function<void(const struct BoundEvent&)> on_event;
};

// One row of the solver log: monotone bounds plus queue pressure.
struct BoundEvent {
  double elapsed_seconds = 0.0;
  std::uint64_t iteration = 0;
  Cost relaxed_bound = 0;          // best proven lower bound so far
  Cost best_value = kCostInfinity; // incumbent (kCostInfinity before the first)
  std::size_t queue_length = 0;
};

// A subproblem awaiting processing: its lower bound, a FIFO tiebreak stamp,
// the root state, and (peel-and-bound) the materialized diagram if not demoted.
struct QueueEntry {
  Cost priority = 0;
  std::uint64_t sequence = 0;
  RootState state;
  std::optional<Diagram> diagram;
};

// Min-priority queue over (priority, sequence); allows demoting from the
// expensive end. Keys mirror each entry's (priority, sequence).
using SearchQueue = std::map<std::pair<Cost, std::uint64_t>, QueueEntry>;

// The entry that would be popped next: minimum priority, FIFO among ties.
// Throws std::out_of_range on an empty queue.
const QueueEntry& select_diagram(const SearchQueue& q);

// Demotes materialized diagrams (largest priority first) until at most `cap`
// remain materialized. Returns the number demoted.
std::size_t memory_fallback(SearchQueue& q, std::size_t cap);

// All nodes of the deepest layer whose every node (on layers 2..k) is exact
// with an unambiguous last element; the terminal-adjacent layer when the whole
// diagram is exact. Every root-terminal path crosses exactly one cutset node.
std::vector<NodeId> exact_cutset(const Diagram& d);

// Picks the exact node to peel on the current shortest path:
//  - last_exact: the first node along the path with a non-exact child;
//  - frontier: the deepest exact node on the path (never the terminal).
// Falls back to the root when nothing deeper qualifies.
NodeId select_exact_node(const Diagram& d, NodeSelect mode);

struct SearchResult {
  Cost best_value = kCostInfinity;
  std::vector<Element> best_sequence;
  Cost relaxed_bound = 0;         // best proven lower bound at termination
  bool proved_optimal = false;    // queue exhausted
  bool timed_out = false;
  std::uint64_t iterations = 0;
  std::size_t final_queue_length = 0;
  double elapsed_seconds = 0.0;
  std::vector<BoundEvent> events;
};

// Classic decision-diagram branch-and-bound: pop the best subproblem, run a
// restricted pass for incumbents, and unless it closed the subproblem build a
// width-1-origin relaxation, refine it, and enqueue its exact cutset.
SearchResult branch_and_bound(const SopInstance& inst, const SearchConfig& config);

// Peel-and-bound: keep whole relaxed diagrams in the queue; pop the weakest
// bound, peel at a selected exact node, re-enqueue the residual, run the
// restricted pass at the peeled root, and refine + enqueue the peeled diagram.
SearchResult peel_and_bound(const SopInstance& inst, const SearchConfig& config);

}  // namespace ddsop
