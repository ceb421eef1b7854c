#pragma once

#include <vector>

#include "ddsop/diagram.hpp"

namespace ddsop {

// Per-element nearest-neighbor tables for the rough relaxed bound: for each
// element, the other elements sorted by min(c(e,o), c(o,e)) ascending,
// infeasible-in-both-directions pairs excluded.
class RrbTables {
 public:
  explicit RrbTables(const SopInstance& inst);

  // Cheapest symmetric distance from e to any element outside `visited`
  // (kCostInfinity if none). `visited` must not be all of 1..n minus e... the
  // caller guarantees at least one candidate exists or accepts the sentinel.
  Cost nearest_unvisited(Element e, const LabelSet& visited) const;

  const std::vector<std::pair<Cost, Element>>& sorted_row(Element e) const {
    return rows_[e];
  }

 private:
  std::vector<std::vector<std::pair<Cost, Element>>> rows_;
};

// Which removal rules an arc filter pass applies. All on by default.
struct FilterRules {
  bool r1 = true;  // label already on every path into the origin
  bool r2 = true;  // a required predecessor of the label can still be missing
  bool r3 = true;  // a successor of the label is already on every path in
  bool r4 = true;  // counting: all continuations would repeat the label
  bool r5 = true;  // bound: rough relaxed bound through the arc beats nothing
};

struct FilterConfig {
  FilterRules rules;
  bool rrb_enabled = true;  // when false, R5 degrades to the plain path-cost check
};

struct FilterContext {
  const RrbTables* rrb = nullptr;     // required when config.rrb_enabled
  Cost incumbent = kCostInfinity;     // current best solution value (global)
  FilterConfig config;
  bool up_states_fresh = false;       // enables the up-direction parts of R4
};

enum class FilterVerdict { kept, r1, r2, r3, r4, r5 };

// Decides whether arc `a` can be removed without losing any improving feasible
// path. Pure: same diagram + context => same verdict. Reads origin down-states
// (and destination up-states when ctx.up_states_fresh).
FilterVerdict filter_arc(const Diagram& d, ArcId a, const FilterContext& ctx);

// Rough relaxed bound of the cheapest full solution using arc `a`:
// root offset + t_star(origin) + value(a) + a completion estimate that sums
// the smallest nearest-unvisited distances over the remaining transitions.
// Never exceeds the true cheapest feasible completion through the arc.
Cost rrb_of_arc(const Diagram& d, ArcId a, const FilterContext& ctx);

// Completion part only: sum of the `keep` smallest nearest-unvisited values
// over elements outside `visited`. kCostInfinity if forced through a dead end.
Cost rrb_completion(const SopInstance& inst, const RrbTables& rrb, const LabelSet& visited,
                    int keep);

// One full sweep: refreshes down- and up-states, applies filter_arc to every
// live arc (removals deferred to the end of the scan), prunes danglers and
// recomputes states. Returns the number of arcs removed.
std::size_t filter_diagram(Diagram& d, const FilterContext& ctx);

}  // namespace ddsop
