#pragma once

#include <optional>

#include "ddsop/filtering.hpp"

namespace ddsop {

struct RestrictedResult {
  // The restricted diagram (a tree: every node has one in-arc, so all nodes
  // are exact). Absent when no feasible completion survived.
  std::optional<Diagram> diagram;
  Cost best_value = kCostInfinity;        // root offset included
  std::vector<Element> best_sequence;     // full sequence, prefix included
  // True when no width trim happened: the restriction explored everything the
  // bound prunes left, so the subproblem is closed. Conservatively false after
  // any width discard.
  bool is_exact = true;
};

// Top-down greedy restriction of the subproblem at `root_state`: exact
// feasibility at every expansion (all predecessors placed, successor capacity,
// finite transitions), candidate arcs trimmed by the rough relaxed bound
// against `incumbent`, layers over `max_width` trimmed by discarding the
// largest t_star (ties: larger state, then later insertion).
RestrictedResult build_restricted(const SopInstance& inst, const RootState& root_state,
                                  int max_width, Cost incumbent, const FilterContext& ctx);

}  // namespace ddsop
