#pragma once

#include <chrono>
#include <optional>
#include <utility>

#include "ddsop/filtering.hpp"

namespace ddsop {

// Static order in which elements are used to separate relaxed nodes: sorted by
// descending average finite transition cost (to or from the element), ties by
// descending number of elements it must precede, then ascending id. Computed
// once per instance.
struct AssignmentOrdering {
  std::vector<Element> order;
};

AssignmentOrdering assignment_ordering(const SopInstance& inst);

// Nodes of layer j worth splitting on phi: phi in some_down \ all_down,
// returned in stored (id) order.
std::vector<NodeId> select_nodes(const Diagram& d, int layer, Element phi);

// Splits u into (with-phi, without-phi): in-arcs a go to the first node when
// phi ∈ all_down(origin(a)) ∪ {label(a)}, else the second; out-arcs are copied
// to both and filtered. u is removed and down-states of the two nodes are
// recomputed; deeper layers are left stale for the caller. When no in-arc
// certifies phi (phi reaches u only through the some_down of merged origins)
// the split cannot resolve anything: the diagram is left untouched and
// {kNoNode, u} is returned. Throws std::logic_error unless
// phi ∈ some_down(u) \ all_down(u).
std::pair<NodeId, NodeId> split_node(Diagram& d, NodeId u, Element phi,
                                     const FilterContext& ctx);

enum class RefineMode {
  exact_arc,     // arc values are true transition costs; no revaluation
  width1_origin  // arc values are minima over in-labels; revalue after each layer
};

struct RefineStats {
  int splits = 0;          // non-trivial splits performed
  int label_splits = 0;    // in-label separations of mixed exact nodes
  std::size_t arcs_filtered = 0;
  bool hit_deadline = false;
};

// Bottom of the bound machinery: separation-based refinement. Sweeps layers
// top-down; on each layer, repeatedly walks the assignment ordering and splits
// selected nodes (ascending t_star) until the layer is exact, the width cap is
// reached, or a full pass makes no progress. Layer 2 is always refined to full
// exactness regardless of the cap (search progress depends on a state-exact
// node below the root existing; the layer's width stays bounded by n). In
// width1_origin mode arc values out of a swept layer are recomputed from the
// surviving in-labels, and mixed-label nodes with equal label sets are
// separated by in-label so deeper layers can also reach exactness when the
// cap allows. After each layer the arcs leaving it are re-filtered (splits
// sharpen label sets, exposing arcs no rule could see at build time), then
// states below it are recomputed. An optional deadline stops the sweep at
// layer granularity; the partially refined diagram is still a valid
// relaxation.
RefineStats refine(Diagram& d, int max_width, const AssignmentOrdering& ordering,
                   const FilterContext& ctx, RefineMode mode,
                   std::optional<std::chrono::steady_clock::time_point> deadline = {});

// Width-1 starting relaxation: one node per layer, one arc per still-plausible
// label between consecutive layers, arc values = min transition cost over the
// origin's in-labels. nullopt when the subproblem is infeasible.
std::optional<Diagram> build_width1_relaxation(const SopInstance& inst,
                                               const RootState& root_state);

inline constexpr int kUnlimitedWidth = std::numeric_limits<int>::max();

}  // namespace ddsop
