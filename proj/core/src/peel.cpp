#include "ddsop/peel.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace ddsop {

namespace {

// An arc waiting to be attached inside the peeled diagram: its origin already
// lives there, its destination is still a residual node id.
struct CrossArc {
  NodeId peeled_origin;
  NodeId residual_destination;
  Element label;
  Cost value;
};

}  // namespace

Diagram peel(Diagram& d, NodeId u, const FilterContext& ctx) {
  if (u == d.terminal()) throw std::logic_error("cannot peel the terminal");
  if (!d.is_state_exact_node(u)) throw std::logic_error("peel requires a state-exact node");

  const int u_layer = d.node(u).layer;
  RootState rs = d.subproblem_root(u);
  Diagram peeled(d.instance(), std::move(rs), d.exact_arcs());

  // Move u (with its out-arcs) into the peeled diagram as its root.
  std::vector<CrossArc> moved;
  for (ArcId a : d.node(u).out) {
    const DiagramArc& arc = d.arc(a);
    moved.push_back({peeled.root(), arc.destination, arc.label, arc.value});
  }
  std::vector<NodeId> lost_in;
  for (const CrossArc& c : moved) lost_in.push_back(c.residual_destination);
  std::sort(lost_in.begin(), lost_in.end());
  lost_in.erase(std::unique(lost_in.begin(), lost_in.end()), lost_in.end());
  d.remove_node(u);

  // Refresh residual states below the cut so the copy walk and the later
  // refiltering both see paths-through-u removed.
  d.recompute_states(u_layer + 1);

  // Walk layer by layer, copying every residual node reached from the peeled
  // side. Copied out-arcs become the next layer's cross arcs; the originals
  // stay with the residual node.
  std::vector<CrossArc> cross = std::move(moved);
  for (int k = u_layer + 1; k <= d.num_node_layers() && !cross.empty(); ++k) {
    std::map<NodeId, std::vector<CrossArc>> by_dest;
    for (const CrossArc& c : cross) by_dest[c.residual_destination].push_back(c);
    cross.clear();

    for (auto& [m, arcs] : by_dest) {
      NodeId copy = (m == d.terminal()) ? peeled.terminal()
                                        : peeled.add_node(k - u_layer + 1, d.node(m).state);
      for (const CrossArc& c : arcs) {
        ArcId a = peeled.add_arc(c.peeled_origin, copy, c.label, c.value);
        if (filter_arc(peeled, a, ctx) != FilterVerdict::kept) peeled.remove_arc(a);
      }
      if (copy == peeled.terminal()) continue;
      if (peeled.node(copy).in.empty()) {
        peeled.remove_node(copy);
        continue;
      }
      peeled.recompute_node_down(copy);
      for (ArcId a : d.node(m).out) {
        const DiagramArc& arc = d.arc(a);
        cross.push_back({copy, arc.destination, arc.label, arc.value});
      }
    }
  }

  // Only now refilter the residual out-arcs of the nodes that lost their
  // in-arc from u: their residual label sets sharpened, but the copy walk
  // above had to see the arcs first (they may still be valid through u).
  for (NodeId w : lost_in) {
    if (!d.node_alive(w) || d.node(w).in.empty()) continue;  // dangling, pruned below
    std::vector<ArcId> doomed;
    for (ArcId a : d.node(w).out)
      if (filter_arc(d, a, ctx) != FilterVerdict::kept) doomed.push_back(a);
    for (ArcId a : doomed) d.remove_arc(a);
  }

  d.prune_dangling();
  d.recompute_states(1);
  peeled.prune_dangling();
  peeled.recompute_states(1);
  return peeled;
}

}  // namespace ddsop
