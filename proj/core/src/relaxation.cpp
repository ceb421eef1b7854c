#include "ddsop/relaxation.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>

namespace ddsop {

AssignmentOrdering assignment_ordering(const SopInstance& inst) {
  int n = inst.n();
  struct Key {
    Cost sum = 0;       // total finite transition cost touching the element
    long long cnt = 0;  // number of finite entries in the sum
    int succs = 0;
    Element e = kNoElement;
  };
  std::vector<Key> keys;
  keys.reserve(n);
  for (Element e = 1; e <= n; ++e) {
    Key k;
    k.e = e;
    k.succs = inst.successor_count(e);
    for (Element o = 1; o <= n; ++o) {
      if (o == e) continue;
      if (inst.arc_feasible(e, o)) {
        k.sum += inst.cost(e, o);
        ++k.cnt;
      }
      if (inst.arc_feasible(o, e)) {
        k.sum += inst.cost(o, e);
        ++k.cnt;
      }
    }
    keys.push_back(k);
  }
  // Descending average cost; compare as exact fractions to keep the order
  // independent of floating point. Elements with no finite transition sort as
  // average 0.
  std::sort(keys.begin(), keys.end(), [](const Key& a, const Key& b) {
    long long lhs = a.sum * std::max(b.cnt, 1LL);
    long long rhs = b.sum * std::max(a.cnt, 1LL);
    if (lhs != rhs) return lhs > rhs;
    if (a.succs != b.succs) return a.succs > b.succs;
    return a.e < b.e;
  });
  AssignmentOrdering out;
  out.order.reserve(n);
  for (const Key& k : keys) out.order.push_back(k.e);
  return out;
}

std::vector<NodeId> select_nodes(const Diagram& d, int layer, Element phi) {
  std::vector<NodeId> out;
  for (NodeId u : d.layer(layer)) {
    const DiagramNode& nd = d.node(u);
    if (nd.some_down.test(phi) && !nd.all_down.test(phi)) out.push_back(u);
  }
  return out;
}

namespace {

// Shared mechanics of a node split: partition u's in-arcs by `to_first`,
// copy+filter out-arcs onto every side that received in-arcs, drop u.
std::pair<NodeId, NodeId> split_by(Diagram& d, NodeId u,
                                   const std::function<bool(const DiagramArc&)>& to_first,
                                   const FilterContext& ctx) {
  const int layer = d.node(u).layer;
  const std::vector<ArcId> in = d.node(u).in;
  const std::vector<ArcId> out = d.node(u).out;

  NodeId first = d.add_node(layer, kNoElement);
  NodeId second = d.add_node(layer, kNoElement);
  for (ArcId a : in)
    d.redirect_destination(a, to_first(d.arc(a)) ? first : second);

  auto settle = [&](NodeId side) -> NodeId {
    if (d.node(side).in.empty()) {
      d.remove_node(side);
      return kNoNode;
    }
    d.recompute_node_down(side);
    for (ArcId a : out) {
      const DiagramArc& o = d.arc(a);
      ArcId copy = d.add_arc(side, o.destination, o.label, o.value);
      if (filter_arc(d, copy, ctx) != FilterVerdict::kept) d.remove_arc(copy);
    }
    return side;
  };
  NodeId kept_first = settle(first);
  NodeId kept_second = settle(second);
  d.remove_node(u);
  return {kept_first, kept_second};
}

}  // namespace

std::pair<NodeId, NodeId> split_node(Diagram& d, NodeId u, Element phi,
                                     const FilterContext& ctx) {
  const DiagramNode& nd = d.node(u);
  if (!nd.some_down.test(phi) || nd.all_down.test(phi))
    throw std::logic_error("split requires phi in some_down \\ all_down");
  auto to_first = [&d, phi](const DiagramArc& a) {
    return a.label == phi || d.node(a.origin).all_down.test(phi);
  };
  // When no in-arc certifies phi (it reaches u only through the some_down of
  // merged origins), the partition is one-sided and the surviving node would
  // be indistinguishable from u: splitting cannot resolve phi here, it can
  // only be resolved by first separating the origins. Leave the diagram
  // untouched so the caller can tell nothing happened.
  bool separable = false;
  for (ArcId a : nd.in)
    if (to_first(d.arc(a))) {
      separable = true;
      break;
    }
  if (!separable) return {kNoNode, u};
  return split_by(d, u, to_first, ctx);
}

namespace {

// Lower bound on the transition value into `label` for a node whose incoming
// paths end in one of `in_labels`: the cheapest compatible predecessor.
Cost min_transition_value(const SopInstance& inst, const std::vector<Element>& in_labels,
                          Element label) {
  Cost best = kCostInfinity;
  for (Element s : in_labels) {
    if (s == label || !inst.arc_feasible(s, label)) continue;
    if (inst.must_precede_transitive(label, s)) continue;
    best = std::min(best, inst.cost(s, label));
  }
  return best;
}

std::vector<Element> in_labels_of(const Diagram& d, NodeId u) {
  std::vector<Element> labels;
  for (ArcId a : d.node(u).in) labels.push_back(d.arc(a).label);
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  return labels;
}

// Recomputes values of arcs leaving layer j from each origin's surviving
// in-labels; arcs with no compatible predecessor are removed. Only meaningful
// in width1_origin mode.
void revalue_layer(Diagram& d, int j) {
  const SopInstance& inst = d.instance();
  for (NodeId u : d.layer(j)) {
    std::vector<Element> labels = in_labels_of(d, u);
    std::vector<ArcId> doomed;
    for (ArcId a : d.node(u).out) {
      Cost v = min_transition_value(inst, labels, d.arc(a).label);
      if (v >= kCostInfinity)
        doomed.push_back(a);
      else
        d.arc(a).value = v;
    }
    for (ArcId a : doomed) d.remove_arc(a);
  }
}

bool layer_all_state_exact(const Diagram& d, int j) {
  for (NodeId u : d.layer(j))
    if (!d.node(u).state_exact) return false;
  return true;
}

// Re-filters the arcs leaving layer j once the sweep over j is finished.
// Splitting sharpens down-states, which can expose arcs (created while states
// were still merged) that no rule could see before; origins on layer j never
// change afterwards, so this pass is both final and sound.
std::size_t filter_layer_arcs(Diagram& d, int j, const FilterContext& ctx) {
  std::vector<ArcId> doomed;
  for (NodeId u : d.layer(j))
    for (ArcId a : d.node(u).out)
      if (filter_arc(d, a, ctx) != FilterVerdict::kept) doomed.push_back(a);
  for (ArcId a : doomed) d.remove_arc(a);
  return doomed.size();
}

}  // namespace

RefineStats refine(Diagram& d, int max_width, const AssignmentOrdering& ordering,
                   const FilterContext& ctx, RefineMode mode,
                   std::optional<std::chrono::steady_clock::time_point> deadline) {
  if (max_width < 1) throw std::invalid_argument("max_width must be at least 1");
  RefineStats stats;
  FilterContext local_ctx = ctx;
  local_ctx.up_states_fresh = false;  // up-states go stale on the first split

  for (int j = 2; j <= d.num_node_layers() - 1; ++j) {
    if (deadline && std::chrono::steady_clock::now() >= *deadline) {
      stats.hit_deadline = true;
      break;
    }
    // Layer 2 is always refined to full exactness regardless of the cap: its
    // nodes' mixed label sets always separate (two first elements can never
    // share a label set), and search progress depends on layer 2 offering a
    // state-exact node below the root to branch or peel on.
    const int cap = (j == 2) ? kUnlimitedWidth : max_width;

    while (!layer_all_state_exact(d, j)) {
      if (deadline && std::chrono::steady_clock::now() >= *deadline) {
        stats.hit_deadline = true;
        break;
      }
      bool progressed = false;
      for (Element phi : ordering.order) {
        if (d.layer_width(j) >= cap) break;
        std::vector<NodeId> selected = select_nodes(d, j, phi);
        std::stable_sort(selected.begin(), selected.end(), [&d](NodeId a, NodeId b) {
          return d.node(a).t_star < d.node(b).t_star;
        });
        for (NodeId u : selected) {
          if (d.layer_width(j) >= cap) break;
          if (!d.node_alive(u)) continue;
          auto [with_phi, without_phi] = split_node(d, u, phi, local_ctx);
          // A selected node either separates for real (both sides live: some
          // in-arcs certify phi, some don't) or cannot be split at all.
          // Unseparable nodes must not count as progress: their phi can only
          // be resolved by splits on earlier layers, which the width cap may
          // have ruled out for good.
          if (with_phi != kNoNode && without_phi != kNoNode) {
            progressed = true;
            ++stats.splits;
          }
        }
      }
      // Separation cannot touch nodes whose label sets already agree but whose
      // last element is ambiguous (mixed in-labels). In width-1-origin mode,
      // separate those by in-label so the layer can actually become exact.
      if (mode == RefineMode::width1_origin) {
        for (NodeId u : d.layer(j)) {
          if (d.layer_width(j) >= cap) break;
          if (!d.node_alive(u)) continue;
          const DiagramNode& nd = d.node(u);
          if (nd.some_down != nd.all_down || d.unique_in_label(u) != kNoElement) continue;
          Element lead = kNoElement;
          for (ArcId a : nd.in)
            lead = (lead == kNoElement) ? d.arc(a).label : std::min(lead, d.arc(a).label);
          split_by(
              d, u, [&d, lead](const DiagramArc& a) { return a.label == lead; }, local_ctx);
          progressed = true;
          ++stats.label_splits;
        }
      }
      if (!progressed) break;
    }

    if (mode == RefineMode::width1_origin) revalue_layer(d, j);
    stats.arcs_filtered += filter_layer_arcs(d, j, local_ctx);
    d.prune_dangling();
    d.recompute_states(2);
  }

  d.prune_dangling();
  d.recompute_states(1);
  d.compact();
  return stats;
}

std::optional<Diagram> build_width1_relaxation(const SopInstance& inst,
                                               const RootState& root_state) {
  if (!root_state.feasible(inst)) return std::nullopt;
  int n = inst.n();
  for (Element e = 1; e <= n; ++e)
    if (!root_state.placed.test(e) && inst.successors(e).intersects(root_state.placed))
      return std::nullopt;

  Diagram d(inst, root_state, /*exact_arcs=*/false);
  int m = d.decisions();

  NodeId prev = d.root();
  for (int j = 1; j <= m; ++j) {
    int p = d.global_position(j);
    NodeId next = (j == m) ? d.terminal() : d.add_node(j + 1, kNoElement);
    if (j == 1) {
      Element s = root_state.last;
      for (Element e = 1; e <= n; ++e) {
        if (!position_admissible(inst, root_state.placed, e, p)) continue;
        if (s == kNoElement) {
          d.add_arc(prev, next, e, 0);
        } else {
          if (e == s || !inst.arc_feasible(s, e)) continue;
          if (inst.must_precede_transitive(e, s)) continue;
          d.add_arc(prev, next, e, inst.cost(s, e));
        }
      }
    } else {
      std::vector<Element> labels = in_labels_of(d, prev);
      for (Element e = 1; e <= n; ++e) {
        if (!position_admissible(inst, root_state.placed, e, p)) continue;
        Cost v = min_transition_value(inst, labels, e);
        if (v >= kCostInfinity) continue;
        d.add_arc(prev, next, e, v);
      }
    }
    if (d.node(next).in.empty()) return std::nullopt;
    prev = next;
  }
  d.prune_dangling();
  if (!d.has_terminal_path()) return std::nullopt;
  d.recompute_states(1);
  return d;
}

}  // namespace ddsop
