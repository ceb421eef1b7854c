#include "ddsop/restriction.hpp"

#include <algorithm>
#include <stdexcept>

namespace ddsop {

namespace {

struct Record {
  LabelSet set;        // placed plus all expansion labels so far
  Element last;        // label placed by the in-arc (kNoElement only at the root)
  Cost t;              // path value from the subproblem root, offset excluded
  int parent;          // index into the previous layer's records
  Cost arc_value;      // value of the in-arc
  NodeId diagram_node = kNoNode;
};

}  // namespace

RestrictedResult build_restricted(const SopInstance& inst, const RootState& root_state,
                                  int max_width, Cost incumbent, const FilterContext& ctx) {
  if (max_width < 1) throw std::invalid_argument("max_width must be at least 1");
  RestrictedResult result;
  if (!root_state.feasible(inst)) {
    result.diagram.reset();
    return result;
  }

  int n = inst.n();
  int m = n - static_cast<int>(root_state.placed.count());
  if (m < 1) throw std::logic_error("restriction needs at least one remaining decision");

  Diagram d(inst, root_state, /*exact_arcs=*/true);

  bool use_rrb = ctx.config.rrb_enabled && incumbent < kCostInfinity;
  bool use_plain_bound = !ctx.config.rrb_enabled && incumbent < kCostInfinity;
  if (use_rrb && ctx.rrb == nullptr)
    throw std::logic_error("rrb enabled but no tables in context");

  std::vector<std::vector<Record>> levels(m + 1);
  {
    Record root;
    root.set = root_state.placed;
    root.last = root_state.last;
    root.t = 0;
    root.parent = -1;
    root.arc_value = 0;
    root.diagram_node = d.root();
    levels[0].push_back(std::move(root));
  }

  bool trimmed = false;
  Cost best_total = kCostInfinity;
  int best_parent = -1;
  Element best_label = kNoElement;

  for (int j = 1; j <= m; ++j) {
    int p = d.global_position(j);
    int keep = std::max(0, m - j - 1);  // unvisited-sourced transitions after this arc
    std::vector<Record> candidates;
    for (int iu = 0; iu < static_cast<int>(levels[j - 1].size()); ++iu) {
      const Record& u = levels[j - 1][iu];
      for (Element e = 1; e <= n; ++e) {
        if (u.set.test(e)) continue;
        if (!inst.predecessors(e).is_subset_of(u.set)) continue;
        if (p + inst.successor_count(e) > n) continue;
        Cost value = 0;
        if (u.last != kNoElement) {
          if (!inst.arc_feasible(u.last, e)) continue;
          value = inst.cost(u.last, e);
        }
        Cost t = saturating_add(u.t, value);
        if (use_rrb || use_plain_bound) {
          Cost bound = saturating_add(root_state.offset, t);
          if (use_rrb && keep > 0) {
            LabelSet visited = u.set;
            visited.set(e);
            bound = saturating_add(bound, rrb_completion(inst, *ctx.rrb, visited, keep));
          }
          if (bound > incumbent) continue;
        }
        if (j == m) {
          Cost total = t;
          if (total < best_total) {
            best_total = total;
            best_parent = iu;
            best_label = e;
          }
          d.add_arc(u.diagram_node, d.terminal(), e, value);
          continue;
        }
        Record child;
        child.set = u.set;
        child.set.set(e);
        child.last = e;
        child.t = t;
        child.parent = iu;
        child.arc_value = value;
        candidates.push_back(std::move(child));
      }
    }
    if (j == m) break;

    if (static_cast<int>(candidates.size()) > max_width) {
      // Greedy trim: keep the cheapest partial paths; ties keep the smaller
      // state, then the earlier insertion.
      std::vector<int> order(candidates.size());
      for (int k = 0; k < static_cast<int>(order.size()); ++k) order[k] = k;
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (candidates[a].t != candidates[b].t) return candidates[a].t < candidates[b].t;
        return candidates[a].last < candidates[b].last;
      });
      order.resize(max_width);
      std::sort(order.begin(), order.end());  // keep insertion order among survivors
      std::vector<Record> kept;
      kept.reserve(max_width);
      for (int k : order) kept.push_back(std::move(candidates[k]));
      candidates = std::move(kept);
      trimmed = true;
    }
    if (candidates.empty()) {
      result.diagram.reset();
      result.is_exact = !trimmed;
      return result;
    }
    for (Record& c : candidates) {
      c.diagram_node = d.add_node(j + 1, c.last);
      d.add_arc(levels[j - 1][c.parent].diagram_node, c.diagram_node, c.last, c.arc_value);
    }
    levels[j] = std::move(candidates);
  }

  result.is_exact = !trimmed;
  if (best_total >= kCostInfinity) {
    result.diagram.reset();
    return result;
  }

  result.best_value = saturating_add(root_state.offset, best_total);
  std::vector<Element> completion = {best_label};
  for (int j = m - 1, idx = best_parent; j >= 1; --j) {
    completion.push_back(levels[j][idx].last);
    idx = levels[j][idx].parent;
  }
  std::reverse(completion.begin(), completion.end());
  result.best_sequence = root_state.prefix;
  result.best_sequence.insert(result.best_sequence.end(), completion.begin(), completion.end());

  if (inst.sequence_cost(result.best_sequence) != result.best_value)
    throw std::logic_error("restricted witness does not re-cost to its value");

  d.prune_dangling();
  d.recompute_states(1);
  result.diagram = std::move(d);
  return result;
}

}  // namespace ddsop
