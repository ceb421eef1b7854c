#include "ddsop/filtering.hpp"

#include <algorithm>
#include <stdexcept>

namespace ddsop {

RrbTables::RrbTables(const SopInstance& inst) {
  int n = inst.n();
  rows_.resize(n + 1);
  for (Element e = 1; e <= n; ++e) {
    auto& row = rows_[e];
    for (Element o = 1; o <= n; ++o) {
      if (o == e) continue;
      Cost best = kCostInfinity;
      if (inst.arc_feasible(e, o)) best = std::min(best, inst.cost(e, o));
      if (inst.arc_feasible(o, e)) best = std::min(best, inst.cost(o, e));
      if (best < kCostInfinity) row.emplace_back(best, o);
    }
    std::sort(row.begin(), row.end());
  }
}

Cost RrbTables::nearest_unvisited(Element e, const LabelSet& visited) const {
  for (const auto& [dist, other] : rows_[e])
    if (!visited.test(other)) return dist;
  return kCostInfinity;
}

Cost rrb_completion(const SopInstance& inst, const RrbTables& rrb, const LabelSet& visited,
                    int keep) {
  if (keep <= 0) return 0;
  std::vector<Cost> vals;
  vals.reserve(static_cast<std::size_t>(inst.n()));
  for (Element e = 1; e <= inst.n(); ++e)
    if (!visited.test(e)) vals.push_back(rrb.nearest_unvisited(e, visited));
  if (static_cast<int>(vals.size()) < keep)
    throw std::logic_error("rrb completion asked for more transitions than elements remain");
  std::nth_element(vals.begin(), vals.begin() + (keep - 1), vals.end());
  Cost sum = 0;
  for (int k = 0; k < keep; ++k) sum = saturating_add(sum, vals[k]);
  return sum;
}

Cost rrb_of_arc(const Diagram& d, ArcId a, const FilterContext& ctx) {
  const DiagramArc& arc = d.arc(a);
  const DiagramNode& origin = d.node(arc.origin);
  const DiagramNode& dest = d.node(arc.destination);
  Cost sofar = saturating_add(d.root_offset(), saturating_add(origin.t_star, arc.value));
  // Transitions still to make after this arc; the element reached last
  // contributes no outgoing transition, hence the -1.
  int remaining = d.num_node_layers() - dest.layer;
  int keep = std::max(0, remaining - 1);
  if (keep == 0 || !ctx.config.rrb_enabled) return sofar;
  if (ctx.rrb == nullptr) throw std::logic_error("rrb enabled but no tables in context");
  LabelSet visited = origin.all_down;
  visited.set(arc.label);
  return saturating_add(sofar, rrb_completion(d.instance(), *ctx.rrb, visited, keep));
}

FilterVerdict filter_arc(const Diagram& d, ArcId a, const FilterContext& ctx) {
  const DiagramArc& arc = d.arc(a);
  const DiagramNode& origin = d.node(arc.origin);
  const SopInstance& inst = d.instance();
  const FilterRules& rules = ctx.config.rules;

  // R1: the label is already sequenced on every path into the origin.
  if (rules.r1 && origin.all_down.test(arc.label)) return FilterVerdict::r1;

  // R2: some required predecessor of the label cannot have been sequenced yet
  // on any path into the origin.
  if (rules.r2 && !inst.predecessors(arc.label).is_subset_of(origin.some_down))
    return FilterVerdict::r2;

  // R3: an element the label must precede is already on every path in.
  if (rules.r3 && inst.successors(arc.label).intersects(origin.all_down))
    return FilterVerdict::r3;

  if (rules.r4) {
    // R4 (counting): if every path into the origin carries as many distinct
    // labels as it has positions, a feasible continuation cannot repeat any of
    // them; taking this arc would.
    int filled = d.placed_count() + origin.layer - 1;
    if (static_cast<int>(origin.some_down.count()) == filled &&
        origin.some_down.test(arc.label))
      return FilterVerdict::r4;
    if (ctx.up_states_fresh) {
      const DiagramNode& dest = d.node(arc.destination);
      if (dest.all_up.test(arc.label)) return FilterVerdict::r4;
      int suffix = d.num_node_layers() - dest.layer;
      if (static_cast<int>(dest.some_up.count()) == suffix && dest.some_up.test(arc.label))
        return FilterVerdict::r4;
    }
  }

  // R5 (bound): the cheapest completion through this arc cannot beat the
  // incumbent.
  if (rules.r5 && ctx.incumbent < kCostInfinity && rrb_of_arc(d, a, ctx) > ctx.incumbent)
    return FilterVerdict::r5;

  return FilterVerdict::kept;
}

std::size_t filter_diagram(Diagram& d, const FilterContext& ctx) {
  d.recompute_states(1);
  d.recompute_up_states();
  FilterContext local = ctx;
  local.up_states_fresh = true;

  std::vector<ArcId> doomed;
  for (int j = 1; j < d.num_node_layers(); ++j)
    for (NodeId u : d.layer(j))
      for (ArcId a : d.node(u).out)
        if (filter_arc(d, a, local) != FilterVerdict::kept) doomed.push_back(a);

  for (ArcId a : doomed) d.remove_arc(a);
  if (!doomed.empty()) {
    d.prune_dangling();
    d.recompute_states(1);
  }
  return doomed.size();
}

}  // namespace ddsop
