#include "ddsop/diagram.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace ddsop {

RootState RootState::global(const SopInstance& inst) {
  RootState rs;
  rs.placed = LabelSet(inst.n() + 1);
  return rs;
}

bool RootState::feasible(const SopInstance& inst) const {
  if (prefix.size() != placed.count()) return false;
  LabelSet seen(inst.n() + 1);
  Element prev = kNoElement;
  for (Element e : prefix) {
    if (e < 1 || e > inst.n() || seen.test(e)) return false;
    // Every predecessor of e must already be in the prefix: anything outside
    // it can only be sequenced later, which would violate the precedence.
    if (!inst.predecessors(e).is_subset_of(seen)) return false;
    if (prev != kNoElement && !inst.arc_feasible(prev, e)) return false;
    seen.set(e);
    prev = e;
  }
  if (seen != placed) return false;
  if ((prefix.empty() ? kNoElement : prefix.back()) != last) return false;
  return true;
}

Diagram::Diagram(const SopInstance& inst, RootState root_state, bool exact_arcs)
    : instance_(&inst), root_state_(std::move(root_state)), exact_arcs_(exact_arcs) {
  if (root_state_.placed.size() != static_cast<std::size_t>(inst.n() + 1))
    throw std::logic_error("root state sized for a different instance");
  int m = inst.n() - placed_count();
  if (m < 1) throw std::logic_error("diagram needs at least one remaining decision");
  layers_.resize(m + 2);  // [0] unused, node layers 1..m+1
  root_ = add_node(1, root_state_.last);
  terminal_ = add_node(m + 1, kNoElement);
  recompute_states(1);
}

DiagramNode& Diagram::node(NodeId u) {
  check_node(u);
  return nodes_[u];
}
const DiagramNode& Diagram::node(NodeId u) const {
  check_node(u);
  return nodes_[u];
}
DiagramArc& Diagram::arc(ArcId a) {
  check_arc(a);
  return arcs_[a];
}
const DiagramArc& Diagram::arc(ArcId a) const {
  check_arc(a);
  return arcs_[a];
}

bool Diagram::node_alive(NodeId u) const {
  return u >= 0 && u < static_cast<NodeId>(nodes_.size()) && nodes_[u].alive;
}

void Diagram::check_node(NodeId u) const {
  if (!node_alive(u)) throw std::out_of_range("unknown node id " + std::to_string(u));
}
void Diagram::check_arc(ArcId a) const {
  if (a < 0 || a >= static_cast<ArcId>(arcs_.size()) || !arcs_[a].alive)
    throw std::out_of_range("unknown arc id " + std::to_string(a));
}

std::vector<NodeId> Diagram::layer(int j) const {
  if (j < 1 || j > num_node_layers()) throw std::out_of_range("no such layer");
  return layers_[j];
}

int Diagram::layer_width(int j) const {
  if (j < 1 || j > num_node_layers()) throw std::out_of_range("no such layer");
  return static_cast<int>(layers_[j].size());
}

int Diagram::width() const {
  int w = 0;
  for (int j = 2; j < num_node_layers(); ++j) w = std::max(w, layer_width(j));
  return w;
}

std::size_t Diagram::node_count() const {
  std::size_t c = 0;
  for (const auto& nd : nodes_)
    if (nd.alive) ++c;
  return c;
}

std::size_t Diagram::arc_count() const {
  std::size_t c = 0;
  for (const auto& a : arcs_)
    if (a.alive) ++c;
  return c;
}

NodeId Diagram::add_node(int layer, Element state) {
  if (layer < 1 || layer >= static_cast<int>(layers_.size()))
    throw std::out_of_range("layer out of range");
  DiagramNode nd;
  nd.layer = layer;
  nd.state = state;
  int bits = instance_->n() + 1;
  nd.some_down = nd.all_down = nd.some_up = nd.all_up = LabelSet(bits);
  nd.t_star = kCostInfinity;
  nd.alive = true;
  NodeId id = static_cast<NodeId>(nodes_.size());
  nodes_.push_back(std::move(nd));
  layers_[layer].push_back(id);
  return id;
}

ArcId Diagram::add_arc(NodeId origin, NodeId destination, Element label, Cost value) {
  check_node(origin);
  check_node(destination);
  if (nodes_[origin].layer + 1 != nodes_[destination].layer)
    throw std::logic_error("arc must connect consecutive layers");
  if (label < 1 || label > instance_->n()) throw std::logic_error("bad arc label");
  if (value < 0) throw std::logic_error("negative arc value");
  DiagramArc a;
  a.origin = origin;
  a.destination = destination;
  a.label = label;
  a.value = value;
  a.alive = true;
  ArcId id = static_cast<ArcId>(arcs_.size());
  arcs_.push_back(a);
  nodes_[origin].out.push_back(id);
  nodes_[destination].in.push_back(id);
  return id;
}

void Diagram::remove_arc(ArcId a) {
  check_arc(a);
  DiagramArc& arc = arcs_[a];
  auto& out = nodes_[arc.origin].out;
  out.erase(std::find(out.begin(), out.end(), a));
  auto& in = nodes_[arc.destination].in;
  in.erase(std::find(in.begin(), in.end(), a));
  arc.alive = false;
}

void Diagram::remove_node(NodeId u) {
  check_node(u);
  DiagramNode& nd = nodes_[u];
  for (ArcId a : std::vector<ArcId>(nd.in)) remove_arc(a);
  for (ArcId a : std::vector<ArcId>(nd.out)) remove_arc(a);
  auto& lay = layers_[nd.layer];
  lay.erase(std::find(lay.begin(), lay.end(), u));
  nd.alive = false;
}

void Diagram::redirect_destination(ArcId a, NodeId new_destination) {
  check_arc(a);
  check_node(new_destination);
  DiagramArc& arc = arcs_[a];
  if (nodes_[new_destination].layer != nodes_[arc.destination].layer)
    throw std::logic_error("redirect must stay on the same layer");
  auto& in = nodes_[arc.destination].in;
  in.erase(std::find(in.begin(), in.end(), a));
  arc.destination = new_destination;
  nodes_[new_destination].in.push_back(a);
}

void Diagram::recompute_node_down(NodeId id) {
  check_node(id);
  if (id == root_) {
    DiagramNode& r = nodes_[root_];
    r.some_down = r.all_down = root_state_.placed;
    r.t_star = 0;
    r.state = root_state_.last;
    r.exact = r.state_exact = true;
    return;
  }
  DiagramNode& nd = nodes_[id];
  nd.t_star = kCostInfinity;
  bool first = true;
  bool parents_exact = true, parents_state_exact = true;
  Element label = kNoElement;
  bool label_unique = true;
  for (ArcId aid : nd.in) {
    const DiagramArc& a = arcs_[aid];
    const DiagramNode& o = nodes_[a.origin];
    nd.t_star = std::min(nd.t_star, saturating_add(o.t_star, a.value));
    if (first) {
      nd.some_down = o.some_down;
      nd.some_down.set(a.label);
      nd.all_down = o.all_down;
      nd.all_down.set(a.label);
      label = a.label;
      first = false;
    } else {
      LabelSet with = o.some_down;
      with.set(a.label);
      nd.some_down |= with;
      with = o.all_down;
      with.set(a.label);
      nd.all_down &= with;
      if (a.label != label) label_unique = false;
    }
    parents_exact &= o.exact;
    parents_state_exact &= o.state_exact;
  }
  if (first) {  // no in-arcs: dangling, prune_dangling will take it
    nd.some_down.reset();
    nd.all_down.reset();
    nd.exact = nd.state_exact = false;
    nd.state = kNoElement;
    return;
  }
  // Path-independence alone is not enough for exactness: arc filtering can go
  // stale when later pruning sharpens an origin's all_down, leaving paths that
  // revisit an element. Such a path contributes fewer distinct labels than
  // placements, so requiring one set bit per placement rejects exactly the
  // nodes whose state no longer describes a real prefix.
  const std::size_t placements =
      root_state_.placed.count() + static_cast<std::size_t>(nd.layer - 1);
  nd.exact = parents_exact && nd.some_down == nd.all_down && nd.all_down.count() == placements;
  nd.state_exact = nd.exact && parents_state_exact && label_unique;
  nd.state = label_unique ? label : kNoElement;
}

void Diagram::recompute_states(int from_layer) {
  if (from_layer <= 1) {
    recompute_node_down(root_);
    from_layer = 2;
  }
  for (int j = from_layer; j <= num_node_layers(); ++j)
    for (NodeId id : layers_[j]) recompute_node_down(id);
}

void Diagram::recompute_up_states() {
  for (int j = num_node_layers(); j >= 1; --j) {
    for (NodeId id : layers_[j]) {
      DiagramNode& nd = nodes_[id];
      bool first = true;
      for (ArcId aid : nd.out) {
        const DiagramArc& a = arcs_[aid];
        const DiagramNode& dnode = nodes_[a.destination];
        LabelSet with = dnode.some_up;
        with.set(a.label);
        if (first) {
          nd.some_up = with;
          nd.all_up = dnode.all_up;
          nd.all_up.set(a.label);
          first = false;
        } else {
          nd.some_up |= with;
          with = dnode.all_up;
          with.set(a.label);
          nd.all_up &= with;
        }
      }
      if (first) {
        nd.some_up.reset();
        nd.all_up.reset();
      }
    }
  }
}

bool Diagram::is_exact_node(NodeId u) const {
  check_node(u);
  return nodes_[u].exact;
}

bool Diagram::is_state_exact_node(NodeId u) const {
  check_node(u);
  return nodes_[u].state_exact;
}

void Diagram::prune_dangling() {
  bool changed = true;
  while (changed) {
    changed = false;
    for (int j = 2; j <= num_node_layers() - 1; ++j) {
      for (NodeId id : std::vector<NodeId>(layers_[j])) {
        const DiagramNode& nd = nodes_[id];
        if (nd.alive && (nd.in.empty() || nd.out.empty())) {
          remove_node(id);
          changed = true;
        }
      }
    }
  }
}

void Diagram::compact() {
  std::vector<NodeId> node_map(nodes_.size(), kNoNode);
  std::vector<DiagramNode> new_nodes;
  new_nodes.reserve(node_count());
  for (NodeId id = 0; id < static_cast<NodeId>(nodes_.size()); ++id) {
    if (!nodes_[id].alive) continue;
    node_map[id] = static_cast<NodeId>(new_nodes.size());
    new_nodes.push_back(std::move(nodes_[id]));
  }
  std::vector<ArcId> arc_map(arcs_.size(), kNoArc);
  std::vector<DiagramArc> new_arcs;
  new_arcs.reserve(arc_count());
  for (ArcId id = 0; id < static_cast<ArcId>(arcs_.size()); ++id) {
    if (!arcs_[id].alive) continue;
    arc_map[id] = static_cast<ArcId>(new_arcs.size());
    new_arcs.push_back(arcs_[id]);
  }
  for (DiagramArc& a : new_arcs) {
    a.origin = node_map[a.origin];
    a.destination = node_map[a.destination];
  }
  for (DiagramNode& nd : new_nodes) {
    for (ArcId& a : nd.in) a = arc_map[a];
    for (ArcId& a : nd.out) a = arc_map[a];
  }
  for (auto& lay : layers_) {
    std::vector<NodeId> next;
    next.reserve(lay.size());
    for (NodeId id : lay)
      if (node_map[id] != kNoNode) next.push_back(node_map[id]);
    std::sort(next.begin(), next.end());
    lay = std::move(next);
  }
  root_ = node_map[root_];
  terminal_ = node_map[terminal_];
  nodes_ = std::move(new_nodes);
  arcs_ = std::move(new_arcs);
}

std::optional<ShortestPath> Diagram::shortest_path() const {
  std::vector<Cost> dist(nodes_.size(), kCostInfinity);
  dist[root_] = 0;
  for (int j = 1; j < num_node_layers(); ++j) {
    for (NodeId id : layers_[j]) {
      if (dist[id] >= kCostInfinity) continue;
      for (ArcId aid : nodes_[id].out) {
        const DiagramArc& a = arcs_[aid];
        dist[a.destination] = std::min(dist[a.destination], saturating_add(dist[id], a.value));
      }
    }
  }
  if (dist[terminal_] >= kCostInfinity) return std::nullopt;

  ShortestPath sp;
  sp.value = saturating_add(dist[terminal_], root_offset());
  NodeId cur = terminal_;
  while (cur != root_) {
    ArcId best = kNoArc;
    for (ArcId aid : nodes_[cur].in) {
      const DiagramArc& a = arcs_[aid];
      if (saturating_add(dist[a.origin], a.value) != dist[cur]) continue;
      if (best == kNoArc || a.label < arcs_[best].label ||
          (a.label == arcs_[best].label && a.origin < arcs_[best].origin))
        best = aid;
    }
    if (best == kNoArc) throw std::logic_error("shortest-path backtrack failed");
    sp.labels.push_back(arcs_[best].label);
    sp.nodes.push_back(cur);
    cur = arcs_[best].origin;
  }
  sp.nodes.push_back(root_);
  std::reverse(sp.labels.begin(), sp.labels.end());
  std::reverse(sp.nodes.begin(), sp.nodes.end());
  return sp;
}

bool Diagram::has_terminal_path() const {
  std::vector<char> reach(nodes_.size(), 0);
  reach[root_] = 1;
  for (int j = 1; j < num_node_layers(); ++j)
    for (NodeId id : layers_[j])
      if (reach[id])
        for (ArcId aid : nodes_[id].out) reach[arcs_[aid].destination] = 1;
  return reach[terminal_] != 0;
}

std::vector<std::vector<Element>> Diagram::enumerate_paths(std::size_t cap) const {
  std::vector<std::vector<Element>> out;
  std::vector<Element> labels;
  auto dfs = [&](auto&& self, NodeId u) -> void {
    if (u == terminal_) {
      if (out.size() >= cap) throw std::length_error("path enumeration exceeded cap");
      out.push_back(labels);
      return;
    }
    for (ArcId aid : nodes_[u].out) {
      labels.push_back(arcs_[aid].label);
      self(self, arcs_[aid].destination);
      labels.pop_back();
    }
  };
  dfs(dfs, root_);
  return out;
}

bool Diagram::contains_sequence(std::span<const Element> labels) const {
  std::vector<NodeId> frontier = {root_};
  for (Element l : labels) {
    std::vector<NodeId> next;
    for (NodeId u : frontier)
      for (ArcId aid : nodes_[u].out)
        if (arcs_[aid].label == l) next.push_back(arcs_[aid].destination);
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    if (next.empty()) return false;
    frontier = std::move(next);
  }
  return std::find(frontier.begin(), frontier.end(), terminal_) != frontier.end();
}

Element Diagram::unique_in_label(NodeId u) const {
  check_node(u);
  Element label = kNoElement;
  for (ArcId aid : nodes_[u].in) {
    if (label == kNoElement)
      label = arcs_[aid].label;
    else if (arcs_[aid].label != label)
      return kNoElement;
  }
  return label;
}

RootState Diagram::subproblem_root(NodeId u) const {
  check_node(u);
  if (!nodes_[u].state_exact)
    throw std::logic_error("subproblem root requires a state-exact node");
  RootState rs;
  rs.placed = nodes_[u].all_down;
  rs.last = nodes_[u].state;
  rs.offset = saturating_add(root_offset(), nodes_[u].t_star);

  std::vector<Element> walk;
  NodeId cur = u;
  while (cur != root_) {
    const DiagramNode& nd = nodes_[cur];
    ArcId best = kNoArc;
    for (ArcId aid : nd.in) {
      const DiagramArc& a = arcs_[aid];
      if (saturating_add(nodes_[a.origin].t_star, a.value) != nd.t_star) continue;
      if (best == kNoArc || a.label < arcs_[best].label ||
          (a.label == arcs_[best].label && a.origin < arcs_[best].origin))
        best = aid;
    }
    if (best == kNoArc) throw std::logic_error("stale t_star during subproblem extraction");
    walk.push_back(arcs_[best].label);
    cur = arcs_[best].origin;
  }
  std::reverse(walk.begin(), walk.end());
  rs.prefix = root_state_.prefix;
  rs.prefix.insert(rs.prefix.end(), walk.begin(), walk.end());
  if (rs.prefix.size() != rs.placed.count())
    throw std::logic_error("witness prefix does not match the placed set");
  return rs;
}

std::string Diagram::to_dot() const {
  std::ostringstream os;
  auto state_str = [](Element e) { return e == kNoElement ? std::string("-") : std::to_string(e); };
  os << "digraph dd {\n  rankdir=TB;\n";
  for (NodeId id = 0; id < static_cast<NodeId>(nodes_.size()); ++id) {
    const DiagramNode& nd = nodes_[id];
    if (!nd.alive) continue;
    os << "  n" << id << " [label=\"" << state_str(nd.state) << "|"
       << (nd.t_star >= kCostInfinity ? std::string("inf") : std::to_string(nd.t_star))
       << "\"];\n";
  }
  for (const DiagramArc& a : arcs_) {
    if (!a.alive) continue;
    os << "  n" << a.origin << " -> n" << a.destination << " [label=\"" << a.label << ":"
       << a.value << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

bool position_admissible(const SopInstance& inst, const LabelSet& placed, Element e, int p) {
  if (placed.test(e)) return false;
  if (inst.successors(e).intersects(placed)) return false;
  int placed_count = static_cast<int>(placed.count());
  int preds_remaining = static_cast<int>((inst.predecessors(e) - placed).count());
  if (p - 1 - placed_count < preds_remaining) return false;
  int succs_remaining = inst.successor_count(e);
  return p + succs_remaining <= inst.n();
}

std::optional<Diagram> build_initial_relaxation(const SopInstance& inst,
                                                const RootState& root_state) {
  if (!root_state.feasible(inst)) return std::nullopt;
  int n = inst.n();
  // An unplaced element with an already-placed closure successor can never be
  // sequenced without violating precedence: the whole subproblem is dead.
  for (Element e = 1; e <= n; ++e)
    if (!root_state.placed.test(e) && inst.successors(e).intersects(root_state.placed))
      return std::nullopt;

  Diagram d(inst, root_state, /*exact_arcs=*/true);
  int m = d.decisions();
  std::vector<NodeId> by_state(n + 1, kNoNode);  // nodes of the layer being built

  std::vector<NodeId> current = {d.root()};
  for (int j = 1; j <= m; ++j) {
    int p = d.global_position(j);  // position assigned by arcs leaving layer j
    std::fill(by_state.begin(), by_state.end(), kNoNode);
    for (NodeId u : current) {
      Element s = d.node(u).state;
      for (Element e = 1; e <= n; ++e) {
        if (root_state.placed.test(e) || e == s) continue;
        if (!position_admissible(inst, root_state.placed, e, p)) continue;
        Cost value = 0;
        if (s != kNoElement) {
          if (!inst.arc_feasible(s, e)) continue;
          if (inst.must_precede_transitive(e, s)) continue;
          value = inst.cost(s, e);
        }
        NodeId dest;
        if (j == m) {
          dest = d.terminal();
        } else {
          if (by_state[e] == kNoNode) by_state[e] = d.add_node(j + 1, e);
          dest = by_state[e];
        }
        d.add_arc(u, dest, e, value);
      }
    }
    if (j < m) {
      current.clear();
      for (Element e = 1; e <= n; ++e)
        if (by_state[e] != kNoNode) current.push_back(by_state[e]);
      if (current.empty()) return std::nullopt;
    }
  }
  d.prune_dangling();
  if (!d.has_terminal_path()) return std::nullopt;
  d.recompute_states(1);
  return d;
}

}  // namespace ddsop
