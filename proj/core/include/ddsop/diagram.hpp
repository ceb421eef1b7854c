#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ddsop/instance.hpp"

namespace ddsop {

using NodeId = std::int32_t;
using ArcId = std::int32_t;
inline constexpr NodeId kNoNode = -1;
inline constexpr ArcId kNoArc = -1;

// Root of a (sub)diagram: the set of already-sequenced elements, a witness
// order for them, the last element placed, and the true cost of that prefix.
struct RootState {
  LabelSet placed;                // empty bitset of size n+1 at the global root
  std::vector<Element> prefix;    // witness order of `placed` (may be empty)
  Element last = kNoElement;      // last element of `prefix`, kNoElement if empty
  Cost offset = 0;                // true cost of `prefix`

  static RootState global(const SopInstance& inst);
  // True iff the prefix respects the precedence closure and uses feasible
  // transitions; an infeasible root means "prune this subproblem".
  bool feasible(const SopInstance& inst) const;
};

struct DiagramArc {
  NodeId origin = kNoNode;
  NodeId destination = kNoNode;
  Element label = kNoElement;  // element sequenced by traversing this arc
  Cost value = 0;              // transition cost (a lower bound in width-1-origin mode)
  bool alive = false;
};

struct DiagramNode {
  int layer = 0;                 // local layer, 1 = root
  Element state = kNoElement;    // last element on every in-path; kNoElement if mixed
  LabelSet some_down, all_down;  // union / intersection of labels over in-paths
  LabelSet some_up, all_up;      // same over paths to the terminal (lazily refreshed)
  Cost t_star = 0;               // cheapest root->node path value (no root offset)
  bool exact = false;        // some_down == all_down and every parent exact
  bool state_exact = false;  // exact, plus a single in-arc label and state_exact parents
  bool alive = false;
  std::vector<ArcId> in, out;    // live incident arcs
};

struct ShortestPath {
  Cost value = kCostInfinity;       // includes the root offset
  std::vector<Element> labels;      // one label per layer transition
  std::vector<NodeId> nodes;        // root..terminal
};

// Layered multivalued decision diagram over the remaining positions of a SOP.
// Local layers run 1..num_node_layers(); the arc layer leaving local layer j
// assigns global sequence position placed_count() + j. Nodes and arcs live in
// arenas with stable ids and tombstone deletion; compact() renumbers.
class Diagram {
 public:
  Diagram(const SopInstance& inst, RootState root_state, bool exact_arcs);

  const SopInstance& instance() const { return *instance_; }
  const RootState& root_state() const { return root_state_; }
  Cost root_offset() const { return root_state_.offset; }
  // True when arc values are exact transition costs (every interior node has a
  // well-defined last element); false for width-1-origin relaxations where arc
  // values are minima over possible predecessors.
  bool exact_arcs() const { return exact_arcs_; }

  int num_node_layers() const { return static_cast<int>(layers_.size()) - 1; }
  int decisions() const { return num_node_layers() - 1; }
  int placed_count() const { return static_cast<int>(root_state_.placed.count()); }
  // Global sequence position assigned by arcs leaving local layer j.
  int global_position(int layer) const { return placed_count() + layer; }

  NodeId root() const { return root_; }
  NodeId terminal() const { return terminal_; }

  DiagramNode& node(NodeId u);
  const DiagramNode& node(NodeId u) const;
  DiagramArc& arc(ArcId a);
  const DiagramArc& arc(ArcId a) const;
  bool node_alive(NodeId u) const;

  // Live node ids on layer j, in id order.
  std::vector<NodeId> layer(int j) const;
  int layer_width(int j) const;
  int width() const;  // max over interior layers
  std::size_t node_count() const;
  std::size_t arc_count() const;

  NodeId add_node(int layer, Element state);
  ArcId add_arc(NodeId origin, NodeId destination, Element label, Cost value);
  void remove_arc(ArcId a);
  void remove_node(NodeId u);  // removes incident arcs too
  void redirect_destination(ArcId a, NodeId new_destination);

  // Recomputes some/all down label sets, t_star, state, and both exactness
  // flags for layers >= from_layer (top-down; layer 1 is fixed by the root state).
  void recompute_states(int from_layer = 1);
  // Same, for a single node from its current in-arcs (origins must be fresh).
  void recompute_node_down(NodeId u);
  // Recomputes some/all up label sets (bottom-up). Valid until the next mutation.
  void recompute_up_states();

  // Exactness: some_down == all_down with one set bit per placement, and all
  // parents exact. Throws std::out_of_range on an unknown or dead node id.
  bool is_exact_node(NodeId u) const;
  // Exact with an unambiguous last element (single in-arc label, recursively).
  bool is_state_exact_node(NodeId u) const;

  // Removes interior nodes with no in-arcs or no out-arcs until none remain.
  void prune_dangling();

  // Drops tombstones and renumbers ids (invalidates outstanding ids).
  void compact();

  // Cheapest root->terminal path. Witness ties broken toward the lowest label
  // (walking back from the terminal), then the lowest origin id. nullopt when
  // the terminal is unreachable.
  std::optional<ShortestPath> shortest_path() const;
  bool has_terminal_path() const;

  // All root->terminal label sequences. Throws std::length_error if there are
  // more than `cap` paths.
  std::vector<std::vector<Element>> enumerate_paths(std::size_t cap) const;
  // True iff `labels` (a full local label sequence) is a root->terminal path.
  bool contains_sequence(std::span<const Element> labels) const;

  // The single in-arc label shared by all in-arcs, or kNoElement if mixed/none.
  Element unique_in_label(NodeId u) const;

  // Root state for the subproblem rooted at exact node u (witness prefix from
  // the shortest root->u path). Requires is_state_exact_node(u).
  RootState subproblem_root(NodeId u) const;

  // Graphviz export; nodes labeled "state|T*", arcs labeled "l:v".
  std::string to_dot() const;

 private:
  void check_node(NodeId u) const;
  void check_arc(ArcId a) const;

  const SopInstance* instance_;
  RootState root_state_;
  bool exact_arcs_;
  std::vector<DiagramNode> nodes_;
  std::vector<DiagramArc> arcs_;
  std::vector<std::vector<NodeId>> layers_;  // [0] unused; may hold tombstoned ids
  NodeId root_ = kNoNode;
  NodeId terminal_ = kNoNode;
};

// Width-n relaxation with exact arc values: one node per still-placeable
// element on each interior layer, every not-yet-violated transition arc.
// nullopt when the root state is infeasible or no root->terminal path exists
// (prune the subproblem). Requires at least one remaining decision.
std::optional<Diagram> build_initial_relaxation(const SopInstance& inst,
                                                const RootState& root_state);

// True iff each element e can sit at global position p given the placed set:
// enough room before for its unplaced predecessors and after for successors.
bool position_admissible(const SopInstance& inst, const LabelSet& placed, Element e, int p);

}  // namespace ddsop
