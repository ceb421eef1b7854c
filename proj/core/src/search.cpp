#include "ddsop/search.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ddsop {

namespace {

struct Stopwatch {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double limit;

  explicit Stopwatch(double limit_seconds) : limit(limit_seconds) {}

  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  bool expired() const { return elapsed() >= limit; }
  std::optional<std::chrono::steady_clock::time_point> deadline() const {
    if (!std::isfinite(limit)) return std::nullopt;
    return start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                       std::chrono::duration<double>(limit));
  }
};

// Accumulates the monotone bound log: the reported lower bound is the running
// max over iterations of min(incumbent, weakest open subproblem bound), which
// never exceeds the incumbent and never regresses.
class BoundLog {
 public:
  BoundLog(SearchResult& result, const SearchConfig& config)
      : result_(result), config_(config) {}

  void update(const Stopwatch& clock, std::uint64_t iteration, Cost queue_min, Cost incumbent,
              std::size_t queue_length) {
    Cost rb_raw = std::min(queue_min, incumbent);
    rb_ = std::max(rb_, rb_raw);
    if (emitted_ && rb_ == last_rb_ && incumbent == last_best_) return;
    emit(clock, iteration, incumbent, queue_length);
  }

  // Unconditional terminal row: folds in the final queue state, then emits
  // even when nothing changed so the log always ends with the result.
  void final_event(const Stopwatch& clock, std::uint64_t iteration, Cost queue_min,
                   Cost incumbent, std::size_t queue_length) {
    rb_ = std::max(rb_, std::min(queue_min, incumbent));
    emit(clock, iteration, incumbent, queue_length);
  }

  Cost reported_bound() const { return rb_; }

 private:
  void emit(const Stopwatch& clock, std::uint64_t iteration, Cost incumbent,
            std::size_t queue_length) {
    BoundEvent ev;
    ev.elapsed_seconds = clock.elapsed();
    ev.iteration = iteration;
    ev.relaxed_bound = rb_;
    ev.best_value = incumbent;
    ev.queue_length = queue_length;
    result_.events.push_back(ev);
    if (config_.on_event) config_.on_event(ev);
    emitted_ = true;
    last_rb_ = rb_;
    last_best_ = incumbent;
  }

  SearchResult& result_;
  const SearchConfig& config_;
  Cost rb_ = 0;
  bool emitted_ = false;
  Cost last_rb_ = -1;
  Cost last_best_ = -1;
};

Cost queue_min_bound(const SearchQueue& q) {
  return q.empty() ? kCostInfinity : q.begin()->first.first;
}

void queue_push(SearchQueue& q, std::uint64_t& sequence, Cost priority, RootState state,
                std::optional<Diagram> diagram) {
  QueueEntry entry;
  entry.priority = priority;
  entry.sequence = sequence;
  entry.state = std::move(state);
  entry.diagram = std::move(diagram);
  q.emplace(std::make_pair(priority, sequence), std::move(entry));
  ++sequence;
}

QueueEntry queue_pop(SearchQueue& q) {
  auto it = q.begin();
  QueueEntry entry = std::move(it->second);
  q.erase(it);
  return entry;
}

// Shortest terminal distance from every node (kCostInfinity when a node
// cannot reach the terminal).
std::vector<Cost> up_distances(const Diagram& d) {
  std::vector<Cost> h(static_cast<std::size_t>(d.terminal()) + 1, kCostInfinity);
  auto ensure = [&](NodeId id) {
    if (static_cast<std::size_t>(id) >= h.size()) h.resize(id + 1, kCostInfinity);
  };
  ensure(d.terminal());
  h[d.terminal()] = 0;
  for (int j = d.num_node_layers() - 1; j >= 1; --j) {
    for (NodeId u : d.layer(j)) {
      ensure(u);
      Cost best = kCostInfinity;
      for (ArcId a : d.node(u).out) {
        const DiagramArc& arc = d.arc(a);
        ensure(arc.destination);
        best = std::min(best, saturating_add(arc.value, h[arc.destination]));
      }
      h[u] = best;
    }
  }
  return h;
}

}  // namespace

const QueueEntry& select_diagram(const SearchQueue& q) {
  if (q.empty()) throw std::out_of_range("select_diagram on an empty queue");
  return q.begin()->second;
}

std::size_t memory_fallback(SearchQueue& q, std::size_t cap) {
  std::size_t materialized = 0;
  for (const auto& [key, entry] : q)
    if (entry.diagram.has_value()) ++materialized;
  std::size_t demoted = 0;
  for (auto it = q.rbegin(); it != q.rend() && materialized > cap; ++it) {
    if (!it->second.diagram.has_value()) continue;
    it->second.diagram.reset();
    --materialized;
    ++demoted;
  }
  return demoted;
}

std::vector<NodeId> exact_cutset(const Diagram& d) {
  int k = d.num_node_layers() - 1;
  for (int j = 2; j <= d.num_node_layers() - 1; ++j) {
    bool all_exact = true;
    for (NodeId u : d.layer(j))
      if (!d.node(u).state_exact) {
        all_exact = false;
        break;
      }
    if (!all_exact) {
      k = j - 1;
      break;
    }
  }
  return d.layer(k);
}

NodeId select_exact_node(const Diagram& d, NodeSelect mode) {
  auto sp = d.shortest_path();
  if (!sp) throw std::logic_error("select_exact_node needs a root-terminal path");
  const std::vector<NodeId>& nodes = sp->nodes;

  if (mode == NodeSelect::last_exact) {
    NodeId deepest = d.root();
    for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
      NodeId v = nodes[k];
      if (!d.node(v).state_exact) break;
      deepest = v;
      for (ArcId a : d.node(v).out)
        if (!d.node(d.arc(a).destination).state_exact) return v;
    }
    return deepest;
  }

  NodeId deepest = d.root();
  for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
    if (!d.node(nodes[k]).state_exact) break;
    deepest = nodes[k];
  }
  return deepest;
}

SearchResult branch_and_bound(const SopInstance& inst, const SearchConfig& config) {
  if (config.width < 1) throw std::invalid_argument("width must be at least 1");
  SearchResult result;
  Stopwatch clock(config.time_limit_seconds);
  BoundLog log(result, config);

  RrbTables tables(inst);
  FilterContext ctx;
  ctx.rrb = &tables;
  ctx.config = config.filter;
  AssignmentOrdering ordering = assignment_ordering(inst);

  Cost incumbent = kCostInfinity;
  std::vector<Element> best_seq;
  SearchQueue q;
  std::uint64_t sequence = 0;
  queue_push(q, sequence, 0, RootState::global(inst), std::nullopt);

  while (!q.empty()) {
    if (clock.expired()) {
      result.timed_out = true;
      break;
    }
    QueueEntry entry = queue_pop(q);
    if (entry.priority >= incumbent) continue;  // lazy purge
    ++result.iterations;
    ctx.incumbent = incumbent;

    RestrictedResult rest =
        build_restricted(inst, entry.state, config.width, incumbent, ctx);
    if (rest.best_value < incumbent) {
      incumbent = rest.best_value;
      best_seq = rest.best_sequence;
    }

    if (!rest.is_exact) {
      ctx.incumbent = incumbent;
      auto relaxed = build_width1_relaxation(inst, entry.state);
      if (relaxed) {
        refine(*relaxed, config.width, ordering, ctx, RefineMode::width1_origin,
               clock.deadline());
        if (auto sp = relaxed->shortest_path()) {
          Cost v = sp->value;
          bool closed = false;
          if (v < incumbent) {
            std::vector<Element> full = entry.state.prefix;
            full.insert(full.end(), sp->labels.begin(), sp->labels.end());
            if (inst.sequence_feasible(full) && inst.sequence_cost(full) == v) {
              incumbent = v;
              best_seq = std::move(full);
              closed = true;
            }
          }
          if (!closed && v < incumbent) {
            std::vector<Cost> h = up_distances(*relaxed);
            for (NodeId cut : exact_cutset(*relaxed)) {
              Cost through = saturating_add(
                  relaxed->root_offset(),
                  saturating_add(relaxed->node(cut).t_star, h[cut]));
              if (through >= kCostInfinity) continue;
              queue_push(q, sequence, through, relaxed->subproblem_root(cut), std::nullopt);
            }
          }
        }
      }
    }
    log.update(clock, result.iterations, queue_min_bound(q), incumbent, q.size());
  }

  result.best_value = incumbent;
  result.best_sequence = std::move(best_seq);
  result.proved_optimal = q.empty();
  result.final_queue_length = q.size();
  log.final_event(clock, result.iterations, queue_min_bound(q), incumbent, q.size());
  result.relaxed_bound = log.reported_bound();
  result.elapsed_seconds = clock.elapsed();
  return result;
}

SearchResult peel_and_bound(const SopInstance& inst, const SearchConfig& config) {
  if (config.width < 1) throw std::invalid_argument("width must be at least 1");
  SearchResult result;
  Stopwatch clock(config.time_limit_seconds);
  BoundLog log(result, config);

  RrbTables tables(inst);
  FilterContext ctx;
  ctx.rrb = &tables;
  ctx.config = config.filter;
  AssignmentOrdering ordering = assignment_ordering(inst);

  Cost incumbent = kCostInfinity;
  std::vector<Element> best_seq;
  SearchQueue q;
  std::uint64_t sequence = 0;

  if (auto initial = build_initial_relaxation(inst, RootState::global(inst))) {
    refine(*initial, config.width, ordering, ctx, RefineMode::exact_arc, clock.deadline());
    if (auto sp = initial->shortest_path()) {
      Cost v = sp->value;
      if (inst.sequence_feasible(sp->labels)) {
        // The relaxation's own shortest path is feasible: nothing cheaper can
        // exist, the whole problem is closed.
        if (inst.sequence_cost(sp->labels) != v)
          throw std::logic_error("exact-arc witness does not re-cost to its value");
        incumbent = v;
        best_seq = sp->labels;
      } else {
        queue_push(q, sequence, v, RootState::global(inst), std::move(*initial));
      }
    }
  }
  log.update(clock, 0, queue_min_bound(q), incumbent, q.size());

  while (!q.empty()) {
    if (clock.expired()) {
      result.timed_out = true;
      break;
    }
    QueueEntry entry = queue_pop(q);
    if (entry.priority >= incumbent) continue;  // lazy purge
    ++result.iterations;
    ctx.incumbent = incumbent;

    if (!entry.diagram.has_value()) {
      // Demoted by memory_fallback. The root state of a residual cannot encode
      // which nodes were peeled away, so re-peeling a rebuilt diagram could
      // reproduce this entry forever. Instead, rebuild, try to close on the
      // witness, and otherwise expand through the exact cutset into strictly
      // deeper state stubs — every pop of a demoted entry makes progress.
      if (auto dia = build_initial_relaxation(inst, entry.state)) {
        refine(*dia, config.width, ordering, ctx, RefineMode::exact_arc, clock.deadline());
        if (auto sp = dia->shortest_path(); sp && sp->value < incumbent) {
          std::vector<Element> full = entry.state.prefix;
          full.insert(full.end(), sp->labels.begin(), sp->labels.end());
          if (inst.sequence_feasible(full)) {
            if (inst.sequence_cost(full) != sp->value)
              throw std::logic_error("exact-arc witness does not re-cost to its value");
            incumbent = sp->value;
            best_seq = std::move(full);
          } else {
            std::vector<Cost> h = up_distances(*dia);
            for (NodeId cut : exact_cutset(*dia)) {
              Cost through = saturating_add(
                  dia->root_offset(), saturating_add(dia->node(cut).t_star, h[cut]));
              if (through >= kCostInfinity || through >= incumbent) continue;
              queue_push(q, sequence, through, dia->subproblem_root(cut), std::nullopt);
            }
          }
        }
      }
      log.update(clock, result.iterations, queue_min_bound(q), incumbent, q.size());
      continue;
    }

    Diagram dia = std::move(*entry.diagram);
    NodeId u = select_exact_node(dia, config.node_select);
    Diagram peeled = peel(dia, u, ctx);

    if (dia.has_terminal_path()) {
      Cost v_residual = dia.shortest_path()->value;
      if (v_residual < incumbent) {
        RootState residual_state = dia.root_state();
        queue_push(q, sequence, v_residual, std::move(residual_state), std::move(dia));
      }
    }

    RootState rs = peeled.root_state();
    RestrictedResult rest = build_restricted(inst, rs, config.width, incumbent, ctx);
    if (rest.best_value < incumbent) {
      incumbent = rest.best_value;
      best_seq = rest.best_sequence;
    }

    if (!rest.is_exact) {
      ctx.incumbent = incumbent;
      refine(peeled, config.width, ordering, ctx, RefineMode::exact_arc, clock.deadline());
      if (auto sp = peeled.shortest_path()) {
        Cost v = sp->value;
        if (v < incumbent) {
          std::vector<Element> full = peeled.root_state().prefix;
          full.insert(full.end(), sp->labels.begin(), sp->labels.end());
          if (inst.sequence_feasible(full)) {
            if (inst.sequence_cost(full) != v)
              throw std::logic_error("exact-arc witness does not re-cost to its value");
            incumbent = v;
            best_seq = std::move(full);
          } else {
            RootState peeled_state = peeled.root_state();
            queue_push(q, sequence, v, std::move(peeled_state), std::move(peeled));
          }
        }
      }
    }

    memory_fallback(q, config.memory_cap);
    log.update(clock, result.iterations, queue_min_bound(q), incumbent, q.size());
  }

  result.best_value = incumbent;
  result.best_sequence = std::move(best_seq);
  result.proved_optimal = q.empty();
  result.final_queue_length = q.size();
  log.final_event(clock, result.iterations, queue_min_bound(q), incumbent, q.size());
  result.relaxed_bound = log.reported_bound();
  result.elapsed_seconds = clock.elapsed();
  return result;
}

}  // namespace ddsop
