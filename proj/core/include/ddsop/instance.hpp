#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ddsop/common.hpp"

namespace ddsop {

// A sequence ordering problem: find a minimum-cost Hamiltonian path over
// elements 1..n under an asymmetric cost matrix and precedence constraints.
// c(i,j) == -1 means the transition i->j is forbidden because j must precede i.
class SopInstance {
 public:
  // Builds from a full row-major matrix (matrix[(i-1)*n + (j-1)] = c(i,j)).
  // Derives the precedence relation from -1 entries, validates entries and
  // acyclicity, and precomputes the transitive closure.
  SopInstance(std::string name, int n, std::vector<Cost> matrix);

  // Reads the TSPLIB SOP format: header keys (NAME, TYPE, COMMENT, DIMENSION,
  // EDGE_WEIGHT_TYPE, EDGE_WEIGHT_FORMAT, ...) followed by EDGE_WEIGHT_SECTION
  // whose first token repeats the dimension, then n*n integers, then EOF.
  // A NAME header wins over the `name` argument, which is only a fallback
  // (parse_tsplib_file passes the file stem). Throws ParseError with a line
  // number on malformed input.
  static SopInstance parse_tsplib(std::istream& in, std::string name = "");
  static SopInstance parse_tsplib_file(const std::string& path);

  // Writes the instance back out in the same format (round-trips exactly).
  void write_tsplib(std::ostream& out) const;

  const std::string& name() const { return name_; }
  int n() const { return n_; }

  Cost cost(Element i, Element j) const { return matrix_[index(i, j)]; }
  bool arc_feasible(Element i, Element j) const { return cost(i, j) != kInfeasibleCost; }

  // Direct precedence as encoded in the matrix: i must precede j.
  bool must_precede(Element i, Element j) const;
  // Transitive closure of must_precede.
  bool must_precede_transitive(Element i, Element j) const;

  // Closure views: predecessors(e) = all elements that must come before e.
  const LabelSet& predecessors(Element e) const { return preds_[e]; }
  const LabelSet& successors(Element e) const { return succs_[e]; }
  int predecessor_count(Element e) const { return static_cast<int>(preds_[e].count()); }
  int successor_count(Element e) const { return static_cast<int>(succs_[e].count()); }

  // Direct precedence pairs (i before j), in matrix scan order.
  const std::vector<std::pair<Element, Element>>& precedence_pairs() const { return pairs_; }

  // An element forced to be first (must precede all others), if any; likewise
  // last. TSPLIB SOP instances fix element 1 first and element n last.
  std::optional<Element> first_element() const { return first_; }
  std::optional<Element> last_element() const { return last_; }

  // Earliest / latest 1-based position element e can take in any feasible
  // sequence, by counting its closure predecessors / successors.
  int min_position(Element e) const { return 1 + predecessor_count(e); }
  int max_position(Element e) const { return n_ - successor_count(e); }

  // Total cost of a full sequence; kCostInfinity if any transition is
  // infeasible. Does not check precedence (see sequence_feasible).
  Cost sequence_cost(std::span<const Element> seq) const;
  // True iff seq uses each element exactly once, respects every precedence
  // pair, and uses only feasible transitions.
  bool sequence_feasible(std::span<const Element> seq) const;

  Cost max_finite_cost() const { return max_finite_cost_; }

 private:
  std::size_t index(Element i, Element j) const {
    return static_cast<std::size_t>(i - 1) * n_ + (j - 1);
  }
  void derive_precedence();

  std::string name_;
  int n_ = 0;
  std::vector<Cost> matrix_;
  std::vector<std::pair<Element, Element>> pairs_;
  std::vector<LabelSet> preds_, succs_;  // transitive closure, indexed by element
  std::optional<Element> first_, last_;
  Cost max_finite_cost_ = 0;
};

}  // namespace ddsop
