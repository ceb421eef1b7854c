#include "ddsop/instance.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace ddsop {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Splits "KEY : value" / "KEY: value" / bare "KEY" header lines.
std::pair<std::string, std::string> split_header(const std::string& line) {
  auto colon = line.find(':');
  if (colon == std::string::npos) return {trim(line), ""};
  return {trim(line.substr(0, colon)), trim(line.substr(colon + 1))};
}

bool is_known_key(const std::string& key) {
  static const char* keys[] = {"NAME",        "TYPE",           "COMMENT",
                               "DIMENSION",   "EDGE_WEIGHT_TYPE", "EDGE_WEIGHT_FORMAT",
                               "DISPLAY_DATA_TYPE"};
  return std::any_of(std::begin(keys), std::end(keys),
                     [&](const char* k) { return key == k; });
}

// Pulls whitespace-separated integer tokens out of lines, tracking the line
// number for error reporting.
class TokenReader {
 public:
  TokenReader(std::istream& in, int line) : in_(in), line_(line) {}

  std::optional<Cost> next() {
    while (true) {
      if (pos_ < tokens_.size()) return tokens_[pos_++];
      std::string line;
      if (!std::getline(in_, line)) return std::nullopt;
      ++line_;
      std::string t = trim(line);
      if (t == "EOF") return std::nullopt;
      tokens_.clear();
      pos_ = 0;
      std::istringstream ls(t);
      std::string tok;
      while (ls >> tok) {
        try {
          std::size_t used = 0;
          long long v = std::stoll(tok, &used);
          if (used != tok.size()) throw std::invalid_argument(tok);
          tokens_.push_back(static_cast<Cost>(v));
        } catch (const std::exception&) {
          throw ParseError(line_, "expected an integer, got '" + tok + "'");
        }
      }
    }
  }

  int line() const { return line_; }

 private:
  std::istream& in_;
  int line_;
  std::vector<Cost> tokens_;
  std::size_t pos_ = 0;
};

}  // namespace

SopInstance::SopInstance(std::string name, int n, std::vector<Cost> matrix)
    : name_(std::move(name)), n_(n), matrix_(std::move(matrix)) {
  if (n_ < 1) throw std::invalid_argument("instance needs at least one element");
  if (matrix_.size() != static_cast<std::size_t>(n_) * n_)
    throw std::invalid_argument("cost matrix is not n*n");
  for (Element i = 1; i <= n_; ++i) {
    for (Element j = 1; j <= n_; ++j) {
      Cost c = matrix_[index(i, j)];
      if (c < 0 && c != kInfeasibleCost)
        throw std::invalid_argument("negative cost at (" + std::to_string(i) + "," +
                                    std::to_string(j) + ")");
      if (i == j && c > 0)
        throw std::invalid_argument("nonzero diagonal at (" + std::to_string(i) + "," +
                                    std::to_string(i) + ")");
      if (i != j && c != kInfeasibleCost) max_finite_cost_ = std::max(max_finite_cost_, c);
    }
  }
  derive_precedence();
}

void SopInstance::derive_precedence() {
  // c(i,j) == -1 (i != j) encodes "j must precede i".
  std::vector<std::vector<Element>> direct_succ(n_ + 1);
  std::vector<int> indeg(n_ + 1, 0);
  for (Element i = 1; i <= n_; ++i) {
    for (Element j = 1; j <= n_; ++j) {
      if (i != j && matrix_[index(i, j)] == kInfeasibleCost) {
        pairs_.emplace_back(j, i);
        direct_succ[j].push_back(i);
        ++indeg[i];
      }
    }
  }

  // Kahn's algorithm: topological order doubles as the acyclicity check.
  std::vector<Element> topo;
  topo.reserve(n_);
  std::deque<Element> ready;
  for (Element e = 1; e <= n_; ++e)
    if (indeg[e] == 0) ready.push_back(e);
  while (!ready.empty()) {
    Element e = ready.front();
    ready.pop_front();
    topo.push_back(e);
    for (Element s : direct_succ[e])
      if (--indeg[s] == 0) ready.push_back(s);
  }
  if (static_cast<int>(topo.size()) != n_)
    throw std::invalid_argument("precedence constraints contain a cycle");

  // Transitive closure, accumulated backwards over the topological order.
  preds_.assign(n_ + 1, LabelSet(n_ + 1));
  succs_.assign(n_ + 1, LabelSet(n_ + 1));
  for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
    Element e = *it;
    for (Element s : direct_succ[e]) {
      succs_[e].set(s);
      succs_[e] |= succs_[s];
    }
  }
  for (Element e = 1; e <= n_; ++e)
    for (Element s = 1; s <= n_; ++s)
      if (succs_[e].test(s)) preds_[s].set(e);

  for (Element e = 1; e <= n_; ++e) {
    if (successor_count(e) == n_ - 1) first_ = e;
    if (predecessor_count(e) == n_ - 1) last_ = e;
  }
}

bool SopInstance::must_precede(Element i, Element j) const {
  if (i == j) return false;
  return matrix_[index(j, i)] == kInfeasibleCost;
}

bool SopInstance::must_precede_transitive(Element i, Element j) const {
  if (i == j) return false;
  return succs_[i].test(j);
}

Cost SopInstance::sequence_cost(std::span<const Element> seq) const {
  Cost total = 0;
  for (std::size_t k = 1; k < seq.size(); ++k) {
    Cost c = cost(seq[k - 1], seq[k]);
    if (c == kInfeasibleCost) return kCostInfinity;
    total = saturating_add(total, c);
  }
  return total;
}

bool SopInstance::sequence_feasible(std::span<const Element> seq) const {
  if (seq.size() != static_cast<std::size_t>(n_)) return false;
  std::vector<int> pos(n_ + 1, 0);
  for (std::size_t k = 0; k < seq.size(); ++k) {
    Element e = seq[k];
    if (e < 1 || e > n_ || pos[e] != 0) return false;
    pos[e] = static_cast<int>(k) + 1;
  }
  for (const auto& [a, b] : pairs_)
    if (pos[a] > pos[b]) return false;
  return sequence_cost(seq) < kCostInfinity;
}

SopInstance SopInstance::parse_tsplib(std::istream& in, std::string name) {
  int line_no = 0;
  int dimension = -1;
  std::string line;
  bool in_section = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty()) continue;
    if (t == "EDGE_WEIGHT_SECTION") {
      in_section = true;
      break;
    }
    if (t == "EOF") break;
    auto [key, value] = split_header(t);
    if (!is_known_key(key))
      throw ParseError(line_no, "unrecognized header line '" + t + "'");
    if (key == "NAME" && !value.empty()) name = value;
    if (key == "TYPE" && value != "SOP")
      throw ParseError(line_no, "TYPE must be SOP, got '" + value + "'");
    if (key == "EDGE_WEIGHT_TYPE" && value != "EXPLICIT")
      throw ParseError(line_no, "EDGE_WEIGHT_TYPE must be EXPLICIT, got '" + value + "'");
    if (key == "EDGE_WEIGHT_FORMAT" && value != "FULL_MATRIX")
      throw ParseError(line_no, "EDGE_WEIGHT_FORMAT must be FULL_MATRIX, got '" + value + "'");
    if (key == "DIMENSION") {
      try {
        dimension = std::stoi(value);
      } catch (const std::exception&) {
        throw ParseError(line_no, "DIMENSION is not an integer: '" + value + "'");
      }
      if (dimension < 1) throw ParseError(line_no, "DIMENSION must be positive");
    }
  }
  if (!in_section) throw ParseError(line_no, "missing EDGE_WEIGHT_SECTION");
  if (dimension < 1) throw ParseError(line_no, "missing DIMENSION before EDGE_WEIGHT_SECTION");

  TokenReader tokens(in, line_no);
  auto first = tokens.next();
  if (!first) throw ParseError(tokens.line(), "EDGE_WEIGHT_SECTION is empty");
  if (*first != dimension)
    throw ParseError(tokens.line(), "matrix header " + std::to_string(*first) +
                                        " does not repeat DIMENSION " +
                                        std::to_string(dimension));

  std::vector<Cost> matrix;
  matrix.reserve(static_cast<std::size_t>(dimension) * dimension);
  for (std::size_t k = 0; k < static_cast<std::size_t>(dimension) * dimension; ++k) {
    auto v = tokens.next();
    if (!v)
      throw ParseError(tokens.line(), "matrix ended after " + std::to_string(k) +
                                          " of " + std::to_string(dimension * dimension) +
                                          " entries");
    matrix.push_back(*v);
  }

  try {
    return SopInstance(std::move(name), dimension, std::move(matrix));
  } catch (const std::invalid_argument& e) {
    throw ParseError(tokens.line(), e.what());
  }
}

SopInstance SopInstance::parse_tsplib_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open instance file: " + path);
  std::string stem = path;
  if (auto slash = stem.find_last_of('/'); slash != std::string::npos)
    stem = stem.substr(slash + 1);
  if (auto dot = stem.find_last_of('.'); dot != std::string::npos) stem = stem.substr(0, dot);
  return parse_tsplib(in, stem);
}

void SopInstance::write_tsplib(std::ostream& out) const {
  out << "NAME: " << (name_.empty() ? "unnamed" : name_) << "\n"
      << "TYPE: SOP\n"
      << "DIMENSION: " << n_ << "\n"
      << "EDGE_WEIGHT_TYPE: EXPLICIT\n"
      << "EDGE_WEIGHT_FORMAT: FULL_MATRIX\n"
      << "EDGE_WEIGHT_SECTION\n"
      << n_ << "\n";
  for (Element i = 1; i <= n_; ++i) {
    for (Element j = 1; j <= n_; ++j) {
      if (j > 1) out << ' ';
      out << matrix_[index(i, j)];
    }
    out << "\n";
  }
  out << "EOF\n";
}

}  // namespace ddsop
