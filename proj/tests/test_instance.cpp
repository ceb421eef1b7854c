#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "ddsop/instance.hpp"
#include "ddsop/random_instance.hpp"
#include "test_util.hpp"

using namespace ddsop;
using namespace ddsop::testing;

namespace {

SopInstance parse_text(const std::string& text) {
  std::istringstream in(text);
  return SopInstance::parse_tsplib(in);
}

// Independent precedence extraction straight off the matrix text: -1 at row i,
// column j (1-based) means j must precede i.
std::vector<std::pair<Element, Element>> scan_pairs(int n, const std::vector<Cost>& m) {
  std::vector<std::pair<Element, Element>> out;
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j)
      if (i != j && m[static_cast<std::size_t>(i - 1) * n + (j - 1)] == kInfeasibleCost)
        out.emplace_back(j, i);
  return out;
}

}  // namespace

TEST_CASE("all-zero 3x3 instance: no precedence, every permutation feasible at cost 0") {
  SopInstance inst = make_instance(3, {0, 0, 0, 0, 0, 0, 0, 0, 0});
  CHECK(inst.n() == 3);
  CHECK(inst.precedence_pairs().empty());
  CHECK_FALSE(inst.first_element().has_value());
  CHECK_FALSE(inst.last_element().has_value());
  auto seqs = all_feasible_sequences(inst);
  CHECK(seqs.size() == 6);
  for (const auto& s : seqs) CHECK(inst.sequence_cost(s) == 0);
  for (Element e = 1; e <= 3; ++e) {
    CHECK(inst.min_position(e) == 1);
    CHECK(inst.max_position(e) == 3);
  }
}

TEST_CASE("a -1 at row 4 column 2 yields the pair (2 before 4)") {
  // 4x4, all ones except the diagonal and c(4,2) = -1.
  std::vector<Cost> m(16, 1);
  for (int i = 0; i < 4; ++i) m[static_cast<std::size_t>(i) * 4 + i] = 0;
  m[3 * 4 + 1] = kInfeasibleCost;
  SopInstance inst = make_instance(4, m);

  auto expected = scan_pairs(4, m);
  REQUIRE(expected.size() == 1);
  CHECK(expected[0] == std::pair<Element, Element>{2, 4});
  CHECK(inst.precedence_pairs() == expected);

  CHECK(inst.must_precede(2, 4));
  CHECK_FALSE(inst.must_precede(4, 2));
  CHECK(inst.must_precede_transitive(2, 4));
  CHECK_FALSE(inst.arc_feasible(4, 2));
  CHECK(inst.arc_feasible(2, 4));
  CHECK(inst.min_position(4) == 2);
  CHECK(inst.max_position(2) == 3);

  // Sequences placing 4 before 2 are rejected; all others with feasible
  // transitions are kept.
  CHECK(inst.sequence_feasible(std::vector<Element>{2, 4, 1, 3}));
  CHECK_FALSE(inst.sequence_feasible(std::vector<Element>{4, 2, 1, 3}));
}

TEST_CASE("transitive closure composes chains") {
  // 1 before 2 (c(2,1) = -1) and 2 before 3 (c(3,2) = -1).
  std::vector<Cost> m(9, 1);
  for (int i = 0; i < 3; ++i) m[static_cast<std::size_t>(i) * 3 + i] = 0;
  m[1 * 3 + 0] = kInfeasibleCost;
  m[2 * 3 + 1] = kInfeasibleCost;
  SopInstance inst = make_instance(3, m);
  CHECK(inst.must_precede(1, 2));
  CHECK(inst.must_precede(2, 3));
  CHECK_FALSE(inst.must_precede(1, 3));  // not a direct matrix pair
  CHECK(inst.must_precede_transitive(1, 3));
  CHECK(inst.predecessors(3).test(1));
  CHECK(inst.successors(1).test(3));
  CHECK(inst.first_element() == 1);
  CHECK(inst.last_element() == 3);
}

TEST_CASE("cyclic precedence is rejected") {
  // 1 before 2 and 2 before 1.
  std::vector<Cost> m{0, kInfeasibleCost, kInfeasibleCost, 0};
  CHECK_THROWS_WITH_AS(make_instance(2, m), "precedence constraints contain a cycle",
                       std::invalid_argument);
}

TEST_CASE("constructor validates shape, signs, and diagonal") {
  CHECK_THROWS_AS(make_instance(0, {}), std::invalid_argument);
  CHECK_THROWS_AS(make_instance(2, {0, 1, 2}), std::invalid_argument);
  CHECK_THROWS_AS(make_instance(2, {0, -7, 1, 0}), std::invalid_argument);
  CHECK_THROWS_AS(make_instance(2, {5, 1, 1, 0}), std::invalid_argument);
  CHECK_NOTHROW(make_instance(1, {0}));
}

TEST_CASE("acyclicity agrees with an independent DFS oracle on random -1 patterns") {
  std::mt19937_64 rng(20260815);
  std::uniform_int_distribution<int> nd(2, 6);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  int accepted = 0, rejected = 0;
  for (int trial = 0; trial < 400; ++trial) {
    int n = nd(rng);
    std::vector<Cost> m(static_cast<std::size_t>(n) * n, 1);
    for (int i = 1; i <= n; ++i)
      for (int j = 1; j <= n; ++j) {
        auto& cell = m[static_cast<std::size_t>(i - 1) * n + (j - 1)];
        if (i == j)
          cell = 0;
        else if (coin(rng) < 0.3)
          cell = kInfeasibleCost;
      }
    bool cyclic = has_cycle_dfs(n, scan_pairs(n, m));
    if (cyclic) {
      ++rejected;
      CHECK_THROWS_AS(make_instance(n, m), std::invalid_argument);
    } else {
      ++accepted;
      SopInstance inst = make_instance(n, m);
      CHECK(inst.precedence_pairs() == scan_pairs(n, m));
    }
  }
  // The sample must exercise both outcomes for the property to mean anything.
  CHECK(accepted > 20);
  CHECK(rejected > 20);
}

TEST_CASE("tsplib parsing accepts the documented header set") {
  std::string text =
      "NAME: demo\n"
      "TYPE: SOP\n"
      "COMMENT: three elements\n"
      "DIMENSION: 3\n"
      "EDGE_WEIGHT_TYPE: EXPLICIT\n"
      "EDGE_WEIGHT_FORMAT: FULL_MATRIX\n"
      "DISPLAY_DATA_TYPE: NO_DISPLAY\n"
      "EDGE_WEIGHT_SECTION\n"
      "3\n"
      "0 5 7\n"
      "2 0 9\n"
      "-1 4 0\n"
      "EOF\n";
  SopInstance inst = parse_text(text);
  CHECK(inst.name() == "demo");
  CHECK(inst.n() == 3);
  CHECK(inst.cost(1, 2) == 5);
  CHECK(inst.cost(3, 2) == 4);
  CHECK(inst.must_precede(1, 3));
  CHECK(inst.max_finite_cost() == 9);
}

TEST_CASE("tsplib parse errors carry line numbers") {
  auto expect_parse_error = [](const std::string& text, int line) {
    std::istringstream in(text);
    try {
      SopInstance::parse_tsplib(in);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == line);
    }
  };

  expect_parse_error("TYPE: TSP\n", 1);
  expect_parse_error("NAME: x\nBOGUS_KEY: 1\n", 2);
  expect_parse_error("TYPE: SOP\nDIMENSION: nope\n", 2);
  expect_parse_error("TYPE: SOP\nDIMENSION: 0\n", 2);
  // Missing section entirely.
  expect_parse_error("TYPE: SOP\nDIMENSION: 2\nEOF\n", 3);
  // Section before any DIMENSION.
  expect_parse_error("TYPE: SOP\nEDGE_WEIGHT_SECTION\n2\n0 1 1 0\n", 2);
  // Matrix header token disagrees with DIMENSION.
  expect_parse_error("DIMENSION: 2\nEDGE_WEIGHT_SECTION\n3\n0 1 1 0\n", 3);
  // Non-integer token inside the matrix.
  expect_parse_error("DIMENSION: 2\nEDGE_WEIGHT_SECTION\n2\n0 x\n1 0\n", 4);
  // Matrix cut short.
  expect_parse_error("DIMENSION: 2\nEDGE_WEIGHT_SECTION\n2\n0 1 1\nEOF\n", 5);
  // Well-formed numerals but an invalid matrix (cycle) is still a parse error.
  expect_parse_error("DIMENSION: 2\nEDGE_WEIGHT_SECTION\n2\n0 -1\n-1 0\n", 5);
}

TEST_CASE("write_tsplib round-trips through parse_tsplib") {
  std::mt19937_64 rng(7);
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    SopInstance inst = random_instance(6, 0.3, seed);
    std::ostringstream out;
    inst.write_tsplib(out);
    SopInstance back = parse_text(out.str());
    CHECK(back.name() == inst.name());
    REQUIRE(back.n() == inst.n());
    for (Element i = 1; i <= inst.n(); ++i)
      for (Element j = 1; j <= inst.n(); ++j) CHECK(back.cost(i, j) == inst.cost(i, j));
    CHECK(back.precedence_pairs() == inst.precedence_pairs());
  }
}

TEST_CASE("random_instance is deterministic, respects density bounds, and is valid") {
  SopInstance a = random_instance(8, 0.4, 42);
  SopInstance b = random_instance(8, 0.4, 42);
  CHECK(a.name() == b.name());
  for (Element i = 1; i <= 8; ++i)
    for (Element j = 1; j <= 8; ++j) CHECK(a.cost(i, j) == b.cost(i, j));

  SopInstance c = random_instance(8, 0.4, 43);
  bool any_diff = false;
  for (Element i = 1; i <= 8 && !any_diff; ++i)
    for (Element j = 1; j <= 8 && !any_diff; ++j) any_diff = a.cost(i, j) != c.cost(i, j);
  CHECK(any_diff);

  SopInstance dense = random_instance(6, 1.0, 5);
  // Density 1 over a hidden total order forces a full chain: n*(n-1)/2 pairs.
  CHECK(dense.precedence_pairs().size() == 15);
  CHECK(dense.first_element().has_value());
  CHECK(dense.last_element().has_value());
  CHECK(all_feasible_sequences(dense).size() == 1);

  SopInstance sparse = random_instance(6, 0.0, 5);
  CHECK(sparse.precedence_pairs().empty());

  for (Element i = 1; i <= 6; ++i)
    for (Element j = 1; j <= 6; ++j)
      if (i != j && dense.arc_feasible(i, j)) {
        CHECK(dense.cost(i, j) >= 1);
        CHECK(dense.cost(i, j) <= 100);
      }
}

TEST_CASE("sequence_cost saturates instead of overflowing") {
  std::vector<Cost> m{0, kCostInfinity - 5, kCostInfinity - 5, 0};
  // Constructor accepts huge costs; two hops would overflow a naive sum.
  SopInstance inst = make_instance(2, m);
  CHECK(inst.sequence_cost(std::vector<Element>{1, 2}) == kCostInfinity - 5);
  SopInstance big = make_instance(3, {0, kCostInfinity - 5, 1,  //
                                      1, 0, kCostInfinity - 5,  //
                                      1, 1, 0});
  CHECK(big.sequence_cost(std::vector<Element>{1, 2, 3}) == kCostInfinity);
}

TEST_CASE("sequence_feasible rejects malformed sequences") {
  SopInstance inst = free_instance(3);
  CHECK_FALSE(inst.sequence_feasible(std::vector<Element>{1, 2}));
  CHECK_FALSE(inst.sequence_feasible(std::vector<Element>{1, 2, 2}));
  CHECK_FALSE(inst.sequence_feasible(std::vector<Element>{0, 1, 2}));
  CHECK_FALSE(inst.sequence_feasible(std::vector<Element>{1, 2, 4}));
  CHECK(inst.sequence_feasible(std::vector<Element>{3, 1, 2}));
}

TEST_CASE("parse_tsplib_file uses the stem as a fallback name and reports missing files") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "ddsop_test_instance";
  fs::create_directories(dir);
  fs::path file = dir / "mini.sop";
  {
    std::ofstream out(file);
    out << "TYPE: SOP\nDIMENSION: 2\nEDGE_WEIGHT_SECTION\n2\n0 3\n4 0\nEOF\n";
  }
  SopInstance inst = SopInstance::parse_tsplib_file(file.string());
  CHECK(inst.name() == "mini");
  CHECK(inst.cost(2, 1) == 4);
  CHECK_THROWS_AS(SopInstance::parse_tsplib_file((dir / "absent.sop").string()),
                  std::runtime_error);
  fs::remove_all(dir);
}

TEST_CASE("benchmark instance ESC07 parses when present" * doctest::skip(false)) {
  const char* path = "data/ESC07.sop";
  if (!std::filesystem::exists(path)) {
    MESSAGE("data/ESC07.sop not present; see data/README.md for how to fetch it");
    return;
  }
  SopInstance inst = SopInstance::parse_tsplib_file(path);
  CHECK(inst.n() == 9);
  CHECK(inst.first_element() == 1);
  CHECK(inst.last_element() == 9);
}
