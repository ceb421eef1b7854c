#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

#include <boost/dynamic_bitset.hpp>

namespace ddsop {

// Transition costs and bounds. Costs read from instance files are non-negative;
// -1 in a cost matrix marks an infeasible transition (and encodes precedence).
using Cost = std::int64_t;

inline constexpr Cost kInfeasibleCost = -1;

// "Unreachable / no bound" sentinel. Kept far below the int64 ceiling so that
// sums of a few sentinels and real costs never overflow.
inline constexpr Cost kCostInfinity = std::numeric_limits<Cost>::max() / 4;

// Elements (cities/jobs) are 1-based ids 1..n. 0 means "no element".
using Element = std::int32_t;
inline constexpr Element kNoElement = 0;

// Set of elements. Bit e set <=> element e is in the set; bit 0 is unused so a
// set for an n-element instance has size n+1.
using LabelSet = boost::dynamic_bitset<std::uint64_t>;

inline Cost saturating_add(Cost a, Cost b) {
  if (a >= kCostInfinity || b >= kCostInfinity) return kCostInfinity;
  Cost s = a + b;
  return s >= kCostInfinity ? kCostInfinity : s;
}

// Thrown on malformed instance files; carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace ddsop
