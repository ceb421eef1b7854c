#pragma once

#include <cstdint>

#include "ddsop/instance.hpp"

namespace ddsop {

// Generates a random SOP instance: costs uniform in [1, max_cost], precedence
// pairs sampled with probability `precedence_density` over a hidden random
// total order (guarantees acyclicity). Deterministic for a fixed seed.
SopInstance random_instance(int n, double precedence_density, std::uint64_t seed,
                            Cost max_cost = 100);

}  // namespace ddsop
