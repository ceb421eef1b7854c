#include "ddsop/random_instance.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>

namespace ddsop {

SopInstance random_instance(int n, double precedence_density, std::uint64_t seed,
                            Cost max_cost) {
  if (n < 1) throw std::invalid_argument("n must be positive");
  if (precedence_density < 0.0 || precedence_density > 1.0)
    throw std::invalid_argument("precedence_density must be in [0,1]");
  if (max_cost < 1) throw std::invalid_argument("max_cost must be positive");

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Cost> cost_dist(1, max_cost);
  std::uniform_real_distribution<double> coin(0.0, 1.0);

  std::vector<Cost> matrix(static_cast<std::size_t>(n) * n, 0);
  for (Element i = 1; i <= n; ++i)
    for (Element j = 1; j <= n; ++j)
      if (i != j) matrix[static_cast<std::size_t>(i - 1) * n + (j - 1)] = cost_dist(rng);

  // Sample precedence over a hidden random total order so the relation is a DAG.
  std::vector<Element> order(n);
  std::iota(order.begin(), order.end(), 1);
  std::shuffle(order.begin(), order.end(), rng);
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      if (coin(rng) < precedence_density) {
        Element before = order[a], after = order[b];
        // "before must precede after" is stored as c(after, before) = -1.
        matrix[static_cast<std::size_t>(after - 1) * n + (before - 1)] = kInfeasibleCost;
      }
    }
  }

  std::string name = "rnd-n" + std::to_string(n) + "-d" +
                     std::to_string(static_cast<int>(precedence_density * 100)) + "-s" +
                     std::to_string(seed);
  return SopInstance(std::move(name), n, std::move(matrix));
}

}  // namespace ddsop
