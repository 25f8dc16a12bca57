#pragma once

// All-pairs contact graph: mark every node pair that has at least one
// touching entity pair, no index arithmetic shared with the library.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "hoi/contact_graph.hpp"

namespace hoi::oracle {

// Random map of `entities` entities onto k nodes, some excluded.
inline AggregationMap random_map(std::mt19937_64& rng, int entities, int k) {
  AggregationMap map;
  for (int n = 0; n < k; ++n) map.node_names.push_back("n" + std::to_string(n));
  std::uniform_int_distribution<int> node(-1, k - 1);
  for (int e = 0; e < entities; ++e) map.assignment["e" + std::to_string(e)] = node(rng);
  return map;
}

inline ContactEvidence random_evidence(std::mt19937_64& rng, int entities) {
  ContactEvidence ev;
  std::bernoulli_distribution b(0.12);
  for (int a = 0; a < entities; ++a)
    for (int c = a + 1; c < entities; ++c)
      if (b(rng)) ev.pairs.push_back({"e" + std::to_string(a), "e" + std::to_string(c)});
  return ev;
}

inline std::vector<std::uint8_t> brute_force_cg(const ContactEvidence& ev,
                                                const AggregationMap& map) {
  const int k = map.node_count();
  std::vector<std::vector<int>> touch(k, std::vector<int>(k, 0));
  for (const auto& [a, b] : ev.pairs) {
    const int na = map.assignment.at(a), nb = map.assignment.at(b);
    if (na < 0 || nb < 0 || na == nb) continue;
    touch[na][nb] = touch[nb][na] = 1;
  }
  std::vector<std::uint8_t> out;
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) out.push_back(static_cast<std::uint8_t>(touch[i][j]));
  return out;
}

}  // namespace hoi::oracle
