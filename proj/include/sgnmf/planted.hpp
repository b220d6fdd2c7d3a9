#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "sgnmf/graph.hpp"
#include "sgnmf/random.hpp"

namespace sgnmf {

struct PlantedGraph {
  SparseAdjacency adjacency;
  GroundTruth truth;
};

// Block of each node: contiguous blocks, the first n % k blocks one node
// larger than the rest.
inline std::vector<Index> planted_blocks(Index n, Index k) {
  std::vector<Index> block(static_cast<std::size_t>(n));
  Index base = n / k, extra = n % k, node = 0;
  for (Index b = 0; b < k; ++b)
    for (Index s = 0; s < base + (b < extra ? 1 : 0); ++s) block[node++] = b;
  return block;
}

// Planted-partition (stochastic block) graph. Each pair i < j is drawn
// once, in lexicographic order, with probability p_in inside a block and
// p_out across blocks.
inline PlantedGraph make_planted_partition(Index n, Index k, double p_in, double p_out, std::uint64_t seed) {
  if (k < 1 || n < k) throw std::invalid_argument("planted partition: need 1 <= k <= n");
  if (!(p_out >= 0.0 && p_out < p_in && p_in <= 1.0))
    throw std::invalid_argument("planted partition: need 0 <= p_out < p_in <= 1");

  PlantedGraph g;
  g.truth.labels = planted_blocks(n, k);
  Rng rng(seed);
  std::vector<Edge> edges;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      double p = g.truth.labels[i] == g.truth.labels[j] ? p_in : p_out;
      if (rng.uniform() < p) edges.push_back({i, j, 1.0});
    }
  if (edges.empty()) throw std::invalid_argument("planted partition: generated graph has no edges");
  g.adjacency = SparseAdjacency::from_edges(n, edges);
  return g;
}

}  // namespace sgnmf
