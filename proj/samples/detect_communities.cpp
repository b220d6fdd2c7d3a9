// Minimal use of the library: factorize one graph and print the detected
// communities.
//
//   detect_communities GRAPH K [TRUTH]

#include <cstdlib>
#include <iostream>

#include "sgnmf/sgnmf.hpp"

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: " << argv[0] << " GRAPH K [TRUTH]\n";
    return 1;
  }
  try {
    auto g = sgnmf::load_edge_list(argv[1]);

    sgnmf::SolverConfig cfg;
    cfg.k = std::atoi(argv[2]);
    cfg.seed = 0;
    auto result = sgnmf::solve(g.adjacency, cfg);
    auto part = sgnmf::assign_communities(result.factors.y);

    std::cout << "iterations: " << result.trace.iters_run << " ("
              << sgnmf::to_string(result.trace.terminated_by) << ")\n"
              << "modularity: " << sgnmf::modularity(g.adjacency, part) << '\n';
    if (argc > 3) {
      auto truth = sgnmf::load_ground_truth(argv[3], g.index);
      std::cout << "NMI: " << sgnmf::nmi(part.labels, truth.labels) << '\n';
    }
    for (sgnmf::Index i = 0; i < g.adjacency.size(); ++i)
      std::cout << g.index.label(i) << ' ' << part.labels[i] << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
