#pragma once

// Multi-seed experiment runner and (alpha, lambda) grid search.
//
// Every (cell, seed) pair is an independent run that owns its factors and
// reads the shared graph. Runs are scheduled on a small thread pool but
// written into pre-sized slots, so the report never depends on `jobs`.

#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "sgnmf/factorization.hpp"
#include "sgnmf/graph.hpp"
#include "sgnmf/metrics.hpp"
#include "sgnmf/version.hpp"

namespace sgnmf {

// Candidate values used for hyperparameter sensitivity sweeps.
inline std::vector<double> default_alpha_grid() {
  return {0.0, 0x1.0p-10, 0x1.0p-8, 0x1.0p-6, 0x1.0p-4, 0x1.0p-2, 1.0, 2.0};
}
inline std::vector<double> default_lambda_grid() { return {0.0, 1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0, 1000.0}; }

struct ExperimentSpec {
  std::string dataset;
  std::optional<std::string> ground_truth;
  LoaderOptions loader;
  SolverConfig solver;
  Index repeats = 10;
  std::uint64_t base_seed = 0;
  std::vector<std::uint64_t> seeds;  // when set, overrides base_seed/repeats
  std::vector<double> grid_alpha;    // empty: use solver.alpha
  std::vector<double> grid_lambda;   // empty: use solver.lambda
  unsigned jobs = 1;                 // execution only; never affects results

  bool grid_mode() const { return !grid_alpha.empty() || !grid_lambda.empty(); }

  // Run i uses base_seed + i unless explicit seeds were given.
  std::vector<std::uint64_t> resolved_seeds() const {
    if (!seeds.empty()) return seeds;
    std::vector<std::uint64_t> s;
    for (Index i = 0; i < repeats; ++i) s.push_back(base_seed + static_cast<std::uint64_t>(i));
    return s;
  }

  // Alpha-major order.
  std::vector<std::pair<double, double>> cells() const {
    auto as = grid_alpha.empty() ? std::vector<double>{solver.alpha} : grid_alpha;
    auto ls = grid_lambda.empty() ? std::vector<double>{solver.lambda} : grid_lambda;
    std::vector<std::pair<double, double>> out;
    for (double a : as)
      for (double l : ls) out.emplace_back(a, l);
    return out;
  }

  void validate() const {
    if (seeds.empty() && repeats < 1) throw std::invalid_argument("repeats must be >= 1");
    for (auto [a, l] : cells()) {
      if (!(a >= 0.0) || !(l >= 0.0)) throw std::invalid_argument("grid values must be >= 0");
    }
  }
};

struct RunRecord {
  std::size_t cell = 0;
  std::uint64_t seed = 0;
  double alpha = 0.0;
  double lambda = 0.0;
  bool ok = true;
  std::string failure;
  Index iterations = 0;
  Termination terminated_by = Termination::max_iters;
  double final_objective = 0.0;
  double kkt_residual = 0.0;
  std::optional<double> nmi;
  double modularity = 0.0;
  std::vector<double> trajectory;
};

struct CellSummary {
  double alpha = 0.0;
  double lambda = 0.0;
  std::size_t runs = 0;
  std::size_t failed = 0;  // excluded from the summaries below
  std::optional<Summary> nmi;
  std::optional<Summary> modularity;
};

struct GraphInfo {
  std::string source;
  Index nodes = 0;
  std::size_t edges = 0;
  std::optional<Index> communities;
};

struct ExperimentReport {
  int schema_version = kReportSchemaVersion;
  std::string toolkit_version = kToolkitVersion;
  std::string generated_at;  // only field allowed to differ between identical runs
  ExperimentSpec spec;
  GraphInfo graph;
  std::vector<RunRecord> records;
  std::vector<CellSummary> cells;
  std::optional<std::size_t> best_cell;

  std::size_t failed_runs() const {
    std::size_t f = 0;
    for (const auto& r : records) f += r.ok ? 0 : 1;
    return f;
  }
};

inline RunRecord run_single(const SparseAdjacency& a, const GroundTruth* truth, SolverConfig cfg) {
  RunRecord rec;
  rec.seed = cfg.seed;
  rec.alpha = cfg.alpha;
  rec.lambda = cfg.lambda;
  try {
    auto res = solve(a, cfg);
    rec.iterations = res.trace.iters_run;
    rec.terminated_by = res.trace.terminated_by;
    rec.final_objective = res.trace.objective.back();
    rec.kkt_residual = res.trace.kkt_residual;
    rec.trajectory = std::move(res.trace.objective);
    auto part = assign_communities(res.factors.y);
    rec.modularity = modularity(a, part);
    if (truth) rec.nmi = nmi(part.labels, truth->labels);
  } catch (const NumericalError& e) {
    rec.ok = false;
    rec.failure = e.what();
  }
  return rec;
}

// Highest mean modularity; ties go to the smaller alpha, then the smaller
// lambda. Cells in which every run failed are never selected.
inline std::optional<std::size_t> select_best_cell(const std::vector<CellSummary>& cells) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& c = cells[i];
    if (!c.modularity) continue;
    if (!best) {
      best = i;
      continue;
    }
    const auto& b = cells[*best];
    double qc = c.modularity->mean, qb = b.modularity->mean;
    if (qc > qb || (qc == qb && (c.alpha < b.alpha || (c.alpha == b.alpha && c.lambda < b.lambda)))) best = i;
  }
  return best;
}

inline std::vector<CellSummary> summarize_cells(const std::vector<std::pair<double, double>>& cells,
                                                const std::vector<RunRecord>& records) {
  std::vector<CellSummary> out(cells.size());
  std::vector<std::vector<double>> nmis(cells.size()), mods(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) std::tie(out[c].alpha, out[c].lambda) = cells[c];
  for (const auto& r : records) {
    auto& s = out[r.cell];
    ++s.runs;
    if (!r.ok) {
      ++s.failed;
      continue;
    }
    mods[r.cell].push_back(r.modularity);
    if (r.nmi) nmis[r.cell].push_back(*r.nmi);
  }
  for (std::size_t c = 0; c < cells.size(); ++c) {
    if (!mods[c].empty()) out[c].modularity = aggregate(mods[c]);
    if (!nmis[c].empty()) out[c].nmi = aggregate(nmis[c]);
  }
  return out;
}

// Runs every (cell, seed) on an already loaded graph. `truth`, when given,
// must cover every node.
inline ExperimentReport run_experiment(const SparseAdjacency& a, const GroundTruth* truth,
                                       const ExperimentSpec& spec) {
  spec.validate();
  spec.solver.validate(a.size());
  if (truth && static_cast<Index>(truth->labels.size()) != a.size())
    throw DataError("ground truth covers " + std::to_string(truth->labels.size()) + " nodes, graph has " +
                    std::to_string(a.size()));

  ExperimentReport rep;
  rep.spec = spec;
  rep.graph.source = spec.dataset;
  rep.graph.nodes = a.size();
  rep.graph.edges = a.num_edges();
  if (truth) rep.graph.communities = truth->num_communities();

  const auto cells = spec.cells();
  const auto seeds = spec.resolved_seeds();
  const std::size_t total = cells.size() * seeds.size();
  rep.records.resize(total);

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&] {
    for (std::size_t t; (t = next.fetch_add(1)) < total;) {
      try {
        std::size_t c = t / seeds.size();
        SolverConfig cfg = spec.solver;
        std::tie(cfg.alpha, cfg.lambda) = cells[c];
        cfg.seed = seeds[t % seeds.size()];
        rep.records[t] = run_single(a, truth, cfg);
        rep.records[t].cell = c;
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  unsigned jobs = std::max(1u, std::min<unsigned>(spec.jobs, static_cast<unsigned>(total)));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);

  rep.cells = summarize_cells(cells, rep.records);
  if (spec.grid_mode()) rep.best_cell = select_best_cell(rep.cells);
  return rep;
}

struct ExperimentData {
  LoadedGraph graph;
  std::optional<GroundTruth> truth;
};

inline ExperimentData load_experiment_data(const ExperimentSpec& spec) {
  if (spec.dataset.empty()) throw DataError("no dataset given");
  ExperimentData d;
  d.graph = load_edge_list(spec.dataset, spec.loader);
  if (spec.ground_truth) d.truth = load_ground_truth(*spec.ground_truth, d.graph.index, spec.loader.largest_component);
  return d;
}

inline ExperimentReport run_experiment(const ExperimentSpec& spec) {
  auto data = load_experiment_data(spec);
  return run_experiment(data.graph.adjacency, data.truth ? &*data.truth : nullptr, spec);
}

struct GridResult {
  ExperimentReport report;
  std::optional<std::size_t> best;  // index into report.cells
};

// Evaluates every (alpha, lambda) cell; an empty grid list falls back to
// the default candidate set for that parameter.
inline GridResult grid_search(const SparseAdjacency& a, const GroundTruth* truth, ExperimentSpec spec) {
  if (spec.grid_alpha.empty()) spec.grid_alpha = default_alpha_grid();
  if (spec.grid_lambda.empty()) spec.grid_lambda = default_lambda_grid();
  GridResult g{run_experiment(a, truth, spec), std::nullopt};
  g.best = g.report.best_cell;
  return g;
}

inline GridResult grid_search(ExperimentSpec spec) {
  if (spec.grid_alpha.empty()) spec.grid_alpha = default_alpha_grid();
  if (spec.grid_lambda.empty()) spec.grid_lambda = default_lambda_grid();
  auto data = load_experiment_data(spec);
  return grid_search(data.graph.adjacency, data.truth ? &*data.truth : nullptr, spec);
}

}  // namespace sgnmf
