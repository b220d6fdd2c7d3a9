#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <locale>
#include <sstream>

#include "oracles.hpp"
#include "sgnmf/config.hpp"
#include "sgnmf/datasets.hpp"
#include "sgnmf/experiment.hpp"
#include "sgnmf/planted.hpp"
#include "sgnmf/report.hpp"
#include "temp_dir.hpp"

using namespace sgnmf;
using testing_util::TempDir;

namespace {

ExperimentSpec base_spec(Index k, Index repeats) {
  ExperimentSpec s;
  s.dataset = "synthetic";
  s.solver.k = k;
  s.repeats = repeats;
  return s;
}

GroundTruth truth_of(const PlantedGraph& g) { return GroundTruth{g.truth.labels}; }

std::vector<std::string> read_lines(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST(Planted, BlocksAndValidation) {
  EXPECT_EQ(planted_blocks(7, 3), (std::vector<Index>{0, 0, 0, 1, 1, 2, 2}));
  EXPECT_THROW(make_planted_partition(10, 2, 0.3, 0.3, 0), std::invalid_argument);
  EXPECT_THROW(make_planted_partition(10, 0, 0.5, 0.1, 0), std::invalid_argument);
  EXPECT_THROW(make_planted_partition(10, 11, 0.5, 0.1, 0), std::invalid_argument);
  EXPECT_THROW(make_planted_partition(10, 2, 1.5, 0.1, 0), std::invalid_argument);
}

TEST(Planted, CliquesHaveNoCrossEdges) {
  auto g = make_planted_partition(12, 3, 1.0, 0.0, 4);
  EXPECT_EQ(g.adjacency.num_edges(), 3u * 6u);
  g.adjacency.for_each_entry([&](Index i, Index j, double) { EXPECT_EQ(g.truth.labels[i], g.truth.labels[j]); });
  auto again = make_planted_partition(12, 3, 1.0, 0.0, 4);
  EXPECT_EQ(again.adjacency.edges().size(), g.adjacency.edges().size());
}

TEST(Planted, ExactRecoveryOnDisjointCliques) {
  for (auto [n, k] : {std::pair<Index, Index>{20, 2}, {30, 3}, {40, 4}}) {
    auto g = make_planted_partition(n, k, 1.0, 0.0, 1);
    auto truth = truth_of(g);
    auto rep = run_experiment(g.adjacency, &truth, base_spec(k, 10));
    for (const auto& r : rep.records) {
      ASSERT_TRUE(r.ok);
      EXPECT_NEAR(*r.nmi, 1.0, 1e-12) << "n=" << n << " seed=" << r.seed;
    }
  }
}

TEST(Planted, RecoversModeratePartition) {
  auto g = make_planted_partition(60, 3, 0.5, 0.05, 0);
  auto truth = truth_of(g);
  auto rep = run_experiment(g.adjacency, &truth, base_spec(3, 10));
  ASSERT_EQ(rep.cells.size(), 1u);
  EXPECT_GE(rep.cells[0].nmi->mean, 0.9);
}

TEST(Experiment, RecordAndCellCounts) {
  auto g = make_planted_partition(30, 2, 0.6, 0.1, 2);
  auto truth = truth_of(g);
  auto spec = base_spec(2, 2);
  spec.grid_alpha = {0.0, 0.00390625};
  spec.grid_lambda = {0.0, 100.0};
  auto rep = run_experiment(g.adjacency, &truth, spec);
  ASSERT_EQ(rep.records.size(), 8u);
  ASSERT_EQ(rep.cells.size(), 4u);
  // Alpha-major cell order, seeds base + i within each cell.
  EXPECT_EQ(rep.cells[1].alpha, 0.0);
  EXPECT_EQ(rep.cells[1].lambda, 100.0);
  EXPECT_EQ(rep.cells[2].alpha, 0.00390625);
  for (std::size_t t = 0; t < rep.records.size(); ++t) {
    EXPECT_EQ(rep.records[t].cell, t / 2);
    EXPECT_EQ(rep.records[t].seed, t % 2);
    EXPECT_EQ(rep.records[t].alpha, rep.cells[t / 2].alpha);
  }
  for (const auto& c : rep.cells) {
    EXPECT_EQ(c.runs, 2u);
    EXPECT_EQ(c.nmi->values.size(), 2u);
  }
  ASSERT_TRUE(rep.best_cell.has_value());
}

TEST(Experiment, SingleRunHasZeroStd) {
  auto g = make_planted_partition(30, 2, 0.6, 0.1, 2);
  auto truth = truth_of(g);
  auto rep = run_experiment(g.adjacency, &truth, base_spec(2, 1));
  EXPECT_EQ(rep.cells[0].nmi->std, 0.0);
  EXPECT_EQ(rep.cells[0].modularity->std, 0.0);
  EXPECT_FALSE(rep.best_cell.has_value());
}

TEST(Experiment, AggregatesMatchRecords) {
  auto g = make_planted_partition(40, 2, 0.4, 0.1, 3);
  auto truth = truth_of(g);
  auto rep = run_experiment(g.adjacency, &truth, base_spec(2, 5));
  double sum = 0, sq = 0;
  for (const auto& r : rep.records) sum += r.modularity;
  double mean = sum / 5;
  for (const auto& r : rep.records) sq += (r.modularity - mean) * (r.modularity - mean);
  EXPECT_NEAR(rep.cells[0].modularity->mean, mean, 1e-14);
  EXPECT_NEAR(rep.cells[0].modularity->std, std::sqrt(sq / 4), 1e-14);
  for (const auto& r : rep.records) {
    EXPECT_EQ(static_cast<Index>(r.trajectory.size()), r.iterations + 1);
    EXPECT_EQ(r.trajectory.back(), r.final_objective);
  }
}

TEST(Experiment, ExplicitSeedsOverrideRepeats) {
  auto g = make_planted_partition(20, 2, 0.8, 0.1, 0);
  auto spec = base_spec(2, 7);
  spec.seeds = {11, 5};
  auto rep = run_experiment(g.adjacency, nullptr, spec);
  ASSERT_EQ(rep.records.size(), 2u);
  EXPECT_EQ(rep.records[0].seed, 11u);
  EXPECT_EQ(rep.records[1].seed, 5u);
  EXPECT_FALSE(rep.records[0].nmi.has_value());
  EXPECT_FALSE(rep.cells[0].nmi.has_value());
}

TEST(Experiment, FailedRunsAreRecordedAndExcluded) {
  auto g = make_planted_partition(20, 2, 0.8, 0.1, 0);
  auto truth = truth_of(g);
  auto spec = base_spec(2, 3);
  spec.solver.init_scale = 1e300;
  auto rep = run_experiment(g.adjacency, &truth, spec);
  EXPECT_EQ(rep.failed_runs(), 3u);
  EXPECT_EQ(rep.cells[0].failed, 3u);
  EXPECT_FALSE(rep.cells[0].nmi.has_value());
  EXPECT_FALSE(rep.cells[0].modularity.has_value());
  for (const auto& r : rep.records) EXPECT_FALSE(r.failure.empty());
}

TEST(Experiment, RejectsMismatchedTruthAndBadSpec) {
  auto g = make_planted_partition(20, 2, 0.8, 0.1, 0);
  GroundTruth short_truth{std::vector<Index>(19, 0)};
  EXPECT_THROW(run_experiment(g.adjacency, &short_truth, base_spec(2, 1)), DataError);
  auto spec = base_spec(2, 0);
  EXPECT_THROW(run_experiment(g.adjacency, nullptr, spec), std::invalid_argument);
  spec = base_spec(2, 1);
  spec.grid_lambda = {-1.0};
  EXPECT_THROW(run_experiment(g.adjacency, nullptr, spec), std::invalid_argument);
}

TEST(Experiment, IdenticalAcrossJobCounts) {
  auto g = make_planted_partition(40, 2, 0.4, 0.1, 5);
  auto truth = truth_of(g);
  auto spec = base_spec(2, 4);
  spec.grid_alpha = {0.0, 0.25};
  spec.grid_lambda = {0.0, 1.0, 10.0};
  spec.jobs = 1;
  auto a = report_to_json(run_experiment(g.adjacency, &truth, spec));
  for (unsigned jobs : {2u, 3u, 8u}) {
    spec.jobs = jobs;
    EXPECT_EQ(report_to_json(run_experiment(g.adjacency, &truth, spec)).dump(), a.dump()) << "jobs=" << jobs;
  }
}

TEST(Grid, SelectBestCellTieBreak) {
  auto cell = [](double a, double l, std::optional<double> q) {
    CellSummary c;
    c.alpha = a;
    c.lambda = l;
    if (q) c.modularity = Summary{{*q}, *q, 0.0};
    return c;
  };
  std::vector<CellSummary> cells{cell(0.5, 1, 0.4), cell(0.25, 10, 0.4), cell(0.25, 1, 0.4), cell(0, 0, 0.3),
                                 cell(0, 1, std::nullopt)};
  EXPECT_EQ(select_best_cell(cells), 2u);
  cells[3].modularity->mean = 0.41;
  EXPECT_EQ(select_best_cell(cells), 3u);
  EXPECT_FALSE(select_best_cell({cell(0, 0, std::nullopt)}).has_value());
}

TEST(Grid, DefaultGridHas64Cells) {
  auto g = make_planted_partition(16, 2, 1.0, 0.0, 0);
  auto spec = base_spec(2, 1);
  spec.solver.max_iters = 5;
  auto res = grid_search(g.adjacency, nullptr, spec);
  EXPECT_EQ(res.report.cells.size(), 64u);
  EXPECT_EQ(res.report.records.size(), 64u);
  ASSERT_TRUE(res.best.has_value());
  EXPECT_EQ(res.report.cells.front().alpha, 0.0);
  EXPECT_EQ(res.report.cells.back().alpha, 2.0);
  EXPECT_EQ(res.report.cells.back().lambda, 1000.0);
}

TEST(Grid, SingleCellGridDegeneratesToRun) {
  auto g = make_planted_partition(30, 2, 0.6, 0.1, 2);
  auto truth = truth_of(g);
  auto spec = base_spec(2, 3);
  auto plain = run_experiment(g.adjacency, &truth, spec);
  spec.grid_alpha = {spec.solver.alpha};
  spec.grid_lambda = {spec.solver.lambda};
  auto grid = run_experiment(g.adjacency, &truth, spec);
  ASSERT_EQ(grid.cells.size(), 1u);
  EXPECT_EQ(grid.best_cell, 0u);
  EXPECT_EQ(grid.cells[0].modularity->values, plain.cells[0].modularity->values);
  EXPECT_EQ(grid.cells[0].nmi->values, plain.cells[0].nmi->values);
}

TEST(Grid, ModularityPeaksAtInteriorLambda) {
  // A noisy planted graph where neither the unregularized model nor the
  // largest graph weight gives the best mean modularity.
  auto g = make_planted_partition(60, 3, 0.3, 0.1, 0);
  auto truth = truth_of(g);
  auto spec = base_spec(3, 5);
  spec.grid_alpha = {0.00390625};
  spec.grid_lambda = default_lambda_grid();
  auto res = grid_search(g.adjacency, &truth, spec);
  ASSERT_TRUE(res.best.has_value());
  double best_lambda = res.report.cells[*res.best].lambda;
  EXPECT_GT(best_lambda, 0.0);
  EXPECT_LT(best_lambda, 1000.0);
  EXPECT_GT(res.report.cells[*res.best].modularity->mean, res.report.cells.front().modularity->mean);
  EXPECT_GT(res.report.cells[*res.best].modularity->mean, res.report.cells.back().modularity->mean);
}

TEST(Report, JsonRoundTrip) {
  auto g = make_planted_partition(30, 2, 0.6, 0.1, 2);
  auto truth = truth_of(g);
  auto spec = base_spec(2, 2);
  spec.ground_truth = "truth.txt";
  spec.grid_alpha = {0.0, 0.5};
  spec.grid_lambda = {1.0};
  auto rep = run_experiment(g.adjacency, &truth, spec);
  rep.generated_at = "2020-01-01T00:00:00Z";
  auto j = report_to_json(rep);
  auto text = j.dump(2);
  auto back = report_from_json(json::parse(text));
  EXPECT_EQ(report_to_json(back).dump(2), text);
  EXPECT_EQ(j.at("schema_version"), kReportSchemaVersion);
  EXPECT_EQ(j.at("config").at("seeds"), json({0, 1}));
  EXPECT_FALSE(j.at("config").contains("jobs"));
  // Doubles survive exactly.
  EXPECT_EQ(back.records[3].final_objective, rep.records[3].final_objective);
  EXPECT_EQ(back.cells[1].modularity->std, rep.cells[1].modularity->std);
}

TEST(Report, ReplayReproducesRuns) {
  auto g = make_planted_partition(30, 2, 0.6, 0.1, 2);
  auto truth = truth_of(g);
  auto spec = base_spec(2, 3);
  spec.base_seed = 40;
  auto rep = run_experiment(g.adjacency, &truth, spec);
  auto replayed = spec_from_json(report_to_json(rep).at("config"));
  EXPECT_EQ(report_to_json(run_experiment(g.adjacency, &truth, replayed)).dump(), report_to_json(rep).dump());
}

TEST(Report, EmitJsonAndTrajectories) {
  TempDir dir;
  auto g = make_planted_partition(30, 2, 0.6, 0.1, 2);
  auto spec = base_spec(2, 2);
  auto rep = run_experiment(g.adjacency, nullptr, spec);
  emit_report(rep, ReportFormat::json, dir.path() / "out");
  auto j = json::parse(std::ifstream(dir.path() / "out" / "report.json"));
  EXPECT_EQ(j.at("runs").size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    auto lines = read_lines(dir.path() / "out" / "trajectories" / trajectory_file_name(i));
    ASSERT_FALSE(lines.empty());
    EXPECT_EQ(lines[0], "iteration,objective");
    EXPECT_EQ(static_cast<Index>(lines.size()) - 1, rep.records[i].iterations + 1);
  }
  EXPECT_EQ(trajectory_file_name(12), "run_0012.csv");
}

namespace {

struct CommaDecimal : std::numpunct<char> {
  char do_decimal_point() const override { return ','; }
  char do_thousands_sep() const override { return '.'; }
  std::string do_grouping() const override { return "\3"; }
};

}  // namespace

TEST(Report, CsvUsesDotDecimalUnderAnyLocale) {
  TempDir dir;
  auto g = make_planted_partition(30, 2, 0.6, 0.1, 2);
  auto truth = truth_of(g);
  auto spec = base_spec(2, 2);
  spec.grid_alpha = {0.5, 1.5};
  spec.solver.max_iters = 1500;
  spec.solver.tol = std::numeric_limits<double>::denorm_min();
  auto rep = run_experiment(g.adjacency, &truth, spec);
  ASSERT_GE(rep.records[0].iterations, 1000);

  auto previous = std::locale::global(std::locale(std::locale::classic(), new CommaDecimal));
  emit_report(rep, ReportFormat::csv, dir.path());
  std::locale::global(previous);

  auto runs = read_lines(dir.path() / "runs.csv");
  auto aggs = read_lines(dir.path() / "aggregates.csv");
  ASSERT_EQ(runs.size(), 1u + 4u);
  ASSERT_EQ(aggs.size(), 1u + 2u);
  auto header_fields = std::count(runs[0].begin(), runs[0].end(), ',');
  for (const auto& line : runs) EXPECT_EQ(std::count(line.begin(), line.end(), ','), header_fields) << line;
  EXPECT_NE(runs[1].find("0.5"), std::string::npos);
  EXPECT_EQ(runs[1].find("1.0"), std::string::npos);
  EXPECT_NE(aggs[2].find("1.5"), std::string::npos);
  auto traj = read_lines(dir.path() / "trajectories" / trajectory_file_name(0));
  ASSERT_EQ(static_cast<Index>(traj.size()), 1 + rep.records[0].iterations + 1);
  EXPECT_EQ(traj[1001].rfind("1000,", 0), 0u);
  EXPECT_EQ(traj[1].find(';'), std::string::npos);
  EXPECT_EQ(std::count(traj[1].begin(), traj[1].end(), ','), 1);
  EXPECT_FALSE(std::filesystem::exists(dir.path() / "report.json"));
}

TEST(Config, ParsesAllSections) {
  TempDir dir;
  auto path = dir.write("exp.ini",
                        "# comment\n"
                        "[data]\ndataset = graph.txt\nground_truth = truth.txt\nlargest_component = true\n"
                        "[solver]\nvariant = snmf-adj\nk = 4\nalpha = 0.25\nlambda = 10\nmax_iters = 50\n"
                        "tol = 1e-3\ntol_mode = relative\ninit_scale = 0.1\nepsilon = 1e-9\ny_update = printed\n"
                        "[experiment]\nrepeats = 3\nseed = 17\njobs = 4\n"
                        "[grid]\nalpha = default\nlambda = 0, 1, 10\n");
  ExperimentSpec s;
  load_config(path, s);
  EXPECT_EQ(s.dataset, "graph.txt");
  EXPECT_EQ(*s.ground_truth, "truth.txt");
  EXPECT_TRUE(s.loader.largest_component);
  EXPECT_EQ(s.solver.variant, Variant::snmf_adjusted);
  EXPECT_EQ(s.solver.k, 4);
  EXPECT_EQ(s.solver.alpha, 0.25);
  EXPECT_EQ(s.solver.lambda, 10.0);
  EXPECT_EQ(s.solver.max_iters, 50);
  EXPECT_EQ(s.solver.tol, 1e-3);
  EXPECT_EQ(s.solver.tol_mode, TolMode::relative);
  EXPECT_EQ(s.solver.init_scale, 0.1);
  EXPECT_EQ(s.solver.epsilon, 1e-9);
  EXPECT_EQ(s.solver.y_update, YUpdateForm::printed);
  EXPECT_EQ(s.repeats, 3);
  EXPECT_EQ(s.base_seed, 17u);
  EXPECT_EQ(s.jobs, 4u);
  EXPECT_EQ(s.grid_alpha, default_alpha_grid());
  EXPECT_EQ(s.grid_lambda, (std::vector<double>{0.0, 1.0, 10.0}));
  EXPECT_EQ(s.resolved_seeds(), (std::vector<std::uint64_t>{17, 18, 19}));
}

TEST(Config, KeepsUnsetFieldsAndLaterFilesOverride) {
  TempDir dir;
  ExperimentSpec s;
  s.solver.k = 5;
  s.solver.lambda = 3.0;
  load_config(dir.write("a.ini", "[solver]\nlambda = 7\n"), s);
  EXPECT_EQ(s.solver.k, 5);
  EXPECT_EQ(s.solver.lambda, 7.0);
  load_config(dir.write("b.ini", "[experiment]\nseeds = 4,2,9\n"), s);
  EXPECT_EQ(s.resolved_seeds(), (std::vector<std::uint64_t>{4, 2, 9}));
  EXPECT_EQ(s.solver.lambda, 7.0);
}

TEST(Config, RejectsUnknownAndMalformed) {
  TempDir dir;
  ExperimentSpec s;
  EXPECT_THROW(load_config(dir.write("a.ini", "[solver]\nlamda = 1\n"), s), std::invalid_argument);
  EXPECT_THROW(load_config(dir.write("b.ini", "[solvr]\nk = 1\n"), s), std::invalid_argument);
  EXPECT_THROW(load_config(dir.write("c.ini", "[solver]\nalpha = abc\n"), s), std::invalid_argument);
  EXPECT_THROW(load_config(dir.write("d.ini", "[solver]\nvariant = pca\n"), s), std::invalid_argument);
  EXPECT_THROW(load_config(dir.write("e.ini", "[grid]\nlambda = 1,,2\n"), s), std::invalid_argument);
  try {
    load_config(dir.write("f.ini", "[solver]\nk = 2\nthis line is broken\n"), s);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(load_config((dir.path() / "missing.ini").string(), s), ParseError);
}

TEST(Datasets, RegistryLookup) {
  auto d = find_dataset("Dolphins");
  ASSERT_TRUE(d.has_value());
  EXPECT_EQ(d->nodes, 62);
  EXPECT_EQ(d->edges, 159);
  EXPECT_EQ(d->communities, 2);
  auto c = find_dataset("cornell");
  ASSERT_TRUE(c.has_value());
  EXPECT_EQ(c->nodes, 195);
  EXPECT_EQ(c->edges, 304);
  EXPECT_EQ(c->communities, 5);
  EXPECT_FALSE(find_dataset("nope").has_value());
  EXPECT_EQ(kKnownDatasets.size(), 10u);
}

TEST(Experiment, LoadsFromFiles) {
  TempDir dir;
  auto g = make_planted_partition(24, 2, 0.7, 0.05, 9);
  auto idx = NodeIndex::sequential(24);
  ExperimentSpec spec = base_spec(2, 2);
  spec.dataset = (dir.path() / "g.txt").string();
  save_edge_list(spec.dataset, g.adjacency, idx);
  std::ostringstream truth;
  for (Index i = 23; i >= 0; --i) truth << i << '\t' << g.truth.labels[i] << '\n';
  spec.ground_truth = dir.write("t.txt", truth.str());
  auto rep = run_experiment(spec);
  EXPECT_EQ(rep.graph.nodes, 24);
  EXPECT_EQ(rep.graph.edges, g.adjacency.num_edges());
  EXPECT_EQ(*rep.graph.communities, 2);
  EXPECT_TRUE(rep.records[0].nmi.has_value());
  spec.ground_truth = dir.write("bad.txt", "0 1\n");
  EXPECT_THROW(run_experiment(spec), DataError);
}
