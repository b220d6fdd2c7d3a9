// sgnmf: command-line front end for community detection experiments.
//
//   sgnmf run     --dataset G --ground-truth T --k 2 [--out DIR]
//   sgnmf grid    --dataset G --grid-alpha default --grid-lambda 0,1,10
//   sgnmf gen     --n 60 --k 3 --p-in 0.5 --p-out 0.05 --out DIR
//   sgnmf inspect --dataset G
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 every run failed
// numerically.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "sgnmf/sgnmf.hpp"

namespace fs = std::filesystem;
using namespace sgnmf;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flags shared by `run` and `grid`. Every field is optional so that only
// flags given on the command line override the config file.
struct ExperimentFlags {
  std::optional<std::string> config, replay, dataset, ground_truth, variant, tol_mode, y_update, seeds, grid_alpha,
      grid_lambda;
  std::optional<Index> k, max_iters, repeats;
  std::optional<double> alpha, lambda, tol, init_scale, epsilon;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> jobs;
  bool largest_component = false;
  std::string out;
  std::string format = "json";
  bool quiet = false;
};

void add_experiment_flags(CLI::App* cmd, ExperimentFlags& f) {
  cmd->add_option("--config", f.config, "Config file (key = value with [sections])");
  cmd->add_option("--replay", f.replay, "Rerun the experiment embedded in a JSON report");
  cmd->add_option("--dataset", f.dataset, "Edge-list file");
  cmd->add_option("--ground-truth", f.ground_truth, "Node/community file; enables NMI");
  cmd->add_option("--variant", f.variant, "nmf | snmf | snmf-adj | sgnmf");
  cmd->add_option("--k", f.k, "Number of communities (default: from ground truth or dataset registry)");
  cmd->add_option("--alpha", f.alpha, "Symmetry regularization weight");
  cmd->add_option("--lambda", f.lambda, "Graph regularization weight");
  cmd->add_option("--seed", f.seed, "Base seed; run i uses seed + i");
  cmd->add_option("--seeds", f.seeds, "Explicit comma-separated seed list (overrides --seed/--repeats)");
  cmd->add_option("--repeats", f.repeats, "Runs per cell");
  cmd->add_option("--max-iters", f.max_iters, "Iteration cap");
  cmd->add_option("--tol", f.tol, "Stop when the objective changes by less than this");
  cmd->add_option("--tol-mode", f.tol_mode, "absolute | relative");
  cmd->add_option("--init-scale", f.init_scale, "Initial entries are uniform on (0, init-scale)");
  cmd->add_option("--epsilon", f.epsilon, "Denominator guard");
  cmd->add_option("--y-update", f.y_update, "split | printed (printed is for comparison only)");
  cmd->add_option("--grid-alpha", f.grid_alpha, "Comma-separated alpha candidates, or 'default'");
  cmd->add_option("--grid-lambda", f.grid_lambda, "Comma-separated lambda candidates, or 'default'");
  cmd->add_option("--jobs", f.jobs, "Worker threads (results do not depend on it)");
  cmd->add_flag("--largest-component", f.largest_component, "Keep only the largest connected component");
  cmd->add_option("--out", f.out, "Output directory for report files");
  cmd->add_option("--format", f.format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
  cmd->add_flag("--quiet", f.quiet, "Only print errors");
}

std::string utc_now() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

ExperimentSpec build_spec(const ExperimentFlags& f, bool grid) {
  ExperimentSpec spec;
  spec.solver.k = 0;  // 0 until a config, replay or flag sets it
  if (f.replay) {
    std::ifstream in(*f.replay);
    if (!in) throw DataError("cannot open " + *f.replay);
    spec = spec_from_json(json::parse(in).at("config"));
  }
  if (f.config) {
    auto before = spec;
    load_config(*f.config, spec);
    // Paths in a config file are relative to the file itself.
    auto base = fs::path(*f.config).parent_path();
    auto rebase = [&](std::string& p) {
      if (!p.empty() && fs::path(p).is_relative()) p = (base / p).string();
    };
    if (spec.dataset != before.dataset) rebase(spec.dataset);
    if (spec.ground_truth && spec.ground_truth != before.ground_truth) rebase(*spec.ground_truth);
  }

  auto& c = spec.solver;
  if (f.dataset) spec.dataset = *f.dataset;
  if (f.ground_truth) spec.ground_truth = *f.ground_truth;
  if (f.largest_component) spec.loader.largest_component = true;
  if (f.variant) c.variant = parse_variant(*f.variant);
  if (f.k) c.k = *f.k;
  if (f.alpha) c.alpha = *f.alpha;
  if (f.lambda) c.lambda = *f.lambda;
  if (f.max_iters) c.max_iters = *f.max_iters;
  if (f.tol) c.tol = *f.tol;
  if (f.tol_mode) {
    if (*f.tol_mode != "absolute" && *f.tol_mode != "relative") throw UsageError("--tol-mode: absolute|relative");
    c.tol_mode = *f.tol_mode == "absolute" ? TolMode::absolute : TolMode::relative;
  }
  if (f.init_scale) c.init_scale = *f.init_scale;
  if (f.epsilon) c.epsilon = *f.epsilon;
  if (f.y_update) {
    if (*f.y_update != "split" && *f.y_update != "printed") throw UsageError("--y-update: split|printed");
    c.y_update = *f.y_update == "split" ? YUpdateForm::split : YUpdateForm::printed;
  }
  if (f.seed) {
    spec.base_seed = *f.seed;
    spec.seeds.clear();
  }
  if (f.repeats) {
    spec.repeats = *f.repeats;
    spec.seeds.clear();
  }
  if (f.seeds) spec.seeds = parse_seed_list("--seeds", *f.seeds);
  if (f.grid_alpha) spec.grid_alpha = parse_double_list("--grid-alpha", *f.grid_alpha, default_alpha_grid());
  if (f.grid_lambda) spec.grid_lambda = parse_double_list("--grid-lambda", *f.grid_lambda, default_lambda_grid());
  if (f.jobs) spec.jobs = *f.jobs;
  if (grid) {
    if (spec.grid_alpha.empty()) spec.grid_alpha = default_alpha_grid();
    if (spec.grid_lambda.empty()) spec.grid_lambda = default_lambda_grid();
  }

  if (spec.dataset.empty()) throw UsageError("--dataset is required");
  if (c.k == 0) {
    // K is prior knowledge: take it from the ground truth or the registry.
    if (spec.ground_truth) {
      // resolved after loading
    } else if (auto info = find_dataset(fs::path(spec.dataset).stem().string())) {
      c.k = info->communities;
    } else {
      throw UsageError("--k is required when neither ground truth nor a known dataset name gives it");
    }
  }
  return spec;
}

void print_summary(const ExperimentReport& r, std::ostream& os) {
  os << "graph: " << r.graph.source << "  n=" << r.graph.nodes << "  m=" << r.graph.edges;
  if (r.graph.communities) os << "  communities=" << *r.graph.communities;
  os << "\nvariant=" << to_string(r.spec.solver.variant) << "  k=" << r.spec.solver.k
     << "  runs/cell=" << r.spec.resolved_seeds().size() << "\n";
  auto pct = [](const std::optional<Summary>& s) {
    if (!s) return std::string("-");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f+-%.2f", 100.0 * s->mean, 100.0 * s->std);
    return std::string(buf);
  };
  auto num = [](const std::optional<Summary>& s) {
    if (!s) return std::string("-");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f+-%.4f", s->mean, s->std);
    return std::string(buf);
  };
  os << "alpha\tlambda\tNMI%\tmodularity\tfailed\n";
  for (std::size_t i = 0; i < r.cells.size(); ++i) {
    const auto& c = r.cells[i];
    os << format_double(c.alpha) << '\t' << format_double(c.lambda) << '\t' << pct(c.nmi) << '\t'
       << num(c.modularity) << '\t' << c.failed << '/' << c.runs;
    if (r.best_cell && *r.best_cell == i) os << "\t<- best";
    os << '\n';
  }
}

int run_command(const ExperimentFlags& f, bool grid) {
  ExperimentSpec spec = build_spec(f, grid);
  auto data = load_experiment_data(spec);
  if (spec.solver.k == 0) spec.solver.k = data.truth->num_communities();
  auto report = run_experiment(data.graph.adjacency, data.truth ? &*data.truth : nullptr, spec);
  report.generated_at = utc_now();
  if (!f.out.empty()) emit_report(report, parse_report_format(f.format), f.out);
  if (!f.quiet) print_summary(report, std::cout);
  for (const auto& rec : report.records)
    if (!rec.ok) std::cerr << "run failed (seed " << rec.seed << "): " << rec.failure << '\n';
  if (report.failed_runs() == report.records.size()) {
    std::cerr << "error: every run failed numerically\n";
    return kExitNumerical;
  }
  return 0;
}

struct GenFlags {
  Index n = 60, k = 3;
  double p_in = 0.5, p_out = 0.05;
  std::uint64_t seed = 0;
  std::string out;
};

int gen_command(const GenFlags& f) {
  PlantedGraph g;
  try {
    g = make_planted_partition(f.n, f.k, f.p_in, f.p_out, f.seed);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  std::error_code ec;
  fs::create_directories(f.out, ec);
  if (ec) throw DataError("cannot create " + f.out + ": " + ec.message());
  auto idx = NodeIndex::sequential(f.n);
  save_edge_list((fs::path(f.out) / "graph.txt").string(), g.adjacency, idx);
  std::ofstream truth(fs::path(f.out) / "truth.txt");
  if (!truth) throw DataError("cannot write truth file in " + f.out);
  for (Index i = 0; i < f.n; ++i) truth << i << ' ' << g.truth.labels[i] << '\n';
  std::cout << "wrote " << f.n << " nodes, " << g.adjacency.num_edges() << " edges to " << f.out << '\n';
  return 0;
}

int inspect_command(const std::string& dataset, bool largest, const std::string& name) {
  auto g = load_edge_list(dataset, {.largest_component = largest});
  const auto& a = g.adjacency;
  std::cout << "nodes: " << a.size() << "\nedges: " << a.num_edges() << "\ncomponents: " << count_components(a)
            << "\nweighted: " << (a.is_binary() ? "no" : "yes") << '\n';
  std::map<long, long> hist;
  for (Index i = 0; i < a.size(); ++i) ++hist[static_cast<long>(a.row_ptr()[i + 1] - a.row_ptr()[i])];
  std::cout << "degree histogram (degree count):\n";
  for (auto [d, c] : hist) std::cout << "  " << d << ' ' << c << '\n';
  auto info = find_dataset(name.empty() ? fs::path(dataset).stem().string() : name);
  if (info) {
    std::cout << "reference " << info->name << ": nodes " << info->nodes << ", edges " << info->edges << ", K "
              << info->communities << " (" << info->description << ")";
    if (info->nodes != a.size() || info->edges != static_cast<long>(a.num_edges())) std::cout << "  [size differs]";
    std::cout << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Symmetry- and graph-regularized NMF community detection"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolkitVersion);

  ExperimentFlags run_flags, grid_flags;
  auto* run = app.add_subcommand("run", "Multi-seed run of one configuration");
  add_experiment_flags(run, run_flags);
  auto* grid = app.add_subcommand("grid", "Sweep alpha x lambda and pick the cell with the best mean modularity");
  add_experiment_flags(grid, grid_flags);

  GenFlags gen_flags;
  auto* gen = app.add_subcommand("gen", "Generate a planted-partition graph and its ground truth");
  gen->add_option("--n", gen_flags.n, "Node count");
  gen->add_option("--k", gen_flags.k, "Block count");
  gen->add_option("--p-in", gen_flags.p_in, "Edge probability inside a block");
  gen->add_option("--p-out", gen_flags.p_out, "Edge probability across blocks");
  gen->add_option("--seed", gen_flags.seed, "Random seed");
  gen->add_option("--out", gen_flags.out, "Output directory")->required();

  std::string inspect_dataset, inspect_name;
  bool inspect_largest = false;
  auto* inspect = app.add_subcommand("inspect", "Print dataset statistics");
  inspect->add_option("--dataset", inspect_dataset, "Edge-list file")->required();
  inspect->add_option("--name", inspect_name, "Registry name to compare against (default: file stem)");
  inspect->add_flag("--largest-component", inspect_largest, "Keep only the largest connected component");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*run) return run_command(run_flags, false);
    if (*grid) return run_command(grid_flags, true);
    if (*gen) return gen_command(gen_flags);
    if (*inspect) return inspect_command(inspect_dataset, inspect_largest, inspect_name);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const json::exception& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
