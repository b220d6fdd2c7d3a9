#pragma once

// JSON and CSV serialization of experiment reports.
//
// Output directory layout:
//   report.json              (json format) full nested report
//   runs.csv, aggregates.csv (csv format)  one row per run / per grid cell
//   trajectories/run_NNNN.csv               iteration,objective per successful run

#include <charconv>
#include <filesystem>
#include <fstream>
#include <locale>
#include <string>
#include <system_error>

#include "json.hpp"
#include "sgnmf/error.hpp"
#include "sgnmf/experiment.hpp"

namespace sgnmf {

using json = nlohmann::json;

enum class ReportFormat { json, csv };

inline ReportFormat parse_report_format(std::string_view s) {
  if (s == "json") return ReportFormat::json;
  if (s == "csv") return ReportFormat::csv;
  throw std::invalid_argument("unknown format '" + std::string(s) + "' (expected json|csv)");
}

// Shortest round-trip decimal form, always with '.' and independent of the
// global locale.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

// Everything needed to rerun the experiment. `jobs` is left out because it
// cannot change results.
inline json spec_to_json(const ExperimentSpec& s) {
  const auto& c = s.solver;
  json j;
  j["dataset"] = s.dataset;
  j["ground_truth"] = s.ground_truth ? json(*s.ground_truth) : json(nullptr);
  j["largest_component"] = s.loader.largest_component;
  j["variant"] = std::string(to_string(c.variant));
  j["k"] = c.k;
  j["alpha"] = c.alpha;
  j["lambda"] = c.lambda;
  j["max_iters"] = c.max_iters;
  j["tol"] = c.tol;
  j["tol_mode"] = c.tol_mode == TolMode::absolute ? "absolute" : "relative";
  j["init_scale"] = c.init_scale;
  j["epsilon"] = c.epsilon;
  j["y_update"] = c.y_update == YUpdateForm::split ? "split" : "printed";
  j["repeats"] = static_cast<Index>(s.resolved_seeds().size());
  j["seeds"] = s.resolved_seeds();
  j["grid_alpha"] = s.grid_alpha;
  j["grid_lambda"] = s.grid_lambda;
  return j;
}

inline ExperimentSpec spec_from_json(const json& j) {
  ExperimentSpec s;
  s.dataset = j.at("dataset").get<std::string>();
  if (!j.at("ground_truth").is_null()) s.ground_truth = j.at("ground_truth").get<std::string>();
  s.loader.largest_component = j.at("largest_component").get<bool>();
  auto& c = s.solver;
  c.variant = parse_variant(j.at("variant").get<std::string>());
  c.k = j.at("k").get<Index>();
  c.alpha = j.at("alpha").get<double>();
  c.lambda = j.at("lambda").get<double>();
  c.max_iters = j.at("max_iters").get<Index>();
  c.tol = j.at("tol").get<double>();
  c.tol_mode = j.at("tol_mode").get<std::string>() == "relative" ? TolMode::relative : TolMode::absolute;
  c.init_scale = j.at("init_scale").get<double>();
  c.epsilon = j.at("epsilon").get<double>();
  c.y_update = j.at("y_update").get<std::string>() == "printed" ? YUpdateForm::printed : YUpdateForm::split;
  s.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  s.repeats = static_cast<Index>(s.seeds.size());
  s.grid_alpha = j.at("grid_alpha").get<std::vector<double>>();
  s.grid_lambda = j.at("grid_lambda").get<std::vector<double>>();
  return s;
}

namespace detail {

inline json summary_to_json(const std::optional<Summary>& s) {
  if (!s) return nullptr;
  return {{"mean", s->mean}, {"std", s->std}, {"values", s->values}};
}

inline std::optional<Summary> summary_from_json(const json& j) {
  if (j.is_null()) return std::nullopt;
  Summary s;
  s.mean = j.at("mean").get<double>();
  s.std = j.at("std").get<double>();
  s.values = j.at("values").get<std::vector<double>>();
  return s;
}

}  // namespace detail

inline json report_to_json(const ExperimentReport& r) {
  json j;
  j["schema_version"] = r.schema_version;
  j["toolkit_version"] = r.toolkit_version;
  j["generated_at"] = r.generated_at;
  j["config"] = spec_to_json(r.spec);
  j["graph"] = {{"source", r.graph.source},
                {"nodes", r.graph.nodes},
                {"edges", r.graph.edges},
                {"communities", r.graph.communities ? json(*r.graph.communities) : json(nullptr)}};
  json runs = json::array();
  for (const auto& rec : r.records) {
    runs.push_back({{"cell", rec.cell},
                    {"seed", rec.seed},
                    {"alpha", rec.alpha},
                    {"lambda", rec.lambda},
                    {"status", rec.ok ? "ok" : "failed"},
                    {"failure", rec.failure},
                    {"iterations", rec.iterations},
                    {"terminated_by", std::string(to_string(rec.terminated_by))},
                    {"final_objective", rec.final_objective},
                    {"kkt_residual", rec.kkt_residual},
                    {"nmi", rec.nmi ? json(*rec.nmi) : json(nullptr)},
                    {"modularity", rec.modularity},
                    {"trajectory", rec.trajectory}});
  }
  j["runs"] = std::move(runs);
  json cells = json::array();
  for (std::size_t i = 0; i < r.cells.size(); ++i) {
    const auto& c = r.cells[i];
    cells.push_back({{"alpha", c.alpha},
                     {"lambda", c.lambda},
                     {"runs", c.runs},
                     {"failed", c.failed},
                     {"nmi", detail::summary_to_json(c.nmi)},
                     {"modularity", detail::summary_to_json(c.modularity)}});
  }
  j["cells"] = std::move(cells);
  j["best_cell"] = r.best_cell ? json(*r.best_cell) : json(nullptr);
  return j;
}

inline ExperimentReport report_from_json(const json& j) {
  ExperimentReport r;
  r.schema_version = j.at("schema_version").get<int>();
  if (r.schema_version != kReportSchemaVersion)
    throw DataError("unsupported report schema_version " + std::to_string(r.schema_version));
  r.toolkit_version = j.at("toolkit_version").get<std::string>();
  r.generated_at = j.at("generated_at").get<std::string>();
  r.spec = spec_from_json(j.at("config"));
  const auto& g = j.at("graph");
  r.graph.source = g.at("source").get<std::string>();
  r.graph.nodes = g.at("nodes").get<Index>();
  r.graph.edges = g.at("edges").get<std::size_t>();
  if (!g.at("communities").is_null()) r.graph.communities = g.at("communities").get<Index>();
  for (const auto& jr : j.at("runs")) {
    RunRecord rec;
    rec.cell = jr.at("cell").get<std::size_t>();
    rec.seed = jr.at("seed").get<std::uint64_t>();
    rec.alpha = jr.at("alpha").get<double>();
    rec.lambda = jr.at("lambda").get<double>();
    rec.ok = jr.at("status").get<std::string>() == "ok";
    rec.failure = jr.at("failure").get<std::string>();
    rec.iterations = jr.at("iterations").get<Index>();
    rec.terminated_by =
        jr.at("terminated_by").get<std::string>() == "tolerance" ? Termination::tolerance : Termination::max_iters;
    rec.final_objective = jr.at("final_objective").get<double>();
    rec.kkt_residual = jr.at("kkt_residual").get<double>();
    if (!jr.at("nmi").is_null()) rec.nmi = jr.at("nmi").get<double>();
    rec.modularity = jr.at("modularity").get<double>();
    rec.trajectory = jr.at("trajectory").get<std::vector<double>>();
    r.records.push_back(std::move(rec));
  }
  for (const auto& jc : j.at("cells")) {
    CellSummary c;
    c.alpha = jc.at("alpha").get<double>();
    c.lambda = jc.at("lambda").get<double>();
    c.runs = jc.at("runs").get<std::size_t>();
    c.failed = jc.at("failed").get<std::size_t>();
    c.nmi = detail::summary_from_json(jc.at("nmi"));
    c.modularity = detail::summary_from_json(jc.at("modularity"));
    r.cells.push_back(std::move(c));
  }
  if (!j.at("best_cell").is_null()) r.best_cell = j.at("best_cell").get<std::size_t>();
  return r;
}

namespace detail {

inline std::ofstream open_output(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw DataError("cannot write " + p.string());
  out.imbue(std::locale::classic());
  return out;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

}  // namespace detail

inline std::string trajectory_file_name(std::size_t run) {
  std::string num = std::to_string(run);
  return "run_" + std::string(num.size() < 4 ? 4 - num.size() : 0, '0') + num + ".csv";
}

inline void write_runs_csv(const ExperimentReport& r, std::ostream& out) {
  out << "run,cell,seed,alpha,lambda,status,iterations,terminated_by,final_objective,kkt_residual,nmi,modularity,"
         "failure\n";
  for (std::size_t i = 0; i < r.records.size(); ++i) {
    const auto& rec = r.records[i];
    out << i << ',' << rec.cell << ',' << rec.seed << ',' << format_double(rec.alpha) << ','
        << format_double(rec.lambda) << ',' << (rec.ok ? "ok" : "failed") << ',' << rec.iterations << ','
        << to_string(rec.terminated_by) << ',' << format_double(rec.final_objective) << ','
        << format_double(rec.kkt_residual) << ',' << (rec.nmi ? format_double(*rec.nmi) : "") << ','
        << format_double(rec.modularity) << ',' << detail::csv_field(rec.failure) << '\n';
  }
}

inline void write_aggregates_csv(const ExperimentReport& r, std::ostream& out) {
  out << "cell,alpha,lambda,runs,failed,nmi_mean,nmi_std,modularity_mean,modularity_std,best\n";
  auto opt = [](const std::optional<Summary>& s, bool mean) {
    return s ? format_double(mean ? s->mean : s->std) : std::string();
  };
  for (std::size_t i = 0; i < r.cells.size(); ++i) {
    const auto& c = r.cells[i];
    out << i << ',' << format_double(c.alpha) << ',' << format_double(c.lambda) << ',' << c.runs << ',' << c.failed
        << ',' << opt(c.nmi, true) << ',' << opt(c.nmi, false) << ',' << opt(c.modularity, true) << ','
        << opt(c.modularity, false) << ',' << (r.best_cell && *r.best_cell == i ? 1 : 0) << '\n';
  }
}

inline void write_trajectory_csv(const std::vector<double>& objective, std::ostream& out) {
  out << "iteration,objective\n";
  for (std::size_t t = 0; t < objective.size(); ++t) out << t << ',' << format_double(objective[t]) << '\n';
}

inline void emit_report(const ExperimentReport& r, ReportFormat format, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir / "trajectories", ec);
  if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());

  if (format == ReportFormat::json) {
    auto out = detail::open_output(dir / "report.json");
    out << report_to_json(r).dump(2) << '\n';
  } else {
    auto runs = detail::open_output(dir / "runs.csv");
    write_runs_csv(r, runs);
    auto agg = detail::open_output(dir / "aggregates.csv");
    write_aggregates_csv(r, agg);
  }
  for (std::size_t i = 0; i < r.records.size(); ++i) {
    if (!r.records[i].ok) continue;
    auto out = detail::open_output(dir / "trajectories" / trajectory_file_name(i));
    write_trajectory_csv(r.records[i].trajectory, out);
  }
}

}  // namespace sgnmf
