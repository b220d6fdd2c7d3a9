#pragma once

// Experiment config files: INI-style "key = value" lines grouped in
// [sections]. Lists are comma separated.
//
//   [data]        dataset, ground_truth, largest_component
//   [solver]      variant, k, alpha, lambda, max_iters, tol, tol_mode,
//                 init_scale, epsilon, y_update
//   [experiment]  repeats, seed, seeds, jobs
//   [grid]        alpha, lambda   (a list, or the word "default")
//
// Precedence: built-in defaults < config file < command-line flags.

#include <charconv>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "sgnmf/error.hpp"
#include "sgnmf/experiment.hpp"

namespace sgnmf {

namespace detail {

inline std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

inline double to_double(const std::string& key, const std::string& s) {
  auto v = parse_double(trim(s));
  if (!v) throw std::invalid_argument(key + ": not a number: '" + s + "'");
  return *v;
}

inline std::uint64_t to_u64(const std::string& key, const std::string& s) {
  std::string t = trim(s);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    throw std::invalid_argument(key + ": not a non-negative integer: '" + s + "'");
  return v;
}

inline bool to_bool(const std::string& key, const std::string& s) {
  std::string t = trim(s);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw std::invalid_argument(key + ": not a boolean: '" + s + "'");
}

}  // namespace detail

// Comma-separated numbers; "default" expands to `fallback`.
inline std::vector<double> parse_double_list(const std::string& key, const std::string& s,
                                             const std::vector<double>& fallback = {}) {
  if (detail::trim(s) == "default") return fallback;
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto end = s.find(',', start);
    if (end == std::string::npos) end = s.size();
    out.push_back(detail::to_double(key, s.substr(start, end - start)));
    start = end + 1;
  }
  return out;
}

inline std::vector<std::uint64_t> parse_seed_list(const std::string& key, const std::string& s) {
  std::vector<std::uint64_t> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto end = s.find(',', start);
    if (end == std::string::npos) end = s.size();
    out.push_back(detail::to_u64(key, s.substr(start, end - start)));
    start = end + 1;
  }
  return out;
}

// Applies every key present in `tree` to `spec`. Unknown sections or keys
// are rejected so that typos do not silently fall back to defaults.
inline void apply_config(const boost::property_tree::ptree& tree, ExperimentSpec& spec) {
  static const std::map<std::string, std::set<std::string>> known = {
      {"data", {"dataset", "ground_truth", "largest_component"}},
      {"solver", {"variant", "k", "alpha", "lambda", "max_iters", "tol", "tol_mode", "init_scale", "epsilon", "y_update"}},
      {"experiment", {"repeats", "seed", "seeds", "jobs"}},
      {"grid", {"alpha", "lambda"}},
  };
  for (const auto& [section, body] : tree) {
    auto it = known.find(section);
    if (it == known.end()) throw std::invalid_argument("unknown config section [" + section + "]");
    for (const auto& [key, _] : body)
      if (!it->second.count(key)) throw std::invalid_argument("unknown config key " + section + "." + key);
  }

  auto get = [&](const std::string& path) { return tree.get_optional<std::string>(path); };
  auto& c = spec.solver;
  if (auto v = get("data.dataset")) spec.dataset = detail::trim(*v);
  if (auto v = get("data.ground_truth")) spec.ground_truth = detail::trim(*v);
  if (auto v = get("data.largest_component")) spec.loader.largest_component = detail::to_bool("largest_component", *v);
  if (auto v = get("solver.variant")) c.variant = parse_variant(detail::trim(*v));
  if (auto v = get("solver.k")) c.k = static_cast<Index>(detail::to_u64("k", *v));
  if (auto v = get("solver.alpha")) c.alpha = detail::to_double("alpha", *v);
  if (auto v = get("solver.lambda")) c.lambda = detail::to_double("lambda", *v);
  if (auto v = get("solver.max_iters")) c.max_iters = static_cast<Index>(detail::to_u64("max_iters", *v));
  if (auto v = get("solver.tol")) c.tol = detail::to_double("tol", *v);
  if (auto v = get("solver.tol_mode")) {
    auto t = detail::trim(*v);
    if (t != "absolute" && t != "relative") throw std::invalid_argument("tol_mode: expected absolute|relative");
    c.tol_mode = t == "absolute" ? TolMode::absolute : TolMode::relative;
  }
  if (auto v = get("solver.init_scale")) c.init_scale = detail::to_double("init_scale", *v);
  if (auto v = get("solver.epsilon")) c.epsilon = detail::to_double("epsilon", *v);
  if (auto v = get("solver.y_update")) {
    auto t = detail::trim(*v);
    if (t != "split" && t != "printed") throw std::invalid_argument("y_update: expected split|printed");
    c.y_update = t == "split" ? YUpdateForm::split : YUpdateForm::printed;
  }
  if (auto v = get("experiment.repeats")) spec.repeats = static_cast<Index>(detail::to_u64("repeats", *v));
  if (auto v = get("experiment.seed")) spec.base_seed = detail::to_u64("seed", *v);
  if (auto v = get("experiment.seeds")) spec.seeds = parse_seed_list("seeds", *v);
  if (auto v = get("experiment.jobs")) spec.jobs = static_cast<unsigned>(detail::to_u64("jobs", *v));
  if (auto v = get("grid.alpha")) spec.grid_alpha = parse_double_list("grid.alpha", *v, default_alpha_grid());
  if (auto v = get("grid.lambda")) spec.grid_lambda = parse_double_list("grid.lambda", *v, default_lambda_grid());
}

inline void load_config(const std::string& path, ExperimentSpec& spec) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ParseError(e.filename(), e.line(), e.message());
  }
  apply_config(tree, spec);
}

}  // namespace sgnmf
