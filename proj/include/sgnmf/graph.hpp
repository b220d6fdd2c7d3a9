#pragma once

// Undirected weighted graphs in CSR form, plus the edge-list and
// ground-truth readers and the sparse products used by the solver.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <queue>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sgnmf/error.hpp"

namespace sgnmf {

using Index = std::int64_t;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Edge {
  Index u;
  Index v;
  double weight = 1.0;
};

// Symmetric nonnegative adjacency matrix without diagonal entries.
// Immutable once built; all accessors are const and thread-safe.
class SparseAdjacency {
 public:
  SparseAdjacency() = default;

  // Each edge {u, v, w} is stored at (u, v) and (v, u). Repeated unordered
  // pairs are summed. Self-loops and non-positive weights are rejected.
  static SparseAdjacency from_edges(Index n, const std::vector<Edge>& edges) {
    if (n < 0) throw std::invalid_argument("negative node count");
    std::vector<std::pair<std::pair<Index, Index>, double>> entries;
    entries.reserve(2 * edges.size());
    for (const auto& e : edges) {
      if (e.u < 0 || e.v < 0 || e.u >= n || e.v >= n)
        throw std::invalid_argument("edge endpoint out of range");
      if (e.u == e.v) throw std::invalid_argument("self-loop in edge set");
      if (!(e.weight > 0.0) || !std::isfinite(e.weight))
        throw std::invalid_argument("edge weight must be positive and finite");
      entries.push_back({{e.u, e.v}, e.weight});
      entries.push_back({{e.v, e.u}, e.weight});
    }
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    SparseAdjacency a;
    a.n_ = n;
    a.row_ptr_.assign(static_cast<std::size_t>(n) + 1, 0);
    for (std::size_t i = 0; i < entries.size();) {
      std::size_t j = i;
      double w = 0.0;
      while (j < entries.size() && entries[j].first == entries[i].first) w += entries[j++].second;
      a.col_.push_back(entries[i].first.second);
      a.val_.push_back(w);
      ++a.row_ptr_[static_cast<std::size_t>(entries[i].first.first) + 1];
      i = j;
    }
    std::partial_sum(a.row_ptr_.begin(), a.row_ptr_.end(), a.row_ptr_.begin());
    a.degree_ = Vector::Zero(n);
    for (Index i = 0; i < n; ++i)
      for (Index p = a.row_ptr_[i]; p < a.row_ptr_[i + 1]; ++p) a.degree_[i] += a.val_[p];
    return a;
  }

  Index size() const noexcept { return n_; }
  std::size_t nnz() const noexcept { return col_.size(); }
  // Undirected edge count (each stored twice).
  std::size_t num_edges() const noexcept { return col_.size() / 2; }

  const std::vector<Index>& row_ptr() const noexcept { return row_ptr_; }
  const std::vector<Index>& col_idx() const noexcept { return col_; }
  const std::vector<double>& values() const noexcept { return val_; }
  const Vector& degree() const noexcept { return degree_; }

  // sum_ij A_ij, i.e. 2m for a binary graph.
  double total_weight() const { return degree_.sum(); }

  double frobenius_sq() const {
    double s = 0.0;
    for (double w : val_) s += w * w;
    return s;
  }

  bool is_binary() const {
    return std::all_of(val_.begin(), val_.end(), [](double w) { return w == 1.0; });
  }

  double weight(Index i, Index j) const {
    auto first = col_.begin() + row_ptr_[i];
    auto last = col_.begin() + row_ptr_[i + 1];
    auto it = std::lower_bound(first, last, j);
    return (it != last && *it == j) ? val_[it - col_.begin()] : 0.0;
  }

  template <typename F>
  void for_each_entry(F&& f) const {
    for (Index i = 0; i < n_; ++i)
      for (Index p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) f(i, col_[p], val_[p]);
  }

  // Each undirected edge once, with u < v.
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    out.reserve(num_edges());
    for_each_entry([&](Index i, Index j, double w) {
      if (i < j) out.push_back({i, j, w});
    });
    return out;
  }

  Matrix to_dense() const {
    Matrix d = Matrix::Zero(n_, n_);
    for_each_entry([&](Index i, Index j, double w) { d(i, j) = w; });
    return d;
  }

 private:
  Index n_ = 0;
  std::vector<Index> row_ptr_{0};
  std::vector<Index> col_;
  std::vector<double> val_;
  Vector degree_;
};

// Bijection between the labels found in a file and dense indices.
class NodeIndex {
 public:
  Index intern(std::string_view label) {
    auto [it, inserted] = lookup_.try_emplace(std::string(label), static_cast<Index>(labels_.size()));
    if (inserted) labels_.emplace_back(label);
    return it->second;
  }

  std::optional<Index> find(std::string_view label) const {
    auto it = lookup_.find(std::string(label));
    if (it == lookup_.end()) return std::nullopt;
    return it->second;
  }

  const std::string& label(Index i) const { return labels_.at(static_cast<std::size_t>(i)); }
  Index size() const noexcept { return static_cast<Index>(labels_.size()); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  // Identity index "0".."n-1", used for generated graphs.
  static NodeIndex sequential(Index n) {
    NodeIndex idx;
    for (Index i = 0; i < n; ++i) idx.intern(std::to_string(i));
    return idx;
  }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, Index> lookup_;
};

struct GroundTruth {
  std::vector<Index> labels;

  Index num_communities() const {
    return labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  }
};

struct LoaderOptions {
  // Keep only the largest connected component (ties: the one holding the
  // lowest original index). Node order is preserved.
  bool largest_component = false;
};

struct LoadedGraph {
  SparseAdjacency adjacency;
  NodeIndex index;
};

namespace detail {

inline bool is_blank_or_comment(std::string_view line) {
  auto pos = line.find_first_not_of(" \t\r\n\v\f");
  if (pos == std::string_view::npos) return true;
  return line[pos] == '#' || line[pos] == '%';
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> tok;
  std::size_t i = 0;
  constexpr std::string_view ws = " \t\r\n\v\f";
  while (i < line.size()) {
    i = line.find_first_not_of(ws, i);
    if (i == std::string_view::npos) break;
    auto j = line.find_first_of(ws, i);
    if (j == std::string_view::npos) j = line.size();
    tok.push_back(line.substr(i, j - i));
    i = j;
  }
  return tok;
}

inline std::optional<double> parse_double(std::string_view s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return in;
}

}  // namespace detail

// Connected component id per node, numbered in order of lowest member.
inline std::vector<Index> connected_components(const SparseAdjacency& a) {
  std::vector<Index> comp(static_cast<std::size_t>(a.size()), -1);
  Index next = 0;
  std::queue<Index> q;
  for (Index s = 0; s < a.size(); ++s) {
    if (comp[s] >= 0) continue;
    comp[s] = next;
    q.push(s);
    while (!q.empty()) {
      Index i = q.front();
      q.pop();
      for (Index p = a.row_ptr()[i]; p < a.row_ptr()[i + 1]; ++p) {
        Index j = a.col_idx()[p];
        if (comp[j] < 0) {
          comp[j] = next;
          q.push(j);
        }
      }
    }
    ++next;
  }
  return comp;
}

inline Index count_components(const SparseAdjacency& a) {
  auto comp = connected_components(a);
  return comp.empty() ? 0 : *std::max_element(comp.begin(), comp.end()) + 1;
}

// Restricts the graph to its largest connected component.
inline LoadedGraph largest_component(const LoadedGraph& g) {
  auto comp = connected_components(g.adjacency);
  if (comp.empty()) return g;
  Index ncomp = *std::max_element(comp.begin(), comp.end()) + 1;
  std::vector<Index> sizes(static_cast<std::size_t>(ncomp), 0);
  for (Index c : comp) ++sizes[c];
  Index keep = std::max_element(sizes.begin(), sizes.end()) - sizes.begin();

  LoadedGraph out;
  std::vector<Index> remap(comp.size(), -1);
  for (Index i = 0; i < g.adjacency.size(); ++i)
    if (comp[i] == keep) remap[i] = out.index.intern(g.index.label(i));
  std::vector<Edge> edges;
  for (const auto& e : g.adjacency.edges())
    if (remap[e.u] >= 0) edges.push_back({remap[e.u], remap[e.v], e.weight});
  out.adjacency = SparseAdjacency::from_edges(out.index.size(), edges);
  return out;
}

// Reads a whitespace-separated edge list. Lines starting with '#' or '%'
// are comments. Either every edge line carries a third weight token or
// none does.
//
// Unweighted files give a binary matrix: repeated or reversed lines name
// the same edge. Weighted files sum repeated lines per orientation; when
// a pair is listed in both orientations the two sums are averaged, so
// storing each edge once or twice gives the same matrix.
inline LoadedGraph load_edge_list(const std::string& path, const LoaderOptions& options = {}) {
  auto in = detail::open_input(path);
  LoadedGraph g;
  std::map<std::pair<Index, Index>, double> directed;
  std::optional<bool> weighted;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::is_blank_or_comment(line)) continue;
    auto tok = detail::split_ws(line);
    if (tok.size() < 2 || tok.size() > 3)
      throw ParseError(path, lineno, "expected 'u v' or 'u v weight', got " + std::to_string(tok.size()) + " tokens");
    bool has_weight = tok.size() == 3;
    if (weighted && *weighted != has_weight)
      throw ParseError(path, lineno, "mixed weighted and unweighted lines");
    weighted = has_weight;
    double w = 1.0;
    if (has_weight) {
      auto parsed = detail::parse_double(tok[2]);
      if (!parsed || !std::isfinite(*parsed))
        throw ParseError(path, lineno, "bad weight '" + std::string(tok[2]) + "'");
      if (!(*parsed > 0.0)) throw ParseError(path, lineno, "weight must be positive");
      w = *parsed;
    }
    Index u = g.index.intern(tok[0]);
    Index v = g.index.intern(tok[1]);
    if (u == v) continue;
    if (has_weight)
      directed[{u, v}] += w;
    else
      directed[{u, v}] = 1.0;
  }

  std::vector<Edge> edges;
  for (const auto& [key, w] : directed) {
    auto [u, v] = key;
    auto rev = directed.find({v, u});
    if (rev == directed.end()) {
      edges.push_back({std::min(u, v), std::max(u, v), w});
    } else if (u < v) {
      edges.push_back({u, v, 0.5 * (w + rev->second)});
    }
  }
  if (edges.empty()) throw DataError(path + ": graph is empty after removing self-loops");
  g.adjacency = SparseAdjacency::from_edges(g.index.size(), edges);
  if (options.largest_component) g = largest_component(g);
  return g;
}

// Writes each undirected edge once. Weights are written only for
// non-binary graphs, so the file reloads to the same matrix.
inline void save_edge_list(const std::string& path, const SparseAdjacency& a, const NodeIndex& index) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  bool binary = a.is_binary();
  out.precision(17);
  for (const auto& e : a.edges()) {
    out << index.label(e.u) << ' ' << index.label(e.v);
    if (!binary) out << ' ' << e.weight;
    out << '\n';
  }
  if (!out) throw DataError("write failed: " + path);
}

// Reads "node community" pairs. Community ids are renumbered 0..C-1 in
// order of first appearance. With `skip_unknown`, lines naming nodes not in
// `index` are ignored (used after a largest-component filter).
inline GroundTruth load_ground_truth(const std::string& path, const NodeIndex& index, bool skip_unknown = false) {
  auto in = detail::open_input(path);
  std::vector<std::optional<std::string>> raw(static_cast<std::size_t>(index.size()));
  std::vector<Index> order;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::is_blank_or_comment(line)) continue;
    auto tok = detail::split_ws(line);
    if (tok.size() != 2) throw ParseError(path, lineno, "expected 'node community'");
    auto node = index.find(tok[0]);
    if (!node) {
      if (skip_unknown) continue;
      throw ParseError(path, lineno, "unknown node '" + std::string(tok[0]) + "'");
    }
    auto& slot = raw[static_cast<std::size_t>(*node)];
    if (slot && *slot != tok[1])
      throw ParseError(path, lineno, "conflicting labels for node '" + std::string(tok[0]) + "'");
    if (!slot) order.push_back(*node);
    slot = std::string(tok[1]);
  }

  std::string missing;
  std::size_t nmissing = 0;
  for (Index i = 0; i < index.size(); ++i) {
    if (raw[i]) continue;
    if (nmissing++ < 20) missing += (missing.empty() ? "" : ", ") + index.label(i);
  }
  if (nmissing > 0) {
    if (nmissing > 20) missing += ", ...";
    throw DataError(path + ": " + std::to_string(nmissing) + " node(s) without a label: " + missing);
  }

  GroundTruth gt;
  gt.labels.assign(raw.size(), -1);
  std::unordered_map<std::string, Index> ids;
  for (Index node : order) {
    auto [it, inserted] = ids.try_emplace(*raw[node], static_cast<Index>(ids.size()));
    gt.labels[node] = it->second;
  }
  return gt;
}

// A * M. Rows are accumulated in stored column order, so the result does
// not depend on how the caller schedules work. A is symmetric, so this is
// also A^T * M.
inline Matrix spmm(const SparseAdjacency& a, const Matrix& m) {
  if (m.rows() != a.size())
    throw DimensionError("spmm: matrix has " + std::to_string(m.rows()) + " rows, graph has " +
                         std::to_string(a.size()) + " nodes");
  const Index k = m.cols();
  Matrix out = Matrix::Zero(a.size(), k);
  const auto& rp = a.row_ptr();
  const auto& ci = a.col_idx();
  const auto& v = a.values();
  for (Index c = 0; c < k; ++c) {
    const double* src = m.col(c).data();
    double* dst = out.col(c).data();
    for (Index i = 0; i < a.size(); ++i) {
      double s = 0.0;
      for (Index p = rp[i]; p < rp[i + 1]; ++p) s += v[p] * src[ci[p]];
      dst[i] = s;
    }
  }
  return out;
}

// Tr(Y^T L Y) with L = D - A, evaluated as sum_k y_k^T D y_k - y_k^T A y_k.
inline double laplacian_quadratic(const SparseAdjacency& a, const Matrix& y) {
  if (y.rows() != a.size())
    throw DimensionError("laplacian_quadratic: Y has " + std::to_string(y.rows()) + " rows, graph has " +
                         std::to_string(a.size()) + " nodes");
  Matrix ay = spmm(a, y);
  double dterm = (y.array().square().colwise() * a.degree().array()).sum();
  double aterm = (y.array() * ay.array()).sum();
  return dterm - aterm;
}

}  // namespace sgnmf
