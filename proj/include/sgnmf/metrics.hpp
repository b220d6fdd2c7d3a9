#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sgnmf/graph.hpp"

namespace sgnmf {

struct Partition {
  std::vector<Index> labels;

  std::size_t size() const noexcept { return labels.size(); }
};

// labels[j] = argmax_k Y(j, k), ties to the smaller column.
inline Partition assign_communities(const Matrix& y) {
  if (y.rows() == 0 || y.cols() == 0) throw std::invalid_argument("assign_communities: empty matrix");
  Partition p;
  p.labels.resize(static_cast<std::size_t>(y.rows()));
  for (Index j = 0; j < y.rows(); ++j) {
    Index best = 0;
    for (Index k = 1; k < y.cols(); ++k)
      if (y(j, k) > y(j, best)) best = k;
    p.labels[j] = best;
  }
  return p;
}

namespace detail {

inline double entropy_of_counts(const std::map<Index, double>& counts, double n) {
  double h = 0.0;
  for (const auto& [_, c] : counts) {
    double pr = c / n;
    h -= pr * std::log(pr);
  }
  return h;
}

}  // namespace detail

// Normalized mutual information 2 I(p; q) / (H(p) + H(q)), natural log.
// Two single-cluster partitions score 1.
inline double nmi(const std::vector<Index>& p, const std::vector<Index>& q) {
  if (p.size() != q.size())
    throw std::invalid_argument("nmi: partitions have different lengths (" + std::to_string(p.size()) + " vs " +
                                std::to_string(q.size()) + ")");
  if (p.empty()) throw std::invalid_argument("nmi: empty partitions");
  const double n = static_cast<double>(p.size());

  std::map<Index, double> cp, cq;
  std::map<std::pair<Index, Index>, double> joint;
  for (std::size_t i = 0; i < p.size(); ++i) {
    cp[p[i]] += 1.0;
    cq[q[i]] += 1.0;
    joint[{p[i], q[i]}] += 1.0;
  }
  double hp = detail::entropy_of_counts(cp, n);
  double hq = detail::entropy_of_counts(cq, n);
  if (hp + hq == 0.0) return 1.0;

  double mi = 0.0;
  for (const auto& [key, c] : joint) {
    double pij = c / n;
    mi += pij * std::log(c * n / (cp[key.first] * cq[key.second]));
  }
  return std::clamp(2.0 * mi / (hp + hq), 0.0, 1.0);
}

inline double nmi(const Partition& p, const Partition& q) { return nmi(p.labels, q.labels); }

// Newman-Girvan modularity: sum over communities of e_c / 2m - (d_c / 2m)^2
// where e_c is the stored weight inside c and d_c its total degree.
inline double modularity(const SparseAdjacency& a, const std::vector<Index>& labels) {
  if (static_cast<Index>(labels.size()) != a.size())
    throw std::invalid_argument("modularity: partition covers " + std::to_string(labels.size()) + " nodes, graph has " +
                                std::to_string(a.size()));
  const double two_m = a.total_weight();
  if (!(two_m > 0.0)) throw std::invalid_argument("modularity: graph has zero total weight");

  std::map<Index, std::pair<double, double>> per;  // community -> (internal, degree)
  a.for_each_entry([&](Index i, Index j, double w) {
    if (labels[i] == labels[j]) per[labels[i]].first += w;
  });
  for (Index i = 0; i < a.size(); ++i) per[labels[i]].second += a.degree()[i];
  double q = 0.0;
  for (const auto& [_, v] : per) q += v.first / two_m - (v.second / two_m) * (v.second / two_m);
  return q;
}

inline double modularity(const SparseAdjacency& a, const Partition& p) { return modularity(a, p.labels); }

struct Summary {
  std::vector<double> values;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 for a single value
};

inline Summary aggregate(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("aggregate: no values");
  Summary s;
  if (std::all_of(values.begin(), values.end(), [&](double v) { return v == values.front(); })) {
    s.mean = values.front();
    s.values = std::move(values);
    return s;
  }
  const double r = static_cast<double>(values.size());
  for (double v : values) s.mean += v;
  s.mean /= r;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / (r - 1.0));
  }
  s.values = std::move(values);
  return s;
}

}  // namespace sgnmf
