#pragma once

// Objective, gradients, multiplicative updates and the iterative solver for
// the NMF / SNMF / SGNMF family. A is the (symmetric) adjacency matrix and
// doubles as the similarity matrix S of the graph regularizer, so the
// Laplacian is L = D - A.
//
//   O(X, Y) = 1/2 |X Y^T - A|_F^2 + alpha/2 |X - Y|_F^2 + lambda/2 Tr(Y^T L Y)
//
// Nothing here materializes an n x n dense matrix; every product is either
// a sparse-dense product with A or a dense product through a K x K Gram
// matrix, so one iteration costs O(n K^2 + |E| K).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "sgnmf/error.hpp"
#include "sgnmf/graph.hpp"
#include "sgnmf/random.hpp"

namespace sgnmf {

enum class Variant { nmf, snmf_naive, snmf_adjusted, sgnmf };

inline std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::nmf: return "nmf";
    case Variant::snmf_naive: return "snmf";
    case Variant::snmf_adjusted: return "snmf-adj";
    case Variant::sgnmf: return "sgnmf";
  }
  return "?";
}

inline Variant parse_variant(std::string_view s) {
  for (auto v : {Variant::nmf, Variant::snmf_naive, Variant::snmf_adjusted, Variant::sgnmf})
    if (to_string(v) == s) return v;
  throw std::invalid_argument("unknown variant '" + std::string(s) + "' (expected nmf|snmf|snmf-adj|sgnmf)");
}

inline bool is_symmetric_variant(Variant v) {
  return v == Variant::snmf_naive || v == Variant::snmf_adjusted;
}

// How lambda * L Y enters the Y update. `split` puts A Y in the numerator
// and D Y in the denominator, which keeps every factor nonnegative.
// `printed` adds lambda * L Y to both numerator and denominator; it can go
// negative and exists only for comparison runs.
enum class YUpdateForm { split, printed };

enum class TolMode { absolute, relative };

struct SolverConfig {
  Variant variant = Variant::sgnmf;
  Index k = 2;
  double alpha = 0x1.0p-8;
  double lambda = 100.0;
  std::uint64_t seed = 0;
  Index max_iters = 200;
  double tol = 0.1;
  TolMode tol_mode = TolMode::absolute;
  double init_scale = 0.05;
  double epsilon = 1e-12;
  YUpdateForm y_update = YUpdateForm::split;

  // Throws std::invalid_argument on the first violated constraint.
  void validate(Index n) const {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if (k > n) throw std::invalid_argument("k = " + std::to_string(k) + " exceeds node count " + std::to_string(n));
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("alpha must be finite and >= 0");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be finite and >= 0");
    if (!(tol > 0.0)) throw std::invalid_argument("tol must be > 0");
    if (!(init_scale > 0.0) || !std::isfinite(init_scale)) throw std::invalid_argument("init_scale must be > 0");
    if (!(epsilon >= 0.0)) throw std::invalid_argument("epsilon must be >= 0");
    if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
  }
};

struct FactorPair {
  Matrix x;
  Matrix y;
};

enum class Termination { tolerance, max_iters };

inline std::string_view to_string(Termination t) {
  return t == Termination::tolerance ? "tolerance" : "max_iters";
}

struct IterationTrace {
  std::vector<double> objective;  // objective[0] is the value at the initial point
  Index iters_run = 0;
  Termination terminated_by = Termination::max_iters;
  double kkt_residual = 0.0;
};

struct SolveResult {
  FactorPair factors;
  IterationTrace trace;
};

namespace detail {

inline void require_rows(const SparseAdjacency& a, const Matrix& m, const char* what) {
  if (m.rows() != a.size())
    throw DimensionError(std::string(what) + " has " + std::to_string(m.rows()) + " rows, graph has " +
                         std::to_string(a.size()) + " nodes");
}

inline void require_pair(const SparseAdjacency& a, const Matrix& x, const Matrix& y) {
  require_rows(a, x, "X");
  require_rows(a, y, "Y");
  if (x.cols() != y.cols())
    throw DimensionError("X has " + std::to_string(x.cols()) + " columns, Y has " + std::to_string(y.cols()));
}

// m .* num ./ (den + eps)
inline Matrix ratio_update(const Matrix& m, const Matrix& num, const Matrix& den, double eps) {
  return (m.array() * num.array() / (den.array() + eps)).matrix();
}

}  // namespace detail

// Entries i.i.d. uniform on (0, init_scale): X is filled column by column
// first, then Y, from one Rng(seed) stream.
inline FactorPair init_factors(Index n, Index k, std::uint64_t seed, double init_scale = 0.05) {
  if (n < 1 || k < 1) throw std::invalid_argument("init_factors: n and k must be >= 1");
  Rng rng(seed);
  auto draw = [&] {
    double v;
    do v = rng.uniform_open() * init_scale;
    while (!(v > 0.0 && v < init_scale));
    return v;
  };
  FactorPair f{Matrix(n, k), Matrix(n, k)};
  for (Index c = 0; c < k; ++c)
    for (Index i = 0; i < n; ++i) f.x(i, c) = draw();
  for (Index c = 0; c < k; ++c)
    for (Index i = 0; i < n; ++i) f.y(i, c) = draw();
  return f;
}

// |X Y^T - A|_F^2 = Tr((X^T X)(Y^T Y)) - 2 Tr(X^T A Y) + |A|_F^2
inline double reconstruction_error_sq(const SparseAdjacency& a, const Matrix& x, const Matrix& y) {
  detail::require_pair(a, x, y);
  Matrix xtx = x.transpose() * x;
  Matrix yty = y.transpose() * y;
  double gram = (xtx.array() * yty.array()).sum();
  double cross = (x.array() * spmm(a, y).array()).sum();
  return gram - 2.0 * cross + a.frobenius_sq();
}

inline double objective_sgnmf(const SparseAdjacency& a, const Matrix& x, const Matrix& y, double alpha,
                              double lambda) {
  detail::require_pair(a, x, y);
  double fit = 0.5 * reconstruction_error_sq(a, x, y);
  double sym = alpha == 0.0 ? 0.0 : 0.5 * alpha * (x - y).squaredNorm();
  double graph = lambda == 0.0 ? 0.0 : 0.5 * lambda * laplacian_quadratic(a, y);
  return fit + sym + graph;
}

// Gradient of the objective in X: X Y^T Y - A Y + alpha (X - Y).
inline Matrix grad_x(const SparseAdjacency& a, const Matrix& x, const Matrix& y, double alpha) {
  detail::require_pair(a, x, y);
  return x * (y.transpose() * y) - spmm(a, y) + alpha * (x - y);
}

// Gradient of the objective in Y: Y X^T X - A X + alpha (Y - X) + lambda (D Y - A Y).
inline Matrix grad_y(const SparseAdjacency& a, const Matrix& x, const Matrix& y, double alpha, double lambda) {
  detail::require_pair(a, x, y);
  Matrix ly = a.degree().asDiagonal() * y - spmm(a, y);
  return y * (x.transpose() * x) - spmm(a, x) + alpha * (y - x) + lambda * ly;
}

// Lee-Seung update, X first and then Y against the new X.
inline FactorPair update_nmf(const SparseAdjacency& a, const Matrix& x, const Matrix& y, double eps = 1e-12) {
  detail::require_pair(a, x, y);
  Matrix nx = detail::ratio_update(x, spmm(a, y), x * (y.transpose() * y), eps);
  Matrix ny = detail::ratio_update(y, spmm(a, nx), y * (nx.transpose() * nx), eps);
  return {std::move(nx), std::move(ny)};
}

inline Matrix update_snmf_naive(const SparseAdjacency& a, const Matrix& x, double eps = 1e-12) {
  detail::require_rows(a, x, "X");
  return detail::ratio_update(x, spmm(a, x), x * (x.transpose() * x), eps);
}

// x <- x (1/2 + (A X) / (2 X X^T X)); the multiplier never drops below 1/2.
inline Matrix update_snmf_adjusted(const SparseAdjacency& a, const Matrix& x, double eps = 1e-12) {
  detail::require_rows(a, x, "X");
  Matrix ax = spmm(a, x);
  Matrix xxtx = x * (x.transpose() * x);
  return (x.array() * (0.5 + ax.array() / (2.0 * xxtx.array() + eps))).matrix();
}

inline FactorPair update_sgnmf(const SparseAdjacency& a, const Matrix& x, const Matrix& y, double alpha,
                               double lambda, double eps = 1e-12, YUpdateForm form = YUpdateForm::split) {
  detail::require_pair(a, x, y);
  Matrix nx = detail::ratio_update(x, spmm(a, y) + alpha * y, x * (y.transpose() * y) + alpha * x, eps);

  Matrix num = spmm(a, nx) + alpha * nx;
  Matrix den = y * (nx.transpose() * nx) + alpha * y;
  if (lambda != 0.0) {
    Matrix ay = spmm(a, y);
    Matrix dy = a.degree().asDiagonal() * y;
    if (form == YUpdateForm::split) {
      num += lambda * ay;
      den += lambda * dy;
    } else {
      Matrix ly = dy - ay;
      num += lambda * ly;
      den += lambda * ly;
    }
  }
  Matrix ny = detail::ratio_update(y, num, den, eps);
  return {std::move(nx), std::move(ny)};
}

// max over entries of |min(x, dO/dx)| and |min(y, dO/dy)|; zero exactly at
// a point satisfying the complementarity conditions with X, Y >= 0.
inline double kkt_residual(const SparseAdjacency& a, const FactorPair& f, double alpha, double lambda) {
  Matrix gx = grad_x(a, f.x, f.y, alpha);
  Matrix gy = grad_y(a, f.x, f.y, alpha, lambda);
  double r = f.x.array().min(gx.array()).abs().maxCoeff();
  return std::max(r, f.y.array().min(gy.array()).abs().maxCoeff());
}

// The objective each variant tracks for termination: |XY^T - A|^2 for NMF,
// |XX^T - A|^2 for the symmetric variants, and the regularized objective
// (with its 1/2 factors) for SGNMF.
inline double variant_objective(const SparseAdjacency& a, const FactorPair& f, const SolverConfig& cfg) {
  switch (cfg.variant) {
    case Variant::nmf: return reconstruction_error_sq(a, f.x, f.y);
    case Variant::snmf_naive:
    case Variant::snmf_adjusted: return reconstruction_error_sq(a, f.x, f.x);
    case Variant::sgnmf: return objective_sgnmf(a, f.x, f.y, cfg.alpha, cfg.lambda);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

inline FactorPair step(const SparseAdjacency& a, const FactorPair& f, const SolverConfig& cfg) {
  switch (cfg.variant) {
    case Variant::nmf: return update_nmf(a, f.x, f.y, cfg.epsilon);
    case Variant::snmf_naive: {
      Matrix x = update_snmf_naive(a, f.x, cfg.epsilon);
      return {x, x};
    }
    case Variant::snmf_adjusted: {
      Matrix x = update_snmf_adjusted(a, f.x, cfg.epsilon);
      return {x, x};
    }
    case Variant::sgnmf: return update_sgnmf(a, f.x, f.y, cfg.alpha, cfg.lambda, cfg.epsilon, cfg.y_update);
  }
  return f;
}

// Runs the variant's update from `start` until the objective changes by
// less than `tol` between consecutive iterations or `max_iters` is reached.
inline SolveResult solve(const SparseAdjacency& a, const SolverConfig& cfg, FactorPair start) {
  cfg.validate(a.size());
  detail::require_pair(a, start.x, start.y);
  if (start.x.cols() != cfg.k) throw DimensionError("initial factors have wrong column count");
  if (is_symmetric_variant(cfg.variant)) start.y = start.x;

  SolveResult res{std::move(start), {}};
  auto& tr = res.trace;
  auto check = [&](double v) {
    if (!std::isfinite(v)) throw NumericalError(static_cast<std::size_t>(tr.iters_run), v);
    return v;
  };
  tr.objective.push_back(check(variant_objective(a, res.factors, cfg)));

  while (true) {
    res.factors = step(a, res.factors, cfg);
    ++tr.iters_run;
    double cur = check(variant_objective(a, res.factors, cfg));
    double prev = tr.objective.back();
    tr.objective.push_back(cur);
    double limit = cfg.tol_mode == TolMode::absolute ? cfg.tol : cfg.tol * std::abs(prev);
    if (std::abs(cur - prev) < limit) {
      tr.terminated_by = Termination::tolerance;
      break;
    }
    if (tr.iters_run >= cfg.max_iters) {
      tr.terminated_by = Termination::max_iters;
      break;
    }
  }

  bool regularized = cfg.variant == Variant::sgnmf;
  tr.kkt_residual = kkt_residual(a, res.factors, regularized ? cfg.alpha : 0.0, regularized ? cfg.lambda : 0.0);
  return res;
}

inline SolveResult solve(const SparseAdjacency& a, const SolverConfig& cfg) {
  cfg.validate(a.size());
  return solve(a, cfg, init_factors(a.size(), cfg.k, cfg.seed, cfg.init_scale));
}

}  // namespace sgnmf
