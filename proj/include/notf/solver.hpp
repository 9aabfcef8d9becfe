#pragma once

// ADMM solver for non-negative occurrence tensor factorization.
//
//   min ||U||_0 + iota_{>=0}(A, B, C)   s.t.   U = [[A,B,C]] - O
//
// Scaled-dual iteration with penalty tau:
//   U      <- prox(  [[A,B,C]] - O - lambda , 1/tau )
//   A,B,C  <- projected ALS sweeps towards M = U + O + lambda (warm started)
//   lambda <- lambda + U - [[A,B,C]] + O
//
// Inner sweeps stop when res1 < eps or after max_inner_iters sweeps. The
// outer loop stops when the last res1 and res2 are both below eps. The
// returned factors are column-balanced (see balance_columns).

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "notf/cp_als.hpp"
#include "notf/prox.hpp"
#include "notf/tensor.hpp"

namespace notf {

struct SolverConfig {
  Eigen::Index rank = 3;
  double tau = 10.0;
  double eps = 1e-3;
  int max_outer_iters = 500;
  int max_inner_iters = 10;
  NormVariant variant = NormVariant::L0;
  CpAlsConfig init{};  // init.rank is overridden by `rank`
  double rcond = 1e-10;

  void validate() const {
    if (rank < 1) throw DomainError("solver: rank must be >= 1");
    if (!(tau > 0.0)) throw DomainError("solver: tau must be > 0");
    if (!(eps > 0.0)) throw DomainError("solver: eps must be > 0");
    if (max_outer_iters < 1 || max_inner_iters < 1) throw DomainError("solver: iteration caps must be >= 1");
  }
};

struct OuterRecord {
  int iteration = 0;  // 1-based
  double res1 = 0.0;  // from the last inner sweep
  double res2 = 0.0;
  std::vector<double> inner_res1;
  double objective = 0.0;
  double seconds = 0.0;  // wall time of this outer iteration
};

struct SolverTrace {
  std::vector<OuterRecord> records;
  bool converged = false;

  int outer_iterations() const noexcept { return static_cast<int>(records.size()); }
};

struct AdmmState {
  Tensor3 u;
  Tensor3 lambda;
  FactorTriple factors;
  int outer_iter = 0;
  SolverTrace trace;
};

struct SolveResult {
  FactorTriple factors;
  Tensor3 u;
  Tensor3 lambda;
  SolverTrace trace;
};

// ||next - prev||_F / ||prev||_F with 0/0 = 0 and x/0 = +inf.
inline double relative_change(const Tensor3& next, const Tensor3& prev) {
  const double num = frobenius_norm(next - prev);
  const double den = frobenius_norm(prev);
  if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return num / den;
}

inline double res_inner(const FactorTriple& prev, const FactorTriple& next) {
  return relative_change(cp_reconstruct(next), cp_reconstruct(prev));
}

inline double res_outer(const AdmmState& prev, const AdmmState& next) {
  return std::max(res_inner(prev.factors, next.factors), relative_change(next.lambda, prev.lambda));
}

// The three unfoldings of an ALS target, formed once per outer iteration.
struct Unfolded {
  Matrix m1, m2, m3;
  explicit Unfolded(const Tensor3& m) : m1(unfold(m, 1)), m2(unfold(m, 2)), m3(unfold(m, 3)) {}
};

// One projected ALS sweep, A then B then C, each using the freshest factors.
inline FactorTriple inner_als_sweep(FactorTriple f, const Unfolded& m, double rcond = 1e-10) {
  f.A = ls_factor_update(m.m1, f.C, f.B, rcond).cwiseMax(0.0);
  f.B = ls_factor_update(m.m2, f.C, f.A, rcond).cwiseMax(0.0);
  f.C = ls_factor_update(m.m3, f.B, f.A, rcond).cwiseMax(0.0);
  return f;
}

inline FactorTriple inner_als_sweep(const FactorTriple& f, const Tensor3& m, double rcond = 1e-10) {
  return inner_als_sweep(f, Unfolded(m), rcond);
}

using IterationObserver = std::function<void(const AdmmState&)>;

inline SolveResult solve(const Tensor3& o, const SolverConfig& cfg, const IterationObserver& observer = {}) {
  cfg.validate();
  for (double v : o.values()) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("solve: observation must be finite and non-negative");
  }

  CpAlsConfig init = cfg.init;
  init.rank = cfg.rank;

  AdmmState state{Tensor3(o.dims()), Tensor3(o.dims()), cp_als(o, init), 0, {}};
  Tensor3 recon = cp_reconstruct(state.factors);

  using Clock = std::chrono::steady_clock;
  for (int p = 1; p <= cfg.max_outer_iters; ++p) {
    const auto start = Clock::now();
    OuterRecord rec;
    rec.iteration = p;

    state.u = error_prox(cfg.variant, recon - o - state.lambda, cfg.tau);
    const Unfolded m(state.u + o + state.lambda);

    const Tensor3 outer_prev_recon = recon;
    Tensor3 inner_prev = recon;
    double res1 = std::numeric_limits<double>::infinity();
    for (int q = 0; q < cfg.max_inner_iters; ++q) {
      state.factors = inner_als_sweep(std::move(state.factors), m, cfg.rcond);
      Tensor3 next = cp_reconstruct(state.factors);
      res1 = relative_change(next, inner_prev);
      rec.inner_res1.push_back(res1);
      inner_prev = std::move(next);
      if (res1 < cfg.eps) break;
    }
    recon = std::move(inner_prev);

    Tensor3 lambda_next = state.lambda + state.u - recon + o;
    const double res2 = std::max(relative_change(recon, outer_prev_recon), relative_change(lambda_next, state.lambda));
    state.lambda = std::move(lambda_next);

    if (!all_finite(state.factors) || !all_finite(state.lambda) || !all_finite(state.u)) {
      throw DivergenceError(static_cast<std::size_t>(p), "non-finite values in factors, error or dual");
    }

    rec.res1 = res1;
    rec.res2 = res2;
    rec.objective = error_loss(cfg.variant, state.u);
    rec.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    state.outer_iter = p;
    state.trace.records.push_back(std::move(rec));
    if (observer) observer(state);

    if (res1 < cfg.eps && res2 < cfg.eps) {
      state.trace.converged = true;
      break;
    }
  }

  return {balance_columns(std::move(state.factors)), std::move(state.u), std::move(state.lambda), std::move(state.trace)};
}

}  // namespace notf
