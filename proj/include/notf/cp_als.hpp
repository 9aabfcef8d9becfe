#pragma once

// Plain CP-ALS used to initialize the ADMM solver.

#include <cstdint>
#include <vector>

#include "notf/rng.hpp"
#include "notf/tensor.hpp"

namespace notf {

struct CpAlsConfig {
  Eigen::Index rank = 3;
  int max_iters = 50;
  double rel_change_tol = 1e-4;
  std::uint64_t seed = 0;

  void validate() const {
    if (rank < 1) throw DomainError("cp_als: rank must be >= 1");
    if (max_iters < 1) throw DomainError("cp_als: max_iters must be >= 1");
    if (!(rel_change_tol > 0.0)) throw DomainError("cp_als: rel_change_tol must be > 0");
  }
};

// Least-squares factor for `mode` with the other two factors held fixed:
//   X_(d) (KR) pinv(Gram * Gram)
// The caller decides whether to clamp.
inline Matrix ls_factor_update(const Matrix& unfolded, const Matrix& slow, const Matrix& fast,
                               double rcond = 1e-10) {
  const Matrix gram = (slow.transpose() * slow).cwiseProduct(fast.transpose() * fast);
  return (unfolded * khatri_rao(slow, fast)) * pinv_psd(gram, rcond);
}

// Uniform [0, 1) factors drawn row-major A, then B, then C from the CpInit stream.
inline FactorTriple random_factors(const Dims& dims, Eigen::Index rank, std::uint64_t seed) {
  Rng rng(seed, Stream::CpInit);
  auto draw = [&](std::size_t rows) {
    Matrix m(static_cast<Eigen::Index>(rows), rank);
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index r = 0; r < rank; ++r) m(i, r) = rng.uniform01();
    return m;
  };
  Matrix a = draw(dims[0]);
  Matrix b = draw(dims[1]);
  Matrix c = draw(dims[2]);
  return {std::move(a), std::move(b), std::move(c)};
}

inline FactorTriple nn_project(FactorTriple f) {
  f.A = f.A.cwiseMax(0.0);
  f.B = f.B.cwiseMax(0.0);
  f.C = f.C.cwiseMax(0.0);
  return f;
}

struct CpAlsResult {
  FactorTriple factors;           // unclamped
  std::vector<double> objective;  // ||[[A,B,C]] - O||_F^2 after each sweep
  int iterations = 0;
};

// Unconstrained CP-ALS; no column normalization.
inline CpAlsResult cp_als_unconstrained(const Tensor3& o, const CpAlsConfig& cfg) {
  cfg.validate();
  CpAlsResult out;
  FactorTriple f = random_factors(o.dims(), cfg.rank, cfg.seed);
  const Matrix o1 = unfold(o, 1);
  const Matrix o2 = unfold(o, 2);
  const Matrix o3 = unfold(o, 3);

  Tensor3 prev = cp_reconstruct(f);
  for (int it = 0; it < cfg.max_iters; ++it) {
    f.A = ls_factor_update(o1, f.C, f.B);
    f.B = ls_factor_update(o2, f.C, f.A);
    f.C = ls_factor_update(o3, f.B, f.A);
    Tensor3 recon = cp_reconstruct(f);
    out.objective.push_back(std::pow(frobenius_norm(recon - o), 2));
    out.iterations = it + 1;

    const double denom = frobenius_norm(prev);
    const double change = frobenius_norm(recon - prev);
    prev = std::move(recon);
    if (change == 0.0 || (denom > 0.0 && change / denom < cfg.rel_change_tol)) break;
  }
  out.factors = std::move(f);
  return out;
}

inline FactorTriple cp_als(const Tensor3& o, const CpAlsConfig& cfg) {
  return nn_project(cp_als_unconstrained(o, cfg).factors);
}

}  // namespace notf
