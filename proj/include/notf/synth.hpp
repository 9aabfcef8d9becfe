#pragma once

// Synthetic benchmark: sparse non-negative factors, the binary indicator of
// their CP reconstruction as ground truth, and flip noise on top of it.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "notf/rng.hpp"
#include "notf/tensor.hpp"

namespace notf {

struct SynthSpec {
  Dims dims{50, 20, 10};
  Eigen::Index true_rank = 3;
  // Fraction of zero entries in A, B, C.
  std::array<double, 3> sparsity{0.7067, 0.55, 0.30};
  double noise_ratio = 0.1;
  std::uint64_t seed = 0;

  void validate() const {
    if (dims[0] == 0 || dims[1] == 0 || dims[2] == 0) throw DomainError("synth: dims must be positive");
    if (true_rank < 1) throw DomainError("synth: true_rank must be >= 1");
    for (double s : sparsity)
      if (!(s >= 0.0 && s <= 1.0)) throw DomainError("synth: sparsity ratios must lie in [0, 1]");
    if (!(noise_ratio >= 0.0 && noise_ratio <= 1.0)) throw DomainError("synth: noise_ratio must lie in [0, 1]");
  }
};

struct Position {
  std::size_t i, j, k;
  friend bool operator==(const Position&, const Position&) = default;
};

struct SynthInstance {
  FactorTriple factors;
  Tensor3 x;
  Tensor3 o;
  std::vector<Position> flipped_positions;
};

// n x r matrix with exactly round(sparsity * n * r) zeros at uniformly chosen
// positions; every other entry is uniform on (0, 1).
inline Matrix gen_sparse_factor(std::size_t n, Eigen::Index r, double sparsity, Rng& rng) {
  if (!(sparsity >= 0.0 && sparsity <= 1.0)) throw DomainError("gen_sparse_factor: sparsity must lie in [0, 1]");
  const std::size_t total = n * static_cast<std::size_t>(r);
  const auto zeros = static_cast<std::size_t>(std::llround(sparsity * static_cast<double>(total)));
  std::vector<char> is_zero(total, 0);
  for (std::size_t p : rng.sample_without_replacement(total, zeros)) is_zero[p] = 1;

  Matrix m(static_cast<Eigen::Index>(n), r);
  for (std::size_t p = 0; p < total; ++p) {
    const auto row = static_cast<Eigen::Index>(p / static_cast<std::size_t>(r));
    const auto col = static_cast<Eigen::Index>(p % static_cast<std::size_t>(r));
    m(row, col) = is_zero[p] ? 0.0 : rng.uniform_open01();
  }
  return m;
}

inline Tensor3 make_ground_truth(const FactorTriple& f) {
  Tensor3 x = cp_reconstruct(f);
  for (double& v : x.values()) v = v > 0.0 ? 1.0 : 0.0;
  return x;
}

inline bool is_binary(const Tensor3& t) noexcept {
  return std::all_of(t.values().begin(), t.values().end(), [](double v) { return v == 0.0 || v == 1.0; });
}

struct FlipResult {
  Tensor3 tensor;
  std::vector<Position> positions;  // ascending by storage offset
};

inline FlipResult apply_flip_noise(const Tensor3& x, double noise_ratio, Rng& rng) {
  if (!is_binary(x)) throw DomainError("apply_flip_noise: input tensor is not binary");
  if (!(noise_ratio >= 0.0 && noise_ratio <= 1.0)) throw DomainError("apply_flip_noise: noise_ratio must lie in [0, 1]");
  const std::size_t total = x.size();
  const auto count = static_cast<std::size_t>(std::llround(noise_ratio * static_cast<double>(total)));
  std::vector<std::size_t> offsets = rng.sample_without_replacement(total, count);
  std::sort(offsets.begin(), offsets.end());

  FlipResult out{x, {}};
  out.positions.reserve(offsets.size());
  const auto [n1, n2, n3] = x.dims();
  for (std::size_t off : offsets) {
    out.tensor[off] = 1.0 - out.tensor[off];
    out.positions.push_back({off % n1, (off / n1) % n2, off / (n1 * n2)});
  }
  return out;
}

inline SynthInstance generate(const SynthSpec& spec) {
  spec.validate();
  Rng ra(spec.seed, Stream::FactorA);
  Rng rb(spec.seed, Stream::FactorB);
  Rng rc(spec.seed, Stream::FactorC);
  Rng rn(spec.seed, Stream::FlipNoise);

  SynthInstance inst;
  inst.factors = FactorTriple(gen_sparse_factor(spec.dims[0], spec.true_rank, spec.sparsity[0], ra),
                              gen_sparse_factor(spec.dims[1], spec.true_rank, spec.sparsity[1], rb),
                              gen_sparse_factor(spec.dims[2], spec.true_rank, spec.sparsity[2], rc));
  inst.x = make_ground_truth(inst.factors);
  FlipResult noisy = apply_flip_noise(inst.x, spec.noise_ratio, rn);
  inst.o = std::move(noisy.tensor);
  inst.flipped_positions = std::move(noisy.positions);
  return inst;
}

// Community-structured discrete occurrence tensor with an exact number of
// nonzeros, round(density * N1 * N2 * N3). Each planted community spans one or
// two mode-2 indices, one to three mode-3 indices and as many mode-1 indices as
// its share of the budget allows; entry counts are ceil(max_count * a_i b_j c_k)
// with weights uniform on (0, 1). About 5% of the budget is spent on isolated
// count-1 entries placed uniformly at random.
struct OccurrenceSpec {
  Dims dims{971, 85, 27};
  double density = 0.0102;
  Eigen::Index communities = 20;
  int max_count = 5;
  std::uint64_t seed = 0;
};

struct OccurrenceInstance {
  FactorTriple factors;  // planted community weights
  Tensor3 o;
};

inline OccurrenceInstance generate_occurrence(const OccurrenceSpec& spec) {
  if (!(spec.density > 0.0 && spec.density <= 1.0)) throw DomainError("occurrence: density must lie in (0, 1]");
  if (spec.communities < 1 || spec.max_count < 1) throw DomainError("occurrence: communities and max_count must be >= 1");
  const auto [n1, n2, n3] = spec.dims;
  Tensor3 o(spec.dims);
  const auto target = static_cast<std::size_t>(std::llround(spec.density * static_cast<double>(o.size())));
  const std::size_t planted_budget = target - target / 20;
  const std::size_t per_community = planted_budget / static_cast<std::size_t>(spec.communities);

  Rng rng(spec.seed, Stream::FactorA);
  FactorTriple f = FactorTriple::zeros(spec.dims, spec.communities);
  std::size_t nnz = 0;
  for (Eigen::Index r = 0; r < spec.communities && nnz < planted_budget; ++r) {
    const std::size_t n_fi = std::min<std::size_t>(n2, 1 + rng.below(2));
    const std::size_t n_role = std::min<std::size_t>(n3, 1 + rng.below(3));
    const std::size_t n_fc = std::clamp<std::size_t>(per_community / (n_fi * n_role), 1, n1);
    auto pick = [&](Matrix& m, std::size_t n, std::size_t count) {
      std::vector<std::size_t> idx = rng.sample_without_replacement(n, count);
      std::sort(idx.begin(), idx.end());
      for (std::size_t i : idx) m(static_cast<Eigen::Index>(i), r) = rng.uniform_open01();
      return idx;
    };
    const auto fcs = pick(f.A, n1, n_fc);
    const auto fis = pick(f.B, n2, n_fi);
    const auto roles = pick(f.C, n3, n_role);
    for (std::size_t k : roles)
      for (std::size_t j : fis)
        for (std::size_t i : fcs) {
          if (nnz >= planted_budget) break;
          const double w = f.A(static_cast<Eigen::Index>(i), r) * f.B(static_cast<Eigen::Index>(j), r) *
                           f.C(static_cast<Eigen::Index>(k), r);
          double& v = o(i, j, k);
          if (v == 0.0) ++nnz;
          v += std::ceil(static_cast<double>(spec.max_count) * w);
        }
  }

  Rng noise(spec.seed, Stream::FlipNoise);
  while (nnz < target) {
    const std::size_t off = static_cast<std::size_t>(noise.below(o.size()));
    if (o[off] == 0.0) {
      o[off] = 1.0;
      ++nnz;
    }
  }
  return {std::move(f), std::move(o)};
}

}  // namespace notf
