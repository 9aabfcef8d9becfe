#include <gtest/gtest.h>

#include <set>

#include "notf/synth.hpp"

namespace notf {
namespace {

std::size_t hamming(const Tensor3& a, const Tensor3& b) {
  std::size_t d = 0;
  for (std::size_t n = 0; n < a.size(); ++n) d += a[n] != b[n];
  return d;
}

std::size_t zeros(const Matrix& m) { return static_cast<std::size_t>((m.array() == 0.0).count()); }

TEST(GenSparseFactor, AllZeroAndDense) {
  Rng rng(1, Stream::FactorA);
  EXPECT_TRUE(gen_sparse_factor(5, 2, 1.0, rng).isZero(0.0));
  const Matrix dense = gen_sparse_factor(5, 2, 0.0, rng);
  EXPECT_GT(dense.minCoeff(), 0.0);
  EXPECT_LT(dense.maxCoeff(), 1.0);
}

TEST(GenSparseFactor, ExactZeroCount) {
  Rng rng(0, Stream::FactorA);
  const Matrix a = gen_sparse_factor(50, 3, 0.7067, rng);
  EXPECT_EQ(zeros(a), 106u);
  EXPECT_EQ(a.rows(), 50);
  EXPECT_EQ(a.cols(), 3);
}

TEST(GenSparseFactor, RejectsBadSparsity) {
  Rng rng(0);
  EXPECT_THROW(gen_sparse_factor(3, 2, 1.5, rng), DomainError);
  EXPECT_THROW(gen_sparse_factor(3, 2, -0.1, rng), DomainError);
}

TEST(GroundTruth, IndicatorOfSupport) {
  Matrix a(2, 1), b(2, 1), c(1, 1);
  a << 1, 0;
  b << 1, 1;
  c << 1;
  const Tensor3 x = make_ground_truth({a, b, c});
  EXPECT_EQ(x, Tensor3({2, 2, 1}, std::vector<double>{1, 0, 1, 0}));
}

TEST(GroundTruth, BinaryAndMatchesSupport) {
  const SynthInstance inst = generate(SynthSpec{});
  EXPECT_TRUE(is_binary(inst.x));
  const Tensor3 recon = cp_reconstruct(inst.factors);
  for (std::size_t n = 0; n < recon.size(); ++n) EXPECT_EQ(inst.x[n] == 1.0, recon[n] > 0.0);
}

TEST(FlipNoise, ZeroNoiseIsIdentity) {
  SynthSpec spec;
  spec.noise_ratio = 0.0;
  const SynthInstance inst = generate(spec);
  EXPECT_EQ(inst.o, inst.x);
  EXPECT_TRUE(inst.flipped_positions.empty());
}

TEST(FlipNoise, FullFlipIsComplement) {
  Rng rng(3);
  Tensor3 x({3, 2, 2});
  x[1] = x[4] = 1.0;
  const FlipResult r = apply_flip_noise(x, 1.0, rng);
  for (std::size_t n = 0; n < x.size(); ++n) EXPECT_EQ(r.tensor[n], 1.0 - x[n]);
}

TEST(FlipNoise, DefaultInstanceFlipsOneThousand) {
  const SynthInstance inst = generate(SynthSpec{});
  EXPECT_EQ(inst.flipped_positions.size(), 1000u);
  EXPECT_EQ(hamming(inst.x, inst.o), 1000u);
}

TEST(FlipNoise, PositionsAreDistinctAndExactlyTheDifferences) {
  SynthSpec spec;
  spec.noise_ratio = 0.05;
  spec.seed = 9;
  const SynthInstance inst = generate(spec);
  std::set<std::size_t> offs;
  for (const Position& p : inst.flipped_positions) {
    const std::size_t off = inst.x.offset(p.i, p.j, p.k);
    EXPECT_NE(inst.x[off], inst.o[off]);
    offs.insert(off);
  }
  EXPECT_EQ(offs.size(), inst.flipped_positions.size());
  EXPECT_EQ(hamming(inst.x, inst.o), offs.size());
  EXPECT_TRUE(std::is_sorted(offs.begin(), offs.end()));
}

TEST(FlipNoise, RejectsNonBinary) {
  Rng rng(0);
  Tensor3 x({2, 2, 2});
  x[0] = 0.5;
  EXPECT_THROW(apply_flip_noise(x, 0.1, rng), DomainError);
}

TEST(Generate, DeterministicPerSeed) {
  SynthSpec spec;
  spec.seed = 12;
  const SynthInstance a = generate(spec), b = generate(spec);
  EXPECT_EQ(a.factors, b.factors);
  EXPECT_EQ(a.o, b.o);
  EXPECT_EQ(a.flipped_positions, b.flipped_positions);
  spec.seed = 13;
  EXPECT_FALSE(generate(spec).o == a.o);
}

TEST(Generate, RealizedSparsityMatchesRequest) {
  const SynthSpec spec;
  const SynthInstance inst = generate(spec);
  for (int d = 1; d <= 3; ++d) {
    const Matrix& m = inst.factors.factor(d);
    const double realized = static_cast<double>(zeros(m)) / static_cast<double>(m.size());
    RecordProperty("sparsity_mode" + std::to_string(d), std::to_string(realized));
    EXPECT_NEAR(realized, spec.sparsity[static_cast<std::size_t>(d - 1)], 0.5 / static_cast<double>(m.size()));
  }
}

TEST(Generate, RejectsInvalidParameters) {
  SynthSpec spec;
  spec.noise_ratio = 1.5;
  EXPECT_THROW(generate(spec), DomainError);
  spec = {};
  spec.true_rank = 0;
  EXPECT_THROW(generate(spec), DomainError);
}

TEST(Occurrence, ExactDensityAndNonNegativeIntegers) {
  OccurrenceSpec spec;
  spec.dims = {200, 30, 10};
  spec.communities = 6;
  spec.density = 0.02;
  const OccurrenceInstance inst = generate_occurrence(spec);
  EXPECT_EQ(count_nonzero(inst.o), 1200u);
  for (double v : inst.o.values()) {
    EXPECT_GE(v, 0.0);
    EXPECT_EQ(v, std::floor(v));
  }
}

}  // namespace
}  // namespace notf
