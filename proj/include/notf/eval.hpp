#pragma once

// Reconstruction metrics and community extraction.
//
// Non-zeros are positives and zeros are negatives. A reconstruction entry is
// positive when it exceeds the binarization threshold, by default 1e-6 so that
// only numerically-zero entries count as negatives; a reference entry is
// positive when nonzero. Passing 0.5 instead compares against the nearest
// integer, i.e. rounds the reconstruction before testing for >= 1.

#include <algorithm>
#include <array>
#include <optional>
#include <string>
#include <vector>

#include "notf/prox.hpp"
#include "notf/tensor.hpp"

namespace notf {

inline constexpr double kDefaultBinarizeThreshold = 1e-6;
inline constexpr double kDefaultMembershipThreshold = 1e-6;

inline Tensor3 binarize(Tensor3 t, double threshold = kDefaultBinarizeThreshold) {
  for (double& v : t.values()) v = v > threshold ? 1.0 : 0.0;
  return t;
}

struct Confusion {
  std::size_t fp = 0;
  std::size_t fn = 0;
  friend bool operator==(const Confusion&, const Confusion&) = default;
};

inline Confusion confusion_counts(const Tensor3& recon, const Tensor3& reference,
                                  double threshold = kDefaultBinarizeThreshold) {
  recon.require_same_shape(reference, "confusion_counts");
  Confusion c;
  for (std::size_t n = 0; n < recon.size(); ++n) {
    const bool predicted = recon[n] > threshold;
    const bool actual = reference[n] != 0.0;
    c.fp += predicted && !actual;
    c.fn += !predicted && actual;
  }
  return c;
}

inline double mse(const Tensor3& recon, const Tensor3& reference) {
  recon.require_same_shape(reference, "mse");
  double s = 0.0;
  for (std::size_t n = 0; n < recon.size(); ++n) {
    const double d = recon[n] - reference[n];
    s += d * d;
  }
  return s / static_cast<double>(recon.size());
}

// fp + fn per index along `mode`.
inline std::vector<std::size_t> slice_error_histogram(const Tensor3& recon, const Tensor3& reference, int mode,
                                                      double threshold = kDefaultBinarizeThreshold) {
  recon.require_same_shape(reference, "slice_error_histogram");
  detail::check_mode(mode);
  const auto [n1, n2, n3] = recon.dims();
  std::vector<std::size_t> out(recon.dim(mode), 0);
  for (std::size_t k = 0; k < n3; ++k)
    for (std::size_t j = 0; j < n2; ++j)
      for (std::size_t i = 0; i < n1; ++i) {
        const std::size_t n = recon.offset(i, j, k);
        const bool predicted = recon[n] > threshold;
        const bool actual = reference[n] != 0.0;
        if (predicted != actual) ++out[mode == 1 ? i : mode == 2 ? j : k];
      }
  return out;
}

inline std::array<double, 3> factor_nonzero_ratio(const FactorTriple& f,
                                                  double threshold = kDefaultMembershipThreshold) {
  auto ratio = [threshold](const Matrix& m) {
    if (m.size() == 0) return 0.0;
    return static_cast<double>((m.array() > threshold).count()) / static_cast<double>(m.size());
  };
  return {ratio(f.A), ratio(f.B), ratio(f.C)};
}

struct Member {
  std::size_t index;
  std::optional<std::string> label;
  double weight;
};

struct Community {
  Eigen::Index rank_index;
  std::array<std::vector<Member>, 3> members;  // per mode, descending weight
};

using ModeLabels = std::array<std::vector<std::string>, 3>;

// One community per rank-one component; members are the entries of a_r, b_r,
// c_r at or above the threshold. Empty label vectors mean "no labels" for that mode.
inline std::vector<Community> extract_communities(const FactorTriple& f, const std::optional<ModeLabels>& labels,
                                                  double membership_threshold = kDefaultMembershipThreshold) {
  if (!(membership_threshold > 0.0)) throw DomainError("extract_communities: threshold must be > 0");
  if (labels) {
    for (int d = 1; d <= 3; ++d) {
      const auto& l = (*labels)[static_cast<std::size_t>(d - 1)];
      if (!l.empty() && l.size() != static_cast<std::size_t>(f.factor(d).rows())) {
        throw DimensionError("extract_communities: mode " + std::to_string(d) + " has " +
                             std::to_string(f.factor(d).rows()) + " entries but " + std::to_string(l.size()) +
                             " labels");
      }
    }
  }
  std::vector<Community> out;
  out.reserve(static_cast<std::size_t>(f.rank()));
  for (Eigen::Index r = 0; r < f.rank(); ++r) {
    Community c{r, {}};
    for (int d = 1; d <= 3; ++d) {
      const Matrix& m = f.factor(d);
      auto& list = c.members[static_cast<std::size_t>(d - 1)];
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        if (m(i, r) < membership_threshold) continue;
        Member mem{static_cast<std::size_t>(i), std::nullopt, m(i, r)};
        if (labels && !(*labels)[static_cast<std::size_t>(d - 1)].empty()) {
          mem.label = (*labels)[static_cast<std::size_t>(d - 1)][static_cast<std::size_t>(i)];
        }
        list.push_back(std::move(mem));
      }
      std::stable_sort(list.begin(), list.end(), [](const Member& a, const Member& b) { return a.weight > b.weight; });
    }
    out.push_back(std::move(c));
  }
  return out;
}

struct EvalReport {
  std::optional<Confusion> vs_truth;
  Confusion vs_observation;
  std::optional<double> mse_vs_truth;
  double mse_vs_observation = 0.0;
  int outer_iterations = 0;
  bool converged = false;
  NormVariant variant = NormVariant::L0;
  Eigen::Index rank = 0;
  std::optional<double> noise_ratio;
};

inline EvalReport evaluate(const Tensor3& recon, const Tensor3& observation, const Tensor3* truth,
                           double threshold = kDefaultBinarizeThreshold) {
  EvalReport r;
  r.vs_observation = confusion_counts(recon, observation, threshold);
  r.mse_vs_observation = mse(recon, observation);
  if (truth) {
    r.vs_truth = confusion_counts(recon, *truth, threshold);
    r.mse_vs_truth = mse(recon, *truth);
  }
  return r;
}

}  // namespace notf
