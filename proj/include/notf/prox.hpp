#pragma once

// Entrywise proximal operators for the sparse-error update.

#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include "notf/tensor.hpp"

namespace notf {

enum class NormVariant { L0, L1, L2 };

inline std::string_view to_string(NormVariant v) {
  switch (v) {
    case NormVariant::L0: return "l0";
    case NormVariant::L1: return "l1";
    case NormVariant::L2: return "l2";
  }
  return "?";
}

inline std::optional<NormVariant> parse_variant(std::string_view s) {
  if (s == "l0" || s == "L0") return NormVariant::L0;
  if (s == "l1" || s == "L1") return NormVariant::L1;
  if (s == "l2" || s == "L2") return NormVariant::L2;
  return std::nullopt;
}

// Hard threshold: argmin_x 1(x != 0) + (x - z)^2 / (2t). Keeps z iff |z| > sqrt(2t).
inline double hard_threshold(double z, double t) noexcept { return std::abs(z) > std::sqrt(2.0 * t) ? z : 0.0; }

// Soft threshold: argmin_x |x| + (x - z)^2 / (2t).
inline double soft_threshold(double z, double t) noexcept {
  const double m = std::abs(z) - t;
  return m > 0.0 ? std::copysign(m, z) : 0.0;
}

template <class F>
Tensor3 map_entries(Tensor3 z, F&& f) {
  for (double& v : z.values()) v = f(v);
  return z;
}

inline Tensor3 prox_l0(Tensor3 z, double t) {
  const double cut = std::sqrt(2.0 * t);
  return map_entries(std::move(z), [cut](double v) { return std::abs(v) > cut ? v : 0.0; });
}

inline Tensor3 prox_l1(Tensor3 z, double t) {
  return map_entries(std::move(z), [t](double v) { return soft_threshold(v, t); });
}

// argmin_x x^2 / 2 + (tau / 2) (x - z)^2 = tau / (1 + tau) z.
inline Tensor3 prox_l2(Tensor3 z, double tau) {
  const double s = tau / (1.0 + tau);
  return map_entries(std::move(z), [s](double v) { return s * v; });
}

// Sparse-error update for penalty tau: threshold 1/tau for l0/l1, scaling for l2.
inline Tensor3 error_prox(NormVariant variant, Tensor3 z, double tau) {
  switch (variant) {
    case NormVariant::L0: return prox_l0(std::move(z), 1.0 / tau);
    case NormVariant::L1: return prox_l1(std::move(z), 1.0 / tau);
    case NormVariant::L2: return prox_l2(std::move(z), tau);
  }
  return z;
}

// ||U||_0, ||U||_1 or ||U||_F^2 / 2 depending on the variant.
inline double error_loss(NormVariant variant, const Tensor3& u) {
  double s = 0.0;
  switch (variant) {
    case NormVariant::L0: return static_cast<double>(count_nonzero(u));
    case NormVariant::L1:
      for (double v : u.values()) s += std::abs(v);
      return s;
    case NormVariant::L2:
      for (double v : u.values()) s += v * v;
      return 0.5 * s;
  }
  return s;
}

}  // namespace notf
