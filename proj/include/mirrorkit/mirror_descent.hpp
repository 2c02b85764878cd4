#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "mirrorkit/errors.hpp"

namespace mirrorkit {

// psi(w) = ||w||^2 / 2, which is 1-strongly convex w.r.t. the Euclidean norm.
// Its Bregman divergence is B(w, v) = ||w - v||^2 / 2.
struct EuclideanMirrorMap {
  static constexpr double alpha = 1.0;

  static double potential(std::span<const double> w) noexcept {
    return 0.5 * std::inner_product(w.begin(), w.end(), w.begin(), 0.0);
  }

  static double bregman(std::span<const double> w, std::span<const double> v) {
    if (w.size() != v.size()) throw std::invalid_argument("bregman: dimension mismatch");
    double s = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
      double d = w[k] - v[k];
      s += d * d;
    }
    return 0.5 * s;
  }
};

// Closed form of argmin_w  eta <grad, w> + B(w, w_t) + eta (lambda/2) ||w||^2
// under the Euclidean map: (w_t - eta grad) / (1 + eta lambda).
inline std::vector<double> mirror_step(std::span<const double> w, std::span<const double> grad,
                                       double eta, double lambda) {
  if (w.size() != grad.size()) throw std::invalid_argument("mirror_step: dimension mismatch");
  if (!(eta > 0.0)) throw std::invalid_argument("mirror_step: eta must be positive");
  if (lambda < 0.0) throw std::invalid_argument("mirror_step: lambda must be nonnegative");
  std::vector<double> out(w.size());
  if (lambda == 0.0) {
    for (std::size_t k = 0; k < w.size(); ++k) out[k] = w[k] - eta * grad[k];
  } else {
    const double shrink = 1.0 + eta * lambda;
    for (std::size_t k = 0; k < w.size(); ++k) out[k] = (w[k] - eta * grad[k]) / shrink;
  }
  return out;
}

// c / sqrt(T) for a known horizon T; the same value at every t.
struct ConstantOverSqrtHorizon {
  double scale;
  std::uint64_t horizon;
};

// 1 / (lambda t), for lambda-strongly convex objectives.
struct InverseLambdaT {
  double lambda;
};

// c / sqrt(t), the anytime variant of the horizon schedule.
struct DecayingOverSqrtT {
  double scale;
};

class StepSchedule {
 public:
  using Variant = std::variant<ConstantOverSqrtHorizon, InverseLambdaT, DecayingOverSqrtT>;

  static StepSchedule constant_over_sqrt_horizon(double scale, std::uint64_t horizon) {
    if (!(scale > 0.0)) throw ConfigError("step scale must be positive");
    if (horizon < 1) throw ConfigError("horizon must be >= 1");
    return StepSchedule(ConstantOverSqrtHorizon{scale, horizon});
  }

  static StepSchedule inverse_lambda_t(double lambda) {
    if (!(lambda > 0.0)) throw ConfigError("1/(lambda t) schedule requires lambda > 0");
    return StepSchedule(InverseLambdaT{lambda});
  }

  static StepSchedule decaying_over_sqrt_t(double scale) {
    if (!(scale > 0.0)) throw ConfigError("step scale must be positive");
    return StepSchedule(DecayingOverSqrtT{scale});
  }

  const Variant& variant() const noexcept { return v_; }

  double operator()(std::uint64_t t) const {
    if (t == 0) throw std::out_of_range("step_size: iterations are 1-based");
    if (const auto* c = std::get_if<ConstantOverSqrtHorizon>(&v_)) {
      if (t > c->horizon) throw std::out_of_range("step_size: t beyond the schedule horizon");
      return c->scale / std::sqrt(static_cast<double>(c->horizon));
    }
    if (const auto* d = std::get_if<DecayingOverSqrtT>(&v_)) {
      return d->scale / std::sqrt(static_cast<double>(t));
    }
    return 1.0 / (std::get<InverseLambdaT>(v_).lambda * static_cast<double>(t));
  }

 private:
  explicit StepSchedule(Variant v) : v_(v) {}
  Variant v_;
};

inline double step_size(const StepSchedule& schedule, std::uint64_t t) { return schedule(t); }

// Step size that attains the sqrt(T) regret bound for a G-Lipschitz loss when the
// comparator sits at Bregman distance `divergence` from the start point.
inline double sqrt_horizon_step(double alpha, double divergence, double lipschitz,
                                std::uint64_t horizon) {
  return std::sqrt(2.0 * alpha * divergence) /
         (lipschitz * std::sqrt(static_cast<double>(horizon)));
}

// sqrt(2 T B) G / sqrt(alpha): the regret guarantee paired with sqrt_horizon_step.
inline double sqrt_horizon_regret_bound(double alpha, double divergence, double lipschitz,
                                        std::uint64_t horizon) {
  return std::sqrt(2.0 * static_cast<double>(horizon) * divergence) * lipschitz /
         std::sqrt(alpha);
}

// Per-round objective values f_t(w_t) + r(w_t) of an online run.
class RegretTrace {
 public:
  void record(double objective) {
    values_.push_back(objective);
    cumulative_.push_back((cumulative_.empty() ? 0.0 : cumulative_.back()) + objective);
  }

  std::span<const double> values() const noexcept { return values_; }
  std::span<const double> cumulative() const noexcept { return cumulative_; }
  std::size_t size() const noexcept { return values_.size(); }
  double total() const noexcept { return cumulative_.empty() ? 0.0 : cumulative_.back(); }

 private:
  std::vector<double> values_;
  std::vector<double> cumulative_;
};

// R(T) = sum_t [f_t(w_t) + r(w_t)] - sum_t [f_t(w*) + r(w*)].
inline double regret_of(const RegretTrace& trace, std::span<const double> comparator) {
  if (comparator.size() != trace.size()) {
    throw std::invalid_argument("regret_of: sequence lengths differ (" +
                                std::to_string(trace.size()) + " vs " +
                                std::to_string(comparator.size()) + ")");
  }
  double comp = 0.0;
  for (double v : comparator) comp += v;
  return trace.total() - comp;
}

}  // namespace mirrorkit
