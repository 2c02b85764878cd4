#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mirrorkit/data.hpp"
#include "mirrorkit/errors.hpp"
#include "mirrorkit/kernels.hpp"
#include "mirrorkit/losses.hpp"
#include "mirrorkit/mirror_descent.hpp"

namespace mirrorkit {

enum class Trainer {
  pegasos,      // regularized, 1/(lambda t)
  zeroone,      // unregularized, c/sqrt(T)
  zeroone_reg,  // regularized, 1/(lambda t)
};

inline std::string_view to_string(Trainer t) {
  switch (t) {
    case Trainer::pegasos: return "pegasos";
    case Trainer::zeroone: return "zeroone";
    case Trainer::zeroone_reg: return "zeroone_reg";
  }
  return "?";
}

inline Trainer parse_trainer(std::string_view s) {
  if (s == "pegasos") return Trainer::pegasos;
  if (s == "zeroone") return Trainer::zeroone;
  if (s == "zeroone_reg" || s == "zeroone-reg") return Trainer::zeroone_reg;
  throw ConfigError("unknown trainer '" + std::string(s) +
                    "' (expected pegasos, zeroone or zeroone_reg)");
}

// How the unregularized trainer turns its scale c into a step size.
enum class ZeroOneSchedule {
  horizon,   // c / sqrt(T)
  decaying,  // c / sqrt(t)
};

inline ZeroOneSchedule parse_zeroone_schedule(std::string_view s) {
  if (s == "horizon") return ZeroOneSchedule::horizon;
  if (s == "decaying") return ZeroOneSchedule::decaying;
  throw ConfigError("unknown schedule '" + std::string(s) + "' (expected horizon or decaying)");
}

inline std::string_view to_string(ZeroOneSchedule s) {
  return s == ZeroOneSchedule::horizon ? "horizon" : "decaying";
}

struct TrainerConfig {
  Trainer trainer = Trainer::pegasos;
  KernelSpec kernel = KernelSpec::linear();
  LossSpec loss = LossSpec::hinge();
  // Regularization weight for pegasos / zeroone_reg; the step scale c for zeroone.
  double lambda = 0.0;
  std::uint64_t iterations = 1;
  std::uint64_t seed = 0;
  // Optional bound B on ||w||^2.
  std::optional<double> projection_radius;
  ZeroOneSchedule zeroone_schedule = ZeroOneSchedule::horizon;
};

inline bool is_regularized(Trainer t) noexcept { return t != Trainer::zeroone; }

inline void validate(const TrainerConfig& cfg) {
  if (cfg.iterations < 1) throw ConfigError("iterations must be >= 1");
  if (!std::isfinite(cfg.lambda) || cfg.lambda < 0.0) {
    throw ConfigError("lambda must be a nonnegative finite number");
  }
  if (cfg.lambda == 0.0) {
    throw ConfigError(is_regularized(cfg.trainer)
                          ? std::string(to_string(cfg.trainer)) + " requires lambda > 0"
                          : "zeroone requires a positive step scale (lambda field)");
  }
  if (cfg.projection_radius && !(*cfg.projection_radius > 0.0)) {
    throw ConfigError("projection radius must be positive");
  }
}

inline StepSchedule schedule_for(const TrainerConfig& cfg) {
  if (is_regularized(cfg.trainer)) return StepSchedule::inverse_lambda_t(cfg.lambda);
  if (cfg.zeroone_schedule == ZeroOneSchedule::decaying) {
    return StepSchedule::decaying_over_sqrt_t(cfg.lambda);
  }
  return StepSchedule::constant_over_sqrt_horizon(cfg.lambda, cfg.iterations);
}

// Uniform index stream over [0, m). Built on mt19937_64 with rejection sampling, so the
// sequence depends only on the seed (not on the standard library's distributions).
class UniformSampler {
 public:
  UniformSampler(std::uint64_t seed, std::size_t m) : rng_(seed), m_(m) {
    if (m == 0) throw std::invalid_argument("UniformSampler: empty range");
    const std::uint64_t range = m;
    limit_ = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % range;
  }

  std::size_t next() {
    std::uint64_t r;
    do {
      r = rng_();
    } while (r >= limit_);
    return static_cast<std::size_t>(r % m_);
  }

 private:
  std::mt19937_64 rng_;
  std::uint64_t m_;
  std::uint64_t limit_;
};

// Lazily filled rows of the training Gram matrix; at most m^2 entries.
class GramCache {
 public:
  GramCache(KernelSpec spec, const Dataset& ds) : spec_(std::move(spec)), ds_(ds), rows_(ds.size()) {}

  std::span<const double> row(std::size_t i) {
    auto& r = rows_[i];
    if (r.empty()) {
      r.resize(ds_.size());
      const auto& xi = ds_[i].features;
      for (std::size_t j = 0; j < ds_.size(); ++j) r[j] = kernel_eval(spec_, ds_[j].features, xi);
    }
    return r;
  }

 private:
  KernelSpec spec_;
  const Dataset& ds_;
  std::vector<std::vector<double>> rows_;
};

struct Coefficient {
  std::size_t index;
  double alpha;
  friend bool operator==(const Coefficient&, const Coefficient&) = default;
};

// Kernel expansion a(x) = sum_i alpha_i K(x_i, x) over the training set.
class DualModel {
 public:
  DualModel(KernelSpec kernel, std::shared_ptr<const Dataset> train,
            std::vector<Coefficient> coefficients)
      : kernel_(std::move(kernel)), train_(std::move(train)), coef_(std::move(coefficients)) {
    std::sort(coef_.begin(), coef_.end(),
              [](const Coefficient& a, const Coefficient& b) { return a.index < b.index; });
    for (const auto& c : coef_) {
      if (c.index >= train_->size()) throw std::out_of_range("DualModel: coefficient index out of range");
    }
  }

  const KernelSpec& kernel() const noexcept { return kernel_; }
  const Dataset& training_set() const noexcept { return *train_; }
  const std::shared_ptr<const Dataset>& training_set_ptr() const noexcept { return train_; }
  std::span<const Coefficient> coefficients() const noexcept { return coef_; }
  std::size_t support_size() const noexcept { return coef_.size(); }

  double alpha(std::size_t i) const noexcept {
    auto it = std::lower_bound(coef_.begin(), coef_.end(), i,
                               [](const Coefficient& c, std::size_t k) { return c.index < k; });
    return it != coef_.end() && it->index == i ? it->alpha : 0.0;
  }

  double activation(const SparseVector& x) const {
    double a = 0.0;
    for (const auto& c : coef_) a += c.alpha * kernel_eval(kernel_, (*train_)[c.index].features, x);
    return a;
  }

  // ||w||^2 = alpha^T G alpha over the support.
  double squared_norm() const {
    double s = 0.0;
    for (std::size_t p = 0; p < coef_.size(); ++p) {
      const auto& xp = (*train_)[coef_[p].index].features;
      s += coef_[p].alpha * coef_[p].alpha * kernel_eval(kernel_, xp, xp);
      for (std::size_t q = p + 1; q < coef_.size(); ++q) {
        s += 2.0 * coef_[p].alpha * coef_[q].alpha *
             kernel_eval(kernel_, xp, (*train_)[coef_[q].index].features);
      }
    }
    return std::max(s, 0.0);
  }

  friend bool operator==(const DualModel& a, const DualModel& b) {
    return a.kernel_ == b.kernel_ && a.train_ == b.train_ && a.coef_ == b.coef_;
  }

 private:
  KernelSpec kernel_;
  std::shared_ptr<const Dataset> train_;
  std::vector<Coefficient> coef_;
};

// Plain-text dump: a `# kernel=<spec> support=<n>` header, then `<index> <alpha>` lines
// with 0-based training indices.
inline void write_model(std::ostream& out, const DualModel& model) {
  out << "# kernel=" << to_string(model.kernel()) << " support=" << model.support_size() << '\n';
  for (const auto& c : model.coefficients()) {
    out << c.index << ' ' << detail::format_real(c.alpha) << '\n';
  }
}

// What happened at one iteration, reported after the update.
struct IterationRecord {
  std::uint64_t t;
  std::size_t index;
  double activation;    // a(x_i) before the update
  double gradient;      // loss derivative at that activation
  double step;          // eta_t
  double squared_norm;  // incrementally tracked ||w_{t+1}||^2
};

struct TrainHooks {
  std::function<void(const IterationRecord&)> on_iteration;
  // Checkpoints fire at every multiple of checkpoint_every and at the final iteration.
  std::uint64_t checkpoint_every = 0;
  std::function<void(std::uint64_t, const DualModel&)> on_checkpoint;
};

namespace detail {

inline void require_unit_ball(const Dataset& ds) {
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds[i].features.squared_norm() > 1.0 + 1e-9) {
      throw ConfigError("improper kernel over a linear base needs samples with norm <= 1 (sample " +
                        std::to_string(i) + " exceeds it); normalize the data first");
    }
  }
}

}  // namespace detail

// Kernelized stochastic mirror descent in the dual. alpha = scale * beta, so the
// (1 - eta lambda) shrinkage of every coefficient is O(1).
inline DualModel train(const TrainerConfig& cfg, std::shared_ptr<const Dataset> data,
                       const TrainHooks& hooks = {}) {
  validate(cfg);
  if (!data || data->size() == 0) throw ConfigError("training set is empty");
  const Dataset& ds = *data;
  if (cfg.kernel.is_improper() && cfg.kernel.has_linear_base()) detail::require_unit_ball(ds);

  const std::size_t m = ds.size();
  const StepSchedule schedule = schedule_for(cfg);
  const double reg = is_regularized(cfg.trainer) ? cfg.lambda : 0.0;

  GramCache gram(cfg.kernel, ds);
  UniformSampler sampler(cfg.seed, m);
  std::vector<double> beta(m, 0.0);
  double scale = 1.0;
  double beta_norm = 0.0;  // beta^T G beta

  auto snapshot = [&] {
    std::vector<Coefficient> coef;
    for (std::size_t j = 0; j < m; ++j) {
      if (beta[j] != 0.0) coef.push_back({j, scale * beta[j]});
    }
    return DualModel(cfg.kernel, data, std::move(coef));
  };

  for (std::uint64_t t = 1; t <= cfg.iterations; ++t) {
    const double eta = schedule(t);
    const std::size_t i = sampler.next();

    std::span<const double> row;
    try {
      row = gram.row(i);
    } catch (const KernelDomainError& e) {
      throw TrainingError(t, "sample " + std::to_string(i) + ": " + e.what());
    }

    double u = 0.0;
    for (std::size_t j = 0; j < m; ++j) u += beta[j] * row[j];
    const double a = scale * u;
    const double g = loss_grad(cfg.loss, a, ds[i].label);

    if (reg > 0.0) {
      const double shrink = 1.0 - eta * reg;
      if (shrink == 0.0) {
        std::fill(beta.begin(), beta.end(), 0.0);
        scale = 1.0;
        beta_norm = 0.0;
        u = 0.0;
      } else {
        scale *= shrink;
      }
    }

    if (g != 0.0) {
      const double delta = -eta * g / scale;
      beta_norm += 2.0 * delta * u + delta * delta * row[i];
      beta[i] += delta;
    }
    beta_norm = std::max(beta_norm, 0.0);

    if (cfg.projection_radius) {
      const double norm = scale * scale * beta_norm;
      if (norm > *cfg.projection_radius) scale *= std::sqrt(*cfg.projection_radius / norm);
    }

    if (std::abs(scale) < 1e-100) {
      for (auto& b : beta) b *= scale;
      beta_norm *= scale * scale;
      scale = 1.0;
    }

    if (hooks.on_iteration) {
      hooks.on_iteration({t, i, a, g, eta, scale * scale * beta_norm});
    }
    if (hooks.on_checkpoint && hooks.checkpoint_every > 0 &&
        (t % hooks.checkpoint_every == 0 || t == cfg.iterations)) {
      hooks.on_checkpoint(t, snapshot());
    }
  }
  return snapshot();
}

inline DualModel train(const TrainerConfig& cfg, const Dataset& data, const TrainHooks& hooks = {}) {
  return train(cfg, std::make_shared<const Dataset>(data), hooks);
}

}  // namespace mirrorkit
