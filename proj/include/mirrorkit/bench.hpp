#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <istream>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "mirrorkit/data.hpp"
#include "mirrorkit/detail/text.hpp"
#include "mirrorkit/errors.hpp"
#include "mirrorkit/kernels.hpp"
#include "mirrorkit/losses.hpp"
#include "mirrorkit/trainer.hpp"

namespace mirrorkit {

// A DualModel flattened for bulk prediction: support vectors are laid out densely,
// feature-major, so one test sample costs O(nnz(x) * support) multiply-adds.
class Predictor {
 public:
  explicit Predictor(const DualModel& model) : kernel_(model.kernel()) {
    const auto& ds = model.training_set();
    const auto coef = model.coefficients();
    support_ = coef.size();
    dim_ = ds.feature_dim;
    if (std::holds_alternative<LinearKernel>(kernel_.variant())) {
      weights_.assign(dim_ + 1, 0.0);
      for (const auto& c : coef) {
        for (const auto& f : ds[c.index].features.entries()) weights_[f.index] += c.alpha * f.value;
      }
      return;
    }
    alpha_.reserve(support_);
    norms_.reserve(support_);
    columns_.assign((dim_ + 1) * support_, 0.0);
    for (std::size_t s = 0; s < support_; ++s) {
      const auto& x = ds[coef[s].index].features;
      alpha_.push_back(coef[s].alpha);
      norms_.push_back(x.squared_norm());
      for (const auto& f : x.entries()) columns_[f.index * support_ + s] = f.value;
    }
    scratch_.resize(support_);
  }

  // Not thread-safe (uses an internal scratch buffer); copy the Predictor per thread.
  double activation(const SparseVector& x) {
    if (support_ == 0) return 0.0;
    if (!weights_.empty()) {
      double a = 0.0;
      for (const auto& f : x.entries()) {
        if (f.index <= dim_) a += weights_[f.index] * f.value;
      }
      return a;
    }
    std::fill(scratch_.begin(), scratch_.end(), 0.0);
    for (const auto& f : x.entries()) {
      if (f.index > dim_) continue;
      const double* col = &columns_[f.index * support_];
      for (std::size_t s = 0; s < support_; ++s) scratch_[s] += col[s] * f.value;
    }
    const double xnorm = x.squared_norm();
    double a = 0.0;
    std::visit(
        [&](const auto& k) {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, GaussianKernel>) {
            for (std::size_t s = 0; s < support_; ++s) a += alpha_[s] * gaussian(k.gamma, s, xnorm);
          } else if constexpr (std::is_same_v<K, ImproperKernel>) {
            const auto* g = std::get_if<GaussianKernel>(&k.base);
            for (std::size_t s = 0; s < support_; ++s) {
              double base = g ? gaussian(g->gamma, s, xnorm) : scratch_[s];
              a += alpha_[s] * improper_transform(k.nu, base);
            }
          }
        },
        kernel_.variant());
    return a;
  }

 private:
  double gaussian(double gamma, std::size_t s, double xnorm) const {
    double d2 = std::max(0.0, norms_[s] + xnorm - 2.0 * scratch_[s]);
    return std::exp(-gamma * d2);
  }

  KernelSpec kernel_;
  std::size_t support_ = 0;
  std::uint32_t dim_ = 0;
  std::vector<double> weights_;
  std::vector<double> alpha_;
  std::vector<double> norms_;
  std::vector<double> columns_;
  std::vector<double> scratch_;
};

// Fraction of test samples whose predicted class matches the label.
inline double evaluate_accuracy(const DualModel& model, const Dataset& test) {
  if (test.size() == 0) throw std::invalid_argument("evaluate_accuracy: empty test set");
  Predictor predictor(model);
  std::size_t correct = 0;
  for (std::size_t k = 0; k < test.size(); ++k) {
    double a;
    try {
      a = predictor.activation(test[k].features);
    } catch (const KernelDomainError& e) {
      throw KernelDomainError("test sample " + std::to_string(k) + ": " + e.what());
    }
    correct += zero_one_error(a, test[k].label) == 0;
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

struct ExperimentConfig {
  std::string name;
  std::filesystem::path train_path;
  std::filesystem::path test_path;
  TrainerConfig trainer;
  std::uint32_t repetitions = 5;
  std::uint64_t curve_every = 0;  // 0 disables the learning curve
  bool normalize = false;
};

inline void validate(const ExperimentConfig& cfg) {
  validate(cfg.trainer);
  if (cfg.repetitions < 1) throw ConfigError("repetitions must be >= 1");
  if (cfg.train_path.empty()) throw ConfigError("train_path is required");
  if (cfg.test_path.empty()) throw ConfigError("test_path is required");
}

namespace detail {

inline bool parse_bool(std::string_view v, std::size_t line) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ParseError(line, "expected a boolean, got '" + std::string(v) + "'");
}

template <typename Int>
Int parse_uint(std::string_view v, std::size_t line) {
  Int out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ParseError(line, "expected a non-negative integer, got '" + std::string(v) + "'");
  }
  return out;
}

}  // namespace detail

// Line-oriented `key = value` pairs; `#` comments. Relative paths are resolved
// against base_dir.
inline ExperimentConfig parse_experiment_config(std::istream& in,
                                                const std::filesystem::path& base_dir = {}) {
  ExperimentConfig cfg;
  bool have_trainer = false, have_kernel = false, have_loss = false, have_lambda = false,
       have_iterations = false;
  std::string raw;
  std::size_t lineno = 0;
  auto resolve = [&](std::string_view v) {
    std::filesystem::path p{std::string(v)};
    return p.is_relative() && !base_dir.empty() ? base_dir / p : p;
  };
  while (std::getline(in, raw)) {
    ++lineno;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(lineno, "expected key = value");
    auto key = detail::trim(line.substr(0, eq));
    auto value = detail::trim(line.substr(eq + 1));
    if (value.empty()) throw ParseError(lineno, "empty value for '" + std::string(key) + "'");
    try {
      if (key == "name") {
        cfg.name = value;
      } else if (key == "train_path") {
        cfg.train_path = resolve(value);
      } else if (key == "test_path") {
        cfg.test_path = resolve(value);
      } else if (key == "trainer") {
        cfg.trainer.trainer = parse_trainer(value);
        have_trainer = true;
      } else if (key == "kernel") {
        cfg.trainer.kernel = parse_kernel_spec(value);
        have_kernel = true;
      } else if (key == "loss") {
        cfg.trainer.loss = parse_loss_spec(value);
        have_loss = true;
      } else if (key == "lambda") {
        cfg.trainer.lambda = detail::parse_real(value, "lambda");
        have_lambda = true;
      } else if (key == "iterations") {
        cfg.trainer.iterations = detail::parse_uint<std::uint64_t>(value, lineno);
        have_iterations = true;
      } else if (key == "seed") {
        cfg.trainer.seed = detail::parse_uint<std::uint64_t>(value, lineno);
      } else if (key == "projection_radius") {
        cfg.trainer.projection_radius = detail::parse_real(value, "projection_radius");
      } else if (key == "zeroone_schedule") {
        cfg.trainer.zeroone_schedule = parse_zeroone_schedule(value);
      } else if (key == "repetitions") {
        cfg.repetitions = detail::parse_uint<std::uint32_t>(value, lineno);
      } else if (key == "curve_every") {
        cfg.curve_every = detail::parse_uint<std::uint64_t>(value, lineno);
      } else if (key == "normalize") {
        cfg.normalize = detail::parse_bool(value, lineno);
      } else {
        throw ParseError(lineno, "unknown key '" + std::string(key) + "'");
      }
    } catch (const ConfigError& e) {
      throw ParseError(lineno, e.what());
    }
  }
  if (!have_trainer || !have_kernel || !have_loss || !have_lambda || !have_iterations) {
    throw ParseError(0, "config must set trainer, kernel, loss, lambda and iterations");
  }
  try {
    validate(cfg);
  } catch (const ConfigError& e) {
    throw ParseError(0, e.what());
  }
  return cfg;
}

inline ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::system_error(errno, std::generic_category(), "cannot open " + path.string());
  try {
    auto cfg = parse_experiment_config(in, path.parent_path());
    if (cfg.name.empty()) cfg.name = path.stem().string();
    return cfg;
  } catch (const ParseError& e) {
    throw ParseError(e.line(), path.string() + ": " + e.what());
  }
}

struct CurvePoint {
  std::uint64_t iteration;
  double accuracy;
  friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

struct RunResult {
  std::uint64_t iterations = 0;
  std::vector<double> accuracies;  // one per repetition, in repetition order
  double mean_accuracy = 0.0;
  std::vector<CurvePoint> curve;   // repetition 1 only
  std::vector<double> wall_ms;     // per repetition
};

// Repetition k (0-based) trains with seed + k. Repetitions run on up to `jobs` threads
// and are merged by index, so the result does not depend on scheduling.
inline RunResult run_experiment(const ExperimentConfig& cfg, std::shared_ptr<const Dataset> train_set,
                                const Dataset& test, unsigned jobs = 1) {
  validate(cfg);
  const std::uint32_t reps = cfg.repetitions;
  RunResult result;
  result.iterations = cfg.trainer.iterations;
  result.accuracies.assign(reps, 0.0);
  result.wall_ms.assign(reps, 0.0);

  auto run_one = [&](std::uint32_t k) {
    TrainerConfig tc = cfg.trainer;
    tc.seed = cfg.trainer.seed + k;
    TrainHooks hooks;
    if (k == 0 && cfg.curve_every > 0) {
      hooks.checkpoint_every = cfg.curve_every;
      hooks.on_checkpoint = [&](std::uint64_t t, const DualModel& m) {
        result.curve.push_back({t, evaluate_accuracy(m, test)});
      };
    }
    auto start = std::chrono::steady_clock::now();
    DualModel model = train(tc, train_set, hooks);
    result.accuracies[k] = evaluate_accuracy(model, test);
    result.wall_ms[k] =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  };

  jobs = std::clamp<unsigned>(jobs, 1u, reps);
  if (jobs == 1) {
    for (std::uint32_t k = 0; k < reps; ++k) run_one(k);
  } else {
    std::atomic<std::uint32_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < jobs; ++w) {
      pool.emplace_back([&] {
        for (std::uint32_t k = next++; k < reps; k = next++) {
          try {
            run_one(k);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }

  double sum = 0.0;
  for (double a : result.accuracies) sum += a;
  result.mean_accuracy = sum / reps;
  return result;
}

// Loads (and optionally unit-normalizes) both datasets, then runs the repetitions.
inline RunResult run_experiment(const ExperimentConfig& cfg, unsigned jobs = 1) {
  validate(cfg);
  Dataset train_set = load_libsvm(cfg.train_path);
  Dataset test = load_libsvm(cfg.test_path);
  if (cfg.normalize) {
    train_set = normalize_unit(std::move(train_set));
    test = normalize_unit(std::move(test));
  }
  return run_experiment(cfg, std::make_shared<const Dataset>(std::move(train_set)), test, jobs);
}

// Empirical side-by-side of a trained model w~ and a reference w0 on held-out data:
// L(w~) - L(w0) <= (F(w~) - F(w0)) + r(w0), with F = L + r and r(w) = lambda/2 ||w||^2.
struct OracleGapReport {
  double loss_model = 0.0;
  double loss_reference = 0.0;
  double reg_model = 0.0;
  double reg_reference = 0.0;
  double objective_model = 0.0;
  double objective_reference = 0.0;
  double loss_gap = 0.0;
  double objective_gap = 0.0;
  double bound = 0.0;  // objective_gap + reg_reference
  bool holds = false;
};

inline OracleGapReport oracle_gap_report(const DualModel& model, const DualModel& reference,
                                         const Dataset& test, double lambda,
                                         const LossSpec& loss = LossSpec::hinge()) {
  if (!(model.kernel() == reference.kernel())) {
    throw ConfigError("oracle_gap_report: models use different kernels (" +
                      to_string(model.kernel()) + " vs " + to_string(reference.kernel()) + ")");
  }
  if (model.training_set_ptr() != reference.training_set_ptr() &&
      !(model.training_set() == reference.training_set())) {
    throw ConfigError("oracle_gap_report: models were trained on different training sets");
  }
  if (test.size() == 0) throw std::invalid_argument("oracle_gap_report: empty test set");
  if (lambda < 0.0) throw ConfigError("oracle_gap_report: lambda must be nonnegative");

  auto mean_loss = [&](const DualModel& m) {
    Predictor p(m);
    double s = 0.0;
    for (const auto& sample : test.samples) s += loss_value(loss, p.activation(sample.features), sample.label);
    return s / static_cast<double>(test.size());
  };

  OracleGapReport r;
  r.loss_model = mean_loss(model);
  r.loss_reference = mean_loss(reference);
  r.reg_model = 0.5 * lambda * model.squared_norm();
  r.reg_reference = 0.5 * lambda * reference.squared_norm();
  r.objective_model = r.loss_model + r.reg_model;
  r.objective_reference = r.loss_reference + r.reg_reference;
  r.loss_gap = r.loss_model - r.loss_reference;
  r.objective_gap = r.objective_model - r.objective_reference;
  r.bound = r.objective_gap + r.reg_reference;
  r.holds = r.loss_gap <= r.bound + 1e-12 * std::max(1.0, std::abs(r.bound));
  return r;
}

struct CsvOptions {
  // Wall time makes output run-dependent; off keeps repeated runs byte-identical.
  bool wall_time = false;
};

namespace detail {

inline std::string sig6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace detail

inline constexpr std::string_view kCsvHeader = "run,iteration,split,accuracy,wall_ms";

// One `test` row per repetition (iteration = T), then one `curve` row per checkpoint of
// repetition 1. wall_ms is empty unless requested.
inline void emit_csv(const RunResult& result, std::ostream& out, CsvOptions opts = {}) {
  out << kCsvHeader << '\n';
  for (std::size_t k = 0; k < result.accuracies.size(); ++k) {
    out << (k + 1) << ',' << result.iterations << ",test," << detail::sig6(result.accuracies[k])
        << ',';
    if (opts.wall_time && k < result.wall_ms.size()) out << detail::sig6(result.wall_ms[k]);
    out << '\n';
  }
  for (const auto& p : result.curve) {
    out << 1 << ',' << p.iteration << ",curve," << detail::sig6(p.accuracy) << ",\n";
  }
  if (!out) throw std::ios_base::failure("emit_csv: write failed");
}

inline void emit_csv(const RunResult& result, const std::filesystem::path& path, CsvOptions opts = {}) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::system_error(errno, std::generic_category(), "cannot write " + path.string());
  try {
    emit_csv(result, out, opts);
    out.flush();
    if (!out) throw std::ios_base::failure("write failed");
  } catch (const std::ios_base::failure&) {
    throw std::system_error(EIO, std::generic_category(), "cannot write " + path.string());
  }
}

}  // namespace mirrorkit
