#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <system_error>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "mirrorkit/bench.hpp"
#include "mirrorkit/data.hpp"
#include "mirrorkit/errors.hpp"
#include "mirrorkit/kernels.hpp"
#include "mirrorkit/losses.hpp"
#include "mirrorkit/trainer.hpp"

namespace mirrorkit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

struct TrainOptions {
  std::string data;
  std::string test;
  std::string trainer;
  std::string kernel;
  std::string loss;
  double lambda = 0.0;
  std::uint64_t iters = 0;
  std::uint64_t seed = 0;
  std::optional<double> projection_radius;
  std::string schedule = "horizon";
  bool normalize = false;
  std::string out;
};

struct BenchOptions {
  std::string config;
  std::string out;
  unsigned jobs = 0;  // 0: one per repetition, capped at hardware concurrency
  bool wall_time = false;
  // Set by `curve` (default 1000); `bench` keeps the config file's curve_every.
  std::optional<std::uint64_t> curve_every;
};

struct GramCheckOptions {
  std::string data;
  std::string kernel;
  std::size_t n = 0;
  double tol = 1e-8;
  bool normalize = false;
};

enum class Command { train, bench, curve, gram_check };

struct Invocation {
  Command command = Command::train;
  TrainOptions train;
  BenchOptions bench;
  GramCheckOptions gram;
};

// Thrown for argument problems; carries the exit code (0 for --help).
class UsageError : public std::runtime_error {
 public:
  UsageError(int code, const std::string& what) : std::runtime_error(what), code_(code) {}
  int code() const noexcept { return code_; }

 private:
  int code_;
};

namespace detail {

inline void add_bench_flags(CLI::App* cmd, BenchOptions& o) {
  cmd->add_option("--config", o.config, "experiment config file (key = value lines)")->required();
  cmd->add_option("--out", o.out, "CSV output path")->required();
  cmd->add_option("--jobs", o.jobs, "concurrent repetitions (default: repetitions, capped at cores)");
  cmd->add_flag("--wall-time", o.wall_time, "fill the wall_ms column (output is then run-dependent)");
}

inline std::optional<std::uint64_t> env_seed() {
  const char* v = std::getenv("MIRRORKIT_SEED");
  if (!v || !*v) return std::nullopt;
  std::string_view s(v);
  std::uint64_t out{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw UsageError(kExitUsage, "MIRRORKIT_SEED must be a non-negative integer");
  }
  return out;
}

}  // namespace detail

inline Invocation parse_args(int argc, const char* const* argv, std::ostream& out = std::cout) {
  Invocation inv;
  CLI::App app{"Kernel stochastic mirror descent trainers and benchmark harness", "mirrorkit"};
  app.require_subcommand(1, 1);

  auto* train = app.add_subcommand("train", "train one model and report its accuracy");
  auto& t = inv.train;
  train->add_option("--data", t.data, "training set (libsvm format)")->required();
  train->add_option("--test", t.test, "test set; accuracy is reported on it when given");
  train->add_option("--trainer", t.trainer, "pegasos | zeroone | zeroone_reg")->required();
  train->add_option("--kernel", t.kernel, "linear | gaussian:<gamma> | improper:<nu>:<base>")->required();
  train->add_option("--loss", t.loss, "hinge | sigmoid01:<L>")->required();
  train->add_option("--lambda", t.lambda, "regularization weight (step scale c for zeroone)")->required();
  train->add_option("--iters", t.iters, "number of iterations T")->required();
  train->add_option("--seed", t.seed, "sampling seed (MIRRORKIT_SEED overrides)")->required();
  train->add_option("--projection-radius", t.projection_radius, "bound B on ||w||^2");
  train->add_option("--schedule", t.schedule, "zeroone step: horizon (c/sqrt(T)) | decaying (c/sqrt(t))");
  train->add_flag("--normalize", t.normalize, "scale samples to unit norm");
  train->add_option("--out", t.out, "write the dual coefficients to this file");

  auto* bench = app.add_subcommand("bench", "run a repeated experiment and write CSV");
  detail::add_bench_flags(bench, inv.bench);

  auto* curve = app.add_subcommand("curve", "bench plus a learning curve for repetition 1");
  detail::add_bench_flags(curve, inv.bench);
  std::uint64_t curve_every = 1000;
  curve->add_option("--curve-every", curve_every, "checkpoint spacing in iterations")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  auto* gram = app.add_subcommand("gram-check", "check a kernel's Gram matrix for PSD");
  auto& g = inv.gram;
  gram->add_option("--data", g.data, "dataset (libsvm format)")->required();
  gram->add_option("--kernel", g.kernel, "kernel spec")->required();
  gram->add_option("--n", g.n, "use the first n samples")->required()->check(CLI::Range(1, 256));
  gram->add_option("--tol", g.tol, "eigenvalue tolerance");
  gram->add_flag("--normalize", g.normalize, "scale samples to unit norm");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    auto subs = app.get_subcommands();
    out << (subs.empty() ? app.help() : subs.front()->help());
    throw UsageError(kExitOk, "");
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    throw UsageError(kExitOk, "");
  } catch (const CLI::ParseError& e) {
    throw UsageError(kExitUsage, std::string(e.what()) + "\nRun with --help for usage.");
  }

  if (train->parsed()) {
    inv.command = Command::train;
  } else if (bench->parsed()) {
    inv.command = Command::bench;
  } else if (curve->parsed()) {
    inv.command = Command::curve;
    inv.bench.curve_every = curve_every;
  } else {
    inv.command = Command::gram_check;
  }
  return inv;
}

namespace detail {

inline Dataset load_dataset(const std::string& path, bool normalize) {
  Dataset ds = load_libsvm(path);
  return normalize ? normalize_unit(std::move(ds)) : ds;
}

inline int run_train(const TrainOptions& o, std::ostream& out) {
  TrainerConfig cfg;
  try {
    cfg.trainer = parse_trainer(o.trainer);
    cfg.kernel = parse_kernel_spec(o.kernel);
    cfg.loss = parse_loss_spec(o.loss);
    cfg.zeroone_schedule = parse_zeroone_schedule(o.schedule);
    cfg.lambda = o.lambda;
    cfg.iterations = o.iters;
    cfg.seed = env_seed().value_or(o.seed);
    cfg.projection_radius = o.projection_radius;
    validate(cfg);
  } catch (const ConfigError& e) {
    throw UsageError(kExitUsage, e.what());
  }

  auto train_set = std::make_shared<const Dataset>(load_dataset(o.data, o.normalize));
  std::optional<Dataset> test;
  if (!o.test.empty()) test = load_dataset(o.test, o.normalize);

  DualModel model = train(cfg, train_set);
  if (!o.out.empty()) {
    std::ofstream f(o.out);
    if (!f) throw std::system_error(errno, std::generic_category(), "cannot write " + o.out);
    write_model(f, model);
  }
  const double train_acc = evaluate_accuracy(model, *train_set);
  out << "support=" << model.support_size() << '\n';
  out << "train_accuracy=" << mirrorkit::detail::sig6(train_acc) << '\n';
  out << "mean_accuracy=" << mirrorkit::detail::sig6(test ? evaluate_accuracy(model, *test) : train_acc)
      << '\n';
  return kExitOk;
}

inline int run_bench(const BenchOptions& o, std::ostream& out) {
  ExperimentConfig cfg = load_experiment_config(o.config);
  if (auto s = env_seed()) cfg.trainer.seed = *s;
  if (o.curve_every) cfg.curve_every = *o.curve_every;

  unsigned jobs = o.jobs;
  if (jobs == 0) jobs = std::min<unsigned>(cfg.repetitions, std::max(1u, std::thread::hardware_concurrency()));

  RunResult result = run_experiment(cfg, jobs);
  emit_csv(result, std::filesystem::path(o.out), CsvOptions{o.wall_time});
  for (std::size_t k = 0; k < result.accuracies.size(); ++k) {
    out << "run=" << (k + 1) << " accuracy=" << mirrorkit::detail::sig6(result.accuracies[k]) << '\n';
  }
  out << "mean_accuracy=" << mirrorkit::detail::sig6(result.mean_accuracy) << '\n';
  return kExitOk;
}

inline int run_gram_check(const GramCheckOptions& o, std::ostream& out) {
  KernelSpec spec;
  try {
    spec = parse_kernel_spec(o.kernel);
  } catch (const ConfigError& e) {
    throw UsageError(kExitUsage, e.what());
  }
  Dataset ds = load_dataset(o.data, o.normalize);
  const std::size_t n = std::min(o.n, ds.size());
  std::vector<SparseVector> xs;
  for (std::size_t i = 0; i < n; ++i) xs.push_back(ds[i].features);
  PsdResult r = psd_check(gram_matrix(spec, xs), o.tol);
  out << "n=" << n << '\n';
  out << "min_eigenvalue=" << r.min_eigenvalue << '\n';
  out << (r.pass ? "PASS" : "FAIL") << '\n';
  return r.pass ? kExitOk : kExitFailure;
}

}  // namespace detail

// Exit codes: 0 success, 1 file / data / training failure (or a failed gram-check),
// 2 usage error.
inline int run(const Invocation& inv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  try {
    switch (inv.command) {
      case Command::train: return detail::run_train(inv.train, out);
      case Command::bench:
      case Command::curve: return detail::run_bench(inv.bench, out);
      case Command::gram_check: return detail::run_gram_check(inv.gram, out);
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return e.code();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}

inline int main(int argc, const char* const* argv, std::ostream& out = std::cout,
                std::ostream& err = std::cerr) {
  Invocation inv;
  try {
    inv = parse_args(argc, argv, out);
  } catch (const UsageError& e) {
    if (e.code() != kExitOk) err << e.what() << '\n';
    return e.code();
  }
  return run(inv, out, err);
}

}  // namespace mirrorkit::cli
