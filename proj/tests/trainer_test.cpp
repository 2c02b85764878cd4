#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "mirrorkit/trainer.hpp"
#include "support/oracles.hpp"

using namespace mirrorkit;

namespace {

std::shared_ptr<const Dataset> single_sample() {
  return std::make_shared<const Dataset>(
      Dataset{"one", {{SparseVector{{1, 1.0}}, Label::positive}}, 1});
}

TrainerConfig config(Trainer trainer, KernelSpec kernel, LossSpec loss, double lambda,
                     std::uint64_t iterations, std::uint64_t seed = 1) {
  TrainerConfig c;
  c.trainer = trainer;
  c.kernel = kernel;
  c.loss = loss;
  c.lambda = lambda;
  c.iterations = iterations;
  c.seed = seed;
  return c;
}

}  // namespace

TEST(Train, ZeroOneSingleUpdate) {
  // c = 0.1, T = 1 gives eta = 0.1; a = 0, g = -1.
  auto cfg = config(Trainer::zeroone, KernelSpec::linear(), LossSpec::sigmoid01(1.0), 0.1, 1);
  std::vector<IterationRecord> seen;
  TrainHooks hooks;
  hooks.on_iteration = [&](const IterationRecord& r) { seen.push_back(r); };
  auto model = train(cfg, single_sample(), hooks);
  ASSERT_EQ(seen.size(), 1u);
  EXPECT_EQ(seen[0].activation, 0.0);
  EXPECT_EQ(seen[0].gradient, -1.0);
  EXPECT_DOUBLE_EQ(seen[0].step, 0.1);
  ASSERT_EQ(model.support_size(), 1u);
  EXPECT_DOUBLE_EQ(model.alpha(0), 0.1);
}

TEST(Train, PegasosFirstStepWipesAndSets) {
  auto cfg = config(Trainer::pegasos, KernelSpec::linear(), LossSpec::hinge(), 1.0, 1);
  auto model = train(cfg, single_sample());
  ASSERT_EQ(model.support_size(), 1u);
  EXPECT_EQ(model.alpha(0), 1.0);
}

TEST(Train, NegativeLabelGetsNegativeCoefficient) {
  auto ds = std::make_shared<const Dataset>(
      Dataset{"neg", {{SparseVector{{1, 1.0}}, Label::negative}}, 1});
  auto model = train(config(Trainer::pegasos, KernelSpec::linear(), LossSpec::hinge(), 1.0, 1), ds);
  EXPECT_EQ(model.alpha(0), -1.0);
}

// When the loss gradient vanishes, the only change is the (1 - eta lambda) shrinkage.
// Separable data with large steps pushes every margin past the hinge quickly.
TEST(Train, ZeroGradientStepsOnlyShrink) {
  auto ds = std::make_shared<const Dataset>(Dataset{"sep",
                                                    {{SparseVector{{1, 1.0}}, Label::positive},
                                                     {SparseVector{{1, -1.0}}, Label::negative},
                                                     {SparseVector{{2, 1.0}}, Label::positive},
                                                     {SparseVector{{2, 0.5}}, Label::positive}},
                                                    2});
  const TrainerConfig cfgs[] = {
      config(Trainer::pegasos, KernelSpec::linear(), LossSpec::hinge(), 0.1, 200, 9),
      config(Trainer::zeroone, KernelSpec::linear(), LossSpec::hinge(), 40.0, 100, 9),
  };
  for (const auto& cfg : cfgs) {
    std::vector<IterationRecord> records;
    std::vector<DualModel> snaps;
    TrainHooks hooks;
    hooks.on_iteration = [&](const IterationRecord& r) { records.push_back(r); };
    hooks.checkpoint_every = 1;
    hooks.on_checkpoint = [&](std::uint64_t, const DualModel& m) { snaps.push_back(m); };
    train(cfg, ds, hooks);
    ASSERT_EQ(snaps.size(), records.size());
    int zero_steps = 0;
    for (std::size_t t = 1; t < records.size(); ++t) {
      if (records[t].gradient != 0.0) continue;
      ++zero_steps;
      const double shrink = is_regularized(cfg.trainer) ? 1.0 - records[t].step * cfg.lambda : 1.0;
      for (std::size_t i = 0; i < ds->size(); ++i) {
        EXPECT_NEAR(snaps[t].alpha(i), shrink * snaps[t - 1].alpha(i), 1e-12);
      }
    }
    EXPECT_GT(zero_steps, 10) << to_string(cfg.trainer);
  }
}

TEST(Train, DeterministicForFixedSeed) {
  auto ds = std::make_shared<const Dataset>(oracle::random_dataset(1, 40, 10));
  for (auto kernel : {KernelSpec::linear(), KernelSpec::gaussian(0.3)}) {
    auto cfg = config(Trainer::zeroone_reg, kernel, LossSpec::sigmoid01(1.0), 0.01, 2000, 5);
    EXPECT_EQ(train(cfg, ds), train(cfg, ds));
    auto other = cfg;
    other.seed = 6;
    EXPECT_FALSE(train(cfg, ds) == train(other, ds));
  }
}

TEST(Train, DualMatchesPrimalOnLinearKernel) {
  auto data = oracle::random_dataset(17, 10, 5, 0.8);
  auto ds = std::make_shared<const Dataset>(data);
  const TrainerConfig cfgs[] = {
      config(Trainer::pegasos, KernelSpec::linear(), LossSpec::hinge(), 0.1, 2000, 3),
      config(Trainer::zeroone, KernelSpec::linear(), LossSpec::sigmoid01(1.0), 0.5, 2000, 4),
      config(Trainer::zeroone_reg, KernelSpec::linear(), LossSpec::sigmoid01(1.0), 0.05, 2000, 5),
  };
  for (const auto& cfg : cfgs) {
    std::vector<double> dual;
    TrainHooks hooks;
    hooks.on_iteration = [&](const IterationRecord& r) { dual.push_back(r.activation); };
    train(cfg, ds, hooks);
    auto primal = oracle::primal_activations(cfg, data);
    ASSERT_EQ(dual.size(), primal.size());
    for (std::size_t t = 0; t < dual.size(); ++t) {
      ASSERT_NEAR(dual[t], primal[t], 1e-9) << to_string(cfg.trainer) << " t=" << t + 1;
    }
  }
}

TEST(Train, TrackedNormMatchesModelNorm) {
  auto ds = std::make_shared<const Dataset>(oracle::random_dataset(2, 25, 8, 0.6, true));
  auto cfg = config(Trainer::pegasos, KernelSpec::gaussian(0.5), LossSpec::hinge(), 0.05, 500, 2);
  std::vector<double> tracked;
  std::vector<double> exact;
  TrainHooks hooks;
  hooks.on_iteration = [&](const IterationRecord& r) { tracked.push_back(r.squared_norm); };
  hooks.checkpoint_every = 50;
  hooks.on_checkpoint = [&](std::uint64_t t, const DualModel& m) {
    EXPECT_NEAR(tracked[t - 1], m.squared_norm(), 1e-9 * std::max(1.0, m.squared_norm()));
  };
  train(cfg, ds, hooks);
}

// Unprojected updates average y x / lambda, so ||w|| <= max ||x|| / lambda; for unit data
// and lambda >= 0.25 that sits inside the 2.2 / sqrt(lambda) ball.
TEST(Train, PegasosNormStaysInBall) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto ds = std::make_shared<const Dataset>(oracle::random_dataset(seed, 30, 10, 0.5, true));
    for (double lambda : {0.25, 0.5, 1.0}) {
      auto cfg = config(Trainer::pegasos, KernelSpec::linear(), LossSpec::hinge(), lambda, 3000, seed);
      double worst = 0.0;
      TrainHooks hooks;
      hooks.on_iteration = [&](const IterationRecord& r) {
        worst = std::max(worst, std::sqrt(r.squared_norm));
      };
      train(cfg, ds, hooks);
      EXPECT_LE(worst, 2.0 / std::sqrt(lambda) * 1.1);
      EXPECT_LE(worst, 1.0 / lambda + 1e-12);
    }
  }
}

TEST(Train, ProjectionKeepsNormInsideRadius) {
  auto ds = std::make_shared<const Dataset>(oracle::random_dataset(4, 30, 10, 0.5));
  auto cfg = config(Trainer::zeroone, KernelSpec::gaussian(0.1), LossSpec::sigmoid01(1.0), 20.0, 2000, 4);
  cfg.projection_radius = 2.0;
  double worst = 0.0;
  TrainHooks hooks;
  hooks.on_iteration = [&](const IterationRecord& r) { worst = std::max(worst, r.squared_norm); };
  auto model = train(cfg, ds, hooks);
  EXPECT_LE(worst, 2.0 * (1 + 1e-12));
  EXPECT_LE(model.squared_norm(), 2.0 * (1 + 1e-9));
  EXPECT_GT(model.squared_norm(), 1.0);  // the constraint was active
}

TEST(Train, DecayingScheduleOption) {
  auto ds = single_sample();
  auto cfg = config(Trainer::zeroone, KernelSpec::linear(), LossSpec::sigmoid01(1.0), 1.0, 4);
  cfg.zeroone_schedule = ZeroOneSchedule::decaying;
  std::vector<double> steps;
  TrainHooks hooks;
  hooks.on_iteration = [&](const IterationRecord& r) { steps.push_back(r.step); };
  train(cfg, ds, hooks);
  EXPECT_EQ(steps, (std::vector<double>{1.0, 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(3.0), 0.5}));
}

TEST(Train, ConfigErrors) {
  auto ds = single_sample();
  EXPECT_THROW(train(config(Trainer::pegasos, KernelSpec::linear(), LossSpec::hinge(), 0.0, 10), ds),
               ConfigError);
  EXPECT_THROW(train(config(Trainer::zeroone_reg, KernelSpec::linear(), LossSpec::hinge(), 0.0, 10), ds),
               ConfigError);
  EXPECT_THROW(train(config(Trainer::zeroone, KernelSpec::linear(), LossSpec::hinge(), 0.0, 10), ds),
               ConfigError);
  EXPECT_THROW(train(config(Trainer::pegasos, KernelSpec::linear(), LossSpec::hinge(), 1.0, 0), ds),
               ConfigError);
  auto big = std::make_shared<const Dataset>(
      Dataset{"big", {{SparseVector{{1, 3.0}}, Label::positive}}, 1});
  auto improper = KernelSpec::improper(0.5, KernelSpec::linear());
  EXPECT_THROW(train(config(Trainer::pegasos, improper, LossSpec::hinge(), 1.0, 10), big), ConfigError);
  EXPECT_NO_THROW(train(config(Trainer::pegasos, improper, LossSpec::hinge(), 1.0, 10), ds));
}

TEST(Sampler, UniformAndSeeded) {
  UniformSampler a(5, 7), b(5, 7);
  std::vector<int> counts(7, 0);
  for (int n = 0; n < 70000; ++n) {
    auto i = a.next();
    ASSERT_EQ(i, b.next());
    ASSERT_LT(i, 7u);
    counts[i]++;
  }
  for (int c : counts) EXPECT_NEAR(c, 10000, 500);
}

TEST(DualModel, ActivationAndDump) {
  auto ds = std::make_shared<const Dataset>(
      Dataset{"two", {{SparseVector{{1, 1.0}}, Label::positive}, {SparseVector{{2, 1.0}}, Label::negative}}, 2});
  DualModel m(KernelSpec::linear(), ds, {{1, -0.5}, {0, 2.0}});
  EXPECT_EQ(m.activation(SparseVector{{1, 1.0}, {2, 1.0}}), 1.5);
  EXPECT_EQ(m.squared_norm(), 4.25);
  std::ostringstream out;
  write_model(out, m);
  EXPECT_EQ(out.str(), "# kernel=linear support=2\n0 2\n1 -0.5\n");
  EXPECT_THROW(DualModel(KernelSpec::linear(), ds, {{2, 1.0}}), std::out_of_range);
}
