// Train one kernel SGD model on a libsvm file and report test accuracy.
//
//   train_and_evaluate <train.svm> <test.svm> [gamma] [lambda]
//
// Without arguments it generates a small two-cluster problem in memory.

#include <cmath>
#include <cstdlib>
#include <iostream>
#include <random>

#include "mirrorkit/mirrorkit.hpp"

namespace mk = mirrorkit;

static mk::Dataset two_clusters(std::uint64_t seed, std::size_t m) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.6);
  mk::Dataset ds;
  ds.name = "clusters";
  ds.feature_dim = 2;
  for (std::size_t i = 0; i < m; ++i) {
    const bool pos = i % 2 == 0;
    const double c = pos ? 1.0 : -1.0;
    ds.samples.push_back({mk::SparseVector{{1, c + noise(rng)}, {2, c + noise(rng)}},
                          pos ? mk::Label::positive : mk::Label::negative});
  }
  return ds;
}

int main(int argc, char** argv) {
  try {
    mk::Dataset train_set = argc > 2 ? mk::load_libsvm(argv[1]) : two_clusters(1, 400);
    mk::Dataset test = argc > 2 ? mk::load_libsvm(argv[2]) : two_clusters(2, 400);
    const double gamma = argc > 3 ? std::atof(argv[3]) : 0.5;
    const double lambda = argc > 4 ? std::atof(argv[4]) : 0.001;

    mk::TrainerConfig cfg;
    cfg.kernel = mk::KernelSpec::gaussian(gamma);
    cfg.lambda = lambda;
    cfg.iterations = 20000;
    cfg.seed = 7;

    auto shared = std::make_shared<const mk::Dataset>(std::move(train_set));
    for (auto trainer : {mk::Trainer::pegasos, mk::Trainer::zeroone_reg}) {
      cfg.trainer = trainer;
      cfg.loss = trainer == mk::Trainer::pegasos ? mk::LossSpec::hinge() : mk::LossSpec::sigmoid01(1.0);
      mk::DualModel model = mk::train(cfg, shared);
      std::cout << mk::to_string(trainer) << ": support=" << model.support_size()
                << " ||w||=" << std::sqrt(model.squared_norm())
                << " accuracy=" << mk::evaluate_accuracy(model, test) << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
