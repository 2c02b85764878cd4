// The improper kernel 1/(1 - nu k) stays a valid kernel: build its Gram matrix on
// random points and look at the smallest eigenvalue, then show the domain error when
// nu * k reaches 1 under a linear base.

#include <iostream>
#include <random>
#include <vector>

#include "mirrorkit/mirrorkit.hpp"

namespace mk = mirrorkit;

int main() {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<mk::SparseVector> xs;
  for (int i = 0; i < 30; ++i) {
    std::vector<mk::Feature> f;
    for (std::uint32_t k = 1; k <= 8; ++k) f.push_back({k, n(rng)});
    xs.emplace_back(f);
  }

  for (double gamma : {0.01, 0.1, 1.0}) {
    auto spec = mk::KernelSpec::improper(0.5, mk::KernelSpec::gaussian(gamma));
    auto r = mk::psd_check(mk::gram_matrix(spec, xs), 1e-8);
    std::cout << mk::to_string(spec) << ": min eigenvalue " << r.min_eigenvalue
              << (r.pass ? " (PSD)" : " (not PSD)") << '\n';
  }

  try {
    mk::kernel_eval(mk::KernelSpec::improper(0.5, mk::KernelSpec::linear()), xs[0], xs[0]);
  } catch (const mk::KernelDomainError& e) {
    std::cout << "unnormalized linear base: " << e.what() << '\n';
  }
}
