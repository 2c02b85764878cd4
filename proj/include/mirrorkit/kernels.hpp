#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "mirrorkit/data.hpp"
#include "mirrorkit/errors.hpp"

namespace mirrorkit {

struct LinearKernel {
  friend bool operator==(const LinearKernel&, const LinearKernel&) = default;
};

// exp(-gamma * ||x - x'||^2)
struct GaussianKernel {
  double gamma;
  friend bool operator==(const GaussianKernel&, const GaussianKernel&) = default;
};

using BaseKernel = std::variant<LinearKernel, GaussianKernel>;

// 1 / (1 - nu * base(x, x')), the geometric series sum_n nu^n base^n.
struct ImproperKernel {
  double nu;
  BaseKernel base;
  friend bool operator==(const ImproperKernel&, const ImproperKernel&) = default;
};

class KernelSpec {
 public:
  using Variant = std::variant<LinearKernel, GaussianKernel, ImproperKernel>;

  KernelSpec() = default;

  static KernelSpec linear() { return KernelSpec(LinearKernel{}); }

  static KernelSpec gaussian(double gamma) {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
      throw ConfigError("gaussian kernel requires gamma > 0");
    }
    return KernelSpec(GaussianKernel{gamma});
  }

  static KernelSpec improper(double nu, const KernelSpec& base) {
    if (!(nu > 0.0 && nu < 1.0)) throw ConfigError("improper kernel requires 0 < nu < 1");
    if (const auto* l = std::get_if<LinearKernel>(&base.v_)) return KernelSpec(ImproperKernel{nu, *l});
    if (const auto* g = std::get_if<GaussianKernel>(&base.v_)) return KernelSpec(ImproperKernel{nu, *g});
    throw ConfigError("improper kernel base must be linear or gaussian");
  }

  const Variant& variant() const noexcept { return v_; }
  bool is_improper() const noexcept { return std::holds_alternative<ImproperKernel>(v_); }

  // True when the kernel ultimately works on raw inner products (linear, or improper over linear).
  bool has_linear_base() const noexcept {
    if (std::holds_alternative<LinearKernel>(v_)) return true;
    if (const auto* imp = std::get_if<ImproperKernel>(&v_)) {
      return std::holds_alternative<LinearKernel>(imp->base);
    }
    return false;
  }

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;

 private:
  explicit KernelSpec(Variant v) : v_(std::move(v)) {}
  Variant v_{LinearKernel{}};
};

inline double base_kernel_eval(const BaseKernel& k, const SparseVector& x, const SparseVector& y) {
  if (const auto* g = std::get_if<GaussianKernel>(&k)) {
    return std::exp(-g->gamma * squared_distance(x, y));
  }
  return dot(x, y);
}

// Applies the improper transform to a precomputed base value.
inline double improper_transform(double nu, double base_value) {
  double z = nu * base_value;
  if (!(z < 1.0)) {
    std::ostringstream msg;
    msg << "improper kernel outside its domain: nu * base = " << z << " >= 1";
    throw KernelDomainError(msg.str());
  }
  return 1.0 / (1.0 - z);
}

inline double kernel_eval(const KernelSpec& spec, const SparseVector& x, const SparseVector& y) {
  return std::visit(
      [&](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, LinearKernel>) {
          return dot(x, y);
        } else if constexpr (std::is_same_v<K, GaussianKernel>) {
          return std::exp(-k.gamma * squared_distance(x, y));
        } else {
          return improper_transform(k.nu, base_kernel_eval(k.base, x, y));
        }
      },
      spec.variant());
}

// Fills the upper triangle and mirrors it, so the result is exactly symmetric.
inline Eigen::MatrixXd gram_matrix(const KernelSpec& spec, std::span<const SparseVector> samples) {
  if (samples.empty()) throw std::invalid_argument("gram_matrix: empty sample list");
  const auto n = static_cast<Eigen::Index>(samples.size());
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      try {
        g(i, j) = kernel_eval(spec, samples[i], samples[j]);
      } catch (const KernelDomainError& e) {
        throw KernelDomainError("pair (" + std::to_string(i) + ", " + std::to_string(j) +
                                "): " + e.what());
      }
      g(j, i) = g(i, j);
    }
  }
  return g;
}

inline Eigen::MatrixXd gram_matrix(const KernelSpec& spec, const Dataset& ds) {
  std::vector<SparseVector> xs;
  xs.reserve(ds.size());
  for (const auto& s : ds.samples) xs.push_back(s.features);
  return gram_matrix(spec, xs);
}

struct PsdResult {
  bool pass;
  double min_eigenvalue;
};

inline constexpr std::size_t kDefaultPsdCap = 256;

inline PsdResult psd_check(const Eigen::MatrixXd& g, double tol,
                           std::size_t cap = kDefaultPsdCap) {
  if (g.rows() != g.cols() || g.rows() == 0) {
    throw std::invalid_argument("psd_check: matrix must be square and non-empty");
  }
  if (static_cast<std::size_t>(g.rows()) > cap) {
    throw std::invalid_argument("psd_check: matrix size " + std::to_string(g.rows()) +
                                " exceeds cap " + std::to_string(cap));
  }
  double asym = (g - g.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-9) {
    std::ostringstream msg;
    msg << "psd_check: matrix is not symmetric (max asymmetry " << asym << ")";
    throw std::invalid_argument(msg.str());
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(g, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw std::runtime_error("psd_check: eigensolver failed");
  double min_eig = solver.eigenvalues().minCoeff();
  return {min_eig >= -tol, min_eig};
}

// Grammar: `linear` | `gaussian:<gamma>` | `improper:<nu>:<base>`.
inline KernelSpec parse_kernel_spec(std::string_view text) {
  if (text == "linear") return KernelSpec::linear();
  if (text.starts_with("gaussian:")) {
    return KernelSpec::gaussian(detail::parse_real(text.substr(9), "gamma"));
  }
  if (text.starts_with("improper:")) {
    auto rest = text.substr(9);
    auto colon = rest.find(':');
    if (colon == std::string_view::npos) {
      throw ConfigError("improper kernel needs the form improper:<nu>:<base>");
    }
    double nu = detail::parse_real(rest.substr(0, colon), "nu");
    auto base = rest.substr(colon + 1);
    if (base.starts_with("improper")) throw ConfigError("improper kernels cannot be nested");
    return KernelSpec::improper(nu, parse_kernel_spec(base));
  }
  throw ConfigError("unknown kernel '" + std::string(text) +
                    "' (expected linear, gaussian:<gamma> or improper:<nu>:<base>)");
}

inline std::string to_string(const KernelSpec& spec) {
  auto base_str = [](const BaseKernel& b) {
    if (const auto* g = std::get_if<GaussianKernel>(&b)) {
      return "gaussian:" + detail::format_real(g->gamma);
    }
    return std::string("linear");
  };
  if (const auto* imp = std::get_if<ImproperKernel>(&spec.variant())) {
    return "improper:" + detail::format_real(imp->nu) + ":" + base_str(imp->base);
  }
  if (const auto* g = std::get_if<GaussianKernel>(&spec.variant())) return base_str(*g);
  return "linear";
}

}  // namespace mirrorkit
