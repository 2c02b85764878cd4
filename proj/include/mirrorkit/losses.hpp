#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>
#include <variant>

#include "mirrorkit/data.hpp"
#include "mirrorkit/detail/text.hpp"
#include "mirrorkit/errors.hpp"

namespace mirrorkit {

// max(0, 1 - y a)
struct HingeLoss {
  friend bool operator==(const HingeLoss&, const HingeLoss&) = default;
};

// |sigmoid_L(a) - y01| with sigmoid_L(a) = 1 / (1 + exp(-4 L a)), an L-Lipschitz
// smoothing of the zero-one transfer (sgn(a) + 1) / 2.
struct Sigmoid01Loss {
  double lipschitz = 1.0;
  friend bool operator==(const Sigmoid01Loss&, const Sigmoid01Loss&) = default;
};

class LossSpec {
 public:
  using Variant = std::variant<HingeLoss, Sigmoid01Loss>;

  LossSpec() = default;

  static LossSpec hinge() { return LossSpec(HingeLoss{}); }

  static LossSpec sigmoid01(double lipschitz = 1.0) {
    if (!(lipschitz > 0.0) || !std::isfinite(lipschitz)) {
      throw ConfigError("sigmoid01 loss requires L > 0");
    }
    return LossSpec(Sigmoid01Loss{lipschitz});
  }

  const Variant& variant() const noexcept { return v_; }
  bool is_hinge() const noexcept { return std::holds_alternative<HingeLoss>(v_); }

  friend bool operator==(const LossSpec&, const LossSpec&) = default;

 private:
  explicit LossSpec(Variant v) : v_(v) {}
  Variant v_{HingeLoss{}};
};

// Beyond this |4 L a| the sigmoid is returned as its limit.
inline constexpr double kSigmoidSaturation = 500.0;

inline double sigmoid_transfer(double lipschitz, double a) noexcept {
  double z = 4.0 * lipschitz * a;
  if (z > kSigmoidSaturation) return 1.0;
  if (z < -kSigmoidSaturation) return 0.0;
  return 1.0 / (1.0 + std::exp(-z));
}

// a >= 0 predicts the positive class.
constexpr Label predict(double activation) noexcept {
  return activation >= 0.0 ? Label::positive : Label::negative;
}

constexpr int zero_one_error(double activation, Label y) noexcept {
  return predict(activation) == y ? 0 : 1;
}

inline double loss_value(const LossSpec& spec, double activation, Label y) noexcept {
  if (const auto* s = std::get_if<Sigmoid01Loss>(&spec.variant())) {
    return std::abs(sigmoid_transfer(s->lipschitz, activation) - as_binary(y));
  }
  return std::max(0.0, 1.0 - sign(y) * activation);
}

// Derivative with respect to the activation. The hinge kink y a = 1 takes subgradient 0.
inline double loss_grad(const LossSpec& spec, double activation, Label y) noexcept {
  if (const auto* s = std::get_if<Sigmoid01Loss>(&spec.variant())) {
    double p = sigmoid_transfer(s->lipschitz, activation);
    double slope = 4.0 * s->lipschitz * p * (1.0 - p);
    return y == Label::positive ? -slope : slope;
  }
  return sign(y) * activation < 1.0 ? -static_cast<double>(sign(y)) : 0.0;
}

// Grammar: `hinge` | `sigmoid01:<L>` (`sigmoid01` alone means L = 1).
inline LossSpec parse_loss_spec(std::string_view text) {
  if (text == "hinge") return LossSpec::hinge();
  if (text == "sigmoid01") return LossSpec::sigmoid01();
  if (text.starts_with("sigmoid01:")) {
    return LossSpec::sigmoid01(detail::parse_real(text.substr(10), "lipschitz"));
  }
  throw ConfigError("unknown loss '" + std::string(text) + "' (expected hinge or sigmoid01:<L>)");
}

inline std::string to_string(const LossSpec& spec) {
  if (const auto* s = std::get_if<Sigmoid01Loss>(&spec.variant())) {
    return "sigmoid01:" + detail::format_real(s->lipschitz);
  }
  return "hinge";
}

}  // namespace mirrorkit
