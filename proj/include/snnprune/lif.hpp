#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "snnprune/tensor.hpp"

namespace snnprune {

/// Leaky integrate-and-fire constants. Defaults are the global settings used for
/// every experiment.
struct LIFParams {
  double tau = 4.0 / 3.0;
  double v_threshold = 1.0;
  double v_reset = 0.0;

  void validate() const {
    if (!(tau >= 1.0)) throw ArgumentError("LIF tau must be >= 1");
    if (!(v_threshold > v_reset)) throw ArgumentError("LIF v_threshold must exceed v_reset");
  }
  friend bool operator==(const LIFParams&, const LIFParams&) = default;
};

/// Arctan surrogate of the Heaviside step: g(x) = atan(pi x)/pi + 1/2.
template <typename Scalar>
Scalar surrogate_g(Scalar x) {
  constexpr Scalar pi = std::numbers::pi_v<Scalar>;
  return std::atan(pi * x) / pi + Scalar(0.5);
}

/// g'(x) = 1 / (1 + pi^2 x^2). Used as the backward fire derivative and as the
/// raw criticality signal.
template <typename Scalar>
Scalar surrogate_gprime(Scalar x) {
  constexpr Scalar pi = std::numbers::pi_v<Scalar>;
  return Scalar(1) / (Scalar(1) + pi * pi * x * x);
}

/// Heaviside with the tie at zero firing.
template <typename Scalar>
Scalar heaviside(Scalar x) {
  return x < Scalar(0) ? Scalar(0) : Scalar(1);
}

struct LifStep {
  Tensor h;       ///< charged potential before reset
  Tensor s;       ///< fire output
  Tensor u;       ///< potential after reset
  Tensor gprime;  ///< g'(h - v_threshold)
};

/// One charge/fire/reset update for a whole tensor of neurons. In relaxed mode
/// the fire output is g(h - v_threshold) instead of the step.
LifStep lif_step(const Tensor& weighted_input, const Tensor& prev_u, const LIFParams& params,
                 bool relaxed = false);

/// Per-timestep record of one LIF layer, kept for STBP and criticality scoring.
struct LIFLayerState {
  std::vector<Tensor> h;
  std::vector<Tensor> u;
  std::vector<Tensor> s;
  std::vector<Tensor> gprime_trace;

  std::size_t timesteps() const { return h.size(); }
  bool empty() const { return h.empty(); }
  void clear() {
    h.clear();
    u.clear();
    s.clear();
    gprime_trace.clear();
  }
};

}  // namespace snnprune
