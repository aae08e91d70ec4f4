#include "snnprune/lif.hpp"

namespace snnprune {

LifStep lif_step(const Tensor& weighted_input, const Tensor& prev_u, const LIFParams& params,
                 bool relaxed) {
  if (weighted_input.shape() != prev_u.shape()) {
    throw DimensionError("lif_step: input " + shape_string(weighted_input.shape()) +
                         " vs potential " + shape_string(prev_u.shape()));
  }
  if (!weighted_input.all_finite() || !prev_u.all_finite()) {
    throw NumericError("lif_step: non-finite input");
  }
  const double inv_tau = 1.0 / params.tau;
  LifStep out{Tensor(weighted_input.shape()), Tensor(weighted_input.shape()),
              Tensor(weighted_input.shape()), Tensor(weighted_input.shape())};
  for (std::size_t i = 0; i < weighted_input.size(); ++i) {
    const double h = prev_u[i] + inv_tau * (weighted_input[i] - prev_u[i]);
    const double x = h - params.v_threshold;
    const double s = relaxed ? surrogate_g(x) : heaviside(x);
    out.h[i] = h;
    out.s[i] = s;
    // With s in {0,1} this is exactly h or v_reset.
    out.u[i] = relaxed ? h * (1.0 - s) + params.v_reset * s : (s != 0.0 ? params.v_reset : h);
    out.gprime[i] = surrogate_gprime(x);
  }
  return out;
}

}  // namespace snnprune
