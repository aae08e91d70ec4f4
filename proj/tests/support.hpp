#pragma once

// Shared helpers for the unit tests. Oracles here are deliberately naive.

#include <cmath>
#include <vector>

#include "snnprune/rng.hpp"
#include "snnprune/tensor.hpp"

namespace testing {

inline snnprune::Tensor random_tensor(const snnprune::Shape& shape, snnprune::Rng& rng,
                                      double scale = 1.0) {
  snnprune::Tensor t(shape);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = scale * rng.normal();
  return t;
}

// Direct seven-loop cross-correlation with explicit zero padding.
inline snnprune::Tensor naive_conv(const snnprune::Tensor& x, const snnprune::Tensor& w,
                                   std::size_t stride, std::size_t pad) {
  const auto s = x.shape4();
  const auto k = w.shape4();
  const std::size_t oh = (s.height + 2 * pad - k.height) / stride + 1;
  const std::size_t ow = (s.width + 2 * pad - k.width) / stride + 1;
  snnprune::Tensor out({s.batch, k.batch, oh, ow});
  for (std::size_t n = 0; n < s.batch; ++n)
    for (std::size_t co = 0; co < k.batch; ++co)
      for (std::size_t oy = 0; oy < oh; ++oy)
        for (std::size_t ox = 0; ox < ow; ++ox) {
          double acc = 0.0;
          for (std::size_t ci = 0; ci < s.channels; ++ci)
            for (std::size_t ky = 0; ky < k.height; ++ky)
              for (std::size_t kx = 0; kx < k.width; ++kx) {
                const long iy = long(oy * stride + ky) - long(pad);
                const long ix = long(ox * stride + kx) - long(pad);
                if (iy < 0 || ix < 0 || iy >= long(s.height) || ix >= long(s.width)) continue;
                acc += x.at(n, ci, std::size_t(iy), std::size_t(ix)) * w.at(co, ci, ky, kx);
              }
          out.at(n, co, oy, ox) = acc;
        }
  return out;
}

// Norm-based relative error between two gradient vectors.
inline double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0, norm = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    norm += a[i] * a[i] + b[i] * b[i];
  }
  return norm == 0.0 ? 0.0 : std::sqrt(diff) / std::sqrt(norm);
}

}  // namespace testing
