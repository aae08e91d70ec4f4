#pragma once

// Layer-level forward/backward kernels.
//
// Accumulation order: every reduction is either an Eigen GEMM (whose blocking is
// fixed for a given build and operand size, and runs single-threaded here) or an
// explicit loop in the order written below. Repeated calls on identical inputs
// therefore return bit-identical results.

#include <cstddef>
#include <string>

#include "snnprune/tensor.hpp"

namespace snnprune {

struct Conv2dGeometry {
  std::size_t stride = 1;
  std::size_t padding = 0;
};

inline std::size_t conv_output_extent(std::size_t in, std::size_t kernel, std::size_t stride,
                                      std::size_t padding) {
  if (stride == 0) throw DimensionError("conv2d: stride must be positive");
  if (kernel == 0 || kernel > in + 2 * padding) {
    throw DimensionError("conv2d: kernel " + std::to_string(kernel) +
                         " larger than padded extent " + std::to_string(in + 2 * padding));
  }
  return (in + 2 * padding - kernel) / stride + 1;
}

template <typename Scalar>
BasicTensor<Scalar> matmul(const BasicTensor<Scalar>& a, const BasicTensor<Scalar>& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw DimensionError("matmul: " + shape_string(a.shape()) + " x " + shape_string(b.shape()));
  }
  BasicTensor<Scalar> out({a.dim(0), b.dim(1)});
  if (out.empty()) return out;
  if (a.dim(1) == 0) return out;
  out.matrix().noalias() = a.matrix() * b.matrix();
  return out;
}

template <typename Scalar>
struct MatmulGrad {
  BasicTensor<Scalar> grad_a;
  BasicTensor<Scalar> grad_b;
};

template <typename Scalar>
MatmulGrad<Scalar> matmul_grad(const BasicTensor<Scalar>& upstream, const BasicTensor<Scalar>& a,
                               const BasicTensor<Scalar>& b) {
  if (a.rank() != 2 || b.rank() != 2 || upstream.rank() != 2 || a.dim(1) != b.dim(0) ||
      upstream.dim(0) != a.dim(0) || upstream.dim(1) != b.dim(1)) {
    throw DimensionError("matmul_grad: upstream " + shape_string(upstream.shape()) + " for " +
                         shape_string(a.shape()) + " x " + shape_string(b.shape()));
  }
  MatmulGrad<Scalar> g{BasicTensor<Scalar>(a.shape()), BasicTensor<Scalar>(b.shape())};
  if (upstream.empty()) return g;
  if (!a.empty()) g.grad_a.matrix().noalias() = upstream.matrix() * b.matrix().transpose();
  if (!b.empty()) g.grad_b.matrix().noalias() = a.matrix().transpose() * upstream.matrix();
  return g;
}

namespace detail {

// Patch matrix with rows (c, ky, kx) and columns (n, oy, ox).
template <typename Scalar>
typename BasicTensor<Scalar>::RowMatrix im2col(const BasicTensor<Scalar>& input, std::size_t kh,
                                               std::size_t kw, std::size_t out_h, std::size_t out_w,
                                               const Conv2dGeometry& geo) {
  const Shape4 s = input.shape4();
  const std::size_t plane = out_h * out_w;
  typename BasicTensor<Scalar>::RowMatrix cols(Eigen::Index(s.channels * kh * kw),
                                               Eigen::Index(s.batch * plane));
  const auto pad = std::ptrdiff_t(geo.padding);
  for (std::size_t c = 0; c < s.channels; ++c) {
    for (std::size_t ky = 0; ky < kh; ++ky) {
      for (std::size_t kx = 0; kx < kw; ++kx) {
        const Eigen::Index row = Eigen::Index((c * kh + ky) * kw + kx);
        for (std::size_t n = 0; n < s.batch; ++n) {
          for (std::size_t oy = 0; oy < out_h; ++oy) {
            const std::ptrdiff_t iy = std::ptrdiff_t(oy * geo.stride + ky) - pad;
            for (std::size_t ox = 0; ox < out_w; ++ox) {
              const std::ptrdiff_t ix = std::ptrdiff_t(ox * geo.stride + kx) - pad;
              const bool inside = iy >= 0 && ix >= 0 && iy < std::ptrdiff_t(s.height) &&
                                  ix < std::ptrdiff_t(s.width);
              cols(row, Eigen::Index(n * plane + oy * out_w + ox)) =
                  inside ? input.at(n, c, std::size_t(iy), std::size_t(ix)) : Scalar(0);
            }
          }
        }
      }
    }
  }
  return cols;
}

template <typename Scalar>
void col2im_add(const typename BasicTensor<Scalar>::RowMatrix& cols, BasicTensor<Scalar>& grad,
                std::size_t kh, std::size_t kw, std::size_t out_h, std::size_t out_w,
                const Conv2dGeometry& geo) {
  const Shape4 s = grad.shape4();
  const std::size_t plane = out_h * out_w;
  const auto pad = std::ptrdiff_t(geo.padding);
  for (std::size_t c = 0; c < s.channels; ++c) {
    for (std::size_t ky = 0; ky < kh; ++ky) {
      for (std::size_t kx = 0; kx < kw; ++kx) {
        const Eigen::Index row = Eigen::Index((c * kh + ky) * kw + kx);
        for (std::size_t n = 0; n < s.batch; ++n) {
          for (std::size_t oy = 0; oy < out_h; ++oy) {
            const std::ptrdiff_t iy = std::ptrdiff_t(oy * geo.stride + ky) - pad;
            if (iy < 0 || iy >= std::ptrdiff_t(s.height)) continue;
            for (std::size_t ox = 0; ox < out_w; ++ox) {
              const std::ptrdiff_t ix = std::ptrdiff_t(ox * geo.stride + kx) - pad;
              if (ix < 0 || ix >= std::ptrdiff_t(s.width)) continue;
              grad.at(n, c, std::size_t(iy), std::size_t(ix)) +=
                  cols(row, Eigen::Index(n * plane + oy * out_w + ox));
            }
          }
        }
      }
    }
  }
}

}  // namespace detail

/// Cross-correlation (no kernel flip) with zero padding.
template <typename Scalar>
BasicTensor<Scalar> conv2d(const BasicTensor<Scalar>& input, const BasicTensor<Scalar>& weight,
                           const Conv2dGeometry& geo = {}) {
  const Shape4 s = input.shape4();
  const Shape4 w = weight.shape4();
  if (w.channels != s.channels) {
    throw DimensionError("conv2d: weight " + shape_string(weight.shape()) + " vs input " +
                         shape_string(input.shape()));
  }
  const std::size_t out_h = conv_output_extent(s.height, w.height, geo.stride, geo.padding);
  const std::size_t out_w = conv_output_extent(s.width, w.width, geo.stride, geo.padding);
  const std::size_t plane = out_h * out_w;
  BasicTensor<Scalar> out({s.batch, w.batch, out_h, out_w});
  if (out.empty()) return out;

  const auto cols = detail::im2col(input, w.height, w.width, out_h, out_w, geo);
  typename BasicTensor<Scalar>::RowMatrix prod;
  prod.noalias() = weight.matrix(w.batch, w.channels * w.height * w.width) * cols;
  for (std::size_t n = 0; n < s.batch; ++n) {
    for (std::size_t co = 0; co < w.batch; ++co) {
      Scalar* dst = out.data() + (n * w.batch + co) * plane;
      for (std::size_t p = 0; p < plane; ++p) dst[p] = prod(Eigen::Index(co), Eigen::Index(n * plane + p));
    }
  }
  return out;
}

template <typename Scalar>
struct Conv2dGrad {
  BasicTensor<Scalar> grad_input;
  BasicTensor<Scalar> grad_weight;
};

template <typename Scalar>
Conv2dGrad<Scalar> conv2d_grad(const BasicTensor<Scalar>& upstream, const BasicTensor<Scalar>& input,
                               const BasicTensor<Scalar>& weight, const Conv2dGeometry& geo = {}) {
  const Shape4 s = input.shape4();
  const Shape4 w = weight.shape4();
  const std::size_t out_h = conv_output_extent(s.height, w.height, geo.stride, geo.padding);
  const std::size_t out_w = conv_output_extent(s.width, w.width, geo.stride, geo.padding);
  if (upstream.shape() != Shape{s.batch, w.batch, out_h, out_w}) {
    throw DimensionError("conv2d_grad: upstream " + shape_string(upstream.shape()));
  }
  const std::size_t plane = out_h * out_w;
  const std::size_t k = w.channels * w.height * w.width;
  Conv2dGrad<Scalar> g{BasicTensor<Scalar>(input.shape()), BasicTensor<Scalar>(weight.shape())};
  if (upstream.empty()) return g;

  typename BasicTensor<Scalar>::RowMatrix gout(Eigen::Index(w.batch), Eigen::Index(s.batch * plane));
  for (std::size_t n = 0; n < s.batch; ++n) {
    for (std::size_t co = 0; co < w.batch; ++co) {
      const Scalar* src = upstream.data() + (n * w.batch + co) * plane;
      for (std::size_t p = 0; p < plane; ++p) gout(Eigen::Index(co), Eigen::Index(n * plane + p)) = src[p];
    }
  }
  const auto cols = detail::im2col(input, w.height, w.width, out_h, out_w, geo);
  g.grad_weight.matrix(w.batch, k).noalias() = gout * cols.transpose();
  typename BasicTensor<Scalar>::RowMatrix grad_cols;
  grad_cols.noalias() = weight.matrix(w.batch, k).transpose() * gout;
  detail::col2im_add(grad_cols, g.grad_input, w.height, w.width, out_h, out_w, geo);
  return g;
}

struct PoolGeometry {
  std::size_t window = 2;
  std::size_t stride = 2;
};

inline std::size_t pool_output_extent(std::size_t in, const PoolGeometry& geo) {
  if (geo.window == 0 || geo.stride == 0) throw DimensionError("avgpool2d: zero-sized window");
  if (geo.window > in) {
    throw DimensionError("avgpool2d: window " + std::to_string(geo.window) + " exceeds extent " +
                         std::to_string(in));
  }
  return (in - geo.window) / geo.stride + 1;
}

/// Mean over each window; trailing rows/columns that do not fill a window are dropped.
template <typename Scalar>
BasicTensor<Scalar> avgpool2d(const BasicTensor<Scalar>& input, const PoolGeometry& geo = {}) {
  const Shape4 s = input.shape4();
  const std::size_t oh = pool_output_extent(s.height, geo);
  const std::size_t ow = pool_output_extent(s.width, geo);
  const Scalar scale = Scalar(1) / Scalar(geo.window * geo.window);
  BasicTensor<Scalar> out({s.batch, s.channels, oh, ow});
  for (std::size_t n = 0; n < s.batch; ++n)
    for (std::size_t c = 0; c < s.channels; ++c)
      for (std::size_t oy = 0; oy < oh; ++oy)
        for (std::size_t ox = 0; ox < ow; ++ox) {
          Scalar acc = 0;
          for (std::size_t ky = 0; ky < geo.window; ++ky)
            for (std::size_t kx = 0; kx < geo.window; ++kx)
              acc += input.at(n, c, oy * geo.stride + ky, ox * geo.stride + kx);
          out.at(n, c, oy, ox) = acc * scale;
        }
  return out;
}

template <typename Scalar>
BasicTensor<Scalar> avgpool2d_grad(const BasicTensor<Scalar>& upstream, const Shape& input_shape,
                                   const PoolGeometry& geo = {}) {
  BasicTensor<Scalar> grad(input_shape);
  const Shape4 s = grad.shape4();
  const std::size_t oh = pool_output_extent(s.height, geo);
  const std::size_t ow = pool_output_extent(s.width, geo);
  if (upstream.shape() != Shape{s.batch, s.channels, oh, ow}) {
    throw DimensionError("avgpool2d_grad: upstream " + shape_string(upstream.shape()));
  }
  const Scalar scale = Scalar(1) / Scalar(geo.window * geo.window);
  for (std::size_t n = 0; n < s.batch; ++n)
    for (std::size_t c = 0; c < s.channels; ++c)
      for (std::size_t oy = 0; oy < oh; ++oy)
        for (std::size_t ox = 0; ox < ow; ++ox) {
          const Scalar g = upstream.at(n, c, oy, ox) * scale;
          for (std::size_t ky = 0; ky < geo.window; ++ky)
            for (std::size_t kx = 0; kx < geo.window; ++kx)
              grad.at(n, c, oy * geo.stride + ky, ox * geo.stride + kx) += g;
        }
  return grad;
}

}  // namespace snnprune
