#include "doctest.h"
#include "snnprune/ops.hpp"
#include "support.hpp"

using namespace snnprune;

TEST_CASE("tensor shape bookkeeping") {
  Tensor t({2, 3, 4});
  CHECK(t.size() == 24);
  CHECK(t.rank() == 3);
  CHECK(t.dim(1) == 3);
  CHECK_THROWS_AS(Tensor({2, 2}, {1.0, 2.0, 3.0}), DimensionError);
  CHECK(shape_string({2, 3}) == "[2,3]");
  t[5] = std::nan("");
  CHECK_FALSE(t.all_finite());
}

TEST_CASE("matmul small cases") {
  const Tensor a({2, 2}, {1, 2, 3, 4});
  const Tensor b({2, 2}, {5, 6, 7, 8});
  CHECK(matmul(Tensor({2, 2}, {1, 0, 0, 1}), a) == a);
  CHECK(matmul(Tensor({2, 2}, {1, 0, 0, 0}), b) == Tensor({2, 2}, {5, 6, 0, 0}));
  CHECK(matmul(a, b) == Tensor({2, 2}, {19, 22, 43, 50}));
  CHECK_THROWS_AS(matmul(Tensor({2, 3}), Tensor({2, 3})), DimensionError);
}

TEST_CASE("matmul gradient matches finite differences") {
  Rng rng(3);
  const Tensor a = testing::random_tensor({3, 4}, rng);
  const Tensor b = testing::random_tensor({4, 2}, rng);
  const Tensor up = testing::random_tensor({3, 2}, rng);
  const auto g = matmul_grad(up, a, b);
  // loss = sum(up * (a b)) is linear, so central differences are exact up to rounding.
  auto loss = [&](const Tensor& x, const Tensor& y) {
    const Tensor c = matmul(x, y);
    double s = 0;
    for (std::size_t i = 0; i < c.size(); ++i) s += c[i] * up[i];
    return s;
  };
  Tensor ap = a;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ap[i] = a[i] + 1e-6;
    const double lp = loss(ap, b);
    ap[i] = a[i] - 1e-6;
    const double lm = loss(ap, b);
    ap[i] = a[i];
    CHECK(g.grad_a[i] == doctest::Approx((lp - lm) / 2e-6).epsilon(1e-7));
  }
}

TEST_CASE("conv2d examples") {
  CHECK(conv2d(Tensor({1, 1, 3, 3}, 1.0), Tensor({1, 1, 1, 1}, {2.0})) == Tensor({1, 1, 3, 3}, 2.0));
  CHECK(conv2d(Tensor({1, 1, 2, 2}, {1, 2, 3, 4}), Tensor({1, 1, 2, 2}, 1.0)) == Tensor({1, 1, 1, 1}, {10.0}));
  Rng rng(1);
  const Tensor x = testing::random_tensor({2, 3, 5, 5}, rng);
  const Tensor zero = conv2d(x, Tensor({4, 3, 3, 3}), {1, 1});
  for (double v : zero.values()) CHECK(v == 0.0);
  CHECK_THROWS_AS(conv2d(Tensor({1, 1, 2, 2}), Tensor({1, 1, 5, 5})), DimensionError);
  CHECK_THROWS_AS(conv2d(Tensor({1, 2, 4, 4}), Tensor({1, 3, 3, 3})), DimensionError);
}

TEST_CASE("conv2d agrees with direct loops across geometries") {
  Rng rng(7);
  for (std::size_t stride : {1u, 2u})
    for (std::size_t pad : {0u, 1u, 2u}) {
      const Tensor x = testing::random_tensor({2, 3, 7, 6}, rng);
      const Tensor w = testing::random_tensor({4, 3, 3, 3}, rng);
      CHECK(max_abs_diff(conv2d(x, w, {stride, pad}), testing::naive_conv(x, w, stride, pad)) < 1e-12);
    }
}

TEST_CASE("conv2d gradient matches finite differences") {
  Rng rng(11);
  const Conv2dGeometry geo{2, 1};
  const Tensor x = testing::random_tensor({2, 2, 5, 5}, rng);
  const Tensor w = testing::random_tensor({3, 2, 3, 3}, rng);
  const Tensor up = testing::random_tensor(conv2d(x, w, geo).shape(), rng);
  const auto g = conv2d_grad(up, x, w, geo);
  auto loss = [&](const Tensor& xi, const Tensor& wi) {
    const Tensor y = testing::naive_conv(xi, wi, geo.stride, geo.padding);
    double s = 0;
    for (std::size_t i = 0; i < y.size(); ++i) s += y[i] * up[i];
    return s;
  };
  auto fd = [&](Tensor t, bool is_input) {
    std::vector<double> out;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double v = t[i];
      t[i] = v + 1e-6;
      const double lp = is_input ? loss(t, w) : loss(x, t);
      t[i] = v - 1e-6;
      const double lm = is_input ? loss(t, w) : loss(x, t);
      t[i] = v;
      out.push_back((lp - lm) / 2e-6);
    }
    return out;
  };
  const auto gi = g.grad_input.values();
  const auto gw = g.grad_weight.values();
  CHECK(testing::relative_error(fd(x, true), {gi.begin(), gi.end()}) < 1e-8);
  CHECK(testing::relative_error(fd(w, false), {gw.begin(), gw.end()}) < 1e-8);
}

TEST_CASE("avgpool forward, backward and errors") {
  const Tensor x({1, 1, 4, 4}, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16});
  CHECK(avgpool2d(x) == Tensor({1, 1, 2, 2}, {3.5, 5.5, 11.5, 13.5}));
  // Odd extents drop the trailing row and column.
  CHECK(avgpool2d(Tensor({1, 1, 5, 5}, 1.0)).shape() == Shape{1, 1, 2, 2});
  const Tensor g = avgpool2d_grad(Tensor({1, 1, 2, 2}, 1.0), x.shape());
  for (double v : g.values()) CHECK(v == 0.25);
  const Tensor g5 = avgpool2d_grad(Tensor({1, 1, 2, 2}, 1.0), {1, 1, 5, 5});
  CHECK(g5.at(0, 0, 4, 4) == 0.0);
  CHECK_THROWS_AS(avgpool2d(x, {0, 1}), DimensionError);
}
