#include <algorithm>
#include <tuple>

#include "doctest.h"
#include "snnprune/prune_structured.hpp"
#include "snnprune/prune_unstructured.hpp"
#include "support.hpp"

using namespace snnprune;

TEST_CASE("channel plan text and validation") {
  const ChannelPlan p{{{0, 2}, {1}}, {3, 4}};
  CHECK(p.to_string() == "3:0,2;4:1");
  CHECK(ChannelPlan::parse(p.to_string()) == p);
  CHECK(p.total() == 7);
  CHECK(p.kept_total() == 3);
  CHECK(p.keeps({0, 2}));
  CHECK_FALSE(p.keeps({1, 0}));
  CHECK_THROWS_AS((ChannelPlan{{{}, {1}}, {3, 4}}.validate()), ArgumentError);
  CHECK_THROWS_AS((ChannelPlan{{{2, 1}}, {3}}.validate()), ArgumentError);
  CHECK_THROWS_AS((ChannelPlan{{{5}}, {3}}.validate()), ArgumentError);
  CHECK_THROWS(ChannelPlan::parse("3;0"));
}

TEST_CASE("channel ranking breaks ties by layer then channel") {
  const std::vector<Tensor> g{Tensor({3}, {0.5, -0.1, 0.3}), Tensor({2}, {0.1, 0.05})};
  const auto r = rank_channels(g);
  const std::vector<ChannelRef> expect{{1, 1}, {0, 1}, {1, 0}, {0, 2}, {0, 0}};
  CHECK(r == expect);
}

TEST_CASE("selection matches a brute-force oracle") {
  Rng rng(12);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Tensor> gammas;
    std::vector<std::vector<double>> scores;
    const std::size_t layers = 1 + rng.below(3);
    for (std::size_t l = 0; l < layers; ++l) {
      const std::size_t w = 2 + rng.below(8);
      Tensor g({w});
      std::vector<double> s(w);
      for (std::size_t c = 0; c < w; ++c) {
        g[c] = double(rng.below(6)) * 0.1 - 0.2;  // coarse grid forces ties
        s[c] = double(rng.below(3)) / 3.0;
      }
      gammas.push_back(g);
      scores.push_back(s);
    }
    const double percent = 0.1 + 0.6 * rng.uniform();
    const double r = 0.5 * rng.uniform();
    const auto sel = prune_and_regenerate_channels(gammas, percent, r, scores);

    std::vector<std::tuple<double, std::size_t, std::size_t>> asc;
    for (std::size_t l = 0; l < layers; ++l)
      for (std::size_t c = 0; c < gammas[l].size(); ++c) asc.emplace_back(std::abs(gammas[l][c]), l, c);
    std::sort(asc.begin(), asc.end());
    const std::size_t total = asc.size();
    const std::size_t keep_ext = std::size_t(std::floor((1 - (percent + r * (1 - percent))) * double(total) + 0.5));
    const std::size_t keep = std::size_t(std::floor((1 - percent) * double(total) + 0.5));
    std::vector<std::tuple<double, double, std::size_t, std::size_t>> cand;
    for (std::size_t i = 0; i < total - keep_ext; ++i) {
      const auto [ag, l, c] = asc[i];
      cand.emplace_back(-scores[l][c], -ag, l, c);
    }
    std::sort(cand.begin(), cand.end());
    std::vector<ChannelRef> expect;
    for (std::size_t i = 0; i < keep - keep_ext; ++i) expect.push_back({std::get<2>(cand[i]), std::get<3>(cand[i])});
    CHECK(sel.regenerated == expect);
    CHECK(sel.plan.kept_total() == keep + sel.force_kept.size());
  }
}

TEST_CASE("layer collapse guard keeps the largest gamma") {
  const std::vector<Tensor> g{Tensor({2}, {0.01, 0.02}), Tensor({4}, {1.0, 2.0, 3.0, 4.0})};
  const auto sel = prune_and_regenerate_channels(g, 0.34, 0.0, {{0, 0}, {0, 0, 0, 0}});
  CHECK(sel.force_kept == std::vector<ChannelRef>{{0, 1}});
  CHECK(sel.plan.kept[0] == std::vector<std::size_t>{1});
  CHECK_THROWS_AS(prune_and_regenerate_channels(g, 1.0, 0.0, {{0, 0}, {0, 0, 0, 0}}), ArgumentError);
  CHECK_THROWS_AS(prune_and_regenerate_channels(g, 0.3, 0.0, {{0, 0}}), DimensionError);
}

TEST_CASE("slimmed network equals the gamma-masked original") {
  Rng rng(40);
  for (int trial = 0; trial < 5; ++trial) {
    Network net(vgg_mini({2, 8, 8}, {5, 6}, 3, 3), LIFParams{});
    net.initialize(rng);
    for (std::size_t l : net.batchnorm_layers()) {
      auto& bn = net.layer_as<BatchNormLayer>(l);
      bn.gamma = testing::random_tensor({bn.channels}, rng);
      bn.beta = testing::random_tensor({bn.channels}, rng, 0.3);
    }
    const ChannelPlan plan{{{0, 3, 4}, {1, 2, 5}}, {5, 6}};
    Network slimmed = slim(net, plan);
    CHECK(batchnorm_widths(slimmed) == std::vector<std::size_t>{3, 3});
    CHECK(slimmed.spec().to_string() == slim_spec(net.spec(), plan).to_string());
    Network masked = mask_channels(net, plan);
    const Tensor x = testing::random_tensor({4, 2, 8, 8}, rng, 2.0);
    CHECK(max_abs_diff(slimmed.forward(x, Mode::Eval), masked.forward(x, Mode::Eval)) <= 1e-5);
  }
}

TEST_CASE("flops arithmetic") {
  const NetworkSpec spec = vgg_mini({1, 8, 8}, {4, 8}, 3, 5);
  CHECK(layer_macs(spec) == std::vector<double>{4.0 * 9 * 64, 0, 0, 0, 8.0 * 4 * 9 * 16, 0, 0, 0, 0, 32.0 * 3});
  const FlopsReport half = count_flops(spec, ChannelPlan{{{0, 1}, {0, 1, 2, 3}}, {4, 8}});
  CHECK(half.dense_total == 7008.0);
  CHECK(half.slim_total == 2.0 * 9 * 64 + 4.0 * 2 * 9 * 16 + 16.0 * 3);
  CHECK(half.reduction == doctest::Approx(1.0 - 2352.0 / 7008.0));
  CHECK(count_flops(spec, slim_spec(spec, ChannelPlan{{{0, 1}, {0, 1, 2, 3}}, {4, 8}})).slim_total == 2352.0);
  CHECK(half.to_json().find("\"reduction\"") != std::string::npos);
}
