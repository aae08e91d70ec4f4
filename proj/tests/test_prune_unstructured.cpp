#include <algorithm>
#include <numeric>
#include <tuple>

#include "doctest.h"
#include "snnprune/prune_unstructured.hpp"
#include "support.hpp"

using namespace snnprune;

TEST_CASE("cubic schedule values") {
  CHECK(current_sparsity(0.9, 0, 10, 100) == 0.0);
  CHECK(current_sparsity(0.9, 5, 10, 100) == doctest::Approx(0.7875));
  CHECK(current_sparsity(0.9, 10, 10, 100) == doctest::Approx(0.9).epsilon(1e-12));
  const SparsitySchedule s{0.9, 19, 19 * 15, 0.5};
  CHECK(s.events() == 15);
  CHECK_FALSE(s.due(0));
  CHECK(s.due(19));
  CHECK(s.due(285));
  CHECK_FALSE(s.due(304));
  // Interval longer than the horizon: no events.
  CHECK(SparsitySchedule{0.9, 50, 40, 0.5}.events() == 0);
}

TEST_CASE("schedule validation") {
  CHECK_THROWS_AS((SparsitySchedule{1.0, 1, 10, 0.5}.validate()), ArgumentError);
  CHECK_THROWS_AS((SparsitySchedule{0.9, 0, 10, 0.5}.validate()), ArgumentError);
  CHECK_THROWS_AS((SparsitySchedule{0.9, 1, 10, 1.0}.validate()), ArgumentError);
}

TEST_CASE("extension and rounding") {
  CHECK(extend_sparsity(0.9, 0.0) == 0.9);
  CHECK(extend_sparsity(0.9, 0.5) == doctest::Approx(0.95));
  CHECK(extend_sparsity(0.98, 0.1) == doctest::Approx(0.982));
  CHECK(survivor_target(0.5, 5) == 3);  // 2.5 rounds up
  CHECK(survivor_target(0.9, 100) == 10);
  CHECK(survivor_target(0.0, 7) == 7);
}

TEST_CASE("global magnitude pruning example") {
  const Tensor w({4}, {0.5, -0.3, 0.1, -0.7});
  const Tensor* ws[] = {&w};
  PruneMask mask({w.shape()});
  const auto pruned = prune_global_magnitude(ws, mask, 0.5);
  CHECK(pruned == std::vector<std::size_t>{2, 1});
  CHECK(mask.bits() == std::vector<char>{1, 0, 0, 1});
  PruneMask untouched({w.shape()});
  CHECK(prune_global_magnitude(ws, untouched, 0.0).empty());
  CHECK_THROWS_AS(prune_global_magnitude(ws, untouched, 0.95), ArgumentError);
}

TEST_CASE("magnitude pruning agrees with a full sort across tensors") {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor a = testing::random_tensor({4, 5}, rng);
    Tensor b = testing::random_tensor({2, 3, 2, 2}, rng);
    b[3] = a[7];  // exact magnitude tie across tensors
    const Tensor* ws[] = {&a, &b};
    PruneMask mask({a.shape(), b.shape()});
    const double s = rng.uniform() * 0.95;
    prune_global_magnitude(ws, mask, s);

    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t i = 0; i < a.size(); ++i) all.emplace_back(std::abs(a[i]), i);
    for (std::size_t i = 0; i < b.size(); ++i) all.emplace_back(std::abs(b[i]), a.size() + i);
    std::sort(all.begin(), all.end());
    const std::size_t total = all.size();
    const std::size_t keep = std::size_t(std::floor((1 - s) * double(total) + 0.5));
    std::vector<char> expect(total, 1);
    for (std::size_t i = 0; i < total - keep; ++i) expect[all[i].second] = 0;
    CHECK(mask.bits() == expect);
  }
}

TEST_CASE("regeneration ordering and bounds") {
  PruneMask mask({Shape{6}});
  for (std::size_t i : {0u, 2u, 3u, 5u}) mask.set(i, false);
  const std::vector<double> scores{0.9, 0.1, 0.5, 0.5, 0.1, 0.5};
  const std::vector<double> snap{9.0, 0.0, 0.2, -0.4, 0.0, 0.4};
  SUBCASE("ties fall to |w| then index") {
    // score 0.9 first; among 0.5: |-0.4| and |0.4| tie, lower index wins.
    CHECK(regenerate(mask, scores, snap, 3) == std::vector<std::size_t>{0, 3, 5});
    CHECK(mask.bits() == std::vector<char>{1, 1, 0, 1, 1, 1});
  }
  SUBCASE("k = 0 changes nothing") {
    const auto before = mask.bits();
    CHECK(regenerate(mask, scores, snap, 0).empty());
    CHECK(mask.bits() == before);
  }
  SUBCASE("k above the pruned count") { CHECK_THROWS_AS(regenerate(mask, scores, snap, 5), ArgumentError); }
}

TEST_CASE("regenerating everything just pruned is the identity") {
  Rng rng(2);
  const Tensor w = testing::random_tensor({30}, rng);
  const Tensor* ws[] = {&w};
  PruneMask mask({w.shape()});
  const auto before = mask.bits();
  const auto pruned = prune_global_magnitude(ws, mask, 0.6);
  std::vector<double> scores(30, 0.0);
  for (std::size_t i : pruned) scores[i] = 1.0;
  regenerate(mask, scores, flatten_values(std::vector<Tensor>{w}), pruned.size());
  CHECK(mask.bits() == before);
}

TEST_CASE("pruner iteration hits the schedule exactly and restores snapshots") {
  Rng rng(31);
  Network net(vgg_mini({1, 6, 6}, {4, 6}, 3, 3), LIFParams{});
  net.initialize(rng);
  net.forward(testing::random_tensor({5, 1, 6, 6}, rng, 2.0), Mode::Train);
  std::vector<Shape> shapes;
  for (const auto& p : net.prunable_weights()) shapes.push_back(p.value->shape());
  PruneMask mask(shapes);
  UnstructuredPruner pruner(SparsitySchedule{0.9, 1, 6, 0.5}, Aggregation::Max);
  for (std::size_t t = 1; t <= 6; ++t) {
    std::vector<double> before;
    for (const auto& p : net.prunable_weights())
      for (double v : p.value->values()) before.push_back(v);
    const PruneEvent ev = pruner.step(net, mask, t);
    CHECK(mask.survivors() == survivor_target(ev.sparsity, mask.total()));
    CHECK(ev.k == ev.regenerated.size());
    CHECK(ev.regenerated_fraction >= 0.0);
    CHECK(ev.regenerated_fraction <= 1.0);
    std::vector<double> after;
    for (const auto& p : net.prunable_weights())
      for (double v : p.value->values()) after.push_back(v);
    for (std::size_t i = 0; i < after.size(); ++i) {
      if (!mask.active(i)) CHECK(after[i] == 0.0);
      else CHECK((after[i] == before[i] || after[i] == 0.0));
    }
  }
  CHECK(mask.sparsity() == doctest::Approx(0.9).epsilon(1.0 / double(mask.total())));
}
