#include "snnprune/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <tuple>

#include "snnprune/checkpoint.hpp"
#include "snnprune/lif.hpp"
#include "snnprune/network.hpp"
#include "snnprune/optim.hpp"
#include "snnprune/prune_structured.hpp"
#include "snnprune/prune_unstructured.hpp"
#include "snnprune/rng.hpp"

namespace snnprune {

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

Tensor random_tensor(const Shape& shape, Rng& rng, double scale = 1.0) {
  Tensor t(shape);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = scale * rng.normal();
  return t;
}

PropertyResult check_surrogate(Rng& rng) {
  PropertyResult r{"surrogate", true, ""};
  double worst = 0.0;
  if (surrogate_g(0.0) != 0.5 || surrogate_gprime(0.0) != 1.0) r.passed = false;
  for (int i = 0; i < 100; ++i) {
    const double x = -5.0 + 10.0 * rng.uniform();
    const double h = 1e-5;
    const double fd = (surrogate_g(x + h) - surrogate_g(x - h)) / (2 * h);
    worst = std::max(worst, std::abs(fd - surrogate_gprime(x)));
  }
  r.passed = r.passed && worst <= 1e-6;
  r.detail = "max |g' - fd| = " + num(worst);
  return r;
}

PropertyResult check_lif() {
  PropertyResult r{"lif-tie-and-reset", true, ""};
  LIFParams p;  // tau 4/3, threshold 1, reset 0
  // Input 4/3 from rest charges exactly to 1: the tie fires and resets to 0.
  const LifStep a = lif_step(Tensor({1}, {4.0 / 3.0}), Tensor({1}, {0.0}), p);
  const bool tie = a.s[0] == 1.0 && a.u[0] == p.v_reset;
  const LifStep b = lif_step(Tensor({1}, {0.5}), Tensor({1}, {0.0}), p);
  const bool below = b.s[0] == 0.0 && std::abs(b.h[0] - 0.375) < 1e-15 && b.u[0] == b.h[0];
  r.passed = tie && below;
  r.detail = std::string(tie ? "tie fires" : "tie does not fire") + ", " + (below ? "leak ok" : "leak wrong");
  return r;
}

double loss_of(Network& net, const Tensor& x, const std::vector<int>& y) {
  return loss_ce_l1(net.forward(x, Mode::Train), y, {}, 0.0).loss;
}

PropertyResult check_gradients(Rng& rng) {
  PropertyResult r{"relaxed-gradient-check", true, ""};
  NetworkSpec spec;
  spec.input = {1, 5, 5};
  spec.timesteps = 3;
  spec.layers = {ConvSpec{1, 3, 3, 1, 1}, BatchNormSpec{3}, LifSpec{}, ConvSpec{3, 4, 3, 1, 1},
                 BatchNormSpec{4}, LifSpec{}, AvgPoolSpec{2, 2}, FlattenSpec{}, LinearSpec{16, 3}};
  Network net(spec, LIFParams{});
  net.initialize(rng);
  net.set_relaxed_mode(true);
  const Tensor x = random_tensor({4, 1, 5, 5}, rng);
  const std::vector<int> y{0, 1, 2, 1};
  net.backward(loss_ce_l1(net.forward(x, Mode::Train), y, {}, 0.0).logits_grad);

  double worst = 0.0;
  auto params = net.parameters();
  std::vector<Tensor> analytic;
  for (const auto& p : params) analytic.push_back(*p.grad);
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Tensor& w = *params[pi].value;
    std::vector<std::size_t> coords(w.size());
    std::iota(coords.begin(), coords.end(), 0);
    rng.shuffle(std::span<std::size_t>(coords));
    coords.resize(std::min<std::size_t>(coords.size(), 8));
    double diff = 0.0, norm = 0.0;
    for (std::size_t i : coords) {
      const double orig = w[i], h = 1e-6;
      w[i] = orig + h;
      const double lp = loss_of(net, x, y);
      w[i] = orig - h;
      const double lm = loss_of(net, x, y);
      w[i] = orig;
      const double fd = (lp - lm) / (2 * h);
      diff += (fd - analytic[pi][i]) * (fd - analytic[pi][i]);
      norm += fd * fd + analytic[pi][i] * analytic[pi][i];
    }
    const double rel = norm > 0 ? std::sqrt(diff) / std::sqrt(norm) : 0.0;
    worst = std::max(worst, rel);
  }
  r.passed = worst <= 1e-4;
  r.detail = "worst relative error " + num(worst);
  return r;
}

PropertyResult check_schedule() {
  PropertyResult r{"schedule-endpoints-monotone", true, ""};
  for (double sf : {0.9, 0.95, 0.98}) {
    const std::size_t dt = 7, tf = 70;
    if (current_sparsity(sf, 0, dt, tf) != 0.0) r.passed = false;
    if (std::abs(current_sparsity(sf, tf / dt, dt, tf) - sf) > 1e-12) r.passed = false;
    for (std::size_t n = 1; n <= tf / dt; ++n)
      if (current_sparsity(sf, n, dt, tf) < current_sparsity(sf, n - 1, dt, tf)) r.passed = false;
  }
  r.detail = r.passed ? "s_f in {0.9, 0.95, 0.98}" : "endpoint or monotonicity violated";
  return r;
}

PropertyResult check_sparsity(Rng& rng) {
  PropertyResult r{"realized-sparsity", true, ""};
  std::size_t worst = 0;
  for (int trial = 0; trial < 5; ++trial) {
    Network net(spiking_mlp({1, 4, 4}, {8}, 3, 2), LIFParams{});
    net.initialize(rng);
    net.forward(random_tensor({6, 1, 4, 4}, rng, 2.0), Mode::Train);
    std::vector<Shape> shapes;
    for (const auto& p : net.prunable_weights()) shapes.push_back(p.value->shape());
    PruneMask mask(shapes);
    SparsitySchedule s{0.8 + 0.15 * rng.uniform(), 1 + rng.below(3), 0, 0.6 * rng.uniform()};
    s.end_step = s.interval * (2 + rng.below(5));
    UnstructuredPruner pruner(s, Aggregation::Max);
    for (std::size_t t = 1; t <= s.end_step; ++t) {
      if (!pruner.due(t)) continue;
      const PruneEvent ev = pruner.step(net, mask, t);
      const std::size_t target = survivor_target(ev.sparsity, mask.total());
      const std::size_t got = mask.survivors();
      worst = std::max(worst, got > target ? got - target : target - got);
    }
  }
  r.passed = worst <= 1;
  r.detail = "max survivor deviation " + std::to_string(worst);
  return r;
}

PropertyResult check_topk(Rng& rng) {
  PropertyResult r{"regeneration-top-k", true, ""};
  for (int trial = 0; trial < 50 && r.passed; ++trial) {
    const std::size_t n = 10 + rng.below(60);
    PruneMask mask({Shape{n}});
    std::vector<double> scores(n), snap(n);
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = double(rng.below(4)) / 4.0;  // coarse values force ties
      snap[i] = double(rng.below(5)) - 2.0;
      if (rng.uniform() < 0.6) mask.set(i, false);
    }
    std::vector<std::size_t> masked;
    for (std::size_t i = 0; i < n; ++i)
      if (!mask.active(i)) masked.push_back(i);
    const std::size_t k = masked.empty() ? 0 : rng.below(masked.size() + 1);
    std::vector<std::tuple<double, double, std::size_t>> keyed;
    for (std::size_t i : masked) keyed.emplace_back(-scores[i], -std::abs(snap[i]), i);
    std::sort(keyed.begin(), keyed.end());
    std::vector<std::size_t> expect;
    for (std::size_t i = 0; i < k; ++i) expect.push_back(std::get<2>(keyed[i]));
    r.passed = regenerate(mask, scores, snap, k) == expect;
  }
  r.detail = r.passed ? "matches brute-force ordering" : "ordering mismatch";
  return r;
}

PropertyResult check_slim(Rng& rng) {
  PropertyResult r{"slim-mask-equivalence", true, ""};
  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    Network net(vgg_mini({2, 8, 8}, {4 + rng.below(4), 4 + rng.below(4)}, 3, 3), LIFParams{});
    net.initialize(rng);
    for (std::size_t l : net.batchnorm_layers()) {
      auto& bn = net.layer_as<BatchNormLayer>(l);
      for (std::size_t c = 0; c < bn.channels; ++c) {
        bn.gamma[c] = rng.normal();
        bn.beta[c] = 0.5 * rng.normal();
        bn.running_mean[c] = 0.3 * rng.normal();
        bn.running_var[c] = 0.5 + rng.uniform();
      }
    }
    ChannelPlan plan = ChannelPlan::full(batchnorm_widths(net));
    for (auto& kept : plan.kept) {
      std::vector<std::size_t> keep;
      for (std::size_t c : kept)
        if (rng.uniform() < 0.6) keep.push_back(c);
      if (keep.empty()) keep.push_back(kept.front());
      kept = keep;
    }
    Network masked = mask_channels(net, plan);
    Network slimmed = slim(net, plan);
    const Tensor x = random_tensor({3, 2, 8, 8}, rng, 2.0);
    worst = std::max(worst, max_abs_diff(masked.forward(x, Mode::Eval), slimmed.forward(x, Mode::Eval)));
  }
  r.passed = worst <= 1e-5;
  r.detail = "max deviation " + num(worst);
  return r;
}

PropertyResult check_flops() {
  PropertyResult r{"flops-closed-form", true, ""};
  const NetworkSpec spec = vgg_mini({1, 8, 8}, {4, 8}, 3, 5);
  // conv 4*1*9*64 + conv 8*4*9*16 + linear 32*3
  const double expect = 4 * 1 * 9 * 64 + 8 * 4 * 9 * 16 + 32 * 3;
  const FlopsReport rep = count_flops(spec, ChannelPlan::full({4, 8}));
  ChannelPlan half{{{0, 1}, {0, 1, 2, 3}}, {4, 8}};
  const double slim_expect = 2 * 1 * 9 * 64 + 4 * 2 * 9 * 16 + 16 * 3;
  const FlopsReport h = count_flops(spec, half);
  r.passed = rep.dense_total == expect && rep.reduction == 0.0 && h.slim_total == slim_expect;
  r.detail = "dense " + num(rep.dense_total) + ", half-width " + num(h.slim_total);
  return r;
}

PropertyResult check_checkpoint(Rng& rng) {
  PropertyResult r{"checkpoint-round-trip", true, ""};
  Network net(vgg_mini({1, 6, 6}, {3}, 2, 2), LIFParams{});
  net.initialize(rng);
  Checkpoint c;
  net.save(c);
  const std::string a = serialize_checkpoint(c);
  Checkpoint back;
  Network::load(deserialize_checkpoint(a)).save(back);
  r.passed = serialize_checkpoint(back) == a;
  r.detail = std::to_string(a.size()) + " bytes";
  return r;
}

}  // namespace

std::vector<PropertyResult> run_verify(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<PropertyResult> out;
  out.push_back(check_surrogate(rng));
  out.push_back(check_lif());
  out.push_back(check_gradients(rng));
  out.push_back(check_schedule());
  out.push_back(check_sparsity(rng));
  out.push_back(check_topk(rng));
  out.push_back(check_slim(rng));
  out.push_back(check_flops());
  out.push_back(check_checkpoint(rng));
  return out;
}

}  // namespace snnprune
