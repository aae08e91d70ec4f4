#include "snnprune/prune_unstructured.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "snnprune/optim.hpp"

namespace snnprune {

void SparsitySchedule::validate() const {
  if (!(final_sparsity > 0 && final_sparsity < 1)) throw ArgumentError("s_f must be in (0, 1)");
  if (!(regen_ratio >= 0 && regen_ratio < 1)) throw ArgumentError("r must be in [0, 1)");
  if (interval == 0) throw ArgumentError("delta_t must be > 0");
}

double current_sparsity(double final_sparsity, std::size_t n, std::size_t interval,
                        std::size_t end_step) {
  if (end_step == 0) return final_sparsity;
  const double progress = double(n) * double(interval) / double(end_step);
  if (progress > 1.0) throw ArgumentError("current_sparsity: n * delta_t exceeds T_f");
  const double rest = 1.0 - progress;
  return final_sparsity - final_sparsity * rest * rest * rest;
}

double extend_sparsity(double sparsity, double regen_ratio) {
  if (!(sparsity >= 0 && sparsity < 1)) throw ArgumentError("extend_sparsity: s must be in [0, 1)");
  if (!(regen_ratio >= 0 && regen_ratio < 1)) throw ArgumentError("extend_sparsity: r must be in [0, 1)");
  return sparsity + regen_ratio * (1.0 - sparsity);
}

std::size_t survivor_target(double sparsity, std::size_t total) {
  return std::size_t(std::floor((1.0 - sparsity) * double(total) + 0.5));
}

std::vector<double> flatten_values(std::span<const Tensor* const> tensors) {
  std::vector<double> out;
  for (const Tensor* t : tensors) out.insert(out.end(), t->values().begin(), t->values().end());
  return out;
}

std::vector<double> flatten_values(const std::vector<Tensor>& tensors) {
  std::vector<double> out;
  for (const Tensor& t : tensors) out.insert(out.end(), t.values().begin(), t.values().end());
  return out;
}

std::vector<std::size_t> prune_global_magnitude(std::span<const Tensor* const> weights,
                                                PruneMask& mask, double sparsity) {
  if (weights.size() != mask.tensors()) throw DimensionError("prune: weights do not match mask");
  if (!(sparsity >= 0 && sparsity < 1)) throw ArgumentError("prune: sparsity must be in [0, 1)");
  const std::size_t total = mask.total();
  const std::size_t target = survivor_target(sparsity, total);
  if (target < 1) throw ArgumentError("prune: sparsity leaves no surviving connection");

  const std::vector<double> w = flatten_values(weights);
  const std::vector<char> bits = mask.bits();
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < total; ++i)
    if (bits[i]) active.push_back(i);
  if (active.size() <= target) return {};

  const std::size_t drop = active.size() - target;
  auto less = [&](std::size_t a, std::size_t b) {
    const double wa = std::abs(w[a]), wb = std::abs(w[b]);
    return wa != wb ? wa < wb : a < b;
  };
  std::partial_sort(active.begin(), active.begin() + std::ptrdiff_t(drop), active.end(), less);
  active.resize(drop);
  for (std::size_t i : active) mask.set(i, false);
  return active;
}

std::vector<std::size_t> regenerate(PruneMask& mask, std::span<const double> scores,
                                    std::span<const double> snapshot, std::size_t k) {
  const std::size_t total = mask.total();
  if (scores.size() != total || snapshot.size() != total) {
    throw DimensionError("regenerate: scores/snapshot do not cover every connection");
  }
  const std::vector<char> bits = mask.bits();
  std::vector<std::size_t> pruned;
  for (std::size_t i = 0; i < total; ++i)
    if (!bits[i]) pruned.push_back(i);
  if (k > pruned.size()) {
    throw ArgumentError("regenerate: k=" + std::to_string(k) + " exceeds " +
                        std::to_string(pruned.size()) + " pruned connections");
  }
  auto before = [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    const double ma = std::abs(snapshot[a]), mb = std::abs(snapshot[b]);
    if (ma != mb) return ma > mb;
    return a < b;
  };
  std::partial_sort(pruned.begin(), pruned.begin() + std::ptrdiff_t(k), pruned.end(), before);
  pruned.resize(k);
  for (std::size_t i : pruned) mask.set(i, true);
  return pruned;
}

PruneEvent UnstructuredPruner::step(Network& net, PruneMask& mask, std::size_t step) {
  PruneEvent ev;
  ev.iteration = ++n_;
  ev.step = step;
  ev.sparsity = current_sparsity(schedule_, n_);
  ev.extended_sparsity = extend_sparsity(ev.sparsity, schedule_.regen_ratio);

  auto refs = net.prunable_weights();
  std::vector<const Tensor*> weights;
  for (const auto& r : refs) weights.push_back(r.value);
  const std::vector<double> snapshot = flatten_values(weights);

  ev.mask_before = mask.bits();
  ev.pruned = prune_global_magnitude(weights, mask, ev.extended_sparsity);
  ev.mask_after_prune = mask.bits();

  // k is taken from the survivor counts rather than round((s' - s) total) so the
  // realized sparsity lands on round((1 - s_t) total) exactly.
  const std::size_t keep = survivor_target(ev.sparsity, mask.total());
  const std::size_t survivors = mask.survivors();
  ev.k = keep > survivors ? keep - survivors : 0;

  std::vector<double> scores(mask.total(), 0.0);
  if (ev.k > 0) {
    const auto states = net.lif_states();
    CriticalityTable table(lif_unit_counts(net));
    table.accumulate(score_batch(states, aggregation_));
    table.finalize();
    scores = flatten_values(connection_scores(net, table));
  }
  ev.regenerated = regenerate(mask, scores, snapshot, ev.k);

  std::vector<char> pruned_now(mask.total(), 0);
  for (std::size_t i : ev.pruned) pruned_now[i] = 1;
  for (std::size_t i : ev.regenerated) {
    const auto [t, off] = mask.locate(i);
    (*refs[t].value)[off] = pruned_now[i] ? snapshot[i] : 0.0;
    ev.rescued += pruned_now[i];
  }
  apply_mask(net, mask);
  ev.regenerated_fraction = ev.pruned.empty() ? 0.0 : double(ev.rescued) / double(ev.pruned.size());
  ev.realized_sparsity = mask.sparsity();
  return ev;
}

}  // namespace snnprune
