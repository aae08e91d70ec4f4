#pragma once

#include <span>
#include <vector>

#include "snnprune/criticality.hpp"
#include "snnprune/mask.hpp"
#include "snnprune/network.hpp"

namespace snnprune {

/// Cubic gradual-sparsity ramp with regeneration. Steps are counted from 1;
/// pruning fires at every step t with t % interval == 0 and t <= end_step, so
/// n * interval <= end_step always holds.
struct SparsitySchedule {
  double final_sparsity = 0.9;
  std::size_t interval = 2000;
  std::size_t end_step = 0;
  double regen_ratio = 0.5;

  void validate() const;
  bool due(std::size_t step) const {
    return step > 0 && step <= end_step && step % interval == 0;
  }
  std::size_t events() const { return interval ? end_step / interval : 0; }
};

/// s_f - s_f (1 - n dt / T_f)^3
double current_sparsity(double final_sparsity, std::size_t n, std::size_t interval,
                        std::size_t end_step);
inline double current_sparsity(const SparsitySchedule& s, std::size_t n) {
  return current_sparsity(s.final_sparsity, n, s.interval, s.end_step);
}

/// s + r (1 - s)
double extend_sparsity(double sparsity, double regen_ratio);

/// round-half-up((1 - sparsity) * total)
std::size_t survivor_target(double sparsity, std::size_t total);

/// Masks the lowest-|w| active connections globally until round((1-s) total)
/// survive. Ties prune the lower flat index first. Already-masked connections
/// stay masked. Returns the newly masked flat indices in pruning order.
std::vector<std::size_t> prune_global_magnitude(std::span<const Tensor* const> weights,
                                                PruneMask& mask, double sparsity);

/// Unmasks the top-k masked connections ordered by (score desc, |snapshot| desc,
/// flat index asc). `scores` and `snapshot` are flat over all connections.
/// Returns the unmasked indices in rank order.
std::vector<std::size_t> regenerate(PruneMask& mask, std::span<const double> scores,
                                    std::span<const double> snapshot, std::size_t k);

/// Flattens per-tensor values into the global connection order.
std::vector<double> flatten_values(std::span<const Tensor* const> tensors);
std::vector<double> flatten_values(const std::vector<Tensor>& tensors);

struct PruneEvent {
  std::size_t iteration = 0;
  std::size_t step = 0;
  double sparsity = 0.0;           ///< s_t
  double extended_sparsity = 0.0;  ///< s_t'
  std::size_t k = 0;
  std::vector<std::size_t> pruned;       ///< masked by magnitude this iteration
  std::vector<std::size_t> regenerated;  ///< unmasked by criticality
  std::size_t rescued = 0;               ///< regenerated AND pruned this iteration
  double regenerated_fraction = 0.0;     ///< rescued / pruned
  double realized_sparsity = 0.0;
  std::vector<char> mask_before;
  std::vector<char> mask_after_prune;
};

/// One prune + regenerate iteration driven by a schedule.
class UnstructuredPruner {
 public:
  UnstructuredPruner() = default;
  UnstructuredPruner(SparsitySchedule schedule, Aggregation aggregation)
      : schedule_(schedule), aggregation_(aggregation) {
    schedule_.validate();
  }

  const SparsitySchedule& schedule() const { return schedule_; }
  std::size_t iteration() const { return n_; }
  void set_iteration(std::size_t n) { n_ = n; }
  bool due(std::size_t step) const { return schedule_.due(step); }

  /// Advances n, prunes to s_t', scores criticality from the LIF states of the
  /// network's last forward pass, and regenerates back to s_t. Regenerated
  /// connections pruned in this iteration get their pre-prune weight back;
  /// older ones restart from 0.
  PruneEvent step(Network& net, PruneMask& mask, std::size_t step);

 private:
  SparsitySchedule schedule_;
  Aggregation aggregation_ = Aggregation::Max;
  std::size_t n_ = 0;
};

}  // namespace snnprune
