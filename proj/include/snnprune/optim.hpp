#pragma once

#include <span>
#include <vector>

#include "snnprune/mask.hpp"
#include "snnprune/network.hpp"

namespace snnprune {

enum class LrScheduleKind { Cosine, Step };

struct LrSchedule {
  LrScheduleKind kind = LrScheduleKind::Cosine;
  std::vector<std::size_t> drop_epochs;  ///< Step only
  double factor = 0.1;                   ///< Step only: 10x drop
};

struct TrainConfig {
  double lr = 0.3;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  std::size_t batch_size = 128;
  std::size_t epochs = 0;
  LrSchedule lr_schedule;
  double lambda_l1 = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Learning rate at `epoch` of a schedule spanning `epochs` epochs.
/// cosine: lr * 0.5 * (1 + cos(pi * epoch / epochs)); step: lr * factor^(drops passed).
double lr_at(std::size_t epoch, std::size_t epochs, double base_lr, const LrSchedule& schedule);
inline double lr_at(std::size_t epoch, const TrainConfig& cfg) {
  return lr_at(epoch, cfg.epochs, cfg.lr, cfg.lr_schedule);
}

struct LossResult {
  double loss = 0.0;      ///< ce + penalty
  double ce = 0.0;        ///< mean cross-entropy
  double penalty = 0.0;   ///< lambda * sum |gamma|
  std::size_t correct = 0;
  Tensor logits_grad;     ///< d(mean ce) / d logits
  std::vector<Tensor> gamma_grads;  ///< lambda * sign(gamma), sign(0) = 0
};

LossResult loss_ce_l1(const Tensor& logits, std::span<const int> targets,
                      std::span<const Tensor* const> gammas, double lambda_l1);

/// Classical momentum: v <- m v + g + wd p; p <- p - lr v. Entries where `mask`
/// is zero are forced to exactly 0.0 in both p and v.
void sgd_step(Tensor& param, const Tensor& grad, Tensor& velocity, double lr, double momentum,
              double weight_decay, const Tensor* mask = nullptr);

/// Momentum state for every parameter of a network.
class SgdMomentum {
 public:
  SgdMomentum() = default;
  explicit SgdMomentum(Network& net);

  /// Weight decay applies to weights and biases only; gamma and beta are exempt.
  void step(Network& net, double lr, double momentum, double weight_decay,
            const PruneMask* masks = nullptr);

  std::vector<Tensor>& velocity() { return velocity_; }
  const std::vector<Tensor>& velocity() const { return velocity_; }

 private:
  std::vector<Tensor> velocity_;
};

/// Zeroes masked weights in place.
void apply_mask(Network& net, const PruneMask& mask);

}  // namespace snnprune
