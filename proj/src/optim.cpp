#include "snnprune/optim.hpp"

#include <cmath>
#include <numbers>

namespace snnprune {

void TrainConfig::validate() const {
  if (!(lr > 0)) throw ArgumentError("lr must be > 0");
  if (!(momentum >= 0 && momentum < 1)) throw ArgumentError("momentum must be in [0, 1)");
  if (!(weight_decay >= 0)) throw ArgumentError("weight_decay must be >= 0");
  if (!(lambda_l1 >= 0)) throw ArgumentError("lambda_l1 must be >= 0");
  if (batch_size == 0) throw ArgumentError("batch_size must be >= 1");
}

double lr_at(std::size_t epoch, std::size_t epochs, double base_lr, const LrSchedule& schedule) {
  if (epoch >= epochs) {
    throw ArgumentError("lr_at: epoch " + std::to_string(epoch) + " outside [0, " +
                        std::to_string(epochs) + ")");
  }
  if (schedule.kind == LrScheduleKind::Cosine) {
    return base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * double(epoch) / double(epochs)));
  }
  double lr = base_lr;
  for (std::size_t drop : schedule.drop_epochs)
    if (epoch >= drop) lr *= schedule.factor;
  return lr;
}

LossResult loss_ce_l1(const Tensor& logits, std::span<const int> targets,
                      std::span<const Tensor* const> gammas, double lambda_l1) {
  if (logits.rank() != 2) throw DimensionError("loss: logits must be [N, classes]");
  const std::size_t n = logits.dim(0), k = logits.dim(1);
  if (n == 0 || targets.empty()) throw ArgumentError("loss: empty batch");
  if (targets.size() != n) throw DimensionError("loss: logits rows != targets");

  LossResult r;
  r.logits_grad = Tensor(logits.shape());
  double ce = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const int y = targets[i];
    if (y < 0 || std::size_t(y) >= k) throw ArgumentError("loss: target out of range");
    const double* row = logits.data() + i * k;
    double mx = row[0];
    std::size_t arg = 0;
    for (std::size_t j = 1; j < k; ++j)
      if (row[j] > mx) mx = row[j], arg = j;
    r.correct += arg == std::size_t(y);
    double z = 0.0;
    for (std::size_t j = 0; j < k; ++j) z += std::exp(row[j] - mx);
    const double log_z = mx + std::log(z);
    ce += log_z - row[y];
    for (std::size_t j = 0; j < k; ++j) {
      const double p = std::exp(row[j] - log_z);
      r.logits_grad[i * k + j] = (p - (j == std::size_t(y) ? 1.0 : 0.0)) / double(n);
    }
  }
  r.ce = ce / double(n);
  for (const Tensor* g : gammas) {
    Tensor grad(g->shape());
    for (std::size_t i = 0; i < g->size(); ++i) {
      const double v = (*g)[i];
      r.penalty += std::abs(v);
      grad[i] = lambda_l1 * double((v > 0) - (v < 0));
    }
    r.gamma_grads.push_back(std::move(grad));
  }
  r.penalty *= lambda_l1;
  r.loss = r.ce + r.penalty;
  return r;
}

void sgd_step(Tensor& param, const Tensor& grad, Tensor& velocity, double lr, double momentum,
              double weight_decay, const Tensor* mask) {
  if (param.shape() != grad.shape() || param.shape() != velocity.shape() ||
      (mask && mask->shape() != param.shape())) {
    throw DimensionError("sgd_step: misaligned shapes for " + shape_string(param.shape()));
  }
  velocity.vec() = momentum * velocity.vec() + grad.vec() + weight_decay * param.vec();
  param.vec() -= lr * velocity.vec();
  if (mask) {
    for (std::size_t i = 0; i < param.size(); ++i) {
      if ((*mask)[i] == 0.0) {
        param[i] = 0.0;
        velocity[i] = 0.0;
      }
    }
  }
}

SgdMomentum::SgdMomentum(Network& net) {
  for (const auto& p : net.parameters()) velocity_.emplace_back(p.value->shape());
}

void SgdMomentum::step(Network& net, double lr, double momentum, double weight_decay,
                       const PruneMask* masks) {
  auto params = net.parameters();
  if (params.size() != velocity_.size()) throw StateError("optimizer built for another network");
  std::size_t weight_index = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& p = params[i];
    const bool decays = p.kind == ParamKind::Weight || p.kind == ParamKind::Bias;
    const Tensor* mask = nullptr;
    if (p.kind == ParamKind::Weight && masks) mask = &(*masks)[weight_index];
    if (p.kind == ParamKind::Weight) ++weight_index;
    sgd_step(*p.value, *p.grad, velocity_[i], lr, momentum, decays ? weight_decay : 0.0, mask);
  }
}

void apply_mask(Network& net, const PruneMask& mask) {
  auto weights = net.prunable_weights();
  if (weights.size() != mask.tensors()) throw DimensionError("mask does not match network");
  for (std::size_t t = 0; t < weights.size(); ++t) {
    Tensor& w = *weights[t].value;
    if (w.shape() != mask[t].shape()) throw DimensionError("mask shape mismatch for " + weights[t].name);
    for (std::size_t i = 0; i < w.size(); ++i)
      if (mask[t][i] == 0.0) w[i] = 0.0;
  }
}

}  // namespace snnprune
