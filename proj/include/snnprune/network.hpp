#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "snnprune/checkpoint.hpp"
#include "snnprune/lif.hpp"
#include "snnprune/ops.hpp"
#include "snnprune/rng.hpp"
#include "snnprune/tensor.hpp"

namespace snnprune {

// ---------------------------------------------------------------------------
// Architecture description

struct ConvSpec {
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel = 3;
  std::size_t stride = 1;
  std::size_t padding = 1;
};
struct BatchNormSpec {
  std::size_t channels = 0;
};
struct LifSpec {};
struct AvgPoolSpec {
  std::size_t window = 2;
  std::size_t stride = 2;
};
struct FlattenSpec {};
struct LinearSpec {
  std::size_t in_features = 0;
  std::size_t out_features = 0;
};

using LayerSpec = std::variant<ConvSpec, BatchNormSpec, LifSpec, AvgPoolSpec, FlattenSpec, LinearSpec>;

struct InputGeometry {
  std::size_t channels = 1;
  std::size_t height = 1;
  std::size_t width = 1;
  Shape per_sample() const { return {channels, height, width}; }
  friend bool operator==(const InputGeometry&, const InputGeometry&) = default;
};

/// Feed-forward spiking network: ordered layers, unrolled over `timesteps`.
///
/// Validity: shapes compose; every Conv is followed by BatchNorm then LIF; every
/// Linear except the last is followed by LIF; the last layer is a Linear head
/// read out as the time mean of its output.
struct NetworkSpec {
  InputGeometry input;
  std::vector<LayerSpec> layers;
  std::size_t timesteps = 5;

  void validate() const;
  /// Per-sample activation shape after each layer (index i = output of layer i).
  std::vector<Shape> activation_shapes() const;
  std::size_t classes() const;

  std::string to_string() const;
  static NetworkSpec parse(std::string_view text);
};

/// Stand-in for VGG: one Conv3x3+BN+LIF+AvgPool block per width, then a linear head.
NetworkSpec vgg_mini(InputGeometry input, const std::vector<std::size_t>& widths,
                     std::size_t classes, std::size_t timesteps);
/// Flatten -> (Linear+LIF)* -> Linear head.
NetworkSpec spiking_mlp(InputGeometry input, const std::vector<std::size_t>& hidden,
                        std::size_t classes, std::size_t timesteps);

// ---------------------------------------------------------------------------
// Runtime layers. Activations are time-folded: leading axis is t * N + n.

enum class Mode { Train, Eval };

struct Conv2dLayer {
  ConvSpec spec;
  Tensor weight;  // [out, in, k, k]
  Tensor grad_weight;
  Tensor cached_input;
  bool cached = false;

  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& upstream);
  Conv2dGeometry geometry() const { return {spec.stride, spec.padding}; }
};

struct BatchNormLayer {
  std::size_t channels = 0;
  double eps = 1e-5;
  double momentum = 0.1;
  Tensor gamma, beta;
  Tensor running_mean, running_var;
  Tensor grad_gamma, grad_beta;

  Tensor cached_xhat;
  std::vector<double> cached_inv_std;
  Mode cached_mode = Mode::Eval;
  bool cached = false;

  explicit BatchNormLayer(std::size_t c = 0);
  /// Train mode normalizes each channel over batch, time and space jointly and
  /// updates the running statistics; Eval mode uses the running statistics.
  Tensor forward(const Tensor& x, Mode mode);
  Tensor backward(const Tensor& upstream);
};

struct LifLayer {
  LIFParams params;
  std::size_t timesteps = 1;
  bool relaxed = false;
  LIFLayerState state;

  Tensor forward(const Tensor& x);
  /// STBP through time. The reset factor (1 - s) is treated as a constant in
  /// standard mode; relaxed mode differentiates the full map.
  Tensor backward(const Tensor& upstream);
};

struct AvgPoolLayer {
  PoolGeometry geo;
  Shape cached_shape;

  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& upstream);
};

struct FlattenLayer {
  Shape cached_shape;

  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& upstream);
};

struct LinearLayer {
  LinearSpec spec;
  Tensor weight;  // [out, in]
  Tensor bias;    // [out]
  Tensor grad_weight, grad_bias;
  Tensor cached_input;
  bool cached = false;

  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& upstream);
};

using Layer = std::variant<Conv2dLayer, BatchNormLayer, LifLayer, AvgPoolLayer, FlattenLayer, LinearLayer>;

enum class ParamKind { Weight, Bias, Gamma, Beta };

struct ParamRef {
  std::string name;
  Tensor* value;
  Tensor* grad;
  ParamKind kind;
  std::size_t layer;
};

class Network {
 public:
  Network() = default;
  Network(NetworkSpec spec, LIFParams lif);

  /// Kaiming-normal weights (std = sqrt(2 / fan_in)) drawn in layer order; zero
  /// biases; gamma = 1, beta = 0.
  void initialize(Rng& rng);

  const NetworkSpec& spec() const { return spec_; }
  const LIFParams& lif_params() const { return lif_; }
  std::size_t timesteps() const { return spec_.timesteps; }

  /// input [N, C, H, W] -> logits [N, classes]. The input is injected as the
  /// same current at every timestep.
  Tensor forward(const Tensor& input, Mode mode);
  /// Accumulates nothing: parameter gradients are overwritten.
  void backward(const Tensor& logits_grad);

  void set_relaxed_mode(bool on);
  bool relaxed_mode() const { return relaxed_; }

  /// States of every LIF layer from the last forward pass, in layer order.
  std::vector<const LIFLayerState*> lif_states() const;
  /// Layer indices of the LIF layers, matching lif_states().
  std::vector<std::size_t> lif_layers() const;
  std::vector<std::size_t> batchnorm_layers() const;
  /// Time mean of the head input from the last forward pass, [N, features].
  const Tensor& features() const { return features_; }

  std::vector<ParamRef> parameters();
  /// Conv and Linear weights, in layer order.
  std::vector<ParamRef> prunable_weights();

  std::vector<Layer>& layers() { return layers_; }
  const std::vector<Layer>& layers() const { return layers_; }

  template <typename T>
  T& layer_as(std::size_t i) {
    return std::get<T>(layers_.at(i));
  }
  template <typename T>
  const T& layer_as(std::size_t i) const {
    return std::get<T>(layers_.at(i));
  }

  /// Writes spec, LIF constants, parameters and BN statistics under `prefix`.
  void save(Checkpoint& ckpt, const std::string& prefix = "net/") const;
  static Network load(const Checkpoint& ckpt, const std::string& prefix = "net/");

 private:
  NetworkSpec spec_;
  LIFParams lif_;
  std::vector<Layer> layers_;
  Tensor features_;
  bool relaxed_ = false;
  bool have_forward_ = false;
  std::size_t batch_ = 0;
};

}  // namespace snnprune
