#include "snnprune/network.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace snnprune {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::vector<std::size_t> parse_numbers(std::string_view text, char sep, std::string_view what) {
  std::vector<std::size_t> out;
  while (!text.empty()) {
    const auto pos = text.find(sep);
    const std::string_view tok = text.substr(0, pos);
    std::size_t v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size()) {
      throw ArgumentError("network spec: bad number '" + std::string(tok) + "' in " +
                          std::string(what));
    }
    out.push_back(v);
    if (pos == std::string_view::npos) break;
    text.remove_prefix(pos + 1);
  }
  return out;
}

std::vector<std::size_t> expect_count(std::vector<std::size_t> v, std::size_t n,
                                      std::string_view what) {
  if (v.size() != n) {
    throw ArgumentError("network spec: " + std::string(what) + " needs " + std::to_string(n) +
                        " numbers");
  }
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------
// NetworkSpec

std::vector<Shape> NetworkSpec::activation_shapes() const {
  std::vector<Shape> shapes;
  Shape cur = input.per_sample();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const std::string where = "layer " + std::to_string(i) + ": ";
    cur = std::visit(
        overloaded{
            [&](const ConvSpec& c) -> Shape {
              if (cur.size() != 3 || cur[0] != c.in_channels) {
                throw DimensionError(where + "conv expects " + std::to_string(c.in_channels) +
                                     " channels, got " + shape_string(cur));
              }
              return {c.out_channels, conv_output_extent(cur[1], c.kernel, c.stride, c.padding),
                      conv_output_extent(cur[2], c.kernel, c.stride, c.padding)};
            },
            [&](const BatchNormSpec& b) -> Shape {
              if (cur.size() != 3 || cur[0] != b.channels) {
                throw DimensionError(where + "batchnorm width " + std::to_string(b.channels) +
                                     " vs " + shape_string(cur));
              }
              return cur;
            },
            [&](const LifSpec&) -> Shape { return cur; },
            [&](const AvgPoolSpec& p) -> Shape {
              if (cur.size() != 3) throw DimensionError(where + "pool needs an image activation");
              PoolGeometry geo{p.window, p.stride};
              return {cur[0], pool_output_extent(cur[1], geo), pool_output_extent(cur[2], geo)};
            },
            [&](const FlattenSpec&) -> Shape { return {numel(cur)}; },
            [&](const LinearSpec& l) -> Shape {
              if (cur.size() != 1 || cur[0] != l.in_features) {
                throw DimensionError(where + "linear expects " + std::to_string(l.in_features) +
                                     " features, got " + shape_string(cur));
              }
              return {l.out_features};
            },
        },
        layers[i]);
    shapes.push_back(cur);
  }
  return shapes;
}

void NetworkSpec::validate() const {
  if (timesteps == 0) throw ArgumentError("network spec: timesteps must be >= 1");
  if (layers.empty() || !std::holds_alternative<LinearSpec>(layers.back())) {
    throw ArgumentError("network spec: last layer must be a linear head");
  }
  activation_shapes();
  for (std::size_t i = 0; i + 1 < layers.size(); ++i) {
    if (std::holds_alternative<ConvSpec>(layers[i])) {
      if (i + 2 >= layers.size() || !std::holds_alternative<BatchNormSpec>(layers[i + 1]) ||
          !std::holds_alternative<LifSpec>(layers[i + 2])) {
        throw ArgumentError("network spec: conv at layer " + std::to_string(i) +
                            " must be followed by batchnorm and lif");
      }
    }
    if (std::holds_alternative<LinearSpec>(layers[i]) &&
        !std::holds_alternative<LifSpec>(layers[i + 1])) {
      throw ArgumentError("network spec: hidden linear at layer " + std::to_string(i) +
                          " must be followed by lif");
    }
    if (std::holds_alternative<BatchNormSpec>(layers[i]) &&
        (i == 0 || !std::holds_alternative<ConvSpec>(layers[i - 1]))) {
      throw ArgumentError("network spec: batchnorm at layer " + std::to_string(i) +
                          " must follow a conv");
    }
    if (std::holds_alternative<LifSpec>(layers[i])) {
      const bool after_weighted = i > 0 && (std::holds_alternative<BatchNormSpec>(layers[i - 1]) ||
                                            std::holds_alternative<LinearSpec>(layers[i - 1]));
      if (!after_weighted) {
        throw ArgumentError("network spec: lif at layer " + std::to_string(i) +
                            " must follow a weighted layer");
      }
    }
  }
}

std::size_t NetworkSpec::classes() const {
  if (layers.empty() || !std::holds_alternative<LinearSpec>(layers.back())) {
    throw ArgumentError("network spec: missing linear head");
  }
  return std::get<LinearSpec>(layers.back()).out_features;
}

std::string NetworkSpec::to_string() const {
  std::ostringstream os;
  os << "input=" << input.channels << "x" << input.height << "x" << input.width
     << ";T=" << timesteps;
  for (const auto& l : layers) {
    os << ";";
    std::visit(overloaded{
                   [&](const ConvSpec& c) {
                     os << "conv=" << c.in_channels << "," << c.out_channels << "," << c.kernel
                        << "," << c.stride << "," << c.padding;
                   },
                   [&](const BatchNormSpec& b) { os << "bn=" << b.channels; },
                   [&](const LifSpec&) { os << "lif"; },
                   [&](const AvgPoolSpec& p) { os << "pool=" << p.window << "," << p.stride; },
                   [&](const FlattenSpec&) { os << "flatten"; },
                   [&](const LinearSpec& l) { os << "linear=" << l.in_features << "," << l.out_features; },
               },
               l);
  }
  return os.str();
}

NetworkSpec NetworkSpec::parse(std::string_view text) {
  NetworkSpec spec;
  spec.layers.clear();
  bool have_input = false;
  while (!text.empty()) {
    const auto pos = text.find(';');
    const std::string_view item = text.substr(0, pos);
    const auto eq = item.find('=');
    const std::string_view key = item.substr(0, eq);
    const std::string_view arg = eq == std::string_view::npos ? std::string_view{} : item.substr(eq + 1);
    if (key == "input") {
      auto v = expect_count(parse_numbers(arg, 'x', key), 3, key);
      spec.input = {v[0], v[1], v[2]};
      have_input = true;
    } else if (key == "T") {
      spec.timesteps = expect_count(parse_numbers(arg, ',', key), 1, key)[0];
    } else if (key == "conv") {
      auto v = expect_count(parse_numbers(arg, ',', key), 5, key);
      spec.layers.push_back(ConvSpec{v[0], v[1], v[2], v[3], v[4]});
    } else if (key == "bn") {
      spec.layers.push_back(BatchNormSpec{expect_count(parse_numbers(arg, ',', key), 1, key)[0]});
    } else if (key == "lif") {
      spec.layers.push_back(LifSpec{});
    } else if (key == "pool") {
      auto v = expect_count(parse_numbers(arg, ',', key), 2, key);
      spec.layers.push_back(AvgPoolSpec{v[0], v[1]});
    } else if (key == "flatten") {
      spec.layers.push_back(FlattenSpec{});
    } else if (key == "linear") {
      auto v = expect_count(parse_numbers(arg, ',', key), 2, key);
      spec.layers.push_back(LinearSpec{v[0], v[1]});
    } else {
      throw ArgumentError("network spec: unknown item '" + std::string(item) + "'");
    }
    if (pos == std::string_view::npos) break;
    text.remove_prefix(pos + 1);
  }
  if (!have_input) throw ArgumentError("network spec: missing input geometry");
  spec.validate();
  return spec;
}

NetworkSpec vgg_mini(InputGeometry input, const std::vector<std::size_t>& widths,
                     std::size_t classes, std::size_t timesteps) {
  NetworkSpec spec{input, {}, timesteps};
  std::size_t channels = input.channels;
  std::size_t h = input.height, w = input.width;
  for (std::size_t width : widths) {
    spec.layers.push_back(ConvSpec{channels, width, 3, 1, 1});
    spec.layers.push_back(BatchNormSpec{width});
    spec.layers.push_back(LifSpec{});
    spec.layers.push_back(AvgPoolSpec{2, 2});
    channels = width;
    h /= 2;
    w /= 2;
  }
  spec.layers.push_back(FlattenSpec{});
  spec.layers.push_back(LinearSpec{channels * h * w, classes});
  spec.validate();
  return spec;
}

NetworkSpec spiking_mlp(InputGeometry input, const std::vector<std::size_t>& hidden,
                        std::size_t classes, std::size_t timesteps) {
  NetworkSpec spec{input, {FlattenSpec{}}, timesteps};
  std::size_t features = numel(input.per_sample());
  for (std::size_t width : hidden) {
    spec.layers.push_back(LinearSpec{features, width});
    spec.layers.push_back(LifSpec{});
    features = width;
  }
  spec.layers.push_back(LinearSpec{features, classes});
  spec.validate();
  return spec;
}

// ---------------------------------------------------------------------------
// Layers

Tensor Conv2dLayer::forward(const Tensor& x) {
  cached_input = x;
  cached = true;
  return conv2d(x, weight, geometry());
}

Tensor Conv2dLayer::backward(const Tensor& upstream) {
  if (!cached) throw StateError("conv2d backward without forward");
  auto g = conv2d_grad(upstream, cached_input, weight, geometry());
  grad_weight = std::move(g.grad_weight);
  return std::move(g.grad_input);
}

BatchNormLayer::BatchNormLayer(std::size_t c)
    : channels(c),
      gamma({c}, 1.0),
      beta({c}, 0.0),
      running_mean({c}, 0.0),
      running_var({c}, 1.0),
      grad_gamma({c}),
      grad_beta({c}) {}

Tensor BatchNormLayer::forward(const Tensor& x, Mode mode) {
  const Shape4 s = x.shape4();
  if (s.channels != channels) {
    throw DimensionError("batchnorm: " + std::to_string(s.channels) + " channels, layer has " +
                         std::to_string(channels));
  }
  const std::size_t plane = s.plane();
  const double count = double(s.batch * plane);
  Tensor y(x.shape());
  cached_xhat = Tensor(x.shape());
  cached_inv_std.assign(channels, 0.0);
  for (std::size_t c = 0; c < channels; ++c) {
    double mean, var;
    if (mode == Mode::Train) {
      double sum = 0.0;
      for (std::size_t n = 0; n < s.batch; ++n) {
        const double* p = x.data() + (n * channels + c) * plane;
        for (std::size_t i = 0; i < plane; ++i) sum += p[i];
      }
      mean = count > 0 ? sum / count : 0.0;
      double sq = 0.0;
      for (std::size_t n = 0; n < s.batch; ++n) {
        const double* p = x.data() + (n * channels + c) * plane;
        for (std::size_t i = 0; i < plane; ++i) sq += (p[i] - mean) * (p[i] - mean);
      }
      var = count > 0 ? sq / count : 0.0;
      running_mean[c] = (1.0 - momentum) * running_mean[c] + momentum * mean;
      const double unbiased = count > 1 ? sq / (count - 1) : var;
      running_var[c] = (1.0 - momentum) * running_var[c] + momentum * unbiased;
    } else {
      mean = running_mean[c];
      var = running_var[c];
    }
    const double inv_std = 1.0 / std::sqrt(var + eps);
    cached_inv_std[c] = inv_std;
    for (std::size_t n = 0; n < s.batch; ++n) {
      const std::size_t off = (n * channels + c) * plane;
      for (std::size_t i = 0; i < plane; ++i) {
        const double xh = (x[off + i] - mean) * inv_std;
        cached_xhat[off + i] = xh;
        y[off + i] = gamma[c] * xh + beta[c];
      }
    }
  }
  cached_mode = mode;
  cached = true;
  return y;
}

Tensor BatchNormLayer::backward(const Tensor& upstream) {
  if (!cached) throw StateError("batchnorm backward without forward");
  if (upstream.shape() != cached_xhat.shape()) {
    throw DimensionError("batchnorm backward: upstream " + shape_string(upstream.shape()));
  }
  const Shape4 s = upstream.shape4();
  const std::size_t plane = s.plane();
  const double count = double(s.batch * plane);
  Tensor dx(upstream.shape());
  for (std::size_t c = 0; c < channels; ++c) {
    double sum_dy = 0.0, sum_dy_xhat = 0.0;
    for (std::size_t n = 0; n < s.batch; ++n) {
      const std::size_t off = (n * channels + c) * plane;
      for (std::size_t i = 0; i < plane; ++i) {
        sum_dy += upstream[off + i];
        sum_dy_xhat += upstream[off + i] * cached_xhat[off + i];
      }
    }
    grad_beta[c] = sum_dy;
    grad_gamma[c] = sum_dy_xhat;
    const double scale = gamma[c] * cached_inv_std[c];
    for (std::size_t n = 0; n < s.batch; ++n) {
      const std::size_t off = (n * channels + c) * plane;
      for (std::size_t i = 0; i < plane; ++i) {
        if (cached_mode == Mode::Train) {
          dx[off + i] = scale * (upstream[off + i] - sum_dy / count -
                                 cached_xhat[off + i] * sum_dy_xhat / count);
        } else {
          dx[off + i] = scale * upstream[off + i];
        }
      }
    }
  }
  return dx;
}

Tensor LifLayer::forward(const Tensor& x) {
  if (x.rank() == 0 || x.dim(0) % timesteps != 0) {
    throw DimensionError("lif: folded batch not divisible by timesteps");
  }
  const std::size_t block = x.size() / timesteps;
  Shape step_shape = x.shape();
  step_shape[0] /= timesteps;
  state.clear();
  Tensor out(x.shape());
  Tensor prev_u(step_shape, params.v_reset);
  Tensor input(step_shape);
  for (std::size_t t = 0; t < timesteps; ++t) {
    std::copy_n(x.data() + t * block, block, input.data());
    LifStep st = lif_step(input, prev_u, params, relaxed);
    std::copy_n(st.s.data(), block, out.data() + t * block);
    prev_u = st.u;
    state.h.push_back(std::move(st.h));
    state.u.push_back(std::move(st.u));
    state.s.push_back(std::move(st.s));
    state.gprime_trace.push_back(std::move(st.gprime));
  }
  return out;
}

Tensor LifLayer::backward(const Tensor& upstream) {
  if (state.empty()) throw StateError("lif backward without forward");
  const std::size_t block = upstream.size() / timesteps;
  if (state.h.front().size() != block || upstream.dim(0) % timesteps != 0) {
    throw DimensionError("lif backward: upstream " + shape_string(upstream.shape()));
  }
  const double inv_tau = 1.0 / params.tau;
  Tensor dx(upstream.shape());
  std::vector<double> grad_u(block, 0.0);
  for (std::size_t t = timesteps; t-- > 0;) {
    const Tensor& h = state.h[t];
    const Tensor& s = state.s[t];
    const Tensor& gp = state.gprime_trace[t];
    const double* gs = upstream.data() + t * block;
    double* gx = dx.data() + t * block;
    for (std::size_t i = 0; i < block; ++i) {
      double du_dh = 1.0 - s[i];
      if (relaxed) du_dh += (params.v_reset - h[i]) * gp[i];
      const double gh = gs[i] * gp[i] + grad_u[i] * du_dh;
      gx[i] = gh * inv_tau;
      grad_u[i] = gh * (1.0 - inv_tau);
    }
  }
  return dx;
}

Tensor AvgPoolLayer::forward(const Tensor& x) {
  cached_shape = x.shape();
  return avgpool2d(x, geo);
}

Tensor AvgPoolLayer::backward(const Tensor& upstream) {
  if (cached_shape.empty()) throw StateError("avgpool backward without forward");
  return avgpool2d_grad(upstream, cached_shape, geo);
}

Tensor FlattenLayer::forward(const Tensor& x) {
  cached_shape = x.shape();
  const std::size_t rows = x.dim(0);
  return x.reshaped({rows, rows ? x.size() / rows : 0});
}

Tensor FlattenLayer::backward(const Tensor& upstream) {
  if (cached_shape.empty()) throw StateError("flatten backward without forward");
  return upstream.reshaped(cached_shape);
}

Tensor LinearLayer::forward(const Tensor& x) {
  if (x.rank() != 2 || x.dim(1) != spec.in_features) {
    throw DimensionError("linear: input " + shape_string(x.shape()) + " for " +
                         std::to_string(spec.in_features) + " features");
  }
  cached_input = x;
  cached = true;
  Tensor y({x.dim(0), spec.out_features});
  y.matrix().noalias() = x.matrix() * weight.matrix().transpose();
  y.matrix().rowwise() += bias.vec().transpose();
  return y;
}

Tensor LinearLayer::backward(const Tensor& upstream) {
  if (!cached) throw StateError("linear backward without forward");
  grad_weight = Tensor(weight.shape());
  grad_weight.matrix().noalias() = upstream.matrix().transpose() * cached_input.matrix();
  grad_bias = Tensor(bias.shape());
  grad_bias.vec() = upstream.matrix().colwise().sum().transpose();
  Tensor dx(cached_input.shape());
  dx.matrix().noalias() = upstream.matrix() * weight.matrix();
  return dx;
}

// ---------------------------------------------------------------------------
// Network

Network::Network(NetworkSpec spec, LIFParams lif) : spec_(std::move(spec)), lif_(lif) {
  spec_.validate();
  lif_.validate();
  for (const auto& ls : spec_.layers) {
    layers_.push_back(std::visit(
        overloaded{
            [&](const ConvSpec& c) -> Layer {
              Conv2dLayer l;
              l.spec = c;
              l.weight = Tensor({c.out_channels, c.in_channels, c.kernel, c.kernel});
              l.grad_weight = Tensor(l.weight.shape());
              return l;
            },
            [&](const BatchNormSpec& b) -> Layer { return BatchNormLayer(b.channels); },
            [&](const LifSpec&) -> Layer {
              LifLayer l;
              l.params = lif_;
              l.timesteps = spec_.timesteps;
              return l;
            },
            [&](const AvgPoolSpec& p) -> Layer { return AvgPoolLayer{{p.window, p.stride}, {}}; },
            [&](const FlattenSpec&) -> Layer { return FlattenLayer{}; },
            [&](const LinearSpec& s) -> Layer {
              LinearLayer l;
              l.spec = s;
              l.weight = Tensor({s.out_features, s.in_features});
              l.bias = Tensor({s.out_features});
              l.grad_weight = Tensor(l.weight.shape());
              l.grad_bias = Tensor(l.bias.shape());
              return l;
            },
        },
        ls));
  }
}

void Network::initialize(Rng& rng) {
  for (auto& layer : layers_) {
    if (auto* c = std::get_if<Conv2dLayer>(&layer)) {
      const double std = std::sqrt(2.0 / double(c->spec.in_channels * c->spec.kernel * c->spec.kernel));
      for (double& w : c->weight.values()) w = std * rng.normal();
    } else if (auto* l = std::get_if<LinearLayer>(&layer)) {
      const double std = std::sqrt(2.0 / double(l->spec.in_features));
      for (double& w : l->weight.values()) w = std * rng.normal();
      l->bias.fill(0.0);
    } else if (auto* b = std::get_if<BatchNormLayer>(&layer)) {
      *b = BatchNormLayer(b->channels);
    }
  }
}

Tensor Network::forward(const Tensor& input, Mode mode) {
  const Shape4 s = input.shape4();
  if (Shape{s.channels, s.height, s.width} != spec_.input.per_sample()) {
    throw DimensionError("network input " + shape_string(input.shape()) + " vs spec " +
                         shape_string(spec_.input.per_sample()));
  }
  const std::size_t T = spec_.timesteps;
  const std::size_t n = s.batch;
  Tensor x({T * n, s.channels, s.height, s.width});
  for (std::size_t t = 0; t < T; ++t) std::copy_n(input.data(), input.size(), x.data() + t * input.size());

  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (i + 1 == layers_.size()) {
      const std::size_t f = x.size() / std::max<std::size_t>(T * n, 1);
      features_ = Tensor({n, f});
      for (std::size_t t = 0; t < T; ++t)
        features_.vec() += x.vec().segment(Eigen::Index(t * n * f), Eigen::Index(n * f));
      features_.vec() /= double(T);
    }
    x = std::visit(overloaded{
                       [&](BatchNormLayer& l) { return l.forward(x, mode); },
                       [&](auto& l) { return l.forward(x); },
                   },
                   layers_[i]);
  }
  const std::size_t classes = spec_.classes();
  Tensor logits({n, classes});
  for (std::size_t t = 0; t < T; ++t)
    logits.vec() += x.vec().segment(Eigen::Index(t * n * classes), Eigen::Index(n * classes));
  logits.vec() /= double(T);
  have_forward_ = true;
  batch_ = n;
  return logits;
}

void Network::backward(const Tensor& logits_grad) {
  if (!have_forward_) throw StateError("backward called before forward");
  const std::size_t classes = spec_.classes();
  if (logits_grad.shape() != Shape{batch_, classes}) {
    throw DimensionError("backward: logits gradient " + shape_string(logits_grad.shape()));
  }
  const std::size_t T = spec_.timesteps;
  Tensor g({T * batch_, classes});
  for (std::size_t t = 0; t < T; ++t)
    g.vec().segment(Eigen::Index(t * logits_grad.size()), Eigen::Index(logits_grad.size())) =
        logits_grad.vec() / double(T);
  for (std::size_t i = layers_.size(); i-- > 0;) {
    g = std::visit([&](auto& l) { return l.backward(g); }, layers_[i]);
  }
}

void Network::set_relaxed_mode(bool on) {
  relaxed_ = on;
  for (auto& layer : layers_)
    if (auto* l = std::get_if<LifLayer>(&layer)) l->relaxed = on;
}

std::vector<const LIFLayerState*> Network::lif_states() const {
  std::vector<const LIFLayerState*> out;
  for (const auto& layer : layers_)
    if (const auto* l = std::get_if<LifLayer>(&layer)) out.push_back(&l->state);
  return out;
}

std::vector<std::size_t> Network::lif_layers() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < layers_.size(); ++i)
    if (std::holds_alternative<LifLayer>(layers_[i])) out.push_back(i);
  return out;
}

std::vector<std::size_t> Network::batchnorm_layers() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < layers_.size(); ++i)
    if (std::holds_alternative<BatchNormLayer>(layers_[i])) out.push_back(i);
  return out;
}

std::vector<ParamRef> Network::parameters() {
  std::vector<ParamRef> out;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const std::string p = "layer" + std::to_string(i) + ".";
    if (auto* c = std::get_if<Conv2dLayer>(&layers_[i])) {
      out.push_back({p + "weight", &c->weight, &c->grad_weight, ParamKind::Weight, i});
    } else if (auto* b = std::get_if<BatchNormLayer>(&layers_[i])) {
      out.push_back({p + "gamma", &b->gamma, &b->grad_gamma, ParamKind::Gamma, i});
      out.push_back({p + "beta", &b->beta, &b->grad_beta, ParamKind::Beta, i});
    } else if (auto* l = std::get_if<LinearLayer>(&layers_[i])) {
      out.push_back({p + "weight", &l->weight, &l->grad_weight, ParamKind::Weight, i});
      out.push_back({p + "bias", &l->bias, &l->grad_bias, ParamKind::Bias, i});
    }
  }
  return out;
}

std::vector<ParamRef> Network::prunable_weights() {
  std::vector<ParamRef> out;
  for (auto& p : parameters())
    if (p.kind == ParamKind::Weight) out.push_back(p);
  return out;
}

void Network::save(Checkpoint& ckpt, const std::string& prefix) const {
  ckpt.metadata[prefix + "spec"] = spec_.to_string();
  ckpt.metadata[prefix + "tau"] = format_double(lif_.tau);
  ckpt.metadata[prefix + "v_threshold"] = format_double(lif_.v_threshold);
  ckpt.metadata[prefix + "v_reset"] = format_double(lif_.v_reset);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const std::string p = prefix + "layer" + std::to_string(i) + ".";
    if (const auto* c = std::get_if<Conv2dLayer>(&layers_[i])) {
      ckpt.entries[p + "weight"] = c->weight;
    } else if (const auto* b = std::get_if<BatchNormLayer>(&layers_[i])) {
      ckpt.entries[p + "gamma"] = b->gamma;
      ckpt.entries[p + "beta"] = b->beta;
      ckpt.entries[p + "running_mean"] = b->running_mean;
      ckpt.entries[p + "running_var"] = b->running_var;
    } else if (const auto* l = std::get_if<LinearLayer>(&layers_[i])) {
      ckpt.entries[p + "weight"] = l->weight;
      ckpt.entries[p + "bias"] = l->bias;
    }
  }
}

Network Network::load(const Checkpoint& ckpt, const std::string& prefix) {
  LIFParams lif{ckpt.meta_double(prefix + "tau"), ckpt.meta_double(prefix + "v_threshold"),
                ckpt.meta_double(prefix + "v_reset")};
  Network net(NetworkSpec::parse(ckpt.meta(prefix + "spec")), lif);
  auto take = [&](const std::string& name, Tensor& dst) {
    const Tensor& src = ckpt.entry(name);
    if (src.shape() != dst.shape()) {
      throw DimensionError("checkpoint entry " + name + " has shape " + shape_string(src.shape()));
    }
    dst = src;
  };
  for (std::size_t i = 0; i < net.layers_.size(); ++i) {
    const std::string p = prefix + "layer" + std::to_string(i) + ".";
    if (auto* c = std::get_if<Conv2dLayer>(&net.layers_[i])) {
      take(p + "weight", c->weight);
    } else if (auto* b = std::get_if<BatchNormLayer>(&net.layers_[i])) {
      take(p + "gamma", b->gamma);
      take(p + "beta", b->beta);
      take(p + "running_mean", b->running_mean);
      take(p + "running_var", b->running_var);
    } else if (auto* l = std::get_if<LinearLayer>(&net.layers_[i])) {
      take(p + "weight", l->weight);
      take(p + "bias", l->bias);
    }
  }
  return net;
}

}  // namespace snnprune
