#include "snnprune/prune_structured.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"

#include "snnprune/prune_unstructured.hpp"

namespace snnprune {

// ---------------------------------------------------------------------------
// ChannelPlan

ChannelPlan ChannelPlan::full(const std::vector<std::size_t>& widths) {
  ChannelPlan p;
  p.widths = widths;
  for (std::size_t w : widths) {
    std::vector<std::size_t> all(w);
    for (std::size_t c = 0; c < w; ++c) all[c] = c;
    p.kept.push_back(std::move(all));
  }
  return p;
}

void ChannelPlan::validate() const {
  if (kept.size() != widths.size()) throw DimensionError("channel plan: layer count mismatch");
  for (std::size_t l = 0; l < kept.size(); ++l) {
    if (kept[l].empty()) throw ArgumentError("channel plan: layer " + std::to_string(l) + " keeps nothing");
    for (std::size_t i = 0; i < kept[l].size(); ++i) {
      if (kept[l][i] >= widths[l] || (i > 0 && kept[l][i] <= kept[l][i - 1])) {
        throw ArgumentError("channel plan: layer " + std::to_string(l) +
                            " indices must be strictly increasing and below the width");
      }
    }
  }
}

std::size_t ChannelPlan::total() const {
  std::size_t n = 0;
  for (std::size_t w : widths) n += w;
  return n;
}

std::size_t ChannelPlan::kept_total() const {
  std::size_t n = 0;
  for (const auto& k : kept) n += k.size();
  return n;
}

bool ChannelPlan::keeps(const ChannelRef& c) const {
  const auto& k = kept.at(c.layer);
  return std::binary_search(k.begin(), k.end(), c.channel);
}

std::string ChannelPlan::to_string() const {
  std::ostringstream os;
  for (std::size_t l = 0; l < kept.size(); ++l) {
    if (l) os << ";";
    os << widths[l] << ":";
    for (std::size_t i = 0; i < kept[l].size(); ++i) os << (i ? "," : "") << kept[l][i];
  }
  return os.str();
}

ChannelPlan ChannelPlan::parse(const std::string& text) {
  ChannelPlan p;
  std::istringstream layers(text);
  std::string item;
  while (std::getline(layers, item, ';')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ArgumentError("channel plan: bad item '" + item + "'");
    p.widths.push_back(std::stoul(item.substr(0, colon)));
    std::vector<std::size_t> k;
    std::istringstream idx(item.substr(colon + 1));
    std::string tok;
    while (std::getline(idx, tok, ',')) k.push_back(std::stoul(tok));
    p.kept.push_back(std::move(k));
  }
  p.validate();
  return p;
}

std::vector<std::size_t> batchnorm_widths(const Network& net) {
  std::vector<std::size_t> out;
  for (std::size_t i : net.batchnorm_layers()) out.push_back(net.layer_as<BatchNormLayer>(i).channels);
  return out;
}

std::vector<Tensor> batchnorm_gammas(const Network& net) {
  std::vector<Tensor> out;
  for (std::size_t i : net.batchnorm_layers()) out.push_back(net.layer_as<BatchNormLayer>(i).gamma);
  return out;
}

// ---------------------------------------------------------------------------
// Selection

std::vector<ChannelRef> rank_channels(const std::vector<Tensor>& gammas) {
  std::vector<ChannelRef> all;
  for (std::size_t l = 0; l < gammas.size(); ++l)
    for (std::size_t c = 0; c < gammas[l].size(); ++c) all.push_back({l, c});
  std::stable_sort(all.begin(), all.end(), [&](const ChannelRef& a, const ChannelRef& b) {
    return std::abs(gammas[a.layer][a.channel]) < std::abs(gammas[b.layer][b.channel]);
  });
  return all;
}

ChannelSelection prune_and_regenerate_channels(const std::vector<Tensor>& gammas, double percent,
                                               double regen_ratio,
                                               const std::vector<std::vector<double>>& channel_scores) {
  if (!(percent >= 0 && percent < 1)) throw ArgumentError("percent must be in [0, 1)");
  if (!(regen_ratio >= 0 && regen_ratio < 1)) throw ArgumentError("r must be in [0, 1)");
  if (channel_scores.size() != gammas.size()) throw DimensionError("channel scores do not match layers");
  ChannelSelection sel;
  sel.percent = percent;
  sel.extended_percent = extend_sparsity(percent, regen_ratio);
  if (sel.extended_percent >= 1) throw ArgumentError("extended percent reaches 1");

  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (std::size_t l = 0; l < gammas.size(); ++l) {
    if (channel_scores[l].size() != gammas[l].size()) {
      throw DimensionError("channel scores for layer " + std::to_string(l) + " have wrong width");
    }
    widths.push_back(gammas[l].size());
    total += gammas[l].size();
  }
  const std::size_t keep_ext = survivor_target(sel.extended_percent, total);
  const std::size_t keep = survivor_target(percent, total);
  const auto ranking = rank_channels(gammas);
  sel.pruned.assign(ranking.begin(), ranking.begin() + std::ptrdiff_t(total - keep_ext));

  std::vector<ChannelRef> candidates = sel.pruned;
  auto absg = [&](const ChannelRef& c) { return std::abs(gammas[c.layer][c.channel]); };
  auto score = [&](const ChannelRef& c) { return channel_scores[c.layer][c.channel]; };
  std::stable_sort(candidates.begin(), candidates.end(), [&](const ChannelRef& a, const ChannelRef& b) {
    if (score(a) != score(b)) return score(a) > score(b);
    if (absg(a) != absg(b)) return absg(a) > absg(b);
    return a < b;
  });
  const std::size_t k = keep - keep_ext;
  sel.regenerated.assign(candidates.begin(), candidates.begin() + std::ptrdiff_t(k));

  std::vector<std::vector<char>> alive;
  for (std::size_t w : widths) alive.emplace_back(w, 1);
  for (const auto& c : sel.pruned) alive[c.layer][c.channel] = 0;
  for (const auto& c : sel.regenerated) alive[c.layer][c.channel] = 1;

  sel.plan.widths = widths;
  for (std::size_t l = 0; l < widths.size(); ++l) {
    std::vector<std::size_t> kept;
    for (std::size_t c = 0; c < widths[l]; ++c)
      if (alive[l][c]) kept.push_back(c);
    if (kept.empty() && widths[l] > 0) {
      std::size_t best = 0;
      for (std::size_t c = 1; c < widths[l]; ++c)
        if (std::abs(gammas[l][c]) > std::abs(gammas[l][best])) best = c;
      kept.push_back(best);
      sel.force_kept.push_back({l, best});
    }
    sel.plan.kept.push_back(std::move(kept));
  }
  return sel;
}

std::vector<std::vector<double>> channel_scores(const Network& net, const CriticalityTable& table) {
  const auto& scores = table.scores();
  const auto lifs = net.lif_layers();
  std::vector<std::vector<double>> out;
  for (std::size_t bn : net.batchnorm_layers()) {
    const auto it = std::find(lifs.begin(), lifs.end(), bn + 1);
    if (it == lifs.end()) throw StateError("batchnorm layer without a following LIF");
    out.push_back(scores.at(std::size_t(it - lifs.begin())));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Slimming

namespace {

void check_plan(const NetworkSpec& spec, const ChannelPlan& plan) {
  plan.validate();
  std::size_t b = 0;
  for (const auto& l : spec.layers) {
    if (const auto* bn = std::get_if<BatchNormSpec>(&l)) {
      if (b >= plan.widths.size() || plan.widths[b] != bn->channels) {
        throw DimensionError("channel plan does not match network at batchnorm " + std::to_string(b));
      }
      ++b;
    }
  }
  if (b != plan.widths.size()) throw DimensionError("channel plan has extra layers");
}

}  // namespace

NetworkSpec slim_spec(const NetworkSpec& spec, const ChannelPlan& plan) {
  check_plan(spec, plan);
  NetworkSpec out = spec;
  std::size_t b = 0;           // next conv's BN ordinal
  bool filtered = false;       // current activation has had channels removed
  std::size_t last_kept = 0, last_width = 0;
  for (std::size_t i = 0; i < out.layers.size(); ++i) {
    auto& l = out.layers[i];
    if (auto* c = std::get_if<ConvSpec>(&l)) {
      if (filtered) c->in_channels = last_kept;
      c->out_channels = plan.kept[b].size();
    } else if (auto* bn = std::get_if<BatchNormSpec>(&l)) {
      bn->channels = plan.kept[b].size();
      last_kept = plan.kept[b].size();
      last_width = plan.widths[b];
      filtered = true;
      ++b;
    } else if (auto* lin = std::get_if<LinearSpec>(&l)) {
      if (filtered) {
        lin->in_features = lin->in_features / last_width * last_kept;
        filtered = false;
      }
    }
  }
  out.validate();
  return out;
}

Network slim(const Network& net, const ChannelPlan& plan) {
  Network out(slim_spec(net.spec(), plan), net.lif_params());
  const auto& src = net.layers();
  auto& dst = out.layers();
  std::size_t b = 0;
  const std::vector<std::size_t>* in_kept = nullptr;  // channel filter on the current activation
  std::size_t in_width = 0;
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (const auto* c = std::get_if<Conv2dLayer>(&src[i])) {
      auto& d = std::get<Conv2dLayer>(dst[i]);
      const auto& outs = plan.kept[b];
      const std::size_t kk = c->spec.kernel * c->spec.kernel;
      const std::size_t cin = c->spec.in_channels;
      for (std::size_t o = 0; o < outs.size(); ++o) {
        for (std::size_t ii = 0; ii < d.spec.in_channels; ++ii) {
          const std::size_t si = in_kept ? (*in_kept)[ii] : ii;
          std::copy_n(c->weight.data() + (outs[o] * cin + si) * kk, kk,
                      d.weight.data() + (o * d.spec.in_channels + ii) * kk);
        }
      }
    } else if (const auto* bn = std::get_if<BatchNormLayer>(&src[i])) {
      auto& d = std::get<BatchNormLayer>(dst[i]);
      const auto& keep = plan.kept[b];
      for (std::size_t j = 0; j < keep.size(); ++j) {
        d.gamma[j] = bn->gamma[keep[j]];
        d.beta[j] = bn->beta[keep[j]];
        d.running_mean[j] = bn->running_mean[keep[j]];
        d.running_var[j] = bn->running_var[keep[j]];
      }
      d.eps = bn->eps;
      d.momentum = bn->momentum;
      in_kept = &plan.kept[b];
      in_width = plan.widths[b];
      ++b;
    } else if (const auto* lin = std::get_if<LinearLayer>(&src[i])) {
      auto& d = std::get<LinearLayer>(dst[i]);
      d.bias = lin->bias;
      if (in_kept) {
        const std::size_t plane = lin->spec.in_features / in_width;
        const std::size_t din = d.spec.in_features;
        for (std::size_t o = 0; o < lin->spec.out_features; ++o)
          for (std::size_t j = 0; j < in_kept->size(); ++j)
            std::copy_n(lin->weight.data() + o * lin->spec.in_features + (*in_kept)[j] * plane, plane,
                        d.weight.data() + o * din + j * plane);
        in_kept = nullptr;
      } else {
        d.weight = lin->weight;
      }
    }
  }
  return out;
}

Network mask_channels(const Network& net, const ChannelPlan& plan) {
  check_plan(net.spec(), plan);
  Network out = net;
  std::size_t b = 0;
  for (std::size_t i : out.batchnorm_layers()) {
    auto& bn = out.layer_as<BatchNormLayer>(i);
    for (std::size_t c = 0; c < bn.channels; ++c) {
      if (!plan.keeps({b, c})) {
        bn.gamma[c] = 0.0;
        bn.beta[c] = 0.0;
      }
    }
    ++b;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Flops

std::vector<double> layer_macs(const NetworkSpec& spec) {
  const auto shapes = spec.activation_shapes();
  std::vector<double> out(spec.layers.size(), 0.0);
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    if (const auto* c = std::get_if<ConvSpec>(&spec.layers[i])) {
      out[i] = double(c->out_channels) * double(c->in_channels) * double(c->kernel * c->kernel) *
               double(shapes[i][1] * shapes[i][2]);
    } else if (const auto* l = std::get_if<LinearSpec>(&spec.layers[i])) {
      out[i] = double(l->in_features) * double(l->out_features);
    }
  }
  return out;
}

FlopsReport count_flops(const NetworkSpec& dense, const NetworkSpec& slimmed) {
  if (dense.layers.size() != slimmed.layers.size()) throw DimensionError("count_flops: layer count differs");
  const auto d = layer_macs(dense);
  const auto s = layer_macs(slimmed);
  FlopsReport r;
  for (std::size_t i = 0; i < dense.layers.size(); ++i) {
    const bool conv = std::holds_alternative<ConvSpec>(dense.layers[i]);
    if (!conv && !std::holds_alternative<LinearSpec>(dense.layers[i])) continue;
    r.layers.push_back({i, conv ? "conv" : "linear", d[i], s[i]});
    r.dense_total += d[i];
    r.slim_total += s[i];
  }
  r.reduction = r.dense_total > 0 ? 1.0 - r.slim_total / r.dense_total : 0.0;
  return r;
}

FlopsReport count_flops(const NetworkSpec& dense, const ChannelPlan& plan) {
  return count_flops(dense, slim_spec(dense, plan));
}

std::string FlopsReport::to_json() const {
  nlohmann::ordered_json j;
  j["layers"] = nlohmann::ordered_json::array();
  for (const auto& l : layers) {
    j["layers"].push_back({{"layer", l.layer}, {"kind", l.kind}, {"dense_macs", l.dense}, {"slim_macs", l.slim}});
  }
  j["dense_total"] = dense_total;
  j["slim_total"] = slim_total;
  j["reduction"] = reduction;
  return j.dump(2) + "\n";
}

}  // namespace snnprune
