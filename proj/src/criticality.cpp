#include "snnprune/criticality.hpp"

#include <algorithm>
#include <sstream>

#include "snnprune/checkpoint.hpp"

namespace snnprune {

BatchScores score_batch(std::span<const LIFLayerState* const> states, Aggregation aggregation) {
  BatchScores out;
  if (states.empty()) throw StateError("score_batch: no LIF states");
  for (const LIFLayerState* st : states) {
    if (!st || st->empty()) throw StateError("score_batch: empty LIF state");
    const Shape& shape = st->gprime_trace.front().shape();
    const std::size_t n = shape.at(0);
    const std::size_t units = shape.size() == 4 ? shape[1] : numel(shape) / std::max<std::size_t>(n, 1);
    const std::size_t plane = shape.size() == 4 ? shape[2] * shape[3] : 1;
    const std::size_t T = st->timesteps();
    if (out.samples == 0) out.samples = n;
    if (n != out.samples) throw DimensionError("score_batch: inconsistent batch sizes");

    // Time mean per element.
    Tensor mean_t(shape);
    for (const Tensor& g : st->gprime_trace) mean_t.vec() += g.vec();
    mean_t.vec() /= double(T);

    std::vector<double> sum(units, 0.0);
    for (std::size_t s = 0; s < n; ++s) {
      for (std::size_t u = 0; u < units; ++u) {
        const double* p = mean_t.data() + (s * units + u) * plane;
        double agg = p[0];
        if (aggregation == Aggregation::Max) {
          for (std::size_t i = 1; i < plane; ++i) agg = std::max(agg, p[i]);
        } else {
          for (std::size_t i = 1; i < plane; ++i) agg += p[i];
          agg /= double(plane);
        }
        sum[u] += agg;
      }
    }
    std::vector<double> mean(units);
    for (std::size_t u = 0; u < units; ++u) mean[u] = n ? sum[u] / double(n) : 0.0;
    out.sum.push_back(std::move(sum));
    out.mean.push_back(std::move(mean));
  }
  return out;
}

CriticalityTable::CriticalityTable(std::vector<std::size_t> units_per_layer) {
  for (std::size_t u : units_per_layer) sums_.emplace_back(u, 0.0);
}

void CriticalityTable::accumulate(const BatchScores& batch) {
  if (batch.sum.size() != sums_.size()) throw DimensionError("accumulate: layer count mismatch");
  for (std::size_t l = 0; l < sums_.size(); ++l) {
    if (batch.sum[l].size() != sums_[l].size()) {
      throw DimensionError("accumulate: unit count mismatch in layer " + std::to_string(l));
    }
    for (std::size_t u = 0; u < sums_[l].size(); ++u) sums_[l][u] += batch.sum[l][u];
  }
  count_ += batch.samples;
  finalized_ = false;
}

void CriticalityTable::merge(const CriticalityTable& other) {
  if (other.sums_.size() != sums_.size()) throw DimensionError("merge: layer count mismatch");
  for (std::size_t l = 0; l < sums_.size(); ++l) {
    if (other.sums_[l].size() != sums_[l].size()) throw DimensionError("merge: unit count mismatch");
    for (std::size_t u = 0; u < sums_[l].size(); ++u) sums_[l][u] += other.sums_[l][u];
  }
  count_ += other.count_;
  finalized_ = false;
}

const std::vector<std::vector<double>>& CriticalityTable::finalize() {
  if (count_ == 0) throw StateError("finalize: no samples accumulated");
  scores_ = sums_;
  for (auto& layer : scores_)
    for (double& v : layer) v /= double(count_);
  finalized_ = true;
  return scores_;
}

const std::vector<std::vector<double>>& CriticalityTable::scores() const {
  if (!finalized_) throw StateError("criticality table not finalized");
  return scores_;
}

std::string CriticalityTable::to_csv() const {
  std::ostringstream os;
  os << "layer,unit,score\n";
  const auto& s = scores();
  for (std::size_t l = 0; l < s.size(); ++l)
    for (std::size_t u = 0; u < s[l].size(); ++u) os << l << "," << u << "," << format_double(s[l][u]) << "\n";
  return os.str();
}

std::vector<std::size_t> lif_unit_counts(const Network& net) {
  const auto shapes = net.spec().activation_shapes();
  std::vector<std::size_t> out;
  for (std::size_t i : net.lif_layers()) out.push_back(shapes[i].size() == 3 ? shapes[i][0] : numel(shapes[i]));
  return out;
}

Tensor connection_scores(const Network& net, const CriticalityTable& table, std::size_t layer) {
  const auto& scores = table.scores();
  const auto lifs = net.lif_layers();
  auto ordinal_of = [&](std::size_t lif_layer) {
    return std::size_t(std::find(lifs.begin(), lifs.end(), lif_layer) - lifs.begin());
  };
  const auto& layers = net.layers();
  if (layer >= layers.size()) throw ArgumentError("connection_scores: no layer " + std::to_string(layer));
  if (scores.size() != lifs.size()) throw DimensionError("connection_scores: table does not match network");

  if (const auto* c = std::get_if<Conv2dLayer>(&layers[layer])) {
    const auto& unit = scores[ordinal_of(layer + 2)];
    Tensor out(c->weight.shape());
    const std::size_t per_out = out.size() / c->spec.out_channels;
    for (std::size_t o = 0; o < c->spec.out_channels; ++o)
      std::fill_n(out.data() + o * per_out, per_out, unit.at(o));
    return out;
  }
  const auto* l = std::get_if<LinearLayer>(&layers[layer]);
  if (!l) throw ArgumentError("connection_scores: layer " + std::to_string(layer) + " has no weights");
  Tensor out(l->weight.shape());
  const std::size_t in = l->spec.in_features, outs = l->spec.out_features;
  if (layer + 1 < layers.size()) {
    const auto& unit = scores[ordinal_of(layer + 1)];
    for (std::size_t o = 0; o < outs; ++o) std::fill_n(out.data() + o * in, in, unit.at(o));
    return out;
  }
  // Head: pre-synaptic unit. Features are flattened channel-major, so feature f
  // belongs to unit f / (in / units).
  std::size_t pre = layers.size();
  for (std::size_t i : lifs)
    if (i < layer) pre = i;
  if (pre == layers.size()) return out;
  const auto& unit = scores[ordinal_of(pre)];
  const std::size_t per_unit = in / unit.size();
  for (std::size_t o = 0; o < outs; ++o)
    for (std::size_t f = 0; f < in; ++f) out[o * in + f] = unit[f / per_unit];
  return out;
}

std::vector<Tensor> connection_scores(const Network& net, const CriticalityTable& table) {
  std::vector<Tensor> out;
  const auto& layers = net.layers();
  for (std::size_t i = 0; i < layers.size(); ++i)
    if (std::holds_alternative<Conv2dLayer>(layers[i]) || std::holds_alternative<LinearLayer>(layers[i]))
      out.push_back(connection_scores(net, table, i));
  return out;
}

}  // namespace snnprune
