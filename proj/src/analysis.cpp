#include "snnprune/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

namespace snnprune {

void FeatureBank::normalize() {
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    const double n = features.row(i).norm();
    if (n > 0) features.row(i) /= n;
  }
  normalized = true;
}

Eigen::MatrixXd FeatureBank::class_rows(int label) const {
  std::vector<Eigen::Index> rows;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == label) rows.push_back(Eigen::Index(i));
  Eigen::MatrixXd out(Eigen::Index(rows.size()), features.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(Eigen::Index(i)) = features.row(rows[i]);
  return out;
}

FeatureBank extract_features(Network& net, const Dataset& data, Split split, std::size_t batch_size) {
  FeatureBank bank;
  bank.split = split;
  bank.labels = data.labels;
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t start = 0; start < idx.size(); start += batch_size) {
    const std::size_t end = std::min(idx.size(), start + batch_size);
    std::span<const std::size_t> chunk(idx.data() + start, end - start);
    net.forward(data.gather(chunk), Mode::Eval);
    const Tensor& f = net.features();
    if (bank.features.size() == 0) bank.features.resize(Eigen::Index(data.size()), Eigen::Index(f.dim(1)));
    bank.features.middleRows(Eigen::Index(start), Eigen::Index(end - start)) = f.matrix();
  }
  return bank;
}

namespace {

Eigen::MatrixXd normalized_rows(Eigen::MatrixXd m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double n = m.row(i).norm();
    if (n > 0) m.row(i) /= n;
  }
  return m;
}

}  // namespace

double intra_cluster_variance(const FeatureBank& bank, int label) {
  const Eigen::MatrixXd rows = normalized_rows(bank.class_rows(label));
  if (rows.rows() < 2) {
    throw ArgumentError("intra_cluster_variance: class " + std::to_string(label) + " has fewer than 2 samples");
  }
  // Centered on the first row so identical rows give exactly zero.
  const Eigen::MatrixXd shifted = rows.rowwise() - rows.row(0);
  const Eigen::RowVectorXd offset = shifted.colwise().mean();
  return (shifted.rowwise() - offset).rowwise().squaredNorm().mean();
}

double class_mean_cosine(const FeatureBank& train, const FeatureBank& test, int label) {
  const Eigen::MatrixXd a = normalized_rows(train.class_rows(label));
  const Eigen::MatrixXd b = normalized_rows(test.class_rows(label));
  if (a.rows() == 0 || b.rows() == 0) {
    throw ArgumentError("class_mean_cosine: class " + std::to_string(label) + " missing from a split");
  }
  const Eigen::RowVectorXd ma = a.colwise().mean();
  const Eigen::RowVectorXd mb = b.colwise().mean();
  const double na = ma.norm(), nb = mb.norm();
  if (na == 0 || nb == 0) throw NumericError("class_mean_cosine: zero-norm class mean");
  return std::clamp(ma.dot(mb) / (na * nb), -1.0, 1.0);
}

std::optional<TransitionResult> importance_transition(const ChannelPlan& plan_a,
                                                      const std::vector<Tensor>& gammas_a,
                                                      const ChannelPlan& plan_b,
                                                      const std::vector<Tensor>& gammas_b) {
  if (plan_a.widths != plan_b.widths) throw DimensionError("importance_transition: plans differ in architecture");
  const std::size_t layers = plan_a.widths.size();
  if (gammas_a.size() != layers || gammas_b.size() != layers) {
    throw DimensionError("importance_transition: gamma layers do not match plans");
  }
  auto normalized = [](const Tensor& g) {
    std::vector<double> v(g.size());
    double mx = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) mx = std::max(mx, std::abs(g[i]));
    for (std::size_t i = 0; i < g.size(); ++i) v[i] = mx > 0 ? std::abs(g[i]) / mx : 0.0;
    return v;
  };
  TransitionResult r;
  double sum_a = 0.0, sum_b = 0.0;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  auto side = [&](const ChannelPlan& self, const Tensor& g, const ChannelPlan& other, std::size_t l,
                  double& total, std::size_t& count) {
    if (g.size() != self.kept[l].size()) throw DimensionError("importance_transition: gamma width mismatch");
    const auto norm = normalized(g);
    double layer_sum = 0.0;
    std::size_t layer_count = 0;
    for (std::size_t j = 0; j < self.kept[l].size(); ++j) {
      if (!other.keeps({l, self.kept[l][j]})) {
        layer_sum += norm[j];
        ++layer_count;
      }
    }
    total += layer_sum;
    count += layer_count;
    return layer_count ? layer_sum / double(layer_count) : nan;
  };
  for (std::size_t l = 0; l < layers; ++l) {
    r.layer_mean_a.push_back(side(plan_a, gammas_a[l], plan_b, l, sum_a, r.count_a));
    r.layer_mean_b.push_back(side(plan_b, gammas_b[l], plan_a, l, sum_b, r.count_b));
  }
  if (r.count_a == 0 && r.count_b == 0) return std::nullopt;
  r.mean_a = r.count_a ? sum_a / double(r.count_a) : nan;
  r.mean_b = r.count_b ? sum_b / double(r.count_b) : nan;
  return r;
}

// ---------------------------------------------------------------------------
// Survival

void SurvivalLedger::record(std::size_t iteration, std::span<const std::size_t> pruned,
                            std::span<const std::size_t> regenerated) {
  std::vector<char> pruned_now(provenance_.size(), 0);
  for (std::size_t i : pruned) {
    pruned_now.at(i) = 1;
    provenance_[i] = 0;
  }
  SurvivalRecord rec;
  rec.iteration = iteration;
  rec.pruned = pruned.size();
  rec.regenerated = regenerated.size();
  for (std::size_t i : regenerated) {
    provenance_.at(i) = 1;
    rec.rescued += pruned_now[i];
  }
  rec.rescue_fraction = rec.pruned ? double(rec.rescued) / double(rec.pruned) : 0.0;
  records_.push_back(rec);
}

double SurvivalLedger::provenance_fraction(const std::vector<char>& alive) const {
  if (alive.size() != provenance_.size()) throw DimensionError("provenance: structure count mismatch");
  std::size_t survivors = 0, flagged = 0;
  for (std::size_t i = 0; i < alive.size(); ++i) {
    survivors += alive[i] != 0;
    flagged += alive[i] && provenance_[i];
  }
  return survivors ? double(flagged) / double(survivors) : 0.0;
}

void SurvivalLedger::save(Checkpoint& ckpt, const std::string& prefix) const {
  Tensor recs({records_.size(), 5});
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    recs.at(i, 0) = double(r.iteration);
    recs.at(i, 1) = double(r.pruned);
    recs.at(i, 2) = double(r.regenerated);
    recs.at(i, 3) = double(r.rescued);
    recs.at(i, 4) = r.rescue_fraction;
  }
  ckpt.entries[prefix + "records"] = recs;
  Tensor prov({provenance_.size()});
  for (std::size_t i = 0; i < provenance_.size(); ++i) prov[i] = provenance_[i];
  ckpt.entries[prefix + "provenance"] = prov;
}

SurvivalLedger SurvivalLedger::load(const Checkpoint& ckpt, const std::string& prefix) {
  SurvivalLedger l;
  const Tensor& recs = ckpt.entry(prefix + "records");
  for (std::size_t i = 0; i < recs.dim(0); ++i) {
    l.records_.push_back({std::size_t(recs.at(i, 0)), std::size_t(recs.at(i, 1)), std::size_t(recs.at(i, 2)),
                          std::size_t(recs.at(i, 3)), recs.at(i, 4)});
  }
  const Tensor& prov = ckpt.entry(prefix + "provenance");
  for (double v : prov.values()) l.provenance_.push_back(v != 0.0);
  return l;
}

namespace {

Tensor bits_tensor(const std::vector<char>& bits) {
  Tensor t({bits.size()});
  for (std::size_t i = 0; i < bits.size(); ++i) t[i] = bits[i];
  return t;
}

std::vector<char> tensor_bits(const Tensor& t) {
  std::vector<char> out;
  for (double v : t.values()) out.push_back(v != 0.0);
  return out;
}

std::string iteration_key(std::size_t it) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "iter%06zu/", it);
  return buf;
}

}  // namespace

Checkpoint MaskHistory::to_checkpoint() const {
  Checkpoint c;
  c.metadata["kind"] = "mask_history";
  c.metadata["iterations"] = std::to_string(snapshots.size());
  for (const auto& s : snapshots) {
    const std::string k = iteration_key(s.iteration);
    c.entries[k + "a_before"] = bits_tensor(s.before);
    c.entries[k + "b_after_prune"] = bits_tensor(s.after_prune);
    c.entries[k + "c_after_regen"] = bits_tensor(s.after_regen);
  }
  return c;
}

MaskHistory MaskHistory::from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.meta("kind") != "mask_history") throw IoError("not a mask history container");
  MaskHistory h;
  const std::size_t n = std::size_t(ckpt.meta_int("iterations"));
  for (const auto& [name, t] : ckpt.entries) {
    if (name.size() < 10 || name.compare(0, 4, "iter") != 0) continue;
    const std::size_t it = std::stoul(name.substr(4, 6));
    if (h.snapshots.empty() || h.snapshots.back().iteration != it) h.snapshots.push_back({it, {}, {}, {}});
    auto& s = h.snapshots.back();
    const std::string field = name.substr(11);
    if (field == "a_before") s.before = tensor_bits(t);
    else if (field == "b_after_prune") s.after_prune = tensor_bits(t);
    else if (field == "c_after_regen") s.after_regen = tensor_bits(t);
  }
  if (h.snapshots.size() != n) throw IoError("mask history: iteration count mismatch");
  return h;
}

SurvivalLedger recompute_survival(const MaskHistory& history, std::size_t structures) {
  SurvivalLedger ledger(structures);
  for (const auto& s : history.snapshots) {
    if (s.before.size() != structures || s.after_prune.size() != structures || s.after_regen.size() != structures) {
      throw DimensionError("mask history: snapshot size mismatch");
    }
    std::vector<std::size_t> pruned, regenerated;
    for (std::size_t i = 0; i < structures; ++i) {
      if (s.before[i] && !s.after_prune[i]) pruned.push_back(i);
      if (!s.after_prune[i] && s.after_regen[i]) regenerated.push_back(i);
    }
    ledger.record(s.iteration, pruned, regenerated);
  }
  return ledger;
}

std::string survival_report(const SurvivalLedger& ledger, const std::vector<char>& alive) {
  std::ostringstream os;
  os << "iteration,pruned,regenerated,rescued,rescue_fraction\n";
  for (const auto& r : ledger.records()) {
    os << r.iteration << "," << r.pruned << "," << r.regenerated << "," << r.rescued << ","
       << format_double(r.rescue_fraction) << "\n";
  }
  os << "final,,,," << format_double(ledger.provenance_fraction(alive)) << "\n";
  return os.str();
}

}  // namespace snnprune
