#include "snnprune/config.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "snnprune/checkpoint.hpp"

namespace snnprune {

double ExperimentConfig::unstructured_regen_ratio() const {
  if (regen_ratio) return *regen_ratio;
  if (final_sparsity <= 0.9) return 0.5;
  if (final_sparsity <= 0.95) return 0.2;
  return 0.1;
}

double ExperimentConfig::structured_regen_ratio() const { return regen_ratio.value_or(0.1); }

NetworkSpec ExperimentConfig::network_spec(InputGeometry input, std::size_t classes) const {
  if (network == NetworkKind::VggMini) return vgg_mini(input, widths, classes, timesteps);
  return spiking_mlp(input, hidden, classes, timesteps);
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(out)) {
    throw ConfigError(key, "not a number: '" + v + "'");
  }
  return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ConfigError(key, "not a non-negative integer: '" + v + "'");
  }
  return out;
}

std::vector<std::size_t> to_list(const std::string& key, const std::string& v) {
  std::vector<std::size_t> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_uint(key, trim(item)));
  if (out.empty()) throw ConfigError(key, "empty list");
  return out;
}

std::string join(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

using Setter = std::function<void(ExperimentConfig&, const std::string& key, const std::string& value)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    auto u = [](std::size_t ExperimentConfig::*field) {
      return [field](ExperimentConfig& c, const std::string& k, const std::string& v) { c.*field = to_uint(k, v); };
    };
    auto d = [](double ExperimentConfig::*field) {
      return [field](ExperimentConfig& c, const std::string& k, const std::string& v) { c.*field = to_double(k, v); };
    };
    t["seed"] = [](auto& c, auto& k, auto& v) { c.seed = to_uint(k, v); };
    t["out"] = [](auto& c, auto&, auto& v) { c.out = v; };
    t["network"] = [](auto& c, auto& k, auto& v) {
      if (v == "vgg-mini") c.network = NetworkKind::VggMini;
      else if (v == "mlp") c.network = NetworkKind::Mlp;
      else throw ConfigError(k, "expected vgg-mini or mlp, got '" + v + "'");
    };
    t["widths"] = [](auto& c, auto& k, auto& v) { c.widths = to_list(k, v); };
    t["hidden"] = [](auto& c, auto& k, auto& v) { c.hidden = to_list(k, v); };
    t["T"] = u(&ExperimentConfig::timesteps);
    t["tau"] = [](auto& c, auto& k, auto& v) { c.lif.tau = to_double(k, v); };
    t["v_threshold"] = [](auto& c, auto& k, auto& v) { c.lif.v_threshold = to_double(k, v); };
    t["v_reset"] = [](auto& c, auto& k, auto& v) { c.lif.v_reset = to_double(k, v); };

    t["lr"] = [](auto& c, auto& k, auto& v) { c.train.lr = to_double(k, v); };
    t["momentum"] = [](auto& c, auto& k, auto& v) { c.train.momentum = to_double(k, v); };
    t["wd"] = [](auto& c, auto& k, auto& v) { c.train.weight_decay = to_double(k, v); };
    t["batch_size"] = [](auto& c, auto& k, auto& v) { c.train.batch_size = to_uint(k, v); };
    t["epochs"] = [](auto& c, auto& k, auto& v) { c.train.epochs = to_uint(k, v); };
    t["lr_schedule"] = [](auto& c, auto& k, auto& v) {
      if (v == "cosine") c.train.lr_schedule.kind = LrScheduleKind::Cosine;
      else if (v == "step") c.train.lr_schedule.kind = LrScheduleKind::Step;
      else throw ConfigError(k, "expected cosine or step, got '" + v + "'");
    };
    t["lr_drops"] = [](auto& c, auto& k, auto& v) { c.train.lr_schedule.drop_epochs = to_list(k, v); };

    t["dataset"] = [](auto& c, auto& k, auto& v) {
      if (v == "synthetic") c.dataset.source = DataSource::Synthetic;
      else if (v == "idx") c.dataset.source = DataSource::Idx;
      else throw ConfigError(k, "expected synthetic or idx, got '" + v + "'");
    };
    t["classes"] = [](auto& c, auto& k, auto& v) { c.dataset.classes = to_uint(k, v); };
    t["train_samples"] = [](auto& c, auto& k, auto& v) { c.dataset.train_samples = to_uint(k, v); };
    t["test_samples"] = [](auto& c, auto& k, auto& v) { c.dataset.test_samples = to_uint(k, v); };
    t["channels"] = [](auto& c, auto& k, auto& v) { c.dataset.channels = to_uint(k, v); };
    t["height"] = [](auto& c, auto& k, auto& v) { c.dataset.height = to_uint(k, v); };
    t["width"] = [](auto& c, auto& k, auto& v) { c.dataset.width = to_uint(k, v); };
    t["separation"] = [](auto& c, auto& k, auto& v) { c.dataset.separation = to_double(k, v); };
    t["train_images"] = [](auto& c, auto&, auto& v) { c.dataset.train_images = v; };
    t["train_labels"] = [](auto& c, auto&, auto& v) { c.dataset.train_labels = v; };
    t["test_images"] = [](auto& c, auto&, auto& v) { c.dataset.test_images = v; };
    t["test_labels"] = [](auto& c, auto&, auto& v) { c.dataset.test_labels = v; };
    t["norm_mean"] = [](auto& c, auto& k, auto& v) { c.dataset.norm_mean = to_double(k, v); };
    t["norm_std"] = [](auto& c, auto& k, auto& v) { c.dataset.norm_std = to_double(k, v); };
    t["eval_batch"] = u(&ExperimentConfig::eval_batch);

    t["N_p"] = u(&ExperimentConfig::prune_epochs);
    t["N_f"] = [](auto& c, auto& k, auto& v) { c.finetune_epochs = to_uint(k, v); };
    t["delta_t"] = u(&ExperimentConfig::interval);
    t["s_f"] = d(&ExperimentConfig::final_sparsity);
    t["r"] = [](auto& c, auto& k, auto& v) { c.regen_ratio = to_double(k, v); };
    t["aggregation"] = [](auto& c, auto& k, auto& v) {
      if (v == "max") c.aggregation = Aggregation::Max;
      else if (v == "mean") c.aggregation = Aggregation::Mean;
      else throw ConfigError(k, "expected max or mean, got '" + v + "'");
    };

    t["N_t"] = u(&ExperimentConfig::sparsity_epochs);
    t["N_1"] = u(&ExperimentConfig::drop1);
    t["N_2"] = u(&ExperimentConfig::drop2);
    t["s"] = d(&ExperimentConfig::l1);
    t["percent"] = d(&ExperimentConfig::percent);
    t["finetune_s"] = d(&ExperimentConfig::finetune_l1);
    return t;
  }();
  return table;
}

}  // namespace

void ExperimentConfig::validate() const {
  auto require = [](bool ok, const char* key, const std::string& what) {
    if (!ok) throw ConfigError(key, what);
  };
  require(network != NetworkKind::VggMini || !widths.empty(), "widths", "needs at least one stage");
  for (std::size_t w : (network == NetworkKind::VggMini ? widths : hidden)) {
    require(w > 0, network == NetworkKind::VggMini ? "widths" : "hidden", "zero width");
  }
  require(timesteps >= 1, "T", "must be >= 1");
  require(lif.tau >= 1.0, "tau", "must be >= 1");
  require(lif.v_threshold > lif.v_reset, "v_threshold", "must exceed v_reset");
  require(train.lr > 0, "lr", "must be > 0");
  require(train.momentum >= 0 && train.momentum < 1, "momentum", "must be in [0, 1)");
  require(train.weight_decay >= 0, "wd", "must be >= 0");
  require(train.batch_size >= 1, "batch_size", "must be >= 1");
  require(eval_batch >= 1, "eval_batch", "must be >= 1");
  require(interval >= 1, "delta_t", "must be >= 1");
  require(final_sparsity >= 0 && final_sparsity < 1, "s_f", "must be in [0, 1)");
  require(!regen_ratio || (*regen_ratio >= 0 && *regen_ratio < 1), "r", "must be in [0, 1)");
  require(l1 >= 0, "s", "must be >= 0");
  require(finetune_l1 >= 0, "finetune_s", "must be >= 0");
  require(percent >= 0 && percent < 1, "percent", "must be in [0, 1)");
  require(drop1 <= drop2, "N_1", "must not exceed N_2");

  if (dataset.source == DataSource::Idx) {
    const std::pair<const char*, const std::string*> paths[] = {{"train_images", &dataset.train_images},
                                                                {"train_labels", &dataset.train_labels},
                                                                {"test_images", &dataset.test_images},
                                                                {"test_labels", &dataset.test_labels}};
    for (const auto& [key, path] : paths) {
      require(!path->empty(), key, "required for the idx dataset");
      require(std::filesystem::exists(*path), key, "file not found: " + *path);
    }
    require(dataset.norm_std > 0, "norm_std", "must be > 0");
  } else {
    require(dataset.classes >= 2, "classes", "must be >= 2");
    require(dataset.train_samples >= 1, "train_samples", "must be >= 1");
    require(dataset.test_samples >= 1, "test_samples", "must be >= 1");
    require(dataset.channels >= 1, "channels", "must be >= 1");
    require(dataset.height >= 1, "height", "must be >= 1");
    require(dataset.width >= 1, "width", "must be >= 1");
    require(dataset.separation >= 0, "separation", "must be >= 0");
  }
}

std::string ExperimentConfig::to_text() const {
  std::ostringstream os;
  auto kv = [&](const char* k, const std::string& v) { os << k << " = " << v << "\n"; };
  auto num = [&](const char* k, double v) { kv(k, format_double(v)); };
  auto cnt = [&](const char* k, std::size_t v) { kv(k, std::to_string(v)); };
  kv("seed", std::to_string(seed));
  kv("out", out);
  kv("network", network == NetworkKind::VggMini ? "vgg-mini" : "mlp");
  kv("widths", join(widths));
  kv("hidden", join(hidden));
  cnt("T", timesteps);
  num("tau", lif.tau);
  num("v_threshold", lif.v_threshold);
  num("v_reset", lif.v_reset);
  num("lr", train.lr);
  num("momentum", train.momentum);
  num("wd", train.weight_decay);
  cnt("batch_size", train.batch_size);
  cnt("epochs", train.epochs);
  kv("lr_schedule", train.lr_schedule.kind == LrScheduleKind::Cosine ? "cosine" : "step");
  if (!train.lr_schedule.drop_epochs.empty()) kv("lr_drops", join(train.lr_schedule.drop_epochs));
  kv("dataset", dataset.source == DataSource::Synthetic ? "synthetic" : "idx");
  cnt("classes", dataset.classes);
  cnt("train_samples", dataset.train_samples);
  cnt("test_samples", dataset.test_samples);
  cnt("channels", dataset.channels);
  cnt("height", dataset.height);
  cnt("width", dataset.width);
  num("separation", dataset.separation);
  if (!dataset.train_images.empty()) kv("train_images", dataset.train_images);
  if (!dataset.train_labels.empty()) kv("train_labels", dataset.train_labels);
  if (!dataset.test_images.empty()) kv("test_images", dataset.test_images);
  if (!dataset.test_labels.empty()) kv("test_labels", dataset.test_labels);
  num("norm_mean", dataset.norm_mean);
  num("norm_std", dataset.norm_std);
  cnt("eval_batch", eval_batch);
  cnt("N_p", prune_epochs);
  if (finetune_epochs) cnt("N_f", *finetune_epochs);
  cnt("delta_t", interval);
  num("s_f", final_sparsity);
  if (regen_ratio) num("r", *regen_ratio);
  kv("aggregation", aggregation == Aggregation::Max ? "max" : "mean");
  cnt("N_t", sparsity_epochs);
  cnt("N_1", drop1);
  cnt("N_2", drop2);
  num("s", l1);
  num("percent", percent);
  num("finetune_s", finetune_l1);
  return os.str();
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::set<std::string> seen;
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno), "expected 'key = value'");
    }
    std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key == "\xCE\x94t") key = "delta_t";  // accept the Greek spelling
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError(key, "unknown key");
    if (!seen.insert(key).second) throw ConfigError(key, "given more than once");
    if (value.empty()) throw ConfigError(key, "missing value");
    it->second(cfg, key, value);
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read config " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

}  // namespace snnprune
