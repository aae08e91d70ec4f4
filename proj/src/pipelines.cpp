#include "snnprune/pipelines.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "snnprune/analysis.hpp"
#include "snnprune/checkpoint.hpp"
#include "snnprune/criticality.hpp"
#include "snnprune/mask.hpp"
#include "snnprune/optim.hpp"
#include "snnprune/prune_structured.hpp"
#include "snnprune/prune_unstructured.hpp"

namespace snnprune {

namespace fs = std::filesystem;

std::string resolve_out_dir(const ExperimentConfig& cfg, const std::string& override_dir) {
  fs::path p = override_dir.empty() ? fs::path(cfg.out) : fs::path(override_dir);
  if (p.is_relative()) {
    if (const char* root = std::getenv("SNNPRUNE_OUT_ROOT"); root && *root) p = fs::path(root) / p;
  }
  return p.string();
}

Evaluation evaluate(Network& net, const Dataset& data, std::size_t batch_size) {
  Evaluation ev;
  if (data.size() == 0) return ev;
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), 0);
  double loss_sum = 0.0;
  std::size_t correct = 0;
  for (std::size_t start = 0; start < idx.size(); start += batch_size) {
    const std::size_t end = std::min(idx.size(), start + batch_size);
    std::span<const std::size_t> chunk(idx.data() + start, end - start);
    const Tensor logits = net.forward(data.gather(chunk), Mode::Eval);
    const auto labels = data.gather_labels(chunk);
    const LossResult r = loss_ce_l1(logits, labels, {}, 0.0);
    loss_sum += r.ce * double(chunk.size());
    correct += r.correct;
  }
  ev.loss = loss_sum / double(data.size());
  ev.accuracy = double(correct) / double(data.size());
  return ev;
}

namespace {

enum class Phase { Dense, Prune, Sparsity, Select, Finetune };

const char* phase_name(Phase p) {
  switch (p) {
    case Phase::Dense: return "dense";
    case Phase::Prune: return "prune";
    case Phase::Sparsity: return "sparsity";
    case Phase::Select: return "select";
    case Phase::Finetune: return "finetune";
  }
  return "?";
}

std::vector<Phase> phases_for(const std::string& command) {
  if (command == "train") return {Phase::Dense};
  if (command == "prune-unstructured") return {Phase::Dense, Phase::Prune};
  if (command == "prune-structured") return {Phase::Dense, Phase::Sparsity, Phase::Select, Phase::Finetune};
  throw ArgumentError("unknown command " + command);
}

std::string join_phases(const std::vector<Phase>& ps, std::size_t count) {
  std::string s;
  for (std::size_t i = 0; i < count; ++i) s += (i ? "," : "") + std::string(phase_name(ps[i]));
  return s;
}

const char* const kEpochsHeader = "epoch,phase,lr,train_loss,train_acc,test_loss,test_acc,sparsity\n";
const char* const kIterationsHeader =
    "iteration,step,s_t,s_t_ext,k,pruned,regenerated,rescued,regenerated_fraction,realized_sparsity,train_acc\n";
const char* const kSelectionHeader =
    "percent,percent_ext,total,kept,pruned_ext,regenerated,force_kept,flops_reduction\n";

std::string fmt(double v) { return format_double(v); }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  f << text;
  if (!f) throw IoError("write failed for " + path.string());
}

// Everything needed to continue a run at an epoch boundary.
struct RunState {
  std::string command;
  std::vector<Phase> phases;
  std::size_t phase = 0;         // current phase
  std::size_t phase_epoch = 0;   // epochs done inside it
  std::size_t global_epoch = 0;
  std::size_t step = 0;          // optimizer steps inside the prune phase
  Rng rng;
  Network net;
  SgdMomentum opt;
  std::optional<PruneMask> mask;
  std::size_t prune_iteration = 0;
  SurvivalLedger ledger;
  bool have_ledger = false;
  MaskHistory history;
  std::optional<ChannelPlan> plan;
  std::string epochs_csv = kEpochsHeader;
  std::string iterations_csv;
  std::string criticality_csv;
  std::string flops_json;
  double last_train_acc = 0.0, last_test_acc = 0.0;
};

Checkpoint to_checkpoint(const RunState& st, const ExperimentConfig& cfg) {
  Checkpoint c;
  auto& m = c.metadata;
  m["kind"] = "run";
  m["command"] = st.command;
  m["phases"] = join_phases(st.phases, st.phases.size());
  m["phase"] = std::to_string(st.phase);
  m["phase_epoch"] = std::to_string(st.phase_epoch);
  m["global_epoch"] = std::to_string(st.global_epoch);
  m["step"] = std::to_string(st.step);
  m["prune_iteration"] = std::to_string(st.prune_iteration);
  m["rng"] = st.rng.state();
  m["config"] = cfg.to_text();
  m["csv.epochs"] = st.epochs_csv;
  m["csv.iterations"] = st.iterations_csv;
  m["csv.criticality"] = st.criticality_csv;
  m["json.flops"] = st.flops_json;
  m["acc.train"] = fmt(st.last_train_acc);
  m["acc.test"] = fmt(st.last_test_acc);
  if (st.plan) m["plan"] = st.plan->to_string();
  st.net.save(c, "net/");
  for (std::size_t i = 0; i < st.opt.velocity().size(); ++i) {
    char key[32];
    std::snprintf(key, sizeof(key), "opt/v%04zu", i);
    c.entries[key] = st.opt.velocity()[i];
  }
  if (st.mask) {
    m["mask.tensors"] = std::to_string(st.mask->tensors());
    for (std::size_t i = 0; i < st.mask->tensors(); ++i) {
      char key[32];
      std::snprintf(key, sizeof(key), "mask/%04zu", i);
      c.entries[key] = (*st.mask)[i];
    }
  }
  if (st.have_ledger) st.ledger.save(c, "ledger/");
  const Checkpoint h = st.history.to_checkpoint();
  m["history.iterations"] = h.meta("iterations");
  for (const auto& [name, t] : h.entries) c.entries["history/" + name] = t;
  return c;
}

RunState from_checkpoint(const Checkpoint& c) {
  if (c.meta_or("kind", "") != "run") throw IoError("not a run checkpoint");
  RunState st;
  st.command = c.meta("command");
  st.phases = phases_for(st.command);
  st.phase = std::size_t(c.meta_int("phase"));
  st.phase_epoch = std::size_t(c.meta_int("phase_epoch"));
  st.global_epoch = std::size_t(c.meta_int("global_epoch"));
  st.step = std::size_t(c.meta_int("step"));
  st.prune_iteration = std::size_t(c.meta_int("prune_iteration"));
  st.rng.set_state(c.meta("rng"));
  st.epochs_csv = c.meta("csv.epochs");
  st.iterations_csv = c.meta("csv.iterations");
  st.criticality_csv = c.meta("csv.criticality");
  st.flops_json = c.meta("json.flops");
  st.last_train_acc = c.meta_double("acc.train");
  st.last_test_acc = c.meta_double("acc.test");
  if (c.metadata.count("plan")) st.plan = ChannelPlan::parse(c.meta("plan"));
  st.net = Network::load(c, "net/");
  st.opt = SgdMomentum(st.net);
  for (std::size_t i = 0; i < st.opt.velocity().size(); ++i) {
    char key[32];
    std::snprintf(key, sizeof(key), "opt/v%04zu", i);
    st.opt.velocity()[i] = c.entry(key);
  }
  if (c.metadata.count("mask.tensors")) {
    std::vector<Shape> shapes;
    const std::size_t n = std::size_t(c.meta_int("mask.tensors"));
    std::vector<Tensor> bits;
    for (std::size_t i = 0; i < n; ++i) {
      char key[32];
      std::snprintf(key, sizeof(key), "mask/%04zu", i);
      bits.push_back(c.entry(key));
      shapes.push_back(bits.back().shape());
    }
    PruneMask mask(shapes);
    std::size_t flat = 0;
    for (const Tensor& t : bits)
      for (double v : t.values()) mask.set(flat++, v != 0.0);
    st.mask = std::move(mask);
  }
  if (c.has_entry("ledger/provenance")) {
    st.ledger = SurvivalLedger::load(c, "ledger/");
    st.have_ledger = true;
  }
  Checkpoint h;
  h.metadata["kind"] = "mask_history";
  h.metadata["iterations"] = c.meta("history.iterations");
  for (const auto& [name, t] : c.entries)
    if (name.rfind("history/", 0) == 0) h.entries[name.substr(8)] = t;
  st.history = MaskHistory::from_checkpoint(h);
  return st;
}

std::vector<const Tensor*> gamma_ptrs(Network& net) {
  std::vector<const Tensor*> out;
  for (std::size_t l : net.batchnorm_layers()) out.push_back(&net.layer_as<BatchNormLayer>(l).gamma);
  return out;
}

std::vector<Shape> prunable_shapes(Network& net) {
  std::vector<Shape> shapes;
  for (const auto& p : net.prunable_weights()) shapes.push_back(p.value->shape());
  return shapes;
}

class Runner {
 public:
  Runner(const ExperimentConfig& cfg, const RunOptions& opts, std::string command)
      : cfg_(cfg), opts_(opts), command_(std::move(command)) {
    cfg_.validate();
    // The dataset is always drawn first from a fresh stream so a resumed run
    // sees the same samples.
    Rng data_rng(cfg_.seed);
    data_ = load_dataset(cfg_.dataset, data_rng);
    if (opts_.resume_path.empty()) {
      st_.command = command_;
      st_.phases = phases_for(command_);
      st_.rng = data_rng;
      const Shape4 s = data_.train.images.shape4();
      st_.net = Network(cfg_.network_spec({s.channels, s.height, s.width}, data_.train.classes), cfg_.lif);
      st_.net.initialize(st_.rng);
      st_.opt = SgdMomentum(st_.net);
    } else {
      const Checkpoint c = load_checkpoint(opts_.resume_path);
      adopt(from_checkpoint(c), parse_config(c.meta("config")));
    }
    if (!opts_.out_dir.empty()) fs::create_directories(opts_.out_dir);
  }

  RunSummary run() {
    while (st_.phase < st_.phases.size()) {
      const Phase p = st_.phases[st_.phase];
      const std::size_t total = phase_epochs(p);
      if (st_.phase_epoch == 0) begin_phase(p);
      while (st_.phase_epoch < total) {
        run_epoch(p, total);
        ++st_.phase_epoch;
        ++st_.global_epoch;
        if (opts_.stop_after_epoch && st_.global_epoch >= *opts_.stop_after_epoch &&
            !(st_.phase_epoch == total && st_.phase + 1 == st_.phases.size())) {
          return finish(false);
        }
      }
      ++st_.phase;
      st_.phase_epoch = 0;
    }
    return finish(true);
  }

 private:
  void adopt(RunState loaded, ExperimentConfig saved) {
    const auto mine = phases_for(command_);
    if (saved.seed != cfg_.seed) throw ConfigError("seed", "differs from the resumed checkpoint");
    if (saved.train.epochs != cfg_.train.epochs) throw ConfigError("epochs", "differs from the resumed checkpoint");
    if (loaded.command != command_) {
      // A finished run of another command may seed this one when its phases
      // are a prefix of ours, e.g. train followed by prune-unstructured.
      const bool finished = loaded.phase == loaded.phases.size();
      const bool prefix = loaded.phases.size() <= mine.size() &&
                          join_phases(loaded.phases, loaded.phases.size()) ==
                              join_phases(mine, loaded.phases.size());
      if (!finished || !prefix) {
        throw ConfigError("resume", "checkpoint of '" + loaded.command + "' cannot continue as '" + command_ + "'");
      }
      loaded.command = command_;
      loaded.phases = mine;
    } else {
      saved.out = cfg_.out;
      if (saved.to_text() != cfg_.to_text()) {
        throw ConfigError("resume", "config differs from the one the checkpoint was written with");
      }
    }
    st_ = std::move(loaded);
  }

  std::size_t phase_epochs(Phase p) const {
    switch (p) {
      case Phase::Dense: return cfg_.train.epochs;
      case Phase::Prune: return cfg_.prune_epochs + cfg_.unstructured_finetune_epochs();
      case Phase::Sparsity: return cfg_.sparsity_epochs;
      case Phase::Select: return 0;
      case Phase::Finetune: return cfg_.structured_finetune_epochs();
    }
    return 0;
  }

  std::size_t steps_per_epoch() const {
    return (data_.train.size() + cfg_.train.batch_size - 1) / cfg_.train.batch_size;
  }

  SparsitySchedule schedule() const {
    SparsitySchedule s;
    s.final_sparsity = cfg_.final_sparsity;
    s.interval = cfg_.interval;
    s.end_step = cfg_.prune_epochs * steps_per_epoch();
    s.regen_ratio = cfg_.unstructured_regen_ratio();
    return s;
  }

  void begin_phase(Phase p) {
    // Every phase starts with fresh momentum.
    st_.opt = SgdMomentum(st_.net);
    if (p == Phase::Prune) {
      st_.mask = PruneMask(prunable_shapes(st_.net));
      st_.step = 0;
      st_.prune_iteration = 0;
      st_.ledger = SurvivalLedger(st_.mask->total());
      st_.have_ledger = true;
      st_.history = {};
      st_.iterations_csv = kIterationsHeader;
      schedule().validate();
    } else if (p == Phase::Select) {
      select_channels();
    }
  }

  LrSchedule phase_schedule(Phase p) const {
    LrSchedule s;
    switch (p) {
      case Phase::Dense: return cfg_.train.lr_schedule;
      case Phase::Prune: return s;  // cosine
      case Phase::Sparsity:
      case Phase::Finetune:
        s.kind = LrScheduleKind::Step;
        s.drop_epochs = {cfg_.drop1, cfg_.drop2};
        return s;
      case Phase::Select: return s;
    }
    return s;
  }

  double phase_l1(Phase p) const {
    if (p == Phase::Sparsity) return cfg_.l1;
    if (p == Phase::Finetune) return cfg_.finetune_l1;
    return 0.0;
  }

  void run_epoch(Phase p, std::size_t total) {
    const double lr = lr_at(st_.phase_epoch, total, cfg_.train.lr, phase_schedule(p));
    const double lambda = phase_l1(p);
    std::vector<std::size_t> order(data_.train.size());
    std::iota(order.begin(), order.end(), 0);
    st_.rng.shuffle(std::span<std::size_t>(order));

    UnstructuredPruner pruner;
    if (p == Phase::Prune) {
      pruner = UnstructuredPruner(schedule(), cfg_.aggregation);
      pruner.set_iteration(st_.prune_iteration);
    }

    double loss_sum = 0.0;
    std::size_t correct = 0;
    const std::size_t bs = cfg_.train.batch_size;
    for (std::size_t start = 0; start < order.size(); start += bs) {
      const std::size_t end = std::min(order.size(), start + bs);
      std::span<const std::size_t> chunk(order.data() + start, end - start);
      const Tensor logits = st_.net.forward(data_.train.gather(chunk), Mode::Train);
      const auto labels = data_.train.gather_labels(chunk);
      const auto gammas = gamma_ptrs(st_.net);
      const LossResult r = loss_ce_l1(logits, labels, gammas, lambda);
      if (!std::isfinite(r.loss)) throw NumericError("training loss diverged");
      st_.net.backward(r.logits_grad);
      if (lambda > 0) {
        const auto bn = st_.net.batchnorm_layers();
        for (std::size_t l = 0; l < bn.size(); ++l) {
          Tensor& g = st_.net.layer_as<BatchNormLayer>(bn[l]).grad_gamma;
          for (std::size_t i = 0; i < g.size(); ++i) g[i] += r.gamma_grads[l][i];
        }
      }
      st_.opt.step(st_.net, lr, cfg_.train.momentum, cfg_.train.weight_decay, st_.mask ? &*st_.mask : nullptr);
      loss_sum += r.loss * double(chunk.size());
      correct += r.correct;

      if (p == Phase::Prune) {
        ++st_.step;
        if (pruner.due(st_.step)) {
          record_event(pruner.step(st_.net, *st_.mask, st_.step), double(r.correct) / double(chunk.size()));
        }
      }
    }
    if (p == Phase::Prune) st_.prune_iteration = pruner.iteration();

    const Evaluation test = evaluate(st_.net, data_.test, cfg_.eval_batch);
    st_.last_train_acc = double(correct) / double(order.size());
    st_.last_test_acc = test.accuracy;
    std::ostringstream row;
    row << st_.global_epoch + 1 << "," << phase_name(p) << "," << fmt(lr) << ","
        << fmt(loss_sum / double(order.size())) << "," << fmt(st_.last_train_acc) << "," << fmt(test.loss) << ","
        << fmt(test.accuracy) << "," << fmt(current_sparsity_value()) << "\n";
    st_.epochs_csv += row.str();
  }

  double current_sparsity_value() const {
    if (st_.mask) return st_.mask->sparsity();
    if (st_.plan) return 1.0 - double(st_.plan->kept_total()) / double(st_.plan->total());
    return 0.0;
  }

  void record_event(const PruneEvent& ev, double batch_acc) {
    st_.ledger.record(ev.iteration, ev.pruned, ev.regenerated);
    st_.history.snapshots.push_back({ev.iteration, ev.mask_before, ev.mask_after_prune, st_.mask->bits()});
    std::ostringstream row;
    row << ev.iteration << "," << ev.step << "," << fmt(ev.sparsity) << "," << fmt(ev.extended_sparsity) << ","
        << ev.k << "," << ev.pruned.size() << "," << ev.regenerated.size() << "," << ev.rescued << ","
        << fmt(ev.regenerated_fraction) << "," << fmt(ev.realized_sparsity) << "," << fmt(batch_acc) << "\n";
    st_.iterations_csv += row.str();
  }

  void select_channels() {
    // Criticality over the whole training set, eval mode, fixed order.
    CriticalityTable table(lif_unit_counts(st_.net));
    std::vector<std::size_t> idx(data_.train.size());
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t start = 0; start < idx.size(); start += cfg_.eval_batch) {
      const std::size_t end = std::min(idx.size(), start + cfg_.eval_batch);
      std::span<const std::size_t> chunk(idx.data() + start, end - start);
      st_.net.forward(data_.train.gather(chunk), Mode::Eval);
      table.accumulate(score_batch(st_.net.lif_states(), cfg_.aggregation));
    }
    table.finalize();
    st_.criticality_csv = table.to_csv();

    const auto gammas = batchnorm_gammas(st_.net);
    const ChannelSelection sel = prune_and_regenerate_channels(gammas, cfg_.percent, cfg_.structured_regen_ratio(),
                                                               channel_scores(st_.net, table));
    const FlopsReport flops = count_flops(st_.net.spec(), sel.plan);
    st_.flops_json = flops.to_json();

    // Channels are addressed flat: BN layer order, then channel.
    const auto widths = batchnorm_widths(st_.net);
    std::vector<std::size_t> offset(widths.size(), 0);
    for (std::size_t l = 1; l < widths.size(); ++l) offset[l] = offset[l - 1] + widths[l - 1];
    auto flat = [&](const ChannelRef& c) { return offset[c.layer] + c.channel; };
    const std::size_t total = sel.plan.total();
    std::vector<char> before(total, 1), after_prune(total, 1), after(total, 0);
    std::vector<std::size_t> pruned, regenerated;
    for (const auto& c : sel.pruned) {
      pruned.push_back(flat(c));
      after_prune[flat(c)] = 0;
    }
    for (const auto& c : sel.regenerated) regenerated.push_back(flat(c));
    for (const auto& c : sel.force_kept) regenerated.push_back(flat(c));
    for (std::size_t l = 0; l < sel.plan.kept.size(); ++l)
      for (std::size_t ch : sel.plan.kept[l]) after[offset[l] + ch] = 1;
    st_.ledger = SurvivalLedger(total);
    st_.ledger.record(1, pruned, regenerated);
    st_.have_ledger = true;
    st_.history = {};
    st_.history.snapshots.push_back({1, before, after_prune, after});

    std::ostringstream row;
    row << kSelectionHeader << fmt(sel.percent) << "," << fmt(sel.extended_percent) << "," << total << ","
        << sel.plan.kept_total() << "," << sel.pruned.size() << "," << sel.regenerated.size() << ","
        << sel.force_kept.size() << "," << fmt(flops.reduction) << "\n";
    st_.iterations_csv = row.str();

    st_.plan = sel.plan;
    st_.net = slim(st_.net, sel.plan);
    st_.opt = SgdMomentum(st_.net);
  }

  RunSummary finish(bool completed) {
    RunSummary s;
    s.command = command_;
    s.completed = completed;
    s.epochs_run = st_.global_epoch;
    s.train_accuracy = st_.last_train_acc;
    s.test_accuracy = st_.last_test_acc;
    s.epochs_csv = st_.epochs_csv;
    s.iterations_csv = st_.iterations_csv;
    if (st_.mask) {
      s.structures = st_.mask->total();
      s.masked = st_.mask->total() - st_.mask->survivors();
    } else if (st_.plan) {
      s.structures = st_.plan->total();
      s.masked = st_.plan->total() - st_.plan->kept_total();
    }
    s.sparsity = current_sparsity_value();
    s.checkpoint = serialize_checkpoint(to_checkpoint(st_, cfg_));

    if (!opts_.out_dir.empty()) {
      const fs::path dir(opts_.out_dir);
      write_text(dir / (completed ? "final.ckpt" : "state.ckpt"), s.checkpoint);
      write_text(dir / "epochs.csv", s.epochs_csv);
      if (!s.iterations_csv.empty()) {
        write_text(dir / (command_ == "prune-structured" ? "selection.csv" : "iterations.csv"), s.iterations_csv);
      }
      if (!st_.history.snapshots.empty()) {
        write_text(dir / "mask_history.bin", serialize_checkpoint(st_.history.to_checkpoint()));
      }
      if (!st_.criticality_csv.empty()) write_text(dir / "criticality.csv", st_.criticality_csv);
      if (!st_.flops_json.empty()) write_text(dir / "flops.json", st_.flops_json);
      if (completed) {
        std::error_code ec;
        fs::remove(dir / "state.ckpt", ec);
      }
    }
    return s;
  }

  ExperimentConfig cfg_;
  RunOptions opts_;
  std::string command_;
  DataSplit data_;
  RunState st_;
};

}  // namespace

RunSummary run_train(const ExperimentConfig& cfg, const RunOptions& opts) {
  if (cfg.train.epochs == 0) throw ConfigError("epochs", "train needs at least one epoch");
  return Runner(cfg, opts, "train").run();
}

RunSummary run_unstructured(const ExperimentConfig& cfg, const RunOptions& opts) {
  return Runner(cfg, opts, "prune-unstructured").run();
}

RunSummary run_structured(const ExperimentConfig& cfg, const RunOptions& opts) {
  return Runner(cfg, opts, "prune-structured").run();
}

// ---------------------------------------------------------------------------
// analyze

namespace {

struct LoadedRun {
  Checkpoint ckpt;
  ExperimentConfig cfg;
  Network net;
};

LoadedRun load_run(const std::string& path) {
  LoadedRun r;
  r.ckpt = load_checkpoint(path);
  if (r.ckpt.meta_or("kind", "") != "run") throw IoError(path + " is not a run checkpoint");
  r.cfg = parse_config(r.ckpt.meta("config"));
  r.net = Network::load(r.ckpt, "net/");
  return r;
}

}  // namespace

std::string analyze(const std::string& checkpoint_a, const std::string& checkpoint_b, const std::string& metric) {
  if (metric != "variance" && metric != "cosine" && metric != "transition" && metric != "survival") {
    throw ArgumentError("unknown metric '" + metric + "'");
  }
  LoadedRun a = load_run(checkpoint_a);
  std::ostringstream os;

  if (metric == "variance" || metric == "cosine") {
    Rng rng(a.cfg.seed);
    const DataSplit data = load_dataset(a.cfg.dataset, rng);
    const FeatureBank train = extract_features(a.net, data.train, Split::Train, a.cfg.eval_batch);
    const FeatureBank test = extract_features(a.net, data.test, Split::Test, a.cfg.eval_batch);
    const std::size_t classes = data.train.classes;
    if (metric == "variance") {
      os << "split,class,variance\n";
      for (const auto* bank : {&train, &test}) {
        for (std::size_t c = 0; c < classes; ++c) {
          os << (bank->split == Split::Train ? "train" : "test") << "," << c << ","
             << fmt(intra_cluster_variance(*bank, int(c))) << "\n";
        }
      }
    } else {
      os << "class,cosine\n";
      for (std::size_t c = 0; c < classes; ++c) os << c << "," << fmt(class_mean_cosine(train, test, int(c))) << "\n";
    }
    return os.str();
  }

  if (metric == "transition") {
    if (checkpoint_b.empty()) throw ArgumentError("transition needs --checkpoint-b");
    LoadedRun b = load_run(checkpoint_b);
    if (!a.ckpt.metadata.count("plan") || !b.ckpt.metadata.count("plan")) {
      throw ArgumentError("transition needs two structured-pruning checkpoints");
    }
    const auto result = importance_transition(ChannelPlan::parse(a.ckpt.meta("plan")), batchnorm_gammas(a.net),
                                              ChannelPlan::parse(b.ckpt.meta("plan")), batchnorm_gammas(b.net));
    os << "layer,count_a,mean_a,count_b,mean_b\n";
    if (!result) {
      os << "all,0,,0,\n";
      return os.str();
    }
    auto cell = [](double v) { return std::isnan(v) ? std::string() : fmt(v); };
    const auto plan_a = ChannelPlan::parse(a.ckpt.meta("plan"));
    const auto plan_b = ChannelPlan::parse(b.ckpt.meta("plan"));
    for (std::size_t l = 0; l < result->layer_mean_a.size(); ++l) {
      std::size_t ca = 0, cb = 0;
      for (std::size_t ch : plan_a.kept[l]) ca += !plan_b.keeps({l, ch});
      for (std::size_t ch : plan_b.kept[l]) cb += !plan_a.keeps({l, ch});
      os << l << "," << ca << "," << cell(result->layer_mean_a[l]) << "," << cb << ","
         << cell(result->layer_mean_b[l]) << "\n";
    }
    os << "all," << result->count_a << "," << cell(result->mean_a) << "," << result->count_b << ","
       << cell(result->mean_b) << "\n";
    return os.str();
  }

  // survival
  if (!a.ckpt.has_entry("ledger/provenance")) throw ArgumentError("checkpoint holds no pruning ledger");
  const RunState st = from_checkpoint(a.ckpt);
  std::vector<char> alive;
  if (st.mask) {
    alive = st.mask->bits();
  } else if (st.plan) {
    for (std::size_t l = 0; l < st.plan->widths.size(); ++l) {
      for (std::size_t ch = 0; ch < st.plan->widths[l]; ++ch) alive.push_back(st.plan->keeps({l, ch}));
    }
  } else {
    throw ArgumentError("checkpoint holds no mask or channel plan");
  }
  return survival_report(st.ledger, alive);
}

}  // namespace snnprune
