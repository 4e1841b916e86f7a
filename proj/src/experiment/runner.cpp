#include "pitl/experiment/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "pitl/cells/serialize.hpp"
#include "pitl/errors.hpp"
#include "pitl/experiment/manifest.hpp"
#include "pitl/experiment/plants.hpp"
#include "pitl/transfer/transfer.hpp"

namespace pitl::experiment {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::mutex g_log_mutex;
LogSink g_log_sink;

void log(const std::string& line) {
  std::lock_guard<std::mutex> lock(g_log_mutex);
  if (g_log_sink) {
    g_log_sink(line);
  } else {
    std::cerr << line << '\n';
  }
}

std::string seed_dir(std::uint64_t seed) { return "seed_" + std::to_string(seed); }

std::uint64_t name_tag(const std::string& name) { return std::stoull(sha256_hex(name).substr(0, 15), nullptr, 16); }

Dataset read_dataset(const fs::path& path) {
  IngestResult r = ingest_csv(path);
  if (r.dropped_rows > 0) {
    log("ingest " + path.string() + ": dropped " + std::to_string(r.dropped_rows) + " rows with missing cells");
  }
  return std::move(r.dataset);
}

double uniform_step(const Dataset& ds) {
  if (ds.rows() < 2) throw ConfigError("dataset '" + ds.name + "' is too short for a time step");
  const double dt = ds.time[1] - ds.time[0];
  for (std::size_t i = 2; i < ds.rows(); ++i) {
    if (std::abs(ds.time[i] - ds.time[i - 1] - dt) > 1e-9 * std::max(1.0, dt)) {
      throw ConfigError("dataset '" + ds.name + "' is not uniformly sampled at row " + std::to_string(i));
    }
  }
  return dt;
}

std::vector<double> denormalized(const std::vector<double>& z, const ColumnRange& r) {
  std::vector<double> out;
  out.reserve(z.size());
  for (double v : z) out.push_back(r.denormalize(v));
  return out;
}

json metrics_json(const MetricsRow& row, const std::optional<double>& pr) {
  json m = json::object();
  for (std::size_t k = 0; k < 6; ++k) m[kMetricKeys[k]] = row.values[k];
  if (pr) m["train_physics_residual"] = *pr;
  return m;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

std::string stage_prefix(std::uint64_t seed, const std::string& stage) {
  return "stage '" + stage + "' (seed " + std::to_string(seed) + "): ";
}

/// Re-throws with the stage name prepended, keeping the exit-code class.
template <class F>
auto in_stage(std::uint64_t seed, const std::string& stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const DivergenceError&) {
    throw;
  } catch (const ConfigError& e) {
    throw ConfigError(stage_prefix(seed, stage) + e.what());
  } catch (const CompositionError& e) {
    throw CompositionError(stage_prefix(seed, stage) + e.what());
  } catch (const std::exception& e) {
    throw Error(stage_prefix(seed, stage) + e.what());
  }
}

}  // namespace

void set_log_sink(LogSink sink) {
  std::lock_guard<std::mutex> lock(g_log_mutex);
  g_log_sink = std::move(sink);
}

std::size_t thread_cap() {
  const char* env = std::getenv("PITL_THREADS");
  if (env == nullptr || *env == '\0') return 1;
  char* end = nullptr;
  const unsigned long v = std::strtoul(env, &end, 10);
  if (end == env || *end != '\0' || v == 0) throw ConfigError(std::string("PITL_THREADS must be a positive integer, got '") + env + "'");
  return v;
}

PreparedTarget prepare_target(const Dataset& raw, const Protocol& protocol) {
  PreparedTarget t;
  t.raw = raw;
  t.raw_split = split_sequential(raw, protocol.train_ratio, protocol.validation_len);
  t.stats = fit_stats(t.raw_split.train);
  const WindowBatch all_train = make_windows(normalize(t.raw_split.train, t.stats), protocol.window);
  t.train = protocol.target_train_windows > 0 ? all_train.tail(protocol.target_train_windows) : all_train;
  t.test = make_windows(normalize(t.raw_split.test, t.stats), protocol.window);
  if (protocol.validation_len > 0) t.validation = make_windows(normalize(t.raw_split.validation, t.stats), protocol.window);
  return t;
}

PreparedSource prepare_source(const Dataset& raw, double train_ratio, std::size_t window) {
  PreparedSource s;
  s.raw = raw;
  const SplitSet split = split_sequential(raw, train_ratio, 0);
  s.stats = fit_stats(split.train);
  s.train = make_windows(normalize(split.train, s.stats), window);
  if (split.test.rows() >= window) s.test = make_windows(normalize(split.test, s.stats), window);
  return s;
}

SeedData load_datasets(const ExperimentConfig& cfg, std::uint64_t seed) {
  SeedData d;
  d.source = cfg.datasets.source ? read_dataset(*cfg.datasets.source) : generate_source(seed, cfg.plants.source);
  d.industrial =
      cfg.datasets.industrial ? read_dataset(*cfg.datasets.industrial) : generate_industrial(seed, cfg.plants.sister);
  d.target = cfg.datasets.target ? read_dataset(*cfg.datasets.target) : generate_target(seed, cfg.plants.target);
  return d;
}

PhysicsLossConfig physics_config(const ExperimentConfig& cfg, const PreparedTarget& target, double alpha) {
  PhysicsLossConfig p;
  p.alpha = alpha;
  p.rate_params = cfg.physics.params.value_or(cfg.plants.target.params);
  p.include_aeration = cfg.physics.include_aeration;
  p.feature_map = cfg.physics.feature_map;
  p.dt = uniform_step(target.raw);
  p.target_range = target.stats.target;
  p.validate();
  return p;
}

struct SeedRunner::Impl {
  const ExperimentConfig& cfg;
  std::uint64_t seed;
  fs::path out;
  std::string command;
  SeedData data;
  PreparedTarget target;
  std::map<SourceKind, Model> sources;
  std::map<SourceKind, json> source_info;

  Model& source(SourceKind kind) {
    auto it = sources.find(kind);
    if (it != sources.end()) return it->second;
    const bool open = kind == SourceKind::open;
    const SourceConfig& sc = open ? cfg.open_source : cfg.industrial_source;
    const std::string label = open ? "open_source" : "industrial_source";
    return in_stage(seed, label, [&]() -> Model& {
      if (sc.path) {
        log("[seed " + std::to_string(seed) + "] loading " + label + " from " + sc.path->string());
        source_info[kind] = {{"path", sc.path->string()}, {"sha256", sha256_file(*sc.path)}};
        return sources.emplace(kind, load_model(*sc.path)).first->second;
      }
      const PreparedSource ps = prepare_source(open ? data.source : data.industrial,
                                               open ? cfg.protocol.source_train_ratio : cfg.protocol.industrial_train_ratio,
                                               cfg.protocol.window);
      const ModelSpec spec = ModelSpec::stack(ps.raw.feature_count(), sc.model.kind, sc.model.layers, sc.model.width);
      log("[seed " + std::to_string(seed) + "] pretraining " + label + " (" + std::to_string(sc.model.layers) + "x" +
          std::to_string(sc.model.width) + " " + to_string(sc.model.kind) + ", " + std::to_string(ps.train.size()) +
          " windows, " + std::to_string(sc.train.epochs) + " epochs)");
      PretrainResult r = pretrain_source(spec, ps.train, ps.test.size() > 0 ? &ps.test : nullptr, sc.train,
                                         sub_seed(seed, open ? 11 : 12));
      const fs::path dir = out / "sources" / seed_dir(seed) / label;
      fs::create_directories(dir);
      save_model(r.model, dir / "model.json");
      r.history.write_csv(dir / "history.csv");
      json info{{"train_mse", r.train.mse}, {"train_mae", r.train.mae}, {"model_sha256", sha256_file(dir / "model.json")}};
      if (r.test) {
        info["test_mse"] = r.test->mse;
        info["test_mae"] = r.test->mae;
      }
      write_text(dir / "summary.json", info.dump(2) + "\n");
      source_info[kind] = info;
      log("[seed " + std::to_string(seed) + "] " + label + " train mse " + std::to_string(r.train.mse) +
          (r.test ? ", test mse " + std::to_string(r.test->mse) : std::string()));
      return sources.emplace(kind, std::move(r.model)).first->second;
    });
  }
};

SeedRunner::SeedRunner(const ExperimentConfig& cfg, std::uint64_t seed, fs::path out, std::string command)
    : impl_(std::make_unique<Impl>(Impl{cfg, seed, std::move(out), std::move(command), {}, {}, {}, {}})) {
  impl_->data = in_stage(seed, "datasets", [&] { return load_datasets(cfg, seed); });
  impl_->target = in_stage(seed, "prepare target", [&] { return prepare_target(impl_->data.target, cfg.protocol); });
}

SeedRunner::~SeedRunner() = default;

const PreparedTarget& SeedRunner::target() const { return impl_->target; }

RunResult SeedRunner::run(const ModelEntry& entry, std::size_t order) {
  Impl& s = *impl_;
  const ExperimentConfig& cfg = s.cfg;
  const PreparedTarget& t = s.target;
  const fs::path dir = s.out / "runs" / seed_dir(s.seed) / entry.name;
  fs::create_directories(dir);

  RunResult result;
  result.row.name = entry.name;
  result.row.order = order;
  result.row.seed = s.seed;

  Manifest m;
  m.command = s.command;
  m.model = entry.name;
  m.preset = entry.preset;
  m.order = order;
  m.seed = s.seed;
  m.config = to_json(cfg);
  m.config_hash = config_hash(cfg);
  m.settings = {{"init_seed", sub_seed(s.seed, name_tag(entry.name))},
                {"train_windows", t.train.size()},
                {"test_windows", t.test.size()},
                {"validation_windows", t.validation.size()},
                {"target_rows", t.raw.rows()}};

  const double alpha = entry.physics ? entry.alpha.value_or(cfg.physics.alpha) : 0.0;
  std::optional<PhysicsLossConfig> pcfg;
  std::optional<PhysicsTargets> ptargets;
  const bool can_map_physics = [&] {
    try {
      pcfg = physics_config(cfg, t, alpha);
      ptargets = make_physics_targets(t.raw_split.train, t.train, pcfg->feature_map);
      return true;
    } catch (const ConfigError&) {
      if (entry.physics) throw;
      return false;
    }
  }();

  const std::uint64_t init_seed = sub_seed(s.seed, name_tag(entry.name));
  std::optional<Model> baseline;
  std::optional<CustomModel> custom;
  std::vector<std::string> files;
  try {
    in_stage(s.seed, entry.name, [&] {
      if (entry.role == Role::baseline) {
        const ModelSpec spec =
            ModelSpec::stack(t.raw.feature_count(), entry.stack.kind, entry.stack.layers, entry.stack.width);
        log("[seed " + std::to_string(s.seed) + "] training " + entry.name);
        baseline.emplace(spec, init_seed);
        TrainHistory h = train(*baseline, t.train, cfg.target_train, nullptr, nullptr);
        h.write_csv(dir / "history.csv");
        save_model(*baseline, dir / "model.json");
        files = {"history.csv", "model.json"};
        m.settings["train"] = to_json(cfg.target_train);
        m.settings["spec"] = spec_to_json(spec);
      } else {
        Model& src = s.source(entry.source);
        TransferPlan plan;
        plan.k_transfer = entry.k_transfer;
        plan.adapter_width = entry.adapter_width;
        plan.new_layers = TransferPlan::uniform_layers(entry.new_layers.kind, entry.new_layers.layers, entry.new_layers.width);
        plan.fine_tune_lr = entry.fine_tune_lr;
        if (entry.physics) plan.physics = *pcfg;
        log("[seed " + std::to_string(s.seed) + "] transfer " + entry.name);
        // validation is scored once after training, not per epoch
        const WindowBatch* val = nullptr;
        TransferResult r = entry.physics ? run_pitl(src, plan, t.raw_split.train, t.train, cfg.custom_train,
                                                    cfg.fine_tune, init_seed, val)
                                         : run_transfer(src, plan, t.train, cfg.custom_train, cfg.fine_tune,
                                                        init_seed, nullptr, val);
        r.custom_history.write_csv(dir / "history_custom.csv");
        r.fine_tune_history.write_csv(dir / "history_fine_tune.csv");
        write_text(dir / "model.json", custom_to_json(r.model).dump(1) + "\n");
        files = {"history_custom.csv", "history_fine_tune.csv", "model.json"};
        custom.emplace(std::move(r.model));
        m.settings["custom_train"] = to_json(cfg.custom_train);
        m.settings["fine_tune"] = to_json(cfg.fine_tune);
        m.settings["fine_tune_lr"] = entry.fine_tune_lr;
        m.settings["spec"] = spec_to_json(custom->model.spec());
        m.settings["source"] = s.source_info[entry.source];
        if (entry.physics) m.settings["alpha"] = alpha;
      }
    });
  } catch (const DivergenceError& e) {
    m.status = "diverged";
    m.diagnostic = e.what();
    result.row.diverged = true;
    result.row.diagnostic = e.what();
    log("[seed " + std::to_string(s.seed) + "] " + entry.name + " diverged: " + e.what());
    write_manifest(m, dir);
    return result;
  }

  Model& model = baseline ? *baseline : custom->model;
  const Metrics train_m = evaluate(model, t.train);
  const Metrics test_m = evaluate(model, t.test);
  const Metrics val_m = t.validation.size() > 0 ? evaluate(model, t.validation) : Metrics{};
  result.row.values = {train_m.mse, test_m.mse, val_m.mse, train_m.mae, test_m.mae, val_m.mae};
  const ColumnRange& tr = t.stats.target;
  result.train_pred = denormalized(predict(model, t.train), tr);
  result.test_pred = denormalized(predict(model, t.test), tr);
  if (t.validation.size() > 0) result.val_pred = denormalized(predict(model, t.validation), tr);
  if (can_map_physics && t.train.size() >= 2) {
    result.train_physics_residual = physics_residual(ptargets->y, result.train_pred, ptargets->exog, *pcfg);
  }

  std::ostringstream pred;
  pred << "t_days,split,actual,predicted\n";
  auto emit = [&](const char* split, const WindowBatch& w, const std::vector<double>& p) {
    for (std::size_t i = 0; i < w.size(); ++i) {
      pred << w.target_time[i] << ',' << split << ',' << tr.denormalize(w.targets(i, 0)) << ',' << p[i] << '\n';
    }
  };
  pred.precision(17);
  emit("train", t.train, result.train_pred);
  emit("test", t.test, result.test_pred);
  emit("validation", t.validation, result.val_pred);
  write_text(dir / "predictions.csv", pred.str());
  files.push_back("predictions.csv");

  for (const auto& f : files) m.files[f];
  m.metrics = metrics_json(result.row, result.train_physics_residual);
  write_manifest(m, dir);
  log("[seed " + std::to_string(s.seed) + "] " + entry.name + ": train mse " + std::to_string(train_m.mse) +
      ", test mse " + std::to_string(test_m.mse) + ", val mse " + std::to_string(val_m.mse));
  return result;
}

void SeedRunner::write_predictions(const std::vector<ModelEntry>& entries, const std::vector<RunResult>& results) const {
  const PreparedTarget& t = impl_->target;
  const fs::path dir = impl_->out / "predictions";
  fs::create_directories(dir);
  std::ostringstream out;
  out.precision(17);
  out << "t_days,split,actual";
  for (const auto& e : entries) out << ',' << e.name;
  out << '\n';
  auto emit = [&](const char* split, const WindowBatch& w, std::vector<double> RunResult::*pred) {
    for (std::size_t i = 0; i < w.size(); ++i) {
      out << w.target_time[i] << ',' << split << ',' << t.stats.target.denormalize(w.targets(i, 0));
      for (const auto& r : results) {
        out << ',';
        if (!r.row.diverged) out << (r.*pred)[i];
      }
      out << '\n';
    }
  };
  emit("train", t.train, &RunResult::train_pred);
  emit("test", t.test, &RunResult::test_pred);
  emit("validation", t.validation, &RunResult::val_pred);
  write_text(dir / (seed_dir(impl_->seed) + ".csv"), out.str());
}

void cmd_simulate(const ExperimentConfig& cfg) {
  const fs::path dir = cfg.output_dir;
  fs::create_directories(dir);
  const SeedData d = in_stage(cfg.seed, "simulate", [&] { return load_datasets(cfg, cfg.seed); });
  write_csv(d.source, dir / "source_open.csv");
  write_csv(d.industrial, dir / "industrial.csv");
  write_csv(d.target, dir / "target.csv");
  log("wrote " + std::to_string(d.source.rows()) + "-row source_open.csv, " + std::to_string(d.industrial.rows()) +
      "-row industrial.csv, " + std::to_string(d.target.rows()) + "-row target.csv to " + dir.string());
}

namespace {

void write_reports(const MetricsReport& report, const fs::path& dir) {
  fs::create_directories(dir);
  write_text(dir / "report.csv", summary_csv(report));
  write_text(dir / "runs.csv", runs_csv(report));
  write_text(dir / "report.txt", report_table(report));
}

MetricsReport run_single_seed(const ExperimentConfig& cfg, Role role, const std::string& command) {
  std::vector<ModelEntry> entries;
  for (const auto& e : cfg.models)
    if (e.role == role) entries.push_back(e);
  if (entries.empty()) {
    throw ConfigError(std::string("config lists no ") + (role == Role::baseline ? "baseline" : "transfer") + " models");
  }
  SeedRunner runner(cfg, cfg.seed, cfg.output_dir, command);
  MetricsReport report;
  std::vector<RunResult> results;
  for (std::size_t i = 0; i < cfg.models.size(); ++i) {
    if (cfg.models[i].role != role) continue;
    results.push_back(runner.run(cfg.models[i], i));
    report.rows.push_back(results.back().row);
  }
  runner.write_predictions(entries, results);
  report.config_hashes = {config_hash(cfg)};
  write_reports(report, cfg.output_dir);
  return report;
}

}  // namespace

MetricsReport cmd_train(const ExperimentConfig& cfg) { return run_single_seed(cfg, Role::baseline, "train"); }

MetricsReport cmd_transfer(const ExperimentConfig& cfg) { return run_single_seed(cfg, Role::transfer, "transfer"); }

MetricsReport cmd_report(const std::vector<fs::path>& run_dirs, const std::optional<fs::path>& out) {
  MetricsReport report = collect_report(run_dirs);
  if (out) write_reports(report, *out);
  return report;
}

MetricsReport cmd_benchmark(const ExperimentConfig& cfg) {
  if (cfg.models.empty()) throw ConfigError("config lists no models");
  const std::size_t n = cfg.seeds.size();
  std::vector<std::vector<RunResult>> per_seed(n);
  std::vector<std::exception_ptr> errors(n);
  std::mutex next_mutex;
  std::size_t next = 0;

  auto worker = [&] {
    for (;;) {
      std::size_t i;
      {
        std::lock_guard<std::mutex> lock(next_mutex);
        if (next == n) return;
        i = next++;
      }
      try {
        SeedRunner runner(cfg, cfg.seeds[i], cfg.output_dir, "benchmark");
        for (std::size_t k = 0; k < cfg.models.size(); ++k) per_seed[i].push_back(runner.run(cfg.models[k], k));
        runner.write_predictions(cfg.models, per_seed[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::min(thread_cap(), n);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  MetricsReport report;
  for (const auto& runs : per_seed)
    for (const auto& r : runs) report.rows.push_back(r.row);
  std::stable_sort(report.rows.begin(), report.rows.end(), [](const MetricsRow& a, const MetricsRow& b) {
    return a.order != b.order ? a.order < b.order : a.seed < b.seed;
  });
  report.config_hashes = {config_hash(cfg)};
  write_reports(report, cfg.output_dir);
  return report;
}

}  // namespace pitl::experiment
