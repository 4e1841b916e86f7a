#include "pitl/experiment/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "pitl/errors.hpp"
#include "pitl/experiment/manifest.hpp"
#include "pitl/experiment/plants.hpp"

namespace pitl::experiment {

using nlohmann::json;

namespace {

/// Reads keys of one JSON object and reports the ones nobody asked for.
class Fields {
 public:
  Fields(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(where_ + "." + key + ": " + e.what());
    }
  }

  template <class T>
  void get(const char* key, std::optional<T>& out) {
    seen_.insert(key);
    if (!j_.contains(key) || j_.at(key).is_null()) return;
    T v{};
    get(key, v);
    out = v;
  }

  const json* sub(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  std::string path(const char* key) const { return where_ + "." + key; }

  void finish() const {
    for (const auto& [key, _] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError(where_ + ": unknown key '" + key + "'");
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

asm1::Params merge_params(const asm1::Params& base, const json& overrides, const std::string& where) {
  if (!overrides.is_object()) throw ConfigError(where + ": expected an object");
  json merged = asm1::to_json(base);
  for (const auto& [key, value] : overrides.items()) {
    if (!merged.contains(key)) throw ConfigError(where + ": unknown key '" + key + "'");
    merged[key] = value;
  }
  try {
    return asm1::params_from_json(merged);
  } catch (const json::exception& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

CellKind parse_kind_at(const std::string& s, const std::string& where) {
  try {
    return parse_cell_kind(s);
  } catch (const ConfigError& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

json stack_json(const StackSpec& s) {
  return {{"kind", to_string(s.kind)}, {"layers", s.layers}, {"width", s.width}};
}

void read_stack(const json& j, StackSpec& s, const std::string& where) {
  Fields f(j, where);
  std::string kind = to_string(s.kind);
  f.get("kind", kind);
  s.kind = parse_kind_at(kind, where + ".kind");
  f.get("layers", s.layers);
  f.get("width", s.width);
  f.finish();
}

void read_train(const json& j, TrainConfig& c, const std::string& where) {
  Fields f(j, where);
  f.get("epochs", c.epochs);
  f.get("learning_rate", c.learning_rate);
  f.get("batch_size", c.batch_size);
  f.get("beta1", c.beta1);
  f.get("beta2", c.beta2);
  f.get("epsilon", c.epsilon);
  f.get("shuffle", c.shuffle);
  f.get("seed", c.seed);
  f.get("divergence_limit", c.divergence_limit);
  f.finish();
}

std::string path_json(const std::optional<std::filesystem::path>& p) { return p ? p->string() : std::string(); }

json entry_json(const ModelEntry& e) {
  json j{{"name", e.name}, {"preset", e.preset}, {"role", e.role == Role::baseline ? "baseline" : "transfer"}};
  if (e.role == Role::baseline) {
    j["model"] = stack_json(e.stack);
  } else {
    j["source"] = e.source == SourceKind::open ? "open" : "industrial";
    j["k_transfer"] = e.k_transfer;
    j["adapter_width"] = e.adapter_width ? json(*e.adapter_width) : json(nullptr);
    j["new_layers"] = stack_json(e.new_layers);
    j["fine_tune_lr"] = e.fine_tune_lr;
    j["physics"] = e.physics;
    j["alpha"] = e.alpha ? json(*e.alpha) : json(nullptr);
  }
  return j;
}

ModelEntry read_entry(const json& j, const std::string& where) {
  Fields f(j, where);
  std::string preset_name;
  f.get("preset", preset_name);
  if (preset_name.empty()) throw ConfigError(where + ": 'preset' is required");
  ModelEntry e = preset(preset_name);
  f.get("name", e.name);
  std::string role;
  f.get("role", role);
  if (!role.empty() && role != (e.role == Role::baseline ? "baseline" : "transfer")) {
    throw ConfigError(where + ".role: preset '" + preset_name + "' is a " +
                      (e.role == Role::baseline ? "baseline" : "transfer") + " model");
  }
  if (const json* m = f.sub("model")) {
    if (e.role != Role::baseline) throw ConfigError(where + ".model: only baselines take 'model'");
    read_stack(*m, e.stack, f.path("model"));
  }
  auto transfer_only = [&](const char* key) {
    if (e.role != Role::transfer && j.contains(key)) {
      throw ConfigError(where + "." + key + ": only transfer models take '" + key + "'");
    }
  };
  for (const char* key : {"source", "k_transfer", "adapter_width", "new_layers", "fine_tune_lr", "physics", "alpha"}) {
    transfer_only(key);
  }
  std::string source = e.source == SourceKind::open ? "open" : "industrial";
  f.get("source", source);
  if (source == "open") {
    e.source = SourceKind::open;
  } else if (source == "industrial") {
    e.source = SourceKind::industrial;
  } else {
    throw ConfigError(where + ".source: expected 'open' or 'industrial', got '" + source + "'");
  }
  f.get("k_transfer", e.k_transfer);
  f.get("adapter_width", e.adapter_width);
  if (const json* n = f.sub("new_layers")) read_stack(*n, e.new_layers, f.path("new_layers"));
  f.get("fine_tune_lr", e.fine_tune_lr);
  f.get("physics", e.physics);
  f.get("alpha", e.alpha);
  f.finish();
  return e;
}

}  // namespace

SisterPlantConfig::SisterPlantConfig() : params(sister_params()) {}
TargetPlantConfig::TargetPlantConfig() : params(target_params()) {}

ExperimentConfig::ExperimentConfig() {
  open_source.model = {CellKind::lstm, 5, 25};
  open_source.train.epochs = 60;
  open_source.train.batch_size = 32;
  industrial_source.model = {CellKind::lstm, 6, 120};
  industrial_source.train.epochs = 20;
  industrial_source.train.batch_size = 32;
  target_train.epochs = 300;
  custom_train.epochs = 200;
  fine_tune.epochs = 50;
  physics.feature_map = target_input_map();
  models = benchmark_models();
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> kNames{"standard",       "more_complex",  "less_complex",
                                               "open_source_tl", "industrial_tl", "pitl"};
  return kNames;
}

ModelEntry preset(const std::string& name) {
  ModelEntry e;
  e.name = name;
  e.preset = name;
  if (name == "standard") {
    e.stack = {CellKind::lstm, 5, 30};
  } else if (name == "more_complex") {
    e.stack = {CellKind::lstm, 6, 60};
  } else if (name == "less_complex") {
    e.stack = {CellKind::lstm, 3, 20};
  } else if (name == "open_source_tl") {
    e.role = Role::transfer;
    e.source = SourceKind::open;
    e.new_layers = {CellKind::lstm, 6, 30};
  } else if (name == "industrial_tl") {
    e.role = Role::transfer;
    e.source = SourceKind::industrial;
    e.new_layers = {CellKind::lstm, 3, 30};
  } else if (name == "pitl") {
    e.role = Role::transfer;
    e.source = SourceKind::industrial;
    e.new_layers = {CellKind::simple_rnn, 3, 30};
    e.physics = true;
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
  return e;
}

std::vector<ModelEntry> benchmark_models() {
  std::vector<ModelEntry> out;
  for (const auto& n : preset_names()) out.push_back(preset(n));
  return out;
}

void ExperimentConfig::validate() const {
  if (seeds.empty()) throw ConfigError("seeds: at least one seed is required");
  if (protocol.window == 0) throw ConfigError("protocol.window must be >= 1");
  for (double r : {protocol.train_ratio, protocol.source_train_ratio, protocol.industrial_train_ratio}) {
    if (!(r > 0.0 && r <= 1.0)) throw ConfigError("protocol: train ratios must lie in (0, 1]");
  }
  if (!(plants.sister.noise_frac >= 0.0)) throw ConfigError("plants.sister.noise_frac must be >= 0");
  if (!(plants.target.label_noise >= 0.0)) throw ConfigError("plants.target.label_noise must be >= 0");
  if (plants.sister.keep_columns.empty()) throw ConfigError("plants.sister.keep_columns is empty");
  for (const TrainConfig* t : {&open_source.train, &industrial_source.train, &target_train, &custom_train, &fine_tune}) {
    t->validate();
  }
  if (!(physics.alpha >= 0.0)) throw ConfigError("physics.alpha must be >= 0");
  std::set<std::string> names;
  for (const ModelEntry& e : models) {
    if (e.name.empty()) throw ConfigError("models: empty name");
    if (!names.insert(e.name).second) throw ConfigError("models: duplicate name '" + e.name + "'");
    const StackSpec& s = e.role == Role::baseline ? e.stack : e.new_layers;
    if (e.role == Role::baseline && s.layers == 0) throw ConfigError("models." + e.name + ": needs >= 1 layer");
    if (s.layers > 0 && s.width == 0) throw ConfigError("models." + e.name + ": layer width must be >= 1");
    if (e.role == Role::transfer) {
      if (!(e.fine_tune_lr > 0.0)) throw ConfigError("models." + e.name + ": fine_tune_lr must be > 0");
      if (e.alpha && !(*e.alpha >= 0.0)) throw ConfigError("models." + e.name + ": alpha must be >= 0");
      const std::size_t src_layers =
          e.source == SourceKind::open ? open_source.model.layers : industrial_source.model.layers;
      if (e.k_transfer > src_layers) {
        throw ConfigError("models." + e.name + ": k_transfer " + std::to_string(e.k_transfer) + " exceeds the " +
                          std::to_string(src_layers) + " source layers");
      }
    }
  }
}

json to_json(const TrainConfig& c) {
  return {{"epochs", c.epochs}, {"learning_rate", c.learning_rate}, {"batch_size", c.batch_size},
          {"beta1", c.beta1},   {"beta2", c.beta2},                 {"epsilon", c.epsilon},
          {"shuffle", c.shuffle}, {"seed", c.seed},                 {"divergence_limit", c.divergence_limit}};
}

json to_json(const ExperimentConfig& c) {
  json models = json::array();
  for (const auto& e : c.models) models.push_back(entry_json(e));
  auto source = [](const SourceConfig& s) {
    return json{{"model", stack_json(s.model)}, {"train", to_json(s.train)}, {"path", path_json(s.path)}};
  };
  return {
      {"seed", c.seed},
      {"seeds", c.seeds},
      {"output_dir", c.output_dir.string()},
      {"protocol",
       {{"window", c.protocol.window},
        {"train_ratio", c.protocol.train_ratio},
        {"validation_len", c.protocol.validation_len},
        {"target_train_windows", c.protocol.target_train_windows},
        {"source_train_ratio", c.protocol.source_train_ratio},
        {"industrial_train_ratio", c.protocol.industrial_train_ratio}}},
      {"plants",
       {{"source", {{"points", c.plants.source.points}, {"params", asm1::to_json(c.plants.source.params)}}},
        {"sister",
         {{"points", c.plants.sister.points},
          {"noise_frac", c.plants.sister.noise_frac},
          {"keep_columns", c.plants.sister.keep_columns},
          {"params", asm1::to_json(c.plants.sister.params)}}},
        {"target",
         {{"points", c.plants.target.points},
          {"label_noise", c.plants.target.label_noise},
          {"params", asm1::to_json(c.plants.target.params)}}}}},
      {"datasets",
       {{"source", path_json(c.datasets.source)},
        {"industrial", path_json(c.datasets.industrial)},
        {"target", path_json(c.datasets.target)}}},
      {"sources", {{"open", source(c.open_source)}, {"industrial", source(c.industrial_source)}}},
      {"training", {{"target", to_json(c.target_train)}, {"custom", to_json(c.custom_train)}, {"fine_tune", to_json(c.fine_tune)}}},
      {"physics",
       {{"alpha", c.physics.alpha},
        {"include_aeration", c.physics.include_aeration},
        {"feature_map", asm1::to_json(c.physics.feature_map)},
        {"params", c.physics.params ? asm1::to_json(*c.physics.params) : json(nullptr)}}},
      {"models", models},
  };
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  Fields f(j, "config");
  f.get("seed", c.seed);
  f.get("seeds", c.seeds);
  std::string out = c.output_dir.string();
  f.get("output_dir", out);
  c.output_dir = out;

  if (const json* p = f.sub("protocol")) {
    Fields g(*p, "protocol");
    g.get("window", c.protocol.window);
    g.get("train_ratio", c.protocol.train_ratio);
    g.get("validation_len", c.protocol.validation_len);
    g.get("target_train_windows", c.protocol.target_train_windows);
    g.get("source_train_ratio", c.protocol.source_train_ratio);
    g.get("industrial_train_ratio", c.protocol.industrial_train_ratio);
    g.finish();
  }

  if (const json* p = f.sub("plants")) {
    Fields g(*p, "plants");
    if (const json* s = g.sub("source")) {
      Fields h(*s, "plants.source");
      h.get("points", c.plants.source.points);
      if (const json* q = h.sub("params")) c.plants.source.params = merge_params(c.plants.source.params, *q, "plants.source.params");
      h.finish();
    }
    if (const json* s = g.sub("sister")) {
      Fields h(*s, "plants.sister");
      h.get("points", c.plants.sister.points);
      h.get("noise_frac", c.plants.sister.noise_frac);
      h.get("keep_columns", c.plants.sister.keep_columns);
      if (const json* q = h.sub("params")) c.plants.sister.params = merge_params(c.plants.sister.params, *q, "plants.sister.params");
      h.finish();
    }
    if (const json* s = g.sub("target")) {
      Fields h(*s, "plants.target");
      h.get("points", c.plants.target.points);
      h.get("label_noise", c.plants.target.label_noise);
      if (const json* q = h.sub("params")) c.plants.target.params = merge_params(c.plants.target.params, *q, "plants.target.params");
      h.finish();
    }
    g.finish();
  }

  if (const json* p = f.sub("datasets")) {
    Fields g(*p, "datasets");
    auto path = [&](const char* key, std::optional<std::filesystem::path>& out) {
      std::string s;
      g.get(key, s);
      if (!s.empty()) out = s;
    };
    path("source", c.datasets.source);
    path("industrial", c.datasets.industrial);
    path("target", c.datasets.target);
    g.finish();
  }

  if (const json* p = f.sub("sources")) {
    Fields g(*p, "sources");
    auto source = [&](const char* key, SourceConfig& s) {
      const json* q = g.sub(key);
      if (q == nullptr) return;
      const std::string where = std::string("sources.") + key;
      Fields h(*q, where);
      if (const json* m = h.sub("model")) read_stack(*m, s.model, where + ".model");
      if (const json* t = h.sub("train")) read_train(*t, s.train, where + ".train");
      std::string path;
      h.get("path", path);
      if (!path.empty()) s.path = path;
      h.finish();
    };
    source("open", c.open_source);
    source("industrial", c.industrial_source);
    g.finish();
  }

  if (const json* p = f.sub("training")) {
    Fields g(*p, "training");
    if (const json* t = g.sub("target")) read_train(*t, c.target_train, "training.target");
    if (const json* t = g.sub("custom")) read_train(*t, c.custom_train, "training.custom");
    if (const json* t = g.sub("fine_tune")) read_train(*t, c.fine_tune, "training.fine_tune");
    g.finish();
  }

  if (const json* p = f.sub("physics")) {
    Fields g(*p, "physics");
    g.get("alpha", c.physics.alpha);
    g.get("include_aeration", c.physics.include_aeration);
    if (const json* m = g.sub("feature_map")) {
      try {
        c.physics.feature_map = asm1::input_map_from_json(*m);
      } catch (const json::exception& e) {
        throw ConfigError(std::string("physics.feature_map: ") + e.what());
      }
    }
    if (const json* q = g.sub("params"); q != nullptr && !q->is_null()) {
      c.physics.params = merge_params(c.plants.target.params, *q, "physics.params");
    }
    g.finish();
  }

  if (const json* p = f.sub("models")) {
    if (!p->is_array()) throw ConfigError("models: expected an array");
    c.models.clear();
    for (std::size_t i = 0; i < p->size(); ++i) {
      const json& item = p->at(i);
      const std::string where = "models[" + std::to_string(i) + "]";
      c.models.push_back(item.is_string() ? preset(item.get<std::string>()) : read_entry(item, where));
    }
  }
  f.finish();
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  try {
    return config_from_json(doc);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string config_hash(const ExperimentConfig& c) { return sha256_hex(to_json(c).dump()); }

}  // namespace pitl::experiment
