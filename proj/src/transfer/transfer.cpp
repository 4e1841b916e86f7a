#include "pitl/transfer/transfer.hpp"

#include "pitl/cells/serialize.hpp"
#include "pitl/errors.hpp"

namespace pitl {

void TransferPlan::validate(const Model& source) const {
  if (k_transfer > source.layers().size()) {
    throw ConfigError("cannot transfer " + std::to_string(k_transfer) + " layers from a source with " +
                      std::to_string(source.layers().size()));
  }
  if (!(fine_tune_lr > 0.0)) throw ConfigError("fine-tune learning rate must be > 0");
  if (adapter_width && *adapter_width == 0) throw ConfigError("adapter width must be >= 1");
  for (const LayerSpec& l : new_layers) {
    if (l.width == 0) throw ConfigError("new layer width must be >= 1");
  }
  if (physics) physics->validate();
}

std::vector<LayerSpec> TransferPlan::uniform_layers(CellKind kind, std::size_t count, std::size_t width) {
  return std::vector<LayerSpec>(count, LayerSpec{kind, width, Activation::tanh, false});
}

CustomModel compose_custom(const Model& source, const TransferPlan& plan, std::size_t target_features,
                           std::uint64_t seed) {
  plan.validate(source);
  if (target_features == 0) throw ConfigError("target feature count must be >= 1");
  const std::size_t expected = plan.k_transfer > 0 ? source.layers().front().input_width() : source.input_width();
  const std::size_t adapter = plan.adapter_width.value_or(expected);
  if (plan.k_transfer > 0 && adapter != expected) {
    throw CompositionError("adapter (width " + std::to_string(adapter) + ") -> transferred layer 0 (expects input " +
                           std::to_string(expected) + ")");
  }

  ModelSpec spec;
  spec.input_width = target_features;
  spec.layers.push_back(LayerSpec{CellKind::dense, adapter, Activation::identity, false});
  for (std::size_t i = 0; i < plan.k_transfer; ++i) {
    LayerSpec ls = source.layers()[i].spec();
    ls.frozen = true;
    spec.layers.push_back(ls);
  }
  for (LayerSpec ls : plan.new_layers) {
    ls.frozen = false;
    spec.layers.push_back(ls);
  }
  spec.output_width = source.head().width();

  CustomModel out;
  out.model = Model(spec, seed);
  out.adapter_layer = 0;
  for (std::size_t i = 0; i < plan.k_transfer; ++i) {
    Layer& dst = out.model.layers()[i + 1];
    const Layer& src = source.layers()[i];
    for (std::size_t p = 0; p < dst.params().size(); ++p) {
      dst.params()[p].value = src.params()[p].value;
      dst.params()[p].zero_grad();
    }
    dst.set_frozen(true);
    out.transferred_layers.push_back(i + 1);
  }
  for (std::size_t i = 0; i < plan.new_layers.size(); ++i) out.new_layers.push_back(1 + plan.k_transfer + i);
  return out;
}

nlohmann::json custom_to_json(const CustomModel& m) {
  nlohmann::json doc = model_to_json(m.model);
  doc["transfer"] = {{"adapter_layer", m.adapter_layer},
                     {"transferred_layers", m.transferred_layers},
                     {"new_layers", m.new_layers}};
  return doc;
}

CustomModel custom_from_json(const nlohmann::json& doc) {
  CustomModel m;
  m.model = model_from_json(doc);
  try {
    const auto& t = doc.at("transfer");
    m.adapter_layer = t.at("adapter_layer").get<std::size_t>();
    m.transferred_layers = t.at("transferred_layers").get<std::vector<std::size_t>>();
    m.new_layers = t.at("new_layers").get<std::vector<std::size_t>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("custom model document: ") + e.what());
  }
  return m;
}

PretrainResult pretrain_source(const ModelSpec& spec, const WindowBatch& train_windows, const WindowBatch* test,
                               const TrainConfig& cfg, std::uint64_t seed) {
  if (train_windows.size() > 0 && train_windows.steps.front().cols() != spec.input_width) {
    throw DimensionError("source spec expects " + std::to_string(spec.input_width) + " features, windows have " +
                         std::to_string(train_windows.steps.front().cols()));
  }
  PretrainResult r{Model(spec, seed), {}, {}, std::nullopt};
  r.history = train(r.model, train_windows, cfg);
  r.train = evaluate(r.model, train_windows);
  if (test != nullptr && test->size() > 0) r.test = evaluate(r.model, *test);
  return r;
}

TrainHistory train_custom(CustomModel& model, const WindowBatch& windows, const TrainConfig& cfg,
                          const PhysicsData* physics, const WindowBatch* validation) {
  return train(model.model, windows, cfg, physics, validation);
}

TrainHistory fine_tune(CustomModel& model, const WindowBatch& windows, TrainConfig cfg, double learning_rate,
                       const PhysicsData* physics, const WindowBatch* validation) {
  if (!(learning_rate > 0.0)) throw ConfigError("fine-tune learning rate must be > 0");
  model.model.unfreeze_all();
  cfg.learning_rate = learning_rate;
  return train(model.model, windows, cfg, physics, validation);
}

TransferResult run_transfer(const Model& source, const TransferPlan& plan, const WindowBatch& windows,
                            const TrainConfig& custom_cfg, const TrainConfig& fine_tune_cfg, std::uint64_t seed,
                            const PhysicsData* physics, const WindowBatch* validation) {
  const std::size_t features = windows.size() > 0 ? windows.steps.front().cols() : source.input_width();
  TransferResult r{compose_custom(source, plan, features, seed), {}, {}};
  r.custom_history = train_custom(r.model, windows, custom_cfg, physics, validation);
  r.fine_tune_history = fine_tune(r.model, windows, fine_tune_cfg, plan.fine_tune_lr, physics, validation);
  return r;
}

TransferResult run_pitl(const Model& source, const TransferPlan& plan, const Dataset& raw_rows,
                        const WindowBatch& windows, const TrainConfig& custom_cfg, const TrainConfig& fine_tune_cfg,
                        std::uint64_t seed, const WindowBatch* validation) {
  if (!plan.physics) throw ConfigError("physics-informed transfer needs a physics configuration");
  const PhysicsData physics{*plan.physics, make_physics_targets(raw_rows, windows, plan.physics->feature_map)};
  return run_transfer(source, plan, windows, custom_cfg, fine_tune_cfg, seed, &physics, validation);
}

}  // namespace pitl
