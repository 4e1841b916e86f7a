#include "pitl/training/trainer.hpp"

#include <cmath>
#include <fstream>

#include "pitl/errors.hpp"
#include "pitl/training/losses.hpp"

namespace pitl {

void TrainConfig::validate() const {
  if (shuffle) throw ConfigError("shuffled batches are not supported; windows stay in chronological order");
  if (!(divergence_limit > 0.0)) throw ConfigError("divergence limit must be > 0");
  adam().validate();
}

void TrainHistory::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write history " + path.string());
  out.precision(17);
  out << "epoch,train_objective,train_mse,train_mae,val_mse,val_mae\n";
  for (const EpochRecord& e : epochs) {
    out << e.epoch << ',' << e.train_objective << ',' << e.train_mse << ',' << e.train_mae << ',';
    if (e.val_mse) out << *e.val_mse;
    out << ',';
    if (e.val_mae) out << *e.val_mae;
    out << '\n';
  }
}

std::vector<double> predict(Model& model, const WindowBatch& windows) {
  if (windows.size() == 0) return {};
  const Tensor2D out = model.predict(windows.steps);
  return out.values();
}

Metrics evaluate(Model& model, const WindowBatch& windows) {
  const std::vector<double> pred = predict(model, windows);
  return {mse(pred, windows.targets.values()), mae(pred, windows.targets.values())};
}

TrainHistory train(Model& model, const WindowBatch& windows, const TrainConfig& cfg, const PhysicsData* physics,
                   const WindowBatch* validation) {
  cfg.validate();
  TrainHistory history;
  if (cfg.epochs == 0) return history;
  if (windows.size() == 0) throw ConfigError("no training windows");
  const bool use_physics = physics != nullptr && physics->config.alpha != 0.0;
  if (physics != nullptr) {
    physics->config.validate();
    if (physics->targets.size() != windows.size()) {
      throw DimensionError("physics targets are not aligned with the training windows");
    }
  }

  const std::size_t n = windows.size();
  const std::size_t batch = cfg.batch_size == 0 ? n : std::min(cfg.batch_size, n);
  std::vector<WindowBatch> batches;
  std::vector<PhysicsTargets> batch_physics;
  for (std::size_t b = 0; b < n; b += batch) {
    const std::size_t e = std::min(n, b + batch);
    batches.push_back(windows.slice(b, e));
    if (use_physics) batch_physics.push_back(physics->targets.slice(b, e));
  }

  std::vector<Param*> params = model.parameters();
  AdamState adam;
  const AdamConfig adam_cfg = cfg.adam();

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    for (std::size_t bi = 0; bi < batches.size(); ++bi) {
      const WindowBatch& wb = batches[bi];
      Tape tape;
      tape.set_skip_frozen(true);
      const Var pred = model.forward(tape, wb.steps);
      const Var actual = tape.constant(wb.targets);
      const Var loss = mse(pred, actual);
      Var obj = loss;
      if (use_physics && wb.size() >= 2) {
        obj = ad::add(loss, ad::scale(physics_term(pred, batch_physics[bi], physics->config), physics->config.alpha));
      }
      const double w = static_cast<double>(wb.size()) / static_cast<double>(n);
      rec.train_objective += w * obj.value()[0];
      rec.train_mse += w * loss.value()[0];
      rec.train_mae += w * mae(pred.value().values(), wb.targets.values());

      model.zero_grad();
      tape.backward(obj);
      adam_step(params, adam, adam_cfg);
    }
    if (!std::isfinite(rec.train_objective) || rec.train_objective > cfg.divergence_limit) {
      throw DivergenceError("training diverged at epoch " + std::to_string(epoch) + " (objective " +
                                std::to_string(rec.train_objective) + ")",
                            epoch);
    }
    if (validation != nullptr && validation->size() > 0) {
      const Metrics m = evaluate(model, *validation);
      rec.val_mse = m.mse;
      rec.val_mae = m.mae;
    }
    history.epochs.push_back(rec);
  }
  return history;
}

}  // namespace pitl
