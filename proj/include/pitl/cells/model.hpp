#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "pitl/cells/layer_spec.hpp"
#include "pitl/numgrad/init.hpp"
#include "pitl/numgrad/param.hpp"
#include "pitl/numgrad/tape.hpp"

namespace pitl {

/// Parameters of one layer and its sequence-to-sequence forward pass.
class Layer {
 public:
  /// Glorot-uniform weights from `rng`, zero biases.
  Layer(LayerSpec spec, std::size_t input_width, Rng& rng);

  const LayerSpec& spec() const noexcept { return spec_; }
  std::size_t input_width() const noexcept { return input_width_; }
  std::size_t width() const noexcept { return spec_.width; }

  std::vector<Param>& params() noexcept { return params_; }
  const std::vector<Param>& params() const noexcept { return params_; }
  Param& param(std::string_view name);
  const Param& param(std::string_view name) const;

  void set_frozen(bool frozen);

  /// Dense layers map every step independently; recurrent layers unroll from
  /// a zero state and return the hidden state at every step.
  std::vector<Var> forward(Tape& tape, std::span<const Var> sequence);

 private:
  LayerSpec spec_;
  std::size_t input_width_;
  std::vector<Param> params_;
};

/// Stack of layers with a dense identity head, predicting one value per window
/// from the head applied to the top layer's last step.
class Model {
 public:
  Model() = default;
  Model(const ModelSpec& spec, std::uint64_t seed);

  ModelSpec spec() const;
  std::size_t input_width() const noexcept { return input_width_; }

  std::vector<Layer>& layers() noexcept { return layers_; }
  const std::vector<Layer>& layers() const noexcept { return layers_; }
  Layer& head() { return head_.front(); }
  const Layer& head() const { return head_.front(); }

  /// Every parameter, hidden layers first, head last.
  std::vector<Param*> parameters();
  std::vector<const Param*> parameters() const;

  void unfreeze_all();
  void zero_grad();

  /// `window` holds T >= 1 tensors of shape B x input_width; returns B x output_width.
  Var forward(Tape& tape, std::span<const Tensor2D> window);
  /// Forward pass without keeping the tape.
  Tensor2D predict(std::span<const Tensor2D> window);

 private:
  std::size_t input_width_ = 0;
  std::vector<Layer> layers_;
  std::vector<Layer> head_;  // exactly one element once constructed
};

}  // namespace pitl
