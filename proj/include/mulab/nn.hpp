#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mulab/rng.hpp"

namespace mulab {

using Logits = std::vector<double>;

/// Small fully connected classifier with tanh hidden layers and raw logits
/// at the output. Weights are row-major (out x in) per layer. All training
/// code mutates a net single-threaded; forward on a frozen net is pure.
struct Mlp {
  std::vector<int> layer_dims;  // input dim, hidden dims..., class count
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;

  int input_dim() const { return layer_dims.front(); }
  int num_classes() const { return layer_dims.back(); }
  std::size_t layer_count() const { return weights.size(); }
  std::size_t parameter_count() const;
};

/// Glorot-uniform initialization. layer_dims needs at least [input, classes].
Mlp make_mlp(const std::vector<int>& layer_dims, SeedStream& rng);

/// Bitwise parameter equality.
bool same_parameters(const Mlp& a, const Mlp& b);

Logits forward(const Mlp& net, std::span<const double> input);

struct Gradients {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;
};

Gradients zero_gradients(const Mlp& net);

/// Backpropagation through the fixed tanh-MLP family. `dlogits` holds the
/// loss gradient at the logits for each sample; the result is the batch mean.
Gradients backward(const Mlp& net,
                   std::span<const std::vector<double>> inputs,
                   std::span<const std::vector<double>> dlogits);

/// AdamW with decoupled weight decay (applied multiplicatively before the
/// adaptive update). Defaults: beta1/beta2/eps at their conventional values,
/// weight decay 5e-4.
struct AdamWState {
  double learning_rate = 1e-3;
  double weight_decay = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  long step = 0;
  Gradients m;
  Gradients v;
};

AdamWState make_adamw(const Mlp& net, double learning_rate,
                      double weight_decay = 5e-4);

void adamw_step(Mlp& net, const Gradients& grads, AdamWState& state);

/// Versioned JSON checkpoint (layer dims, row-major weights, biases, seed
/// record). Doubles round-trip exactly.
void save_checkpoint(const Mlp& net, std::uint64_t seed_record,
                     const std::filesystem::path& path);

struct Checkpoint {
  Mlp net;
  std::uint64_t seed_record = 0;
};

Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace mulab
