#include "mulab/nn.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "mulab/io.hpp"
#include "mulab/numeric.hpp"

namespace mulab {

namespace {

void check_architecture(const std::vector<int>& layer_dims) {
  if (layer_dims.size() < 2) {
    throw std::invalid_argument("mlp needs at least input and output dims");
  }
  for (int d : layer_dims) {
    if (d <= 0) throw std::invalid_argument("mlp layer dims must be positive");
  }
}

}  // namespace

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    n += weights[l].size() + biases[l].size();
  }
  return n;
}

Mlp make_mlp(const std::vector<int>& layer_dims, SeedStream& rng) {
  check_architecture(layer_dims);
  Mlp net;
  net.layer_dims = layer_dims;
  for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
    const int fan_in = layer_dims[l];
    const int fan_out = layer_dims[l + 1];
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    std::vector<double> w(static_cast<std::size_t>(fan_in) * fan_out);
    for (double& x : w) x = rng.uniform(-bound, bound);
    net.weights.push_back(std::move(w));
    net.biases.emplace_back(fan_out, 0.0);
  }
  return net;
}

bool same_parameters(const Mlp& a, const Mlp& b) {
  if (a.layer_dims != b.layer_dims) return false;
  auto bits_equal = [](const std::vector<double>& x,
                       const std::vector<double>& y) {
    return x.size() == y.size() &&
           (x.empty() ||
            std::memcmp(x.data(), y.data(), x.size() * sizeof(double)) == 0);
  };
  for (std::size_t l = 0; l < a.weights.size(); ++l) {
    if (!bits_equal(a.weights[l], b.weights[l])) return false;
    if (!bits_equal(a.biases[l], b.biases[l])) return false;
  }
  return true;
}

namespace {

/// Forward pass keeping every layer's post-activation output; activations[0]
/// is the input itself, activations[L] the raw logits.
std::vector<std::vector<double>> forward_cached(const Mlp& net,
                                                std::span<const double> input) {
  const std::size_t layers = net.layer_count();
  std::vector<std::vector<double>> acts(layers + 1);
  acts[0].assign(input.begin(), input.end());
  for (std::size_t l = 0; l < layers; ++l) {
    const int in_dim = net.layer_dims[l];
    const int out_dim = net.layer_dims[l + 1];
    std::vector<double> z(out_dim);
    const auto& w = net.weights[l];
    for (int o = 0; o < out_dim; ++o) {
      double acc = net.biases[l][o];
      const double* row = w.data() + static_cast<std::size_t>(o) * in_dim;
      for (int i = 0; i < in_dim; ++i) acc += row[i] * acts[l][i];
      z[o] = acc;
    }
    if (l + 1 < layers) {
      for (double& x : z) x = std::tanh(x);
    }
    acts[l + 1] = std::move(z);
  }
  return acts;
}

}  // namespace

Logits forward(const Mlp& net, std::span<const double> input) {
  if (static_cast<int>(input.size()) != net.input_dim()) {
    throw std::invalid_argument("forward: input length does not match net");
  }
  return forward_cached(net, input).back();
}

Gradients zero_gradients(const Mlp& net) {
  Gradients g;
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    g.weights.emplace_back(net.weights[l].size(), 0.0);
    g.biases.emplace_back(net.biases[l].size(), 0.0);
  }
  return g;
}

Gradients backward(const Mlp& net,
                   std::span<const std::vector<double>> inputs,
                   std::span<const std::vector<double>> dlogits) {
  if (inputs.size() != dlogits.size() || inputs.empty()) {
    throw std::invalid_argument("backward: batch size mismatch or empty");
  }
  const std::size_t layers = net.layer_count();
  Gradients grads = zero_gradients(net);

  for (std::size_t s = 0; s < inputs.size(); ++s) {
    if (static_cast<int>(inputs[s].size()) != net.input_dim() ||
        static_cast<int>(dlogits[s].size()) != net.num_classes()) {
      throw std::invalid_argument("backward: sample shape mismatch");
    }
    const auto acts = forward_cached(net, inputs[s]);
    std::vector<double> delta = dlogits[s];
    for (std::size_t l = layers; l-- > 0;) {
      const int in_dim = net.layer_dims[l];
      const int out_dim = net.layer_dims[l + 1];
      auto& gw = grads.weights[l];
      for (int o = 0; o < out_dim; ++o) {
        double* row = gw.data() + static_cast<std::size_t>(o) * in_dim;
        for (int i = 0; i < in_dim; ++i) row[i] += delta[o] * acts[l][i];
        grads.biases[l][o] += delta[o];
      }
      if (l == 0) break;
      std::vector<double> prev(in_dim, 0.0);
      const auto& w = net.weights[l];
      for (int o = 0; o < out_dim; ++o) {
        const double* row = w.data() + static_cast<std::size_t>(o) * in_dim;
        for (int i = 0; i < in_dim; ++i) prev[i] += row[i] * delta[o];
      }
      // tanh'(z) expressed through the cached post-activation value
      for (int i = 0; i < in_dim; ++i) {
        prev[i] *= 1.0 - acts[l][i] * acts[l][i];
      }
      delta = std::move(prev);
    }
  }

  const double inv_n = 1.0 / static_cast<double>(inputs.size());
  for (std::size_t l = 0; l < layers; ++l) {
    for (double& x : grads.weights[l]) x *= inv_n;
    for (double& x : grads.biases[l]) x *= inv_n;
  }
  return grads;
}

AdamWState make_adamw(const Mlp& net, double learning_rate,
                      double weight_decay) {
  if (learning_rate <= 0.0) {
    throw std::invalid_argument("adamw: learning rate must be positive");
  }
  if (weight_decay < 0.0) {
    throw std::invalid_argument("adamw: weight decay must be non-negative");
  }
  AdamWState st;
  st.learning_rate = learning_rate;
  st.weight_decay = weight_decay;
  st.m = zero_gradients(net);
  st.v = zero_gradients(net);
  return st;
}

namespace {

void adamw_update(std::vector<double>& params, const std::vector<double>& g,
                  std::vector<double>& m, std::vector<double>& v,
                  const AdamWState& st, double bc1, double bc2,
                  std::size_t layer, bool decay_enabled) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!std::isfinite(g[i])) {
      throw std::domain_error("adamw: non-finite gradient in layer " +
                              std::to_string(layer));
    }
    if (decay_enabled) {
      params[i] *= 1.0 - st.learning_rate * st.weight_decay;
    }
    m[i] = st.beta1 * m[i] + (1.0 - st.beta1) * g[i];
    v[i] = st.beta2 * v[i] + (1.0 - st.beta2) * g[i] * g[i];
    const double mhat = m[i] / bc1;
    const double vhat = v[i] / bc2;
    params[i] -= st.learning_rate * mhat / (std::sqrt(vhat) + st.epsilon);
  }
}

}  // namespace

void adamw_step(Mlp& net, const Gradients& grads, AdamWState& state) {
  if (grads.weights.size() != net.layer_count() ||
      state.m.weights.size() != net.layer_count()) {
    throw std::invalid_argument("adamw: state/gradient shape mismatch");
  }
  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, state.step);
  const double bc2 = 1.0 - std::pow(state.beta2, state.step);
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    if (grads.weights[l].size() != net.weights[l].size() ||
        grads.biases[l].size() != net.biases[l].size()) {
      throw std::invalid_argument("adamw: gradient shape mismatch at layer " +
                                  std::to_string(l));
    }
    adamw_update(net.weights[l], grads.weights[l], state.m.weights[l],
                 state.v.weights[l], state, bc1, bc2, l, true);
    // Decay is conventionally not applied to biases.
    adamw_update(net.biases[l], grads.biases[l], state.m.biases[l],
                 state.v.biases[l], state, bc1, bc2, l, false);
  }
}

void save_checkpoint(const Mlp& net, std::uint64_t seed_record,
                     const std::filesystem::path& path) {
  nlohmann::json j;
  j["format"] = "mulab-checkpoint";
  j["version"] = 1;
  j["layer_dims"] = net.layer_dims;
  j["activation"] = "tanh";
  j["weights"] = net.weights;
  j["biases"] = net.biases;
  j["seed_record"] = seed_record;
  atomic_write_text(path, j.dump(2));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const nlohmann::json j = nlohmann::json::parse(read_text(path));
  if (j.value("format", "") != "mulab-checkpoint" || j.value("version", 0) != 1) {
    throw std::runtime_error("unrecognized checkpoint format: " + path.string());
  }
  Checkpoint ck;
  ck.net.layer_dims = j.at("layer_dims").get<std::vector<int>>();
  ck.net.weights = j.at("weights").get<std::vector<std::vector<double>>>();
  ck.net.biases = j.at("biases").get<std::vector<std::vector<double>>>();
  ck.seed_record = j.at("seed_record").get<std::uint64_t>();
  check_architecture(ck.net.layer_dims);
  if (ck.net.weights.size() + 1 != ck.net.layer_dims.size() ||
      ck.net.biases.size() != ck.net.weights.size()) {
    throw std::runtime_error("checkpoint layer structure is inconsistent");
  }
  for (std::size_t l = 0; l < ck.net.weights.size(); ++l) {
    const auto rows = static_cast<std::size_t>(ck.net.layer_dims[l + 1]);
    const auto cols = static_cast<std::size_t>(ck.net.layer_dims[l]);
    if (ck.net.weights[l].size() != rows * cols ||
        ck.net.biases[l].size() != rows) {
      throw std::runtime_error("checkpoint weight shapes do not match dims");
    }
  }
  return ck;
}

}  // namespace mulab
