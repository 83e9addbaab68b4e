#pragma once

#include <vector>

#include "mulab/nn.hpp"
#include "mulab/rng.hpp"

namespace mulab {

/// Normalized distribution over the k classes.
struct ProbVector {
  std::vector<double> values;

  int size() const { return static_cast<int>(values.size()); }
  double operator[](int i) const { return values[i]; }
};

/// Entries in [0,1] and summing to one within tol.
bool is_valid_prob(const ProbVector& p, double tol = 1e-6);

struct GumbelNoise {
  std::vector<double> g;
};

/// Strictly positive smoothing/sharpening temperature.
struct Temperature {
  double tau = 1.0;
};

/// Concrete stand-in for the tau -> 0+ sharpening limit. At 1e-3 any logit
/// gap >= 0.05 pushes non-maximal probabilities below 1e-9 without overflow
/// (exponentials are max-shifted).
inline constexpr double kSharpenTau = 1e-3;

/// -log(-log(u)) with u clamped to [1e-12, 1-1e-12].
double gumbel_from_uniform(double u);

/// k i.i.d. standard Gumbel draws. Same stream state gives the same vector.
GumbelNoise sample_gumbel(int k, SeedStream& stream);

/// Gumbel-Softmax over the stabilized positive transform of the logits:
/// p_i proportional to exp((log_softmax(logits)_i + g_i) / tau). With g = 0
/// and tau = 1 this is exactly softmax(logits).
ProbVector gumbel_softmax(const Logits& logits, const GumbelNoise& noise,
                          Temperature tau);

/// Gumbel-Softmax with the noise term dropped (the ablation activation).
ProbVector softmax_temperature(const Logits& logits, Temperature tau);

/// Sharpening limit: noise-free Gumbel-Softmax at kSharpenTau. Exact ties at
/// the maximum split mass uniformly, straight from the formula.
ProbVector sharpen(const Logits& logits);

}  // namespace mulab
