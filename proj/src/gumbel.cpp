#include "mulab/gumbel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mulab/numeric.hpp"

namespace mulab {

bool is_valid_prob(const ProbVector& p, double tol) {
  if (p.values.empty()) return false;
  double sum = 0.0;
  for (double x : p.values) {
    if (!std::isfinite(x) || x < 0.0 || x > 1.0) return false;
    sum += x;
  }
  return std::abs(sum - 1.0) <= tol;
}

double gumbel_from_uniform(double u) {
  u = std::clamp(u, 1e-12, 1.0 - 1e-12);
  return -std::log(-std::log(u));
}

GumbelNoise sample_gumbel(int k, SeedStream& stream) {
  if (k < 1) throw std::invalid_argument("sample_gumbel: k must be >= 1");
  GumbelNoise noise;
  noise.g.resize(k);
  for (double& x : noise.g) x = gumbel_from_uniform(stream.uniform01());
  return noise;
}

namespace {

ProbVector perturbed_softmax(const Logits& logits, const double* noise,
                             double tau) {
  if (logits.empty()) {
    throw std::invalid_argument("gumbel_softmax: empty logits");
  }
  if (!(tau > 0.0)) {
    throw std::invalid_argument("gumbel_softmax: temperature must be > 0");
  }
  if (!all_finite(logits)) {
    throw std::invalid_argument("gumbel_softmax: non-finite logits");
  }
  std::vector<double> y = log_softmax(logits);
  if (noise != nullptr) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += noise[i];
  }
  for (double& x : y) x /= tau;
  return ProbVector{softmax(y)};
}

}  // namespace

ProbVector gumbel_softmax(const Logits& logits, const GumbelNoise& noise,
                          Temperature tau) {
  if (noise.g.size() != logits.size()) {
    throw std::invalid_argument("gumbel_softmax: noise length mismatch");
  }
  return perturbed_softmax(logits, noise.g.data(), tau.tau);
}

ProbVector softmax_temperature(const Logits& logits, Temperature tau) {
  return perturbed_softmax(logits, nullptr, tau.tau);
}

ProbVector sharpen(const Logits& logits) {
  return perturbed_softmax(logits, nullptr, kSharpenTau);
}

}  // namespace mulab
