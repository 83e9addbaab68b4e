#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace mulab {

inline bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(),
                     [](double x) { return std::isfinite(x); });
}

inline double max_element_value(std::span<const double> v) {
  return *std::max_element(v.begin(), v.end());
}

/// Index of the largest entry; ties resolve to the lowest index.
inline int argmax_lowest(std::span<const double> v) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(v.size()); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

inline double logsumexp(std::span<const double> v) {
  const double m = max_element_value(v);
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

/// Max-shifted softmax; safe for any finite input.
inline std::vector<double> softmax(std::span<const double> v) {
  const double m = max_element_value(v);
  std::vector<double> out(v.size());
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::exp(v[i] - m);
    s += out[i];
  }
  for (double& x : out) x /= s;
  return out;
}

/// v - logsumexp(v). Finite for finite input, unlike log(softmax(v)).
inline std::vector<double> log_softmax(std::span<const double> v) {
  const double lse = logsumexp(v);
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] - lse;
  return out;
}

inline double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

inline double sample_std(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double mu = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - mu) * (x - mu);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace mulab
