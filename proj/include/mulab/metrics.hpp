#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mulab/data.hpp"
#include "mulab/gumbel.hpp"
#include "mulab/nn.hpp"

namespace mulab {

/// One model's predicted distributions over one split.
struct DumpRow {
  std::int64_t sample_id = 0;
  int label = 0;
  ProbVector probs;
};

struct PredictionDump {
  std::string model_id;
  std::string split_tag;
  int k = 0;
  std::vector<DumpRow> rows;
};

PredictionDump make_dump(const Mlp& net, std::span<const LabeledSample> split,
                         const std::string& model_id,
                         const std::string& split_tag);

/// Text dump file: header (model id, split tag, k, n) then one row per
/// sample (id, label, probabilities).
void save_dump(const PredictionDump& dump, const std::filesystem::path& path);
PredictionDump load_dump(const std::filesystem::path& path);

/// Shannon entropy in nats, with 0 log 0 = 0.
double entropy(const ProbVector& p);

/// KL(p || q) in nats. q is floored at 1e-12; zero entries of p contribute 0.
double kl(const ProbVector& p, const ProbVector& q);

/// Pointwise Jensen-Shannon divergence between two distributions.
double jsd_pair(const ProbVector& p, const ProbVector& q);

/// Mean pointwise JSD between two models' outputs on the same forget set,
/// rows matched by sample id.
double jsd_forget(const PredictionDump& dump_un,
                  const PredictionDump& dump_gold);

/// Retrain-free JSD: class-wise L1-normalized mean output of the unlearned
/// model on the forget set against the original model on the unseen set,
/// averaged over classes. Classes missing from either dump are excluded and
/// reported, with k adjusted accordingly.
struct RfJsdResult {
  double value = 0.0;
  std::vector<int> skipped_classes;
};

RfJsdResult rf_jsd(const PredictionDump& dump_un_forget,
                   const PredictionDump& dump_orig_unseen);

/// The four accuracies entering the gap metric.
struct AccuracyQuad {
  double mia = 0.0;
  double forget = 0.0;
  double retain = 0.0;
  double test = 0.0;
};

/// Mean absolute accuracy gap over the four components.
double avg_gap(const AccuracyQuad& unlearned, const AccuracyQuad& gold);

/// Membership-inference attack: logistic regression on three confidence
/// features (max probability, entropy, true-class negative log-likelihood),
/// trained with members = retain-subset rows and non-members = test rows,
/// class-balanced with an 80/20 train/holdout split. Returns the fraction of
/// forget rows the attacker labels as members.
struct MiaResult {
  double forget_member_rate = 0.0;
  double holdout_accuracy = 0.0;  // attack quality diagnostic
};

MiaResult mia_accuracy(const PredictionDump& members,
                       const PredictionDump& non_members,
                       const PredictionDump& forget, std::uint64_t seed);

/// Square joint distribution over (true value, prediction); entries sum to 1.
struct JointDistribution {
  int size = 0;
  std::vector<double> p;  // row-major size x size

  double at(int x, int y) const { return p[static_cast<std::size_t>(x) * size + y]; }
};

/// Brute-force check of the error/conditional-entropy inequality
/// P_e >= (H(X | prediction) - 1) / log|A(X)|, all in nats.
struct FanoReport {
  double error_probability = 0.0;
  double conditional_entropy = 0.0;
  double bound = 0.0;
  bool holds = false;
};

FanoReport fano_check(const JointDistribution& joint);

/// Sample Pearson correlation; length >= 3 and nonzero variances required.
double pearson(std::span<const double> xs, std::span<const double> ys);

/// Per-sample prediction entropies binned into 32 bins over [0, ln k].
struct EntropyHistogram {
  int bins = 32;
  double max_entropy = 0.0;  // ln k
  std::vector<std::int64_t> counts;
};

EntropyHistogram entropy_histogram(const PredictionDump& dump);

/// First Wasserstein distance between two binned entropy distributions
/// (normalized counts, distance in entropy units).
double wasserstein1(const EntropyHistogram& a, const EntropyHistogram& b);

/// Everything the evaluation emits for one run.
struct MetricsReport {
  AccuracyQuad accuracies;
  std::optional<double> avg_gap;
  std::optional<double> jsd;
  std::optional<double> rf_jsd;
  std::vector<int> rf_jsd_skipped_classes;
  double mia_holdout_accuracy = 0.0;
  std::vector<std::pair<std::string, EntropyHistogram>> histograms;
  std::optional<double> pcc;  // filled at table level, across runs
  double wall_seconds = 0.0;
};

}  // namespace mulab
