#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace mulab {

struct LabeledSample {
  std::int64_t id = 0;
  std::vector<double> input;
  int label = 0;
};

/// Seeded Gaussian clusters, one per class, balanced. Cluster centers are
/// drawn once from the seed; center_shift > 0 displaces every center by a
/// deterministic per-class offset of that magnitude, which lets an unseen
/// split come from a nearby-but-different distribution.
struct BlobSpec {
  int k = 2;
  int n_per_class = 4;
  int dim = 2;
  double spread = 1.0;
  std::uint64_t seed = 0;
  double center_shift = 0.0;
};

std::vector<LabeledSample> generate_blobs(const BlobSpec& spec);

/// How to carve one sample population into the four splits. The population
/// is partitioned into train/unseen/test first; forget/retain are then carved
/// out of train at forget_fraction.
struct SplitSpec {
  double forget_fraction = 0.1;
  bool stratified = true;
  std::uint64_t seed = 0;
  double unseen_fraction = 0.2;
  double test_fraction = 0.2;
};

/// The four pairwise-disjoint splits. Disjointness holds by sample id and by
/// exact input-content hash; every class appears in every split.
struct SplitDataset {
  std::vector<LabeledSample> forget;
  std::vector<LabeledSample> retain;
  std::vector<LabeledSample> unseen;
  std::vector<LabeledSample> test;
  int k = 0;

  std::span<const LabeledSample> split(const std::string& name) const;
};

inline const char* kSplitNames[] = {"forget", "retain", "unseen", "test"};

SplitDataset make_splits(std::vector<LabeledSample> samples,
                         const SplitSpec& spec, int k);

/// Class-unlearning split: unseen/test are carved stratified over all
/// classes; every remaining training sample of forget_class forms the forget
/// split and the rest the retain split. The retain split necessarily lacks
/// the forgotten class, so only disjointness and per-split coverage of the
/// remaining classes are enforced.
SplitDataset make_class_unlearn_splits(std::vector<LabeledSample> samples,
                                       int forget_class, const SplitSpec& spec,
                                       int k);

/// Validates the SplitDataset invariants; throws on violation.
void validate_splits(const SplitDataset& splits);

/// Disjointness (by id and by content) and non-emptiness only; the class
/// unlearning layout is exempt from full class coverage.
void validate_disjoint(const SplitDataset& splits);

/// Swap in a replacement unseen split (e.g. shifted-distribution samples);
/// invariants are re-validated.
void replace_unseen(SplitDataset& splits, std::vector<LabeledSample> fresh);

/// Exact content hash of an input vector (FNV-1a over the raw doubles).
std::uint64_t content_hash(std::span<const double> input);

/// Order-independent checksum of a split, for run manifests.
std::uint64_t split_checksum(std::span<const LabeledSample> split);

struct DuplicatePair {
  std::string split_a;
  std::int64_t id_a = 0;
  std::string split_b;
  std::int64_t id_b = 0;
};

struct LeakageReport {
  std::vector<DuplicatePair> within_split;
  std::vector<DuplicatePair> cross_split;  // these are the leaks
  bool clean() const { return within_split.empty() && cross_split.empty(); }
};

/// Exact-duplicate scan over all four splits. Hash buckets are confirmed by
/// element-wise comparison, so collisions cannot produce false positives.
LeakageReport detect_leakage(const SplitDataset& splits);

/// Text dataset file: header (k, dim, per-split counts, checksums) followed
/// by one row per sample (id, split tag, label, inputs). Exact round-trip.
void save_dataset(const SplitDataset& splits,
                  const std::filesystem::path& path);
SplitDataset load_dataset(const std::filesystem::path& path);

}  // namespace mulab
