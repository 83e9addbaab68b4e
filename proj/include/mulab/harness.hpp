#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mulab/config.hpp"
#include "mulab/data.hpp"
#include "mulab/metrics.hpp"
#include "mulab/nn.hpp"
#include "mulab/unlearn.hpp"

namespace mulab {

/// Full description of one experiment, parsed from a TOML-style config file.
/// One file plus a seed reproduces a run byte for byte.
struct ExperimentConfig {
  // [dataset]
  int k = 5;
  int n_per_class = 200;
  int dim = 8;
  double spread = 1.0;
  double forget_fraction = 0.1;
  double unseen_fraction = 0.2;
  double test_fraction = 0.2;
  bool stratified = true;
  double unseen_shift = 0.0;           // > 0 swaps in a shifted unseen split
  std::optional<int> forget_class;     // set => class-unlearning layout

  // [net]
  std::vector<int> hidden = {32, 32};

  // [pretrain]
  int pretrain_epochs = 200;
  double pretrain_lr = 1e-3;
  double pretrain_weight_decay = 5e-4;
  int pretrain_batch_size = 32;
  double accuracy_floor = 0.9;

  // [unlearn]
  UnlearnConfig unlearn;  // method/seed filled per run
  std::vector<Method> methods;

  // [metrics]
  bool metric_avg_gap = true;
  bool metric_jsd = true;
  bool metric_rf_jsd = true;
  bool metric_mia = true;
  bool metric_entropy_histograms = true;

  // [run]
  std::filesystem::path out_dir = "runs/exp";
  std::vector<std::uint64_t> seeds = {1, 2, 3};

  std::string source_text;  // config echo embedded in manifests

  static ExperimentConfig from_doc(const ConfigDoc& doc);
  static ExperimentConfig from_file(const std::filesystem::path& path);

  /// Dataset and splits for one experiment seed.
  SplitDataset build_dataset(std::uint64_t seed) const;
  std::vector<int> layer_dims() const;
};

std::filesystem::path seed_dir(const std::filesystem::path& out_dir,
                               std::uint64_t seed);

struct PretrainOutcome {
  std::filesystem::path manifest_path;
  std::filesystem::path checkpoint_path;
  std::filesystem::path dataset_path;
  double train_accuracy = 0.0;
};

/// Generates the dataset, trains the original model on forget-plus-retain,
/// verifies the accuracy floor, and writes checkpoint, dataset, prediction
/// dumps, and the pretrain manifest under seed_dir(out_dir, seed).
PretrainOutcome cmd_pretrain(const ExperimentConfig& cfg, std::uint64_t seed,
                             const std::filesystem::path& out_dir);

/// Executes one unlearning method against the pretrained checkpoint and
/// writes dumps, the temperature trajectory CSV, and the run manifest.
/// Requires cmd_pretrain output for this seed.
std::filesystem::path cmd_unlearn(const ExperimentConfig& cfg, Method method,
                                  std::uint64_t seed,
                                  const std::filesystem::path& out_dir);

struct ResultRow {
  std::string method;
  std::uint64_t seed = 0;
  MetricsReport report;
};

struct AggregateRow {
  std::string method;
  int runs = 0;
  double avg_gap_mean = 0, avg_gap_std = 0;
  double jsd_mean = 0, jsd_std = 0;
  double rf_jsd_mean = 0, rf_jsd_std = 0;
  double time_mean = 0, time_std = 0;
  bool has_avg_gap = false, has_jsd = false, has_rf_jsd = false;
};

struct ResultTable {
  std::vector<ResultRow> rows;
  std::vector<AggregateRow> aggregates;
  std::optional<double> pcc_jsd_rf_jsd;  // across runs, when both present

  /// Per-run CSV in the reporting layout (JSD columns scaled by 1e4).
  /// Wall time is omitted when include_time is false so that byte-identical
  /// output can be asserted across repeated runs.
  std::string to_csv(bool include_time = true) const;
  std::string aggregate_csv() const;
  std::string to_json_text() const;
};

/// Computes every toggled metric for the given run manifests and emits the
/// result table (CSV + JSON) under out_dir/results. Metrics whose inputs are
/// missing are skipped per run; the table is still emitted for computable
/// cells. With jsd and avg_gap toggled off, gold artifacts are never read.
ResultTable cmd_evaluate(const ExperimentConfig& cfg,
                         const std::vector<std::filesystem::path>& manifests,
                         const std::filesystem::path& out_dir);

/// Pretrains, runs every configured method for every seed, evaluates, and
/// emits the table. Gold is prepended automatically when gold-relative
/// metrics are enabled but missing from the method list.
ResultTable cmd_sweep(const ExperimentConfig& cfg,
                      const std::filesystem::path& out_dir);

/// Leakage scan of the experiment's generated dataset (or a dataset file).
LeakageReport cmd_leakage_check(const ExperimentConfig& cfg,
                                std::uint64_t seed);
LeakageReport cmd_leakage_check_file(const std::filesystem::path& dataset);

/// Serialization helpers shared by the CLI and the C API.
std::string leakage_report_json(const LeakageReport& report);

}  // namespace mulab
