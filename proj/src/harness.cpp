#include "mulab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string_view>
#include <tuple>

#include <json.hpp>

#include "mulab/io.hpp"
#include "mulab/numeric.hpp"

namespace mulab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kDumpSplits[] = {"forget", "retain", "unseen", "test",
                                       "retain_sub"};

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", x);
  return buf;
}

std::uint64_t derived_seed(std::uint64_t seed, std::string_view tag) {
  return SeedStream(seed).child(tag).seed();
}

}  // namespace

ExperimentConfig ExperimentConfig::from_doc(const ConfigDoc& doc) {
  ExperimentConfig cfg;
  cfg.source_text = doc.source_text();

  cfg.k = static_cast<int>(doc.get_int("dataset", "k", cfg.k));
  cfg.n_per_class =
      static_cast<int>(doc.get_int("dataset", "n_per_class", cfg.n_per_class));
  cfg.dim = static_cast<int>(doc.get_int("dataset", "dim", cfg.dim));
  cfg.spread = doc.get_double("dataset", "spread", cfg.spread);
  cfg.forget_fraction =
      doc.get_double("dataset", "forget_fraction", cfg.forget_fraction);
  cfg.unseen_fraction =
      doc.get_double("dataset", "unseen_fraction", cfg.unseen_fraction);
  cfg.test_fraction =
      doc.get_double("dataset", "test_fraction", cfg.test_fraction);
  cfg.stratified = doc.get_bool("dataset", "stratified", cfg.stratified);
  cfg.unseen_shift = doc.get_double("dataset", "unseen_shift", cfg.unseen_shift);
  if (doc.has("dataset", "forget_class")) {
    cfg.forget_class = static_cast<int>(doc.get_int("dataset", "forget_class", 0));
  }

  if (doc.has("net", "hidden")) {
    cfg.hidden.clear();
    for (auto h : doc.get_int_list("net", "hidden")) {
      cfg.hidden.push_back(static_cast<int>(h));
    }
  }

  cfg.pretrain_epochs =
      static_cast<int>(doc.get_int("pretrain", "epochs", cfg.pretrain_epochs));
  cfg.pretrain_lr = doc.get_double("pretrain", "lr", cfg.pretrain_lr);
  cfg.pretrain_weight_decay =
      doc.get_double("pretrain", "weight_decay", cfg.pretrain_weight_decay);
  cfg.pretrain_batch_size = static_cast<int>(
      doc.get_int("pretrain", "batch_size", cfg.pretrain_batch_size));
  cfg.accuracy_floor =
      doc.get_double("pretrain", "accuracy_floor", cfg.accuracy_floor);

  cfg.unlearn.epochs =
      static_cast<int>(doc.get_int("unlearn", "epochs", cfg.unlearn.epochs));
  cfg.unlearn.learning_rate =
      doc.get_double("unlearn", "lr", cfg.unlearn.learning_rate);
  cfg.unlearn.weight_decay =
      doc.get_double("unlearn", "weight_decay", cfg.unlearn.weight_decay);
  cfg.unlearn.batch_size = static_cast<int>(
      doc.get_int("unlearn", "batch_size", cfg.unlearn.batch_size));
  cfg.unlearn.retain_fraction =
      doc.get_double("unlearn", "retain_fraction", cfg.unlearn.retain_fraction);
  cfg.unlearn.alpha = doc.get_double("unlearn", "alpha", cfg.unlearn.alpha);
  const std::string activation =
      doc.get_string("unlearn", "activation", "gumbel");
  if (activation == "gumbel") {
    cfg.unlearn.activation = TeacherActivation::kGumbelSoftmax;
  } else if (activation == "softmax") {
    cfg.unlearn.activation = TeacherActivation::kSoftmaxTemperature;
  } else {
    throw std::runtime_error("config unlearn.activation must be gumbel or softmax");
  }

  std::vector<std::string> method_names =
      doc.get_string_list("unlearn", "methods");
  if (method_names.empty() && doc.has("unlearn", "methods")) {
    throw std::runtime_error("config unlearn.methods must be a string list");
  }
  if (method_names.empty()) method_names = {"lotus"};
  for (const auto& name : method_names) {
    cfg.methods.push_back(parse_method(name));
  }

  cfg.metric_avg_gap = doc.get_bool("metrics", "avg_gap", cfg.metric_avg_gap);
  cfg.metric_jsd = doc.get_bool("metrics", "jsd", cfg.metric_jsd);
  cfg.metric_rf_jsd = doc.get_bool("metrics", "rf_jsd", cfg.metric_rf_jsd);
  cfg.metric_mia = doc.get_bool("metrics", "mia", cfg.metric_mia);
  cfg.metric_entropy_histograms =
      doc.get_bool("metrics", "entropy_histograms", cfg.metric_entropy_histograms);

  cfg.out_dir = doc.get_string("run", "out_dir", cfg.out_dir.string());
  if (doc.has("run", "seeds")) {
    cfg.seeds.clear();
    for (auto s : doc.get_int_list("run", "seeds")) {
      cfg.seeds.push_back(static_cast<std::uint64_t>(s));
    }
  }

  if (cfg.methods.empty()) throw std::runtime_error("config: no methods listed");
  if (cfg.seeds.empty()) throw std::runtime_error("config: no seeds listed");

  // A whole-class forget set means the schedule target is zero accuracy.
  if (cfg.forget_class.has_value()) {
    cfg.unlearn.schedule_mode = ScheduleMode::kClassWise;
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const fs::path& path) {
  return from_doc(ConfigDoc::load(path));
}

std::vector<int> ExperimentConfig::layer_dims() const {
  std::vector<int> dims;
  dims.push_back(dim);
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(k);
  return dims;
}

SplitDataset ExperimentConfig::build_dataset(std::uint64_t seed) const {
  BlobSpec blobs;
  blobs.k = k;
  blobs.n_per_class = n_per_class;
  blobs.dim = dim;
  blobs.spread = spread;
  blobs.seed = derived_seed(seed, "dataset-gen");

  SplitSpec split_spec;
  split_spec.forget_fraction = forget_fraction;
  split_spec.stratified = stratified;
  split_spec.seed = derived_seed(seed, "dataset-split");
  split_spec.unseen_fraction = unseen_fraction;
  split_spec.test_fraction = test_fraction;

  auto samples = generate_blobs(blobs);
  SplitDataset splits =
      forget_class.has_value()
          ? make_class_unlearn_splits(std::move(samples), *forget_class,
                                      split_spec, k)
          : make_splits(std::move(samples), split_spec, k);

  if (unseen_shift > 0.0) {
    // Fresh samples from shifted class centers stand in for an unseen set
    // that is similar but not identically distributed.
    std::map<int, std::size_t> needed;
    std::int64_t next_id = 0;
    for (const char* name : kSplitNames) {
      for (const auto& s : splits.split(name)) {
        next_id = std::max(next_id, s.id + 1);
      }
    }
    for (const auto& s : splits.unseen) needed[s.label] += 1;
    std::size_t max_needed = 0;
    for (const auto& [label, count] : needed) {
      max_needed = std::max(max_needed, count);
    }

    BlobSpec shifted = blobs;
    shifted.seed = derived_seed(seed, "unseen-shift-gen");
    shifted.center_shift = unseen_shift;
    shifted.n_per_class = static_cast<int>(std::max<std::size_t>(4, max_needed));
    auto fresh_all = generate_blobs(shifted);

    std::vector<LabeledSample> fresh;
    std::map<int, std::size_t> taken;
    for (auto& s : fresh_all) {
      if (taken[s.label] >= needed[s.label]) continue;
      taken[s.label] += 1;
      s.id = next_id++;
      fresh.push_back(std::move(s));
    }
    replace_unseen(splits, std::move(fresh));
  }
  return splits;
}

namespace {

fs::path dumps_dir(const fs::path& base) { return base / "dumps"; }

void write_model_dumps(const Mlp& net, const SplitDataset& splits,
                       const std::vector<LabeledSample>& retain_sub,
                       const std::string& model_id, const fs::path& dir,
                       const std::string& prefix) {
  for (const char* split : kSplitNames) {
    save_dump(make_dump(net, splits.split(split), model_id, split),
              dumps_dir(dir) / (prefix + "_" + split + ".dump"));
  }
  save_dump(make_dump(net, retain_sub, model_id, "retain_sub"),
            dumps_dir(dir) / (prefix + "_retain_sub.dump"));
}

json checksums_json(const SplitDataset& splits) {
  json j;
  for (const char* name : kSplitNames) {
    j[name] = split_checksum(splits.split(name));
  }
  return j;
}

json unlearn_config_json(const UnlearnConfig& cfg) {
  return json{{"epochs", cfg.epochs},
              {"learning_rate", cfg.learning_rate},
              {"weight_decay", cfg.weight_decay},
              {"batch_size", cfg.batch_size},
              {"retain_fraction", cfg.retain_fraction},
              {"alpha", cfg.alpha},
              {"seed", cfg.seed},
              {"method", method_name(cfg.method)},
              {"schedule_mode",
               cfg.schedule_mode == ScheduleMode::kClassWise ? "class" : "instance"},
              {"activation", cfg.activation == TeacherActivation::kGumbelSoftmax
                                 ? "gumbel"
                                 : "softmax"}};
}

}  // namespace

fs::path seed_dir(const fs::path& out_dir, std::uint64_t seed) {
  return out_dir / ("seed_" + std::to_string(seed));
}

PretrainOutcome cmd_pretrain(const ExperimentConfig& cfg, std::uint64_t seed,
                             const fs::path& out_dir) {
  const fs::path dir = seed_dir(out_dir, seed);
  fs::create_directories(dumps_dir(dir));

  SplitDataset splits = cfg.build_dataset(seed);
  const fs::path dataset_path = dir / "dataset.txt";
  save_dataset(splits, dataset_path);

  SeedStream root(seed);
  SeedStream init_rng = root.child("pretrain-init");
  Mlp net = make_mlp(cfg.layer_dims(), init_rng);

  std::vector<LabeledSample> train_pop;
  train_pop.reserve(splits.forget.size() + splits.retain.size());
  train_pop.insert(train_pop.end(), splits.forget.begin(), splits.forget.end());
  train_pop.insert(train_pop.end(), splits.retain.begin(), splits.retain.end());

  SeedStream order_rng = root.child("pretrain-order");
  train_classifier(net, train_pop, cfg.pretrain_epochs, cfg.pretrain_lr,
                   cfg.pretrain_weight_decay, cfg.pretrain_batch_size,
                   order_rng);

  const double train_acc = accuracy(net, train_pop);
  if (train_acc < cfg.accuracy_floor) {
    throw std::runtime_error(
        "pretrain: accuracy floor " + fmt(cfg.accuracy_floor) +
        " not reached in " + std::to_string(cfg.pretrain_epochs) +
        " epochs (final accuracy " + fmt(train_acc) + ")");
  }

  const fs::path ckpt_path = dir / "orig.ckpt.json";
  save_checkpoint(net, seed, ckpt_path);

  const auto retain_sub = stratified_retain_subset(
      splits.retain, cfg.unlearn.retain_fraction, seed);
  write_model_dumps(net, splits, retain_sub, "orig", dir, "orig");

  json manifest{
      {"kind", "mulab-pretrain"},
      {"version", 1},
      {"seed", seed},
      {"dataset", dataset_path.filename().string()},
      {"checkpoint", ckpt_path.filename().string()},
      {"train_accuracy", train_acc},
      {"accuracy_floor", cfg.accuracy_floor},
      {"epochs", cfg.pretrain_epochs},
      {"split_checksums", checksums_json(splits)},
      {"final", {{"acc_forget", accuracy(net, splits.forget)},
                 {"acc_retain", accuracy(net, splits.retain)},
                 {"acc_unseen", accuracy(net, splits.unseen)},
                 {"acc_test", accuracy(net, splits.test)}}},
      {"config_text", cfg.source_text},
  };
  const fs::path manifest_path = dir / "pretrain_manifest.json";
  atomic_write_text(manifest_path, manifest.dump(2));

  return PretrainOutcome{manifest_path, ckpt_path, dataset_path, train_acc};
}

fs::path cmd_unlearn(const ExperimentConfig& cfg, Method method,
                     std::uint64_t seed, const fs::path& out_dir) {
  const fs::path dir = seed_dir(out_dir, seed);
  const fs::path dataset_path = dir / "dataset.txt";
  const fs::path ckpt_path = dir / "orig.ckpt.json";
  if (!fs::exists(dataset_path) || !fs::exists(ckpt_path)) {
    throw std::runtime_error("unlearn: missing pretrain outputs under " +
                             dir.string() + " (run pretrain first)");
  }
  const SplitDataset splits = load_dataset(dataset_path);
  const Checkpoint ck = load_checkpoint(ckpt_path);

  UnlearnConfig run_cfg = cfg.unlearn;
  run_cfg.method = method;
  run_cfg.seed = seed;
  if (method == Method::kGold) {
    // Retraining from scratch mirrors the pretraining regime.
    run_cfg.epochs = cfg.pretrain_epochs;
    run_cfg.learning_rate = cfg.pretrain_lr;
    run_cfg.weight_decay = cfg.pretrain_weight_decay;
    run_cfg.batch_size = cfg.pretrain_batch_size;
  }

  const RunResult result = run_method(ck.net, splits, run_cfg);

  const fs::path run_dir = dir / "runs" / method_name(method);
  fs::create_directories(dumps_dir(run_dir));

  const fs::path student_path = run_dir / "student.ckpt.json";
  save_checkpoint(result.student, seed, student_path);

  const auto retain_sub = stratified_retain_subset(
      splits.retain, cfg.unlearn.retain_fraction, seed);
  write_model_dumps(result.student, splits, retain_sub, method_name(method),
                    run_dir, "un");

  {
    std::ostringstream csv;
    csv << "epoch,acc_forget,acc_unseen,delta_acc,tau_d\n";
    for (const auto& e : result.trajectory) {
      csv << e.epoch << "," << fmt(e.acc_forget) << "," << fmt(e.acc_unseen)
          << "," << fmt(e.delta_acc) << "," << fmt(e.tau) << "\n";
    }
    atomic_write_text(run_dir / "trajectory.csv", csv.str());
  }

  json trajectory = json::array();
  for (const auto& e : result.trajectory) {
    trajectory.push_back(json{{"epoch", e.epoch},
                              {"acc_forget", e.acc_forget},
                              {"acc_unseen", e.acc_unseen},
                              {"delta_acc", e.delta_acc},
                              {"tau_d", e.tau}});
  }
  json manifest{
      {"kind", "mulab-run"},
      {"version", 1},
      {"method", method_name(method)},
      {"seed", seed},
      {"unlearn_config", unlearn_config_json(run_cfg)},
      {"split_checksums", checksums_json(splits)},
      {"student_checkpoint", student_path.filename().string()},
      {"wall_seconds", result.wall_seconds},
      {"trajectory", trajectory},
      {"final", {{"acc_forget", accuracy(result.student, splits.forget)},
                 {"acc_retain", accuracy(result.student, splits.retain)},
                 {"acc_unseen", accuracy(result.student, splits.unseen)},
                 {"acc_test", accuracy(result.student, splits.test)}}},
      {"config_text", cfg.source_text},
  };
  const fs::path manifest_path = run_dir / "manifest.json";
  atomic_write_text(manifest_path, manifest.dump(2));
  return manifest_path;
}

namespace {

double dump_accuracy(const PredictionDump& dump) {
  std::size_t correct = 0;
  for (const auto& row : dump.rows) {
    if (argmax_lowest(row.probs.values) == row.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(dump.rows.size());
}

struct RunDumps {
  PredictionDump forget, retain, test, retain_sub;
};

RunDumps load_run_dumps(const fs::path& run_dir, const std::string& prefix) {
  RunDumps d;
  d.forget = load_dump(dumps_dir(run_dir) / (prefix + "_forget.dump"));
  d.retain = load_dump(dumps_dir(run_dir) / (prefix + "_retain.dump"));
  d.test = load_dump(dumps_dir(run_dir) / (prefix + "_test.dump"));
  d.retain_sub = load_dump(dumps_dir(run_dir) / (prefix + "_retain_sub.dump"));
  return d;
}

AccuracyQuad dump_quad(const RunDumps& dumps, double mia_rate) {
  AccuracyQuad q;
  q.mia = mia_rate;
  q.forget = dump_accuracy(dumps.forget);
  q.retain = dump_accuracy(dumps.retain);
  q.test = dump_accuracy(dumps.test);
  return q;
}

std::string csv_cell(const std::optional<double>& v, double scale = 1.0) {
  return v.has_value() ? fmt(*v * scale) : std::string();
}

}  // namespace

std::string ResultTable::to_csv(bool include_time) const {
  std::ostringstream out;
  out << "method,seed,acc_mia,acc_forget,acc_retain,acc_test,"
         "avg_gap,jsd_x1e4,rf_jsd_x1e4";
  if (include_time) out << ",time_sec";
  out << "\n";
  for (const auto& row : rows) {
    const auto& r = row.report;
    out << row.method << "," << row.seed << "," << fmt(r.accuracies.mia) << ","
        << fmt(r.accuracies.forget) << "," << fmt(r.accuracies.retain) << ","
        << fmt(r.accuracies.test) << "," << csv_cell(r.avg_gap) << ","
        << csv_cell(r.jsd, 1e4) << "," << csv_cell(r.rf_jsd, 1e4);
    if (include_time) out << "," << fmt(r.wall_seconds);
    out << "\n";
  }
  return out.str();
}

std::string ResultTable::aggregate_csv() const {
  std::ostringstream out;
  out << "method,runs,avg_gap_mean,avg_gap_std,jsd_x1e4_mean,jsd_x1e4_std,"
         "rf_jsd_x1e4_mean,rf_jsd_x1e4_std,time_mean,time_std\n";
  for (const auto& a : aggregates) {
    out << a.method << "," << a.runs << ","
        << (a.has_avg_gap ? fmt(a.avg_gap_mean) : "") << ","
        << (a.has_avg_gap ? fmt(a.avg_gap_std) : "") << ","
        << (a.has_jsd ? fmt(a.jsd_mean * 1e4) : "") << ","
        << (a.has_jsd ? fmt(a.jsd_std * 1e4) : "") << ","
        << (a.has_rf_jsd ? fmt(a.rf_jsd_mean * 1e4) : "") << ","
        << (a.has_rf_jsd ? fmt(a.rf_jsd_std * 1e4) : "") << ","
        << fmt(a.time_mean) << "," << fmt(a.time_std) << "\n";
  }
  if (pcc_jsd_rf_jsd.has_value()) {
    out << "pcc_jsd_rf_jsd," << rows.size() << "," << fmt(*pcc_jsd_rf_jsd)
        << ",,,,,,,\n";
  }
  return out.str();
}

std::string ResultTable::to_json_text() const {
  json j;
  j["rows"] = json::array();
  for (const auto& row : rows) {
    const auto& r = row.report;
    json jr{{"method", row.method},
            {"seed", row.seed},
            {"acc_mia", r.accuracies.mia},
            {"acc_forget", r.accuracies.forget},
            {"acc_retain", r.accuracies.retain},
            {"acc_test", r.accuracies.test},
            {"mia_holdout_accuracy", r.mia_holdout_accuracy},
            {"wall_seconds", r.wall_seconds}};
    if (r.avg_gap) jr["avg_gap"] = *r.avg_gap;
    if (r.jsd) jr["jsd"] = *r.jsd;
    if (r.rf_jsd) jr["rf_jsd"] = *r.rf_jsd;
    if (!r.rf_jsd_skipped_classes.empty()) {
      jr["rf_jsd_skipped_classes"] = r.rf_jsd_skipped_classes;
    }
    for (const auto& [tag, hist] : r.histograms) {
      jr["entropy_histograms"][tag] = {{"bins", hist.bins},
                                       {"max_entropy", hist.max_entropy},
                                       {"counts", hist.counts}};
    }
    j["rows"].push_back(std::move(jr));
  }
  j["aggregates"] = json::array();
  for (const auto& a : aggregates) {
    json ja{{"method", a.method},
            {"runs", a.runs},
            {"time_mean", a.time_mean},
            {"time_std", a.time_std}};
    if (a.has_avg_gap) {
      ja["avg_gap_mean"] = a.avg_gap_mean;
      ja["avg_gap_std"] = a.avg_gap_std;
    }
    if (a.has_jsd) {
      ja["jsd_mean"] = a.jsd_mean;
      ja["jsd_std"] = a.jsd_std;
    }
    if (a.has_rf_jsd) {
      ja["rf_jsd_mean"] = a.rf_jsd_mean;
      ja["rf_jsd_std"] = a.rf_jsd_std;
    }
    j["aggregates"].push_back(std::move(ja));
  }
  if (pcc_jsd_rf_jsd) j["pcc_jsd_rf_jsd"] = *pcc_jsd_rf_jsd;
  return j.dump(2);
}

ResultTable cmd_evaluate(const ExperimentConfig& cfg,
                         const std::vector<fs::path>& manifests,
                         const fs::path& out_dir) {
  if (manifests.empty()) {
    throw std::invalid_argument("evaluate: no run manifests given");
  }
  const bool wants_gold = cfg.metric_jsd || cfg.metric_avg_gap;

  ResultTable table;
  for (const auto& manifest_path : manifests) {
    const json manifest = json::parse(read_text(manifest_path));
    if (manifest.value("kind", "") != "mulab-run") {
      throw std::runtime_error("not a run manifest: " + manifest_path.string());
    }
    const fs::path run_dir = manifest_path.parent_path();
    const fs::path seed_d = run_dir.parent_path().parent_path();
    const auto seed = manifest.at("seed").get<std::uint64_t>();
    const auto method = manifest.at("method").get<std::string>();

    const RunDumps dumps = load_run_dumps(run_dir, "un");

    MetricsReport report;
    report.wall_seconds = manifest.value("wall_seconds", 0.0);

    double mia_rate = 0.0;
    if (cfg.metric_mia || cfg.metric_avg_gap) {
      const MiaResult mia =
          mia_accuracy(dumps.retain_sub, dumps.test, dumps.forget, seed);
      mia_rate = mia.forget_member_rate;
      report.mia_holdout_accuracy = mia.holdout_accuracy;
    }
    report.accuracies = dump_quad(dumps, mia_rate);

    if (cfg.metric_rf_jsd) {
      const fs::path orig_unseen = dumps_dir(seed_d) / "orig_unseen.dump";
      if (fs::exists(orig_unseen)) {
        const RfJsdResult rf = rf_jsd(dumps.forget, load_dump(orig_unseen));
        report.rf_jsd = rf.value;
        report.rf_jsd_skipped_classes = rf.skipped_classes;
      }
    }

    if (wants_gold) {
      const fs::path gold_dir = seed_d / "runs" / "gold";
      if (fs::exists(gold_dir / "manifest.json")) {
        const RunDumps gold = load_run_dumps(gold_dir, "un");
        if (cfg.metric_jsd) {
          report.jsd = jsd_forget(dumps.forget, gold.forget);
        }
        if (cfg.metric_avg_gap) {
          const MiaResult gold_mia =
              mia_accuracy(gold.retain_sub, gold.test, gold.forget, seed);
          report.avg_gap = avg_gap(report.accuracies,
                                   dump_quad(gold, gold_mia.forget_member_rate));
        }
      }
    }

    if (cfg.metric_entropy_histograms) {
      report.histograms.emplace_back("forget", entropy_histogram(dumps.forget));
      report.histograms.emplace_back("retain", entropy_histogram(dumps.retain));
      report.histograms.emplace_back("test", entropy_histogram(dumps.test));
    }

    table.rows.push_back(ResultRow{method, seed, std::move(report)});
  }

  std::sort(table.rows.begin(), table.rows.end(),
            [](const ResultRow& a, const ResultRow& b) {
              return std::tie(a.method, a.seed) < std::tie(b.method, b.seed);
            });

  // Aggregates per method (mean and sample standard deviation).
  std::map<std::string, std::vector<const ResultRow*>> by_method;
  for (const auto& row : table.rows) by_method[row.method].push_back(&row);
  for (const auto& [method, rows] : by_method) {
    AggregateRow agg;
    agg.method = method;
    agg.runs = static_cast<int>(rows.size());
    std::vector<double> gaps, jsds, rfs, times;
    for (const auto* row : rows) {
      times.push_back(row->report.wall_seconds);
      if (row->report.avg_gap) gaps.push_back(*row->report.avg_gap);
      if (row->report.jsd) jsds.push_back(*row->report.jsd);
      if (row->report.rf_jsd) rfs.push_back(*row->report.rf_jsd);
    }
    agg.time_mean = mean(times);
    agg.time_std = sample_std(times);
    if (gaps.size() == rows.size()) {
      agg.has_avg_gap = true;
      agg.avg_gap_mean = mean(gaps);
      agg.avg_gap_std = sample_std(gaps);
    }
    if (jsds.size() == rows.size()) {
      agg.has_jsd = true;
      agg.jsd_mean = mean(jsds);
      agg.jsd_std = sample_std(jsds);
    }
    if (rfs.size() == rows.size()) {
      agg.has_rf_jsd = true;
      agg.rf_jsd_mean = mean(rfs);
      agg.rf_jsd_std = sample_std(rfs);
    }
    table.aggregates.push_back(std::move(agg));
  }

  {
    std::vector<double> xs, ys;
    for (const auto& row : table.rows) {
      if (row.report.jsd && row.report.rf_jsd) {
        xs.push_back(*row.report.jsd);
        ys.push_back(*row.report.rf_jsd);
      }
    }
    if (xs.size() >= 3) {
      try {
        table.pcc_jsd_rf_jsd = pearson(xs, ys);
      } catch (const std::invalid_argument&) {
        // zero variance: correlation undefined, leave empty
      }
    }
  }

  const fs::path results = out_dir / "results";
  fs::create_directories(results);
  atomic_write_text(results / "table_rows.csv", table.to_csv(true));
  atomic_write_text(results / "table_aggregate.csv", table.aggregate_csv());
  atomic_write_text(results / "table.json", table.to_json_text());
  return table;
}

ResultTable cmd_sweep(const ExperimentConfig& cfg, const fs::path& out_dir) {
  std::vector<Method> methods = cfg.methods;
  const bool wants_gold = cfg.metric_jsd || cfg.metric_avg_gap;
  if (wants_gold &&
      std::find(methods.begin(), methods.end(), Method::kGold) == methods.end()) {
    methods.insert(methods.begin(), Method::kGold);
  }

  std::vector<fs::path> manifests;
  for (const std::uint64_t seed : cfg.seeds) {
    cmd_pretrain(cfg, seed, out_dir);
    for (const Method method : methods) {
      manifests.push_back(cmd_unlearn(cfg, method, seed, out_dir));
    }
  }
  return cmd_evaluate(cfg, manifests, out_dir);
}

LeakageReport cmd_leakage_check(const ExperimentConfig& cfg,
                                std::uint64_t seed) {
  return detect_leakage(cfg.build_dataset(seed));
}

LeakageReport cmd_leakage_check_file(const fs::path& dataset) {
  return detect_leakage(load_dataset(dataset));
}

std::string leakage_report_json(const LeakageReport& report) {
  json j;
  j["clean"] = report.clean();
  auto pairs_json = [](const std::vector<DuplicatePair>& pairs) {
    json arr = json::array();
    for (const auto& p : pairs) {
      arr.push_back(json{{"split_a", p.split_a},
                         {"id_a", p.id_a},
                         {"split_b", p.split_b},
                         {"id_b", p.id_b}});
    }
    return arr;
  };
  j["within_split"] = pairs_json(report.within_split);
  j["cross_split"] = pairs_json(report.cross_split);
  return j.dump(2);
}

}  // namespace mulab
