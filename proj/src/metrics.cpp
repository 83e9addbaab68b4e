#include "mulab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "mulab/io.hpp"
#include "mulab/numeric.hpp"
#include "mulab/rng.hpp"

namespace mulab {

PredictionDump make_dump(const Mlp& net, std::span<const LabeledSample> split,
                         const std::string& model_id,
                         const std::string& split_tag) {
  PredictionDump dump;
  dump.model_id = model_id;
  dump.split_tag = split_tag;
  dump.k = net.num_classes();
  dump.rows.reserve(split.size());
  for (const auto& s : split) {
    DumpRow row;
    row.sample_id = s.id;
    row.label = s.label;
    row.probs = ProbVector{softmax(forward(net, s.input))};
    dump.rows.push_back(std::move(row));
  }
  return dump;
}

void save_dump(const PredictionDump& dump, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "# mulab-dump v1\n";
  out << "model=" << dump.model_id << " split=" << dump.split_tag
      << " k=" << dump.k << " n=" << dump.rows.size() << "\n";
  char buf[40];
  for (const auto& row : dump.rows) {
    out << row.sample_id << " " << row.label;
    for (double p : row.probs.values) {
      std::snprintf(buf, sizeof(buf), "%.17g", p);
      out << " " << buf;
    }
    out << "\n";
  }
  atomic_write_text(path, out.str());
}

PredictionDump load_dump(const std::filesystem::path& path) {
  std::istringstream in(read_text(path));
  std::string line;
  if (!std::getline(in, line) || line != "# mulab-dump v1") {
    throw std::runtime_error("unrecognized dump file: " + path.string());
  }
  PredictionDump dump;
  std::size_t n = 0;
  {
    std::getline(in, line);
    std::istringstream header(line);
    std::string field;
    while (header >> field) {
      const auto eq = field.find('=');
      const std::string key = field.substr(0, eq);
      const std::string value = field.substr(eq + 1);
      if (key == "model") dump.model_id = value;
      else if (key == "split") dump.split_tag = value;
      else if (key == "k") dump.k = std::stoi(value);
      else if (key == "n") n = std::stoull(value);
    }
  }
  if (dump.k < 1) throw std::runtime_error("dump header is malformed");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row_in(line);
    DumpRow row;
    row_in >> row.sample_id >> row.label;
    row.probs.values.resize(dump.k);
    for (double& p : row.probs.values) row_in >> p;
    if (!row_in) throw std::runtime_error("dump row is malformed: " + line);
    dump.rows.push_back(std::move(row));
  }
  if (dump.rows.size() != n) {
    throw std::runtime_error("dump row count does not match header");
  }
  return dump;
}

double entropy(const ProbVector& p) {
  double h = 0.0;
  for (double x : p.values) {
    if (x > 0.0) h -= x * std::log(x);
  }
  return h;
}

double kl(const ProbVector& p, const ProbVector& q) {
  if (p.size() != q.size()) {
    throw std::invalid_argument("kl: dimension mismatch");
  }
  double d = 0.0;
  for (int i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    d += p[i] * std::log(p[i] / std::max(q[i], 1e-12));
  }
  return d;
}

double jsd_pair(const ProbVector& p, const ProbVector& q) {
  if (p.size() != q.size()) {
    throw std::invalid_argument("jsd: dimension mismatch");
  }
  ProbVector m;
  m.values.resize(p.size());
  for (int i = 0; i < p.size(); ++i) m.values[i] = 0.5 * (p[i] + q[i]);
  return 0.5 * kl(p, m) + 0.5 * kl(q, m);
}

double jsd_forget(const PredictionDump& dump_un,
                  const PredictionDump& dump_gold) {
  if (dump_un.rows.empty() || dump_un.k != dump_gold.k ||
      dump_un.rows.size() != dump_gold.rows.size()) {
    throw std::invalid_argument("jsd_forget: dumps do not match");
  }
  std::unordered_map<std::int64_t, const DumpRow*> gold_by_id;
  for (const auto& row : dump_gold.rows) gold_by_id[row.sample_id] = &row;
  double sum = 0.0;
  for (const auto& row : dump_un.rows) {
    const auto it = gold_by_id.find(row.sample_id);
    if (it == gold_by_id.end()) {
      throw std::invalid_argument("jsd_forget: sample sets differ (id " +
                                  std::to_string(row.sample_id) + ")");
    }
    sum += jsd_pair(row.probs, it->second->probs);
  }
  return sum / static_cast<double>(dump_un.rows.size());
}

namespace {

/// L1-normalized per-class mean distributions, keyed by class label.
std::map<int, ProbVector> class_mean_distributions(const PredictionDump& dump) {
  std::map<int, std::vector<double>> sums;
  std::map<int, std::size_t> counts;
  for (const auto& row : dump.rows) {
    auto& acc = sums[row.label];
    if (acc.empty()) acc.assign(dump.k, 0.0);
    for (int i = 0; i < dump.k; ++i) acc[i] += row.probs[i];
    counts[row.label] += 1;
  }
  std::map<int, ProbVector> means;
  for (auto& [label, acc] : sums) {
    double z = 0.0;
    for (double x : acc) z += x;
    for (double& x : acc) x /= z;
    means[label] = ProbVector{std::move(acc)};
  }
  return means;
}

}  // namespace

RfJsdResult rf_jsd(const PredictionDump& dump_un_forget,
                   const PredictionDump& dump_orig_unseen) {
  if (dump_un_forget.rows.empty() || dump_orig_unseen.rows.empty()) {
    throw std::invalid_argument("rf_jsd: empty dump");
  }
  if (dump_un_forget.k != dump_orig_unseen.k) {
    throw std::invalid_argument("rf_jsd: class count mismatch");
  }
  const auto p_means = class_mean_distributions(dump_un_forget);
  const auto q_means = class_mean_distributions(dump_orig_unseen);

  RfJsdResult result;
  double sum = 0.0;
  int used = 0;
  for (int c = 0; c < dump_un_forget.k; ++c) {
    const auto pit = p_means.find(c);
    const auto qit = q_means.find(c);
    if (pit == p_means.end() || qit == q_means.end()) {
      result.skipped_classes.push_back(c);
      continue;
    }
    sum += jsd_pair(pit->second, qit->second);
    ++used;
  }
  if (used == 0) {
    throw std::invalid_argument("rf_jsd: no class present in both dumps");
  }
  result.value = sum / static_cast<double>(used);
  return result;
}

double avg_gap(const AccuracyQuad& unlearned, const AccuracyQuad& gold) {
  return 0.25 * (std::abs(unlearned.mia - gold.mia) +
                 std::abs(unlearned.forget - gold.forget) +
                 std::abs(unlearned.retain - gold.retain) +
                 std::abs(unlearned.test - gold.test));
}

namespace {

struct AttackPoint {
  double features[3];
  int member = 0;
};

AttackPoint attack_features(const DumpRow& row) {
  AttackPoint pt;
  const auto& p = row.probs.values;
  pt.features[0] = max_element_value(p);
  pt.features[1] = entropy(row.probs);
  pt.features[2] = -std::log(std::max(p[row.label], 1e-12));
  return pt;
}

/// Plain full-batch logistic regression on standardized features. Fixed
/// iteration budget keeps it deterministic for a given seed and input.
struct LogisticModel {
  double w[3] = {0, 0, 0};
  double b = 0;
  double mean[3] = {0, 0, 0};
  double scale[3] = {1, 1, 1};

  double score(const AttackPoint& pt) const {
    double z = b;
    for (int j = 0; j < 3; ++j) {
      z += w[j] * (pt.features[j] - mean[j]) / scale[j];
    }
    return 1.0 / (1.0 + std::exp(-z));
  }
};

LogisticModel fit_logistic(std::span<const AttackPoint> train) {
  LogisticModel model;
  for (const auto& pt : train) {
    for (int j = 0; j < 3; ++j) model.mean[j] += pt.features[j];
  }
  for (int j = 0; j < 3; ++j) model.mean[j] /= static_cast<double>(train.size());
  for (const auto& pt : train) {
    for (int j = 0; j < 3; ++j) {
      const double d = pt.features[j] - model.mean[j];
      model.scale[j] += d * d;
    }
  }
  for (int j = 0; j < 3; ++j) {
    model.scale[j] = std::sqrt(model.scale[j] / static_cast<double>(train.size()));
    if (model.scale[j] < 1e-12) model.scale[j] = 1.0;
  }

  const double lr = 0.5;
  const int iterations = 400;
  for (int it = 0; it < iterations; ++it) {
    double gw[3] = {0, 0, 0};
    double gb = 0;
    for (const auto& pt : train) {
      const double err = model.score(pt) - pt.member;
      for (int j = 0; j < 3; ++j) {
        gw[j] += err * (pt.features[j] - model.mean[j]) / model.scale[j];
      }
      gb += err;
    }
    const double inv_n = 1.0 / static_cast<double>(train.size());
    for (int j = 0; j < 3; ++j) model.w[j] -= lr * gw[j] * inv_n;
    model.b -= lr * gb * inv_n;
  }
  return model;
}

}  // namespace

MiaResult mia_accuracy(const PredictionDump& members,
                       const PredictionDump& non_members,
                       const PredictionDump& forget, std::uint64_t seed) {
  if (members.rows.empty() || non_members.rows.empty() ||
      forget.rows.empty()) {
    throw std::invalid_argument("mia: empty dump");
  }
  std::vector<AttackPoint> member_pts;
  std::vector<AttackPoint> non_member_pts;
  for (const auto& row : members.rows) {
    member_pts.push_back(attack_features(row));
    member_pts.back().member = 1;
  }
  for (const auto& row : non_members.rows) {
    non_member_pts.push_back(attack_features(row));
  }

  // Class-balance by subsampling the larger side, then split 80/20.
  SeedStream rng = SeedStream(seed).child("mia-attack");
  rng.shuffle(member_pts);
  rng.shuffle(non_member_pts);
  const std::size_t n = std::min(member_pts.size(), non_member_pts.size());
  if (n < 5) {
    throw std::invalid_argument("mia: too few samples to balance and split");
  }
  member_pts.resize(n);
  non_member_pts.resize(n);

  const std::size_t n_train = (n * 8) / 10;
  std::vector<AttackPoint> train;
  std::vector<AttackPoint> holdout;
  for (std::size_t i = 0; i < n; ++i) {
    auto& dest = i < n_train ? train : holdout;
    dest.push_back(member_pts[i]);
    dest.push_back(non_member_pts[i]);
  }
  if (train.empty() || holdout.empty()) {
    throw std::invalid_argument("mia: degenerate train/holdout split");
  }

  const LogisticModel model = fit_logistic(train);

  MiaResult result;
  std::size_t holdout_correct = 0;
  for (const auto& pt : holdout) {
    const int predicted = model.score(pt) >= 0.5 ? 1 : 0;
    if (predicted == pt.member) ++holdout_correct;
  }
  result.holdout_accuracy =
      static_cast<double>(holdout_correct) / static_cast<double>(holdout.size());

  std::size_t flagged = 0;
  for (const auto& row : forget.rows) {
    if (model.score(attack_features(row)) >= 0.5) ++flagged;
  }
  result.forget_member_rate =
      static_cast<double>(flagged) / static_cast<double>(forget.rows.size());
  return result;
}

FanoReport fano_check(const JointDistribution& joint) {
  const int m = joint.size;
  if (m < 2) {
    throw std::invalid_argument("fano_check: sample space must have >= 2 outcomes");
  }
  if (joint.p.size() != static_cast<std::size_t>(m) * m) {
    throw std::invalid_argument("fano_check: joint must be square");
  }
  double total = 0.0;
  for (double x : joint.p) {
    if (!(x >= 0.0)) throw std::invalid_argument("fano_check: negative mass");
    total += x;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("fano_check: joint must sum to 1");
  }

  FanoReport report;
  double diagonal = 0.0;
  for (int x = 0; x < m; ++x) diagonal += joint.at(x, x);
  report.error_probability = 1.0 - diagonal;

  // H(X | prediction) = sum_y p(y) H(X | y), all by direct summation.
  double cond = 0.0;
  for (int y = 0; y < m; ++y) {
    double py = 0.0;
    for (int x = 0; x < m; ++x) py += joint.at(x, y);
    if (py <= 0.0) continue;
    for (int x = 0; x < m; ++x) {
      const double pxy = joint.at(x, y);
      if (pxy <= 0.0) continue;
      cond -= pxy * std::log(pxy / py);
    }
  }
  report.conditional_entropy = cond;
  report.bound = (cond - 1.0) / std::log(static_cast<double>(m));
  report.holds = report.error_probability >= report.bound - 1e-12;
  return report;
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 3) {
    throw std::invalid_argument("pearson: need equal lengths >= 3");
  }
  const double mx = mean(xs);
  const double my = mean(ys);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) {
    throw std::invalid_argument("pearson: zero variance");
  }
  return sxy / std::sqrt(sxx * syy);
}

EntropyHistogram entropy_histogram(const PredictionDump& dump) {
  if (dump.rows.empty()) {
    throw std::invalid_argument("entropy_histogram: empty dump");
  }
  EntropyHistogram hist;
  hist.max_entropy = std::log(static_cast<double>(dump.k));
  hist.counts.assign(hist.bins, 0);
  for (const auto& row : dump.rows) {
    const double h = entropy(row.probs);
    int bin = static_cast<int>(h / hist.max_entropy * hist.bins);
    bin = std::clamp(bin, 0, hist.bins - 1);
    hist.counts[bin] += 1;
  }
  return hist;
}

double wasserstein1(const EntropyHistogram& a, const EntropyHistogram& b) {
  if (a.bins != b.bins || a.max_entropy != b.max_entropy) {
    throw std::invalid_argument("wasserstein1: histogram layouts differ");
  }
  double na = 0.0, nb = 0.0;
  for (auto c : a.counts) na += static_cast<double>(c);
  for (auto c : b.counts) nb += static_cast<double>(c);
  const double bin_width = a.max_entropy / a.bins;
  double cdf_diff = 0.0;
  double distance = 0.0;
  for (int i = 0; i < a.bins; ++i) {
    cdf_diff += static_cast<double>(a.counts[i]) / na -
                static_cast<double>(b.counts[i]) / nb;
    distance += std::abs(cdf_diff) * bin_width;
  }
  return distance;
}

}  // namespace mulab
