#include "mulab/unlearn.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <stdexcept>

#include "mulab/numeric.hpp"

namespace mulab {

Method parse_method(const std::string& name) {
  if (name == "lotus") return Method::kLotus;
  if (name == "gold") return Method::kGold;
  if (name == "finetune") return Method::kFinetune;
  if (name == "neggrad_plus") return Method::kNegGradPlus;
  if (name == "random_label") return Method::kRandomLabel;
  if (name == "bad_teacher") return Method::kBadTeacher;
  throw std::invalid_argument("unknown method: " + name);
}

const char* method_name(Method method) {
  switch (method) {
    case Method::kLotus: return "lotus";
    case Method::kGold: return "gold";
    case Method::kFinetune: return "finetune";
    case Method::kNegGradPlus: return "neggrad_plus";
    case Method::kRandomLabel: return "random_label";
    case Method::kBadTeacher: return "bad_teacher";
  }
  throw std::invalid_argument("unknown method tag");
}

double lotus_loss(const Logits& teacher_logits, const Logits& student_logits,
                  int unlearn_label, Temperature tau,
                  const GumbelNoise& noise) {
  if (teacher_logits.size() != student_logits.size()) {
    throw std::invalid_argument("lotus_loss: class count mismatch");
  }
  if (!all_finite(teacher_logits) || !all_finite(student_logits)) {
    throw std::domain_error("lotus_loss: non-finite logits");
  }
  const ProbVector target = unlearn_label == 1
                                ? gumbel_softmax(teacher_logits, noise, tau)
                                : sharpen(teacher_logits);
  const std::vector<double> log_student = log_softmax(student_logits);
  double loss = 0.0;
  for (std::size_t i = 0; i < log_student.size(); ++i) {
    loss -= target[static_cast<int>(i)] * log_student[i];
  }
  return loss;
}

std::vector<LabeledSample> stratified_retain_subset(
    std::span<const LabeledSample> retain, double fraction,
    std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("retain fraction must be in (0, 1]");
  }
  std::map<int, std::vector<const LabeledSample*>> by_class;
  for (const auto& s : retain) by_class[s.label].push_back(&s);

  SeedStream rng = SeedStream(seed).child("retain-subset");
  std::vector<LabeledSample> subset;
  for (auto& [label, pool] : by_class) {
    rng.shuffle(pool);
    const auto take = std::max<std::size_t>(
        1, static_cast<std::size_t>(
               std::llround(fraction * static_cast<double>(pool.size()))));
    for (std::size_t i = 0; i < std::min(take, pool.size()); ++i) {
      subset.push_back(*pool[i]);
    }
  }
  return subset;
}

void train_batch_soft(Mlp& net, AdamWState& opt,
                      std::span<const SoftSample* const> batch) {
  if (batch.empty()) return;
  std::vector<std::vector<double>> inputs;
  std::vector<std::vector<double>> dlogits;
  inputs.reserve(batch.size());
  dlogits.reserve(batch.size());
  for (const SoftSample* item : batch) {
    inputs.push_back(item->sample->input);
    std::vector<double> g = softmax(forward(net, item->sample->input));
    for (std::size_t i = 0; i < g.size(); ++i) {
      g[i] = item->sign * (g[i] - item->target[i]);
    }
    dlogits.push_back(std::move(g));
  }
  const Gradients grads = backward(net, inputs, dlogits);
  adamw_step(net, grads, opt);
}

namespace {

std::vector<double> one_hot(int label, int k) {
  std::vector<double> t(k, 0.0);
  t[label] = 1.0;
  return t;
}

std::vector<std::vector<const SoftSample*>> chunk_shuffled(
    std::vector<const SoftSample*> items, int batch_size, SeedStream& rng) {
  rng.shuffle(items);
  std::vector<std::vector<const SoftSample*>> batches;
  for (std::size_t i = 0; i < items.size(); i += batch_size) {
    const std::size_t end = std::min(items.size(), i + batch_size);
    batches.emplace_back(items.begin() + i, items.begin() + end);
  }
  return batches;
}

void run_batches(Mlp& net, AdamWState& opt,
                 const std::vector<std::vector<const SoftSample*>>& batches) {
  for (const auto& b : batches) train_batch_soft(net, opt, b);
}

EpochStats measure_epoch(int epoch, const Mlp& student,
                         const SplitDataset& data, double acc_unseen,
                         const ScheduleConfig& schedule) {
  EpochStats stats;
  stats.epoch = epoch;
  stats.acc_forget = accuracy(student, data.forget);
  stats.acc_unseen = acc_unseen;
  const AccuracySnapshot snap{stats.acc_forget, stats.acc_unseen, epoch};
  stats.delta_acc = schedule_delta(snap, schedule);
  stats.tau = tau_dynamic(snap, schedule).tau;
  return stats;
}

void check_run_config(const UnlearnConfig& cfg) {
  if (cfg.epochs < 1) throw std::invalid_argument("unlearn: epochs must be >= 1");
  if (!(cfg.learning_rate > 0.0)) {
    throw std::invalid_argument("unlearn: learning rate must be > 0");
  }
  if (cfg.batch_size < 1) {
    throw std::invalid_argument("unlearn: batch size must be >= 1");
  }
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

void train_classifier(Mlp& net, std::span<const LabeledSample> samples,
                      int epochs, double learning_rate, double weight_decay,
                      int batch_size, SeedStream& order_rng) {
  if (samples.empty()) {
    throw std::invalid_argument("train_classifier: empty sample set");
  }
  const int k = net.num_classes();
  std::vector<SoftSample> pool;
  pool.reserve(samples.size());
  for (const auto& s : samples) {
    pool.push_back({&s, one_hot(s.label, k), 1.0});
  }
  std::vector<const SoftSample*> refs;
  for (const auto& p : pool) refs.push_back(&p);

  AdamWState opt = make_adamw(net, learning_rate, weight_decay);
  for (int e = 0; e < epochs; ++e) {
    run_batches(net, opt, chunk_shuffled(refs, batch_size, order_rng));
  }
}

RunResult run_lotus(const Mlp& f_orig, const SplitDataset& data,
                    const UnlearnConfig& cfg) {
  if (cfg.method != Method::kLotus) {
    throw std::invalid_argument("run_lotus: config method is not lotus");
  }
  check_run_config(cfg);
  if (data.forget.empty() || data.unseen.empty()) {
    throw std::invalid_argument("run_lotus: forget and unseen must be non-empty");
  }

  const auto start = Clock::now();
  const ScheduleConfig schedule{cfg.alpha, cfg.schedule_mode};
  RunResult result;
  result.student = f_orig;

  const std::vector<LabeledSample> retain_sub =
      stratified_retain_subset(data.retain, cfg.retain_fraction, cfg.seed);

  // The teacher is frozen, so its logits and the sharpened retain targets
  // are computed once.
  std::vector<Logits> forget_teacher;
  forget_teacher.reserve(data.forget.size());
  for (const auto& s : data.forget) forget_teacher.push_back(forward(f_orig, s.input));

  std::vector<SoftSample> retain_pool;
  retain_pool.reserve(retain_sub.size());
  for (const auto& s : retain_sub) {
    retain_pool.push_back({&s, sharpen(forward(f_orig, s.input)).values, 1.0});
  }

  const double acc_unseen = accuracy(f_orig, data.unseen);

  SeedStream root(cfg.seed);
  SeedStream order_rng = root.child("lotus-order");
  SeedStream noise_rng = root.child("lotus-noise");
  const int k = f_orig.num_classes();
  const GumbelNoise zero_noise{std::vector<double>(k, 0.0)};

  AdamWState opt = make_adamw(result.student, cfg.learning_rate, cfg.weight_decay);
  std::vector<SoftSample> forget_pool(data.forget.size());

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const EpochStats stats =
        measure_epoch(epoch, result.student, data, acc_unseen, schedule);
    result.trajectory.push_back(stats);
    const Temperature tau{stats.tau};

    // Fresh noise for every forget sample, every epoch.
    for (std::size_t i = 0; i < data.forget.size(); ++i) {
      const ProbVector target =
          cfg.activation == TeacherActivation::kGumbelSoftmax
              ? gumbel_softmax(forget_teacher[i], sample_gumbel(k, noise_rng), tau)
              : softmax_temperature(forget_teacher[i], tau);
      forget_pool[i] = {&data.forget[i], target.values, 1.0};
    }

    std::vector<const SoftSample*> forget_refs;
    for (const auto& p : forget_pool) forget_refs.push_back(&p);
    std::vector<const SoftSample*> retain_refs;
    for (const auto& p : retain_pool) retain_refs.push_back(&p);

    const auto fb = chunk_shuffled(forget_refs, cfg.batch_size, order_rng);
    const auto rb = chunk_shuffled(retain_refs, cfg.batch_size, order_rng);

    // Alternate forget and retain batches; leftovers run at the tail.
    const std::size_t common = std::min(fb.size(), rb.size());
    for (std::size_t i = 0; i < common; ++i) {
      train_batch_soft(result.student, opt, fb[i]);
      train_batch_soft(result.student, opt, rb[i]);
    }
    for (std::size_t i = common; i < fb.size(); ++i) {
      train_batch_soft(result.student, opt, fb[i]);
    }
    for (std::size_t i = common; i < rb.size(); ++i) {
      train_batch_soft(result.student, opt, rb[i]);
    }
  }

  result.wall_seconds = seconds_since(start);
  return result;
}

namespace {

RunResult run_pool_method(const Mlp& f_orig, const SplitDataset& data,
                          const UnlearnConfig& cfg) {
  const auto start = Clock::now();
  const ScheduleConfig schedule{cfg.alpha, cfg.schedule_mode};
  const int k = f_orig.num_classes();

  SeedStream root(cfg.seed);
  SeedStream order_rng = root.child("baseline-order");
  SeedStream label_rng = root.child("random-labels");

  RunResult result;

  std::vector<LabeledSample> retain_sub;
  if (cfg.method != Method::kGold) {
    retain_sub = stratified_retain_subset(data.retain, cfg.retain_fraction, cfg.seed);
  }

  std::vector<SoftSample> pool;
  Mlp bad_net;  // kept alive for the bad-teacher targets

  switch (cfg.method) {
    case Method::kGold: {
      SeedStream init_rng = root.child("gold-init");
      result.student = make_mlp(f_orig.layer_dims, init_rng);
      // Retraining from scratch sees the full retain set.
      for (const auto& s : data.retain) {
        pool.push_back({&s, one_hot(s.label, k), 1.0});
      }
      break;
    }
    case Method::kFinetune: {
      result.student = f_orig;
      for (const auto& s : retain_sub) {
        pool.push_back({&s, one_hot(s.label, k), 1.0});
      }
      break;
    }
    case Method::kNegGradPlus: {
      result.student = f_orig;
      for (const auto& s : retain_sub) {
        pool.push_back({&s, one_hot(s.label, k), 1.0});
      }
      for (const auto& s : data.forget) {
        pool.push_back({&s, one_hot(s.label, k), -1.0});
      }
      break;
    }
    case Method::kRandomLabel: {
      result.student = f_orig;
      for (const auto& s : retain_sub) {
        pool.push_back({&s, one_hot(s.label, k), 1.0});
      }
      for (const auto& s : data.forget) {
        pool.push_back({&s, one_hot(s.label, k), 1.0});  // relabeled per epoch
      }
      break;
    }
    case Method::kBadTeacher: {
      result.student = f_orig;
      SeedStream init_rng = root.child("bad-teacher-init");
      bad_net = make_mlp(f_orig.layer_dims, init_rng);
      for (const auto& s : retain_sub) {
        pool.push_back({&s, softmax(forward(f_orig, s.input)), 1.0});
      }
      for (const auto& s : data.forget) {
        pool.push_back({&s, softmax(forward(bad_net, s.input)), 1.0});
      }
      break;
    }
    default:
      throw std::invalid_argument("run_baseline: not a baseline method");
  }

  const std::size_t forget_begin = pool.size() - (cfg.method == Method::kNegGradPlus ||
                                                  cfg.method == Method::kRandomLabel ||
                                                  cfg.method == Method::kBadTeacher
                                                      ? data.forget.size()
                                                      : 0);

  std::vector<const SoftSample*> refs;
  for (const auto& p : pool) refs.push_back(&p);

  const double acc_unseen = accuracy(f_orig, data.unseen);
  AdamWState opt = make_adamw(result.student, cfg.learning_rate, cfg.weight_decay);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    result.trajectory.push_back(
        measure_epoch(epoch, result.student, data, acc_unseen, schedule));
    result.trajectory.back().tau = 1.0;  // no tempering outside the lotus loop

    if (cfg.method == Method::kRandomLabel) {
      for (std::size_t i = forget_begin; i < pool.size(); ++i) {
        const int truth = pool[i].sample->label;
        int wrong = static_cast<int>(label_rng.below(k - 1));
        if (wrong >= truth) ++wrong;
        pool[i].target = one_hot(wrong, k);
      }
    }

    run_batches(result.student, opt, chunk_shuffled(refs, cfg.batch_size, order_rng));
  }

  result.wall_seconds = seconds_since(start);
  return result;
}

}  // namespace

RunResult run_baseline(const Mlp& f_orig, const SplitDataset& data,
                       const UnlearnConfig& cfg) {
  if (cfg.method == Method::kLotus) {
    throw std::invalid_argument("run_baseline: use run_lotus for lotus");
  }
  check_run_config(cfg);
  if (data.retain.empty()) {
    throw std::invalid_argument("run_baseline: retain must be non-empty");
  }
  return run_pool_method(f_orig, data, cfg);
}

RunResult run_method(const Mlp& f_orig, const SplitDataset& data,
                     const UnlearnConfig& cfg) {
  return cfg.method == Method::kLotus ? run_lotus(f_orig, data, cfg)
                                      : run_baseline(f_orig, data, cfg);
}

}  // namespace mulab
