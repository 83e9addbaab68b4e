#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mulab/data.hpp"
#include "mulab/gumbel.hpp"
#include "mulab/nn.hpp"
#include "mulab/schedule.hpp"

namespace mulab {

enum class Method {
  kLotus,
  kGold,
  kFinetune,
  kNegGradPlus,
  kRandomLabel,
  kBadTeacher,
};

Method parse_method(const std::string& name);
const char* method_name(Method method);

/// Which activation perturbs the teacher's forget-sample outputs.
enum class TeacherActivation {
  kGumbelSoftmax,
  kSoftmaxTemperature,  // noise-free ablation
};

struct UnlearnConfig {
  int epochs = 10;
  double learning_rate = 1e-3;
  double weight_decay = 5e-4;
  int batch_size = 32;
  double retain_fraction = 0.3;  // share of the retain set that participates
  double alpha = 2.0;
  std::uint64_t seed = 0;
  Method method = Method::kLotus;
  ScheduleMode schedule_mode = ScheduleMode::kInstanceWise;
  TeacherActivation activation = TeacherActivation::kGumbelSoftmax;
};

struct EpochStats {
  int epoch = 0;         // 1-based
  double acc_forget = 0.0;
  double acc_unseen = 0.0;
  double delta_acc = 0.0;  // the difference the schedule responded to
  double tau = 1.0;
};

struct RunResult {
  Mlp student;
  std::vector<EpochStats> trajectory;  // one entry per epoch
  double wall_seconds = 0.0;
};

/// Distillation loss for one instance: cross-entropy of the student's
/// softmax against the perturbed teacher target. Forget samples (l = 1) use
/// the Gumbel-Softmax target at the given temperature; retain samples (l = 0)
/// use the sharpened teacher. Minimizing the returned value drives the
/// student toward the target.
double lotus_loss(const Logits& teacher_logits, const Logits& student_logits,
                  int unlearn_label, Temperature tau, const GumbelNoise& noise);

/// Stratified per-class subset of the retain set, drawn once per seed. The
/// draw depends only on (retain split, fraction, seed), so methods compared
/// under one seed share the same subset.
std::vector<LabeledSample> stratified_retain_subset(
    std::span<const LabeledSample> retain, double fraction, std::uint64_t seed);

/// One sample of the shared training engine: input, soft target, loss sign.
struct SoftSample {
  const LabeledSample* sample = nullptr;
  std::vector<double> target;  // distribution over the k classes
  double sign = 1.0;           // -1 flips the gradient (ascent)
};

/// One optimizer step per batch; the logit gradient of each sample is
/// sign * (softmax(student(x)) - target), averaged over the batch.
void train_batch_soft(Mlp& net, AdamWState& opt,
                      std::span<const SoftSample* const> batch);

/// Cross-entropy training on hard labels; the engine behind pretraining and
/// the retrain-from-scratch reference.
void train_classifier(Mlp& net, std::span<const LabeledSample> samples,
                      int epochs, double learning_rate, double weight_decay,
                      int batch_size, SeedStream& order_rng);

/// The tempered-distillation unlearning loop. The teacher stays frozen at
/// f_orig; the student starts from f_orig. Each epoch re-measures the
/// forget-set accuracy, recomputes the temperature, draws fresh noise per
/// forget sample, and alternates forget and retain batches.
RunResult run_lotus(const Mlp& f_orig, const SplitDataset& data,
                    const UnlearnConfig& cfg);

/// The reference unlearners sharing the same engine: retrain-from-scratch
/// (gold), finetune, NegGrad+, random labeling, bad-teacher distillation.
RunResult run_baseline(const Mlp& f_orig, const SplitDataset& data,
                       const UnlearnConfig& cfg);

/// Dispatch on cfg.method.
RunResult run_method(const Mlp& f_orig, const SplitDataset& data,
                     const UnlearnConfig& cfg);

}  // namespace mulab
