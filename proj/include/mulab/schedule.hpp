#pragma once

#include <span>

#include "mulab/data.hpp"
#include "mulab/gumbel.hpp"
#include "mulab/nn.hpp"

namespace mulab {

enum class ScheduleMode {
  kInstanceWise,  // tau follows acc(student, forget) - acc(teacher, unseen)
  kClassWise,     // tau follows acc(student, forget) alone; target is zero
};

struct ScheduleConfig {
  double alpha = 2.0;  // grid-selected default
  ScheduleMode mode = ScheduleMode::kInstanceWise;
};

struct AccuracySnapshot {
  double acc_forget_student = 0.0;
  double acc_unseen_teacher = 0.0;
  int epoch = 0;
};

/// Fraction of samples whose argmax logit equals the label; argmax ties
/// resolve to the lowest class index. Clean deterministic forward passes,
/// no noise.
double accuracy(const Mlp& net, std::span<const LabeledSample> samples);

/// Dynamic temperature exp(alpha * delta). Instance-wise delta is the
/// forget/unseen accuracy difference; class-wise drops the unseen term so
/// the controller pushes the forget-class accuracy toward zero.
Temperature tau_dynamic(const AccuracySnapshot& snapshot,
                        const ScheduleConfig& cfg);

/// The accuracy difference the schedule responds to, per mode.
double schedule_delta(const AccuracySnapshot& snapshot,
                      const ScheduleConfig& cfg);

}  // namespace mulab
