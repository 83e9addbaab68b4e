#include "mulab/schedule.hpp"

#include <cmath>
#include <stdexcept>

#include "mulab/numeric.hpp"

namespace mulab {

double accuracy(const Mlp& net, std::span<const LabeledSample> samples) {
  if (samples.empty()) {
    throw std::invalid_argument("accuracy: empty sample set");
  }
  std::size_t correct = 0;
  for (const auto& s : samples) {
    const Logits z = forward(net, s.input);
    if (argmax_lowest(z) == s.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(samples.size());
}

double schedule_delta(const AccuracySnapshot& snapshot,
                      const ScheduleConfig& cfg) {
  switch (cfg.mode) {
    case ScheduleMode::kInstanceWise:
      return snapshot.acc_forget_student - snapshot.acc_unseen_teacher;
    case ScheduleMode::kClassWise:
      return snapshot.acc_forget_student;
  }
  throw std::invalid_argument("schedule: unknown mode");
}

Temperature tau_dynamic(const AccuracySnapshot& snapshot,
                        const ScheduleConfig& cfg) {
  if (!(cfg.alpha > 0.0)) {
    throw std::invalid_argument("schedule: alpha must be > 0");
  }
  return Temperature{std::exp(cfg.alpha * schedule_delta(snapshot, cfg))};
}

}  // namespace mulab
