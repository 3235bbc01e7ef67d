#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "quakenet/error.hpp"
#include "quakenet/features.hpp"
#include "quakenet/network.hpp"

namespace quakenet {

enum class UpdateRule { Momentum, Quickprop };
enum class StopReason { TargetReached, Overtraining, MaxEpochs };

std::string to_string(UpdateRule rule);
std::string to_string(StopReason reason);
UpdateRule parse_update_rule(std::string_view name);

struct TrainingConfig {
  UpdateRule rule = UpdateRule::Quickprop;
  double learning_rate = 0.05;
  double momentum = 0.9;              // momentum rule only
  double quickprop_max_growth = 1.75;  // quickprop rule only
  std::size_t max_epochs = 10000;
  std::size_t patience = 25;
  /// Stop once every output's mean absolute normalized training error is at
  /// or below this fraction.
  double target_training_error = 0.10;
  std::uint64_t seed = 0;
  bool shuffle_each_epoch = false;

  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_mse = 0.0;
  double val_mse = 0.0;
  /// Largest per-output mean absolute normalized training error.
  double train_abs_error = 0.0;
};

/// Epoch 0 is the untrained network; epoch k >= 1 follows the k-th update.
struct TrainingHistory {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  StopReason stop_reason = StopReason::MaxEpochs;
  std::size_t cycles = 0;
  double wall_seconds = 0.0;
};

struct TrainResult {
  Network network;  // parameters from the best validation epoch
  TrainingHistory history;
};

/// Raised when a training or validation loss stops being finite. Carries the
/// history up to the last finite epoch and the best network seen so far.
class TrainingDiverged : public Error {
 public:
  TrainingDiverged(const std::string& message, TrainResult partial)
      : Error(ErrorCode::NonFiniteLoss, message), partial_(std::move(partial)) {}
  const TrainResult& partial() const { return partial_; }

 private:
  TrainResult partial_;
};

/// Scratch buffers for backward(); reuse one per thread to avoid allocation.
struct BackpropWorkspace {
  std::vector<std::vector<double>> trace;
  std::vector<double> delta;
  std::vector<double> delta_prev;
};

/// Adds d/dtheta of 0.5 * sum_k (y_k - t_k)^2 for one sample into `grad`
/// (same layout as network.parameters()) and returns that loss.
double backward(const Network& network, std::span<const double> input, std::span<const double> target,
                std::span<double> grad, BackpropWorkspace& ws);

/// Convenience form that allocates and returns a fresh gradient.
std::vector<double> gradient(const Network& network, std::span<const double> input, std::span<const double> target,
                             double* loss = nullptr);

/// delta = -lr * g + momentum * delta; params += delta.
void update_momentum(std::span<double> params, std::span<const double> grads, std::span<double> deltas,
                     const TrainingConfig& config);

/// Quickprop secant step per scalar, capped at quickprop_max_growth times the
/// previous step. Falls back to -lr * g when the previous step is zero or the
/// slope difference is below 1e-12. `deltas` holds the previous step on entry
/// and the applied step on exit.
void update_quickprop(std::span<double> params, std::span<const double> grads, std::span<const double> prev_grads,
                      std::span<double> deltas, const TrainingConfig& config);

/// Full-batch training with early stopping on the validation set.
TrainResult train(const Network& initial, const DatasetSplit& split, const TrainingConfig& config);

/// Mean over samples of the mean squared normalized error.
double evaluate_mse(const Network& network, std::span<const Sample> samples);

void write_history_csv(std::ostream& out, const TrainingHistory& history);
/// {"best_epoch", "cycles", "stop_reason", "wall_seconds"}
std::string history_summary_json(const TrainingHistory& history);

}  // namespace quakenet
