#include "quakenet/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>

#include "json.hpp"

#include "quakenet/random.hpp"
#include "text_util.hpp"

namespace quakenet {

std::string to_string(UpdateRule rule) { return rule == UpdateRule::Momentum ? "momentum" : "quickprop"; }

std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::TargetReached: return "target_reached";
    case StopReason::Overtraining: return "overtraining";
    case StopReason::MaxEpochs: return "max_epochs";
  }
  return "?";
}

UpdateRule parse_update_rule(std::string_view name) {
  if (name == "momentum") return UpdateRule::Momentum;
  if (name == "quickprop") return UpdateRule::Quickprop;
  throw Error(ErrorCode::Config, "unknown update rule '" + std::string(name) + "'");
}

void TrainingConfig::validate() const {
  if (!(learning_rate > 0.0)) throw Error(ErrorCode::Config, "learning_rate must be > 0");
  if (rule == UpdateRule::Momentum && !(momentum >= 0.0 && momentum < 1.0)) {
    throw Error(ErrorCode::Config, "momentum must be in [0, 1)");
  }
  if (rule == UpdateRule::Quickprop && !(quickprop_max_growth > 1.0)) {
    throw Error(ErrorCode::Config, "quickprop_max_growth must be > 1");
  }
  if (patience < 1) throw Error(ErrorCode::Config, "patience must be >= 1");
  if (!(target_training_error > 0.0 && target_training_error <= 1.0)) {
    throw Error(ErrorCode::Config, "target_training_error must be in (0, 1]");
  }
}

double backward(const Network& network, std::span<const double> input, std::span<const double> target,
                std::span<double> grad, BackpropWorkspace& ws) {
  if (input.size() != network.input_width() || target.size() != network.output_width() ||
      grad.size() != network.parameter_count()) {
    throw Error(ErrorCode::DimensionMismatch, "backward: input, target or gradient size does not match network");
  }
  network.evaluate(input, ws.trace);
  const auto params = network.parameters();
  const auto blocks = network.blocks();

  const auto& out = ws.trace.back();
  ws.delta.resize(out.size());
  double loss = 0.0;
  for (std::size_t k = 0; k < out.size(); ++k) {
    ws.delta[k] = out[k] - target[k];
    loss += 0.5 * ws.delta[k] * ws.delta[k];
  }

  for (std::size_t l = blocks.size(); l-- > 0;) {
    const auto& b = blocks[l];
    const auto& y = ws.trace[l];
    std::span<const double> x = l == 0 ? input : std::span<const double>(ws.trace[l - 1]);
    const bool propagate = l > 0;
    if (propagate) ws.delta_prev.assign(b.fan_in, 0.0);
    const double* p = params.data() + b.offset;
    double* g = grad.data() + b.offset;
    double* gv = grad.data() + b.vector_offset();

    if (b.kind == LayerKind::RadialGaussian) {
      const double* raw = params.data() + b.vector_offset();
      for (std::size_t j = 0; j < b.units; ++j) {
        const double* c = p + j * b.fan_in;
        const double sigma = softplus(raw[j]);
        const double inv_s2 = 1.0 / (sigma * sigma);
        const double common = ws.delta[j] * y[j];
        double d2 = 0.0;
        for (std::size_t k = 0; k < b.fan_in; ++k) {
          const double diff = x[k] - c[k];
          d2 += diff * diff;
          g[j * b.fan_in + k] += common * diff * inv_s2;
          if (propagate) ws.delta_prev[k] -= common * diff * inv_s2;
        }
        // dsigma/draw of softplus is the logistic function
        const double dsigma = 1.0 / (1.0 + std::exp(-raw[j]));
        gv[j] += common * d2 * inv_s2 / sigma * dsigma;
      }
    } else {
      for (std::size_t j = 0; j < b.units; ++j) {
        const double dz = b.kind == LayerKind::DenseTanh ? ws.delta[j] * (1.0 - y[j] * y[j]) : ws.delta[j];
        const double* w = p + j * b.fan_in;
        double* gw = g + j * b.fan_in;
        for (std::size_t k = 0; k < b.fan_in; ++k) gw[k] += dz * x[k];
        gv[j] += dz;
        if (propagate) {
          for (std::size_t k = 0; k < b.fan_in; ++k) ws.delta_prev[k] += dz * w[k];
        }
      }
    }
    if (propagate) std::swap(ws.delta, ws.delta_prev);
  }
  return loss;
}

std::vector<double> gradient(const Network& network, std::span<const double> input, std::span<const double> target,
                             double* loss) {
  std::vector<double> grad(network.parameter_count(), 0.0);
  BackpropWorkspace ws;
  const double l = backward(network, input, target, grad, ws);
  if (loss) *loss = l;
  return grad;
}

void update_momentum(std::span<double> params, std::span<const double> grads, std::span<double> deltas,
                     const TrainingConfig& config) {
  if (params.size() != grads.size() || params.size() != deltas.size()) {
    throw Error(ErrorCode::DimensionMismatch, "update_momentum: shape mismatch");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    deltas[i] = -config.learning_rate * grads[i] + config.momentum * deltas[i];
    params[i] += deltas[i];
  }
}

void update_quickprop(std::span<double> params, std::span<const double> grads, std::span<const double> prev_grads,
                      std::span<double> deltas, const TrainingConfig& config) {
  if (params.size() != grads.size() || params.size() != prev_grads.size() || params.size() != deltas.size()) {
    throw Error(ErrorCode::DimensionMismatch, "update_quickprop: shape mismatch");
  }
  const double mu = config.quickprop_max_growth;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double s = grads[i];
    const double s_prev = prev_grads[i];
    const double d_prev = deltas[i];
    const double denom = s_prev - s;
    double step;
    if (d_prev == 0.0 || std::abs(denom) < 1e-12) {
      step = -config.learning_rate * s;
    } else {
      const double ratio = s / denom;
      // Same-sign slopes with |s| >= |s_prev| put the parabola's vertex behind
      // us (ratio < 0); keep going at the growth limit instead.
      if (ratio > mu || (ratio < 0.0 && s * s_prev > 0.0)) {
        step = mu * d_prev;
      } else {
        step = ratio * d_prev;
        const double cap = mu * std::abs(d_prev);
        if (std::abs(step) > cap) step = std::copysign(cap, step);
      }
    }
    deltas[i] = step;
    params[i] += step;
  }
}

namespace {

struct BatchStats {
  double mse = 0.0;
  double max_abs_error = 0.0;
};

// Full-batch pass: accumulates the mean gradient into `grad` and reports the
// training error of the current parameters.
BatchStats batch_gradient(const Network& net, const std::vector<Sample>& samples, std::span<const std::size_t> order,
                          std::span<double> grad, BackpropWorkspace& ws, std::vector<double>& abs_err) {
  std::fill(grad.begin(), grad.end(), 0.0);
  const std::size_t outputs = net.output_width();
  abs_err.assign(outputs, 0.0);
  double loss = 0.0;
  for (std::size_t idx : order) {
    const auto& s = samples[idx];
    loss += backward(net, s.inputs, s.targets_normalized, grad, ws);
    const auto& y = ws.trace.back();
    for (std::size_t k = 0; k < outputs; ++k) abs_err[k] += std::abs(y[k] - s.targets_normalized[k]);
  }
  const double n = static_cast<double>(samples.size());
  for (double& g : grad) g /= n;
  BatchStats stats;
  stats.mse = 2.0 * loss / (n * static_cast<double>(outputs));
  for (double e : abs_err) stats.max_abs_error = std::max(stats.max_abs_error, e / n);
  return stats;
}

void check_samples(const Network& net, const std::vector<Sample>& samples, const char* name) {
  for (const auto& s : samples) {
    if (s.inputs.size() != net.input_width() || s.targets_normalized.size() != net.output_width()) {
      throw Error(ErrorCode::DimensionMismatch, std::string(name) + " sample " + std::to_string(s.source_index) +
                                                    " does not match the network dimensions");
    }
  }
}

}  // namespace

double evaluate_mse(const Network& network, std::span<const Sample> samples) {
  if (samples.empty()) throw Error(ErrorCode::EmptyInput, "no samples to evaluate");
  std::vector<std::vector<double>> trace;
  double total = 0.0;
  for (const auto& s : samples) {
    network.evaluate(s.inputs, trace);
    const auto& y = trace.back();
    double sq = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) sq += (y[k] - s.targets_normalized[k]) * (y[k] - s.targets_normalized[k]);
    total += sq / static_cast<double>(y.size());
  }
  return total / static_cast<double>(samples.size());
}

TrainResult train(const Network& initial, const DatasetSplit& split, const TrainingConfig& config) {
  config.validate();
  if (split.training.empty() || split.validation.empty()) {
    throw Error(ErrorCode::EmptySplit, "training and validation sets must be non-empty");
  }
  initial.check_finite();
  check_samples(initial, split.training, "training");
  check_samples(initial, split.validation, "validation");

  const auto started = std::chrono::steady_clock::now();
  Network net = initial;
  TrainResult best{initial, {}};
  auto& history = best.history;

  const std::size_t n_params = net.parameter_count();
  std::vector<double> grad(n_params), prev_grad(n_params, 0.0), deltas(n_params, 0.0);
  std::vector<double> abs_err;
  BackpropWorkspace ws;
  std::vector<std::size_t> order(split.training.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(config.seed);

  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count(); };
  auto diverged = [&](std::size_t epoch) {
    history.cycles = epoch;
    history.wall_seconds = elapsed();
    throw TrainingDiverged("non-finite loss at epoch " + std::to_string(epoch), best);
  };

  if (config.shuffle_each_epoch) rng.shuffle(std::span<std::size_t>(order));
  BatchStats stats = batch_gradient(net, split.training, order, grad, ws, abs_err);
  double val = evaluate_mse(net, split.validation);
  if (!std::isfinite(stats.mse) || !std::isfinite(val)) diverged(0);
  history.epochs.push_back({0, stats.mse, val, stats.max_abs_error});
  double best_val = val;

  std::size_t epoch = 0;
  while (true) {
    if (epoch >= config.max_epochs) {
      history.stop_reason = StopReason::MaxEpochs;
      break;
    }
    ++epoch;
    if (config.rule == UpdateRule::Momentum) {
      update_momentum(net.parameters(), grad, deltas, config);
    } else {
      update_quickprop(net.parameters(), grad, prev_grad, deltas, config);
    }
    std::swap(grad, prev_grad);

    if (config.shuffle_each_epoch) rng.shuffle(std::span<std::size_t>(order));
    stats = batch_gradient(net, split.training, order, grad, ws, abs_err);
    val = evaluate_mse(net, split.validation);
    if (!std::isfinite(stats.mse) || !std::isfinite(val)) diverged(epoch - 1);
    history.epochs.push_back({epoch, stats.mse, val, stats.max_abs_error});

    if (val < best_val) {
      best_val = val;
      history.best_epoch = epoch;
      std::copy(net.parameters().begin(), net.parameters().end(), best.network.parameters().begin());
    }
    if (stats.max_abs_error <= config.target_training_error) {
      history.stop_reason = StopReason::TargetReached;
      break;
    }
    if (epoch - history.best_epoch >= config.patience) {
      history.stop_reason = StopReason::Overtraining;
      break;
    }
  }
  history.cycles = epoch;
  history.wall_seconds = elapsed();
  return best;
}

void write_history_csv(std::ostream& out, const TrainingHistory& history) {
  out << "epoch,train_mse,val_mse\n";
  for (const auto& e : history.epochs) {
    out << e.epoch << ',' << detail::format_double(e.train_mse) << ',' << detail::format_double(e.val_mse) << '\n';
  }
}

std::string history_summary_json(const TrainingHistory& history) {
  nlohmann::ordered_json j;
  j["best_epoch"] = history.best_epoch;
  j["cycles"] = history.cycles;
  j["stop_reason"] = to_string(history.stop_reason);
  j["wall_seconds"] = history.wall_seconds;
  return j.dump(2) + "\n";
}

}  // namespace quakenet
