#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "quakenet/features.hpp"
#include "quakenet/metrics.hpp"
#include "quakenet/network.hpp"
#include "quakenet/trainer.hpp"

namespace quakenet {

inline constexpr std::size_t kDefaultPreliminarySamples = 200;

/// Preliminary models that have no architecture to build; listed in the
/// comparison output so the five-model layout stays recognizable.
inline const std::vector<std::string> kReservedModelNames = {"recurrent_time_series", "recurrent_generalized"};

struct ComparisonOptions {
  std::vector<PreliminaryModel> models = {PreliminaryModel::Mlp, PreliminaryModel::RadialGeneral,
                                          PreliminaryModel::RbfMlp};
  std::size_t preliminary_sample_count = kDefaultPreliminarySamples;
  std::vector<std::size_t> hidden_units = kPreliminaryHiddenUnits;
  std::size_t radial_units = 20;
  /// mlp trains with momentum, radial models with quickprop. When false every
  /// model uses the rule in the TrainingConfig.
  bool default_rule_pairing = true;
};

struct ModelResult {
  std::string name;
  UpdateRule rule = UpdateRule::Quickprop;
  std::size_t parameter_count = 0;
  SplitMetrics training;
  SplitMetrics validation;
  SplitMetrics production;
  std::size_t cycles = 0;
  std::size_t best_epoch = 0;
  StopReason stop_reason = StopReason::MaxEpochs;
};

struct ComparisonReport {
  std::vector<std::string> variables;
  std::vector<ModelResult> models;  // in configured order
  std::vector<std::string> ranking;
  std::string selected;
  std::uint64_t seed = 0;
  std::size_t preliminary_sample_count = 0;
  TrainingConfig config;
};

/// First `count` samples of a seeded shuffle of `training`. Growing `count`
/// by one appends exactly one sample.
std::vector<Sample> preliminary_subset(const std::vector<Sample>& training, std::size_t count, std::uint64_t seed);

/// Order of model indices: validation MSE, then production MSE, then
/// parameter count, all ascending; remaining ties keep configured order.
std::vector<std::size_t> rank_models(const std::vector<ModelResult>& results);

ComparisonReport run_comparison(const DatasetSplit& dataset, const ScalerParams& scaler, const TrainingConfig& config,
                                const ComparisonOptions& options = {});

std::string comparison_to_json(const ComparisonReport& report);

struct FinalOptions {
  /// Replaces the full-size final topology (used for desk-scale runs).
  std::optional<NetworkSpec> spec;
};

struct FinalResult {
  Network network;
  TrainingHistory history;
  MetricsReport report;
};

/// Trains the final radial + tanh network with quickprop on every layer and
/// evaluates it on all three splits.
FinalResult run_final(const DatasetSplit& dataset, const ScalerParams& scaler, const TrainingConfig& config,
                      const FinalOptions& options = {});

inline constexpr const char* kFigValidation = "fig2_validation.csv";
inline constexpr const char* kFigTraining = "fig3_training.csv";
inline constexpr const char* kFigProduction = "fig4_production.csv";
inline constexpr const char* kFigCompare = "fig5_compare.csv";

/// Writes the three per-split comparison CSVs (`model,mse,percent_error_mean`).
void emit_comparison_plots(const ComparisonReport& report, const std::filesystem::path& dir);

/// Writes `index,variable,actual,predicted` in raw units, one row per
/// production sample and output variable.
void emit_prediction_plot(const Predictor& predictor, const std::vector<Sample>& production, const ScalerParams& scaler,
                          const std::filesystem::path& file);

}  // namespace quakenet
