#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "quakenet/features.hpp"
#include "quakenet/network.hpp"
#include "quakenet/trainer.hpp"

namespace quakenet {

using Matrix = std::vector<std::vector<double>>;

/// Mean over samples of the mean squared componentwise difference.
double mse(const Matrix& predictions, const Matrix& targets);

/// MSE divided by the MSE of predicting the componentwise target mean.
double nmse(const Matrix& predictions, const Matrix& targets);

/// For each output variable: 100 * mean |prediction - target| / (max - min),
/// in raw units, with the range taken from the scaler (the training split).
/// This is a range-normalized mean absolute error; it is our reading of the
/// "average error" percentages, not a published formula.
std::vector<double> percent_error_per_variable(const Matrix& raw_predictions, const Matrix& raw_targets,
                                               const ScalerParams& scaler);

struct SplitMetrics {
  std::vector<double> percent_error;  // one per output variable
  double mse = 0.0;                   // normalized space
};

struct MetricsReport {
  std::vector<std::string> variables;
  SplitMetrics training;
  SplitMetrics validation;
  SplitMetrics production;
  double mse = 0.0;   // production split, normalized space
  double nmse = 0.0;  // production split
  double percent_error_aggregate = 0.0;  // mean of production percent errors
  std::size_t out_of_range_predictions = 0;
  std::size_t cycles = 0;
  double wall_seconds = 0.0;
};

/// Maps a scaled sample to a normalized prediction.
using Predictor = std::function<std::vector<double>(const Sample&)>;

Predictor network_predictor(const Network& network);

MetricsReport build_report(const Predictor& predictor, const DatasetSplit& split, const ScalerParams& scaler,
                           const TrainingHistory& history);
MetricsReport build_report(const Network& network, const DatasetSplit& split, const ScalerParams& scaler,
                           const TrainingHistory& history);

/// Report JSON: splits.{training,validation,production}.percent_error.{var},
/// mse, nmse, percent_error_aggregate, cycles, wall_seconds,
/// out_of_range_predictions.
std::string report_to_json(const MetricsReport& report);
MetricsReport report_from_json(const std::string& text);
/// Flattened `field,value` rows of the same fields.
void write_report_csv(std::ostream& out, const MetricsReport& report);

/// Fixed-layout text table in the row order of the published results table.
std::string format_report_table(const MetricsReport& report);

}  // namespace quakenet
