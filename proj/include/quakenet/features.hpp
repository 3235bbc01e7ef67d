#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "quakenet/catalog.hpp"

namespace quakenet {

enum class InputVariable { Date, Hour, Minute, Zone };
enum class OutputVariable { Latitude, Longitude, Depth, Magnitude };
enum class UnknownZonePolicy { Reject, MapToOther };

std::string to_string(InputVariable v);
std::string to_string(OutputVariable v);
InputVariable parse_input_variable(std::string_view name);
OutputVariable parse_output_variable(std::string_view name);

struct EncoderConfig {
  std::vector<InputVariable> inputs = {InputVariable::Date, InputVariable::Hour, InputVariable::Minute,
                                       InputVariable::Zone};
  // Depth is supported but left out of the default target set.
  std::vector<OutputVariable> outputs = {OutputVariable::Latitude, OutputVariable::Longitude,
                                         OutputVariable::Magnitude};
  std::vector<std::string> zone_vocabulary;
  Date epoch_origin = Date{std::chrono::year{2006}, std::chrono::month{3}, std::chrono::day{2}};
  UnknownZonePolicy unknown_zone = UnknownZonePolicy::Reject;

  void validate() const;

  /// Names of the encoded input columns, in order. Zone expands to one
  /// `zone=<LABEL>` column per vocabulary entry (plus `zone=OTHER` when the
  /// unknown-zone policy maps to an extra slot).
  std::vector<std::string> input_columns() const;
  std::vector<std::string> output_columns() const;
  /// True for columns that are min-max scaled; one-hot columns pass through.
  std::vector<bool> scaled_input_columns() const;
  std::size_t input_width() const { return input_columns().size(); }
};

/// One encoded example. `inputs` are raw until a scaler is applied;
/// `targets_normalized` is empty until then.
struct Sample {
  std::vector<double> inputs;
  std::vector<double> targets_normalized;
  std::vector<double> targets_raw;
  std::size_t source_index = 0;

  bool operator==(const Sample&) const = default;
};

std::vector<Sample> encode_records(const std::vector<CatalogRecord>& records, const EncoderConfig& config);

/// Per-column min/max in raw units. Columns with `input_scaled[i] == false`
/// keep min 0 / max 1 and are copied through unchanged.
struct ScalerParams {
  std::vector<std::string> input_names;
  std::vector<bool> input_scaled;
  std::vector<double> input_min;
  std::vector<double> input_max;
  std::vector<std::string> target_names;
  std::vector<double> target_min;
  std::vector<double> target_max;

  bool operator==(const ScalerParams&) const = default;
};

ScalerParams fit_scaler(std::span<const Sample> samples, const EncoderConfig& config);

Sample apply_scaler(const ScalerParams& params, const Sample& raw);
std::vector<Sample> apply_scaler(const ScalerParams& params, std::span<const Sample> raw);
std::vector<double> invert_scaler(const ScalerParams& params, std::span<const double> normalized_targets);

/// Number of scaled components (inputs and targets) that fall outside [0, 1].
std::size_t count_out_of_range(std::span<const Sample> scaled);

struct SplitCounts {
  std::size_t training = 0;
  std::size_t validation = 0;
  std::size_t production = 0;
};

struct SplitProportions {
  double training = 0.0;
  double validation = 0.0;
  double production = 0.0;
};

using SplitRule = std::variant<SplitCounts, SplitProportions>;

/// Largest-remainder rounding of proportions onto `total` items. Leftover units
/// go to the largest fractional parts; ties favour the earlier split.
SplitCounts resolve_split(const SplitRule& rule, std::size_t total);

struct DatasetSplit {
  std::vector<Sample> training;
  std::vector<Sample> validation;
  std::vector<Sample> production;
};

/// Seeded shuffle of the sample order, then contiguous slicing into
/// training / validation / production.
DatasetSplit split_dataset(std::span<const Sample> samples, const SplitRule& rule, std::uint64_t seed);

/// Source indices assigned to each split, in split order.
struct SplitManifest {
  std::vector<std::size_t> training;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> production;
};

SplitManifest manifest_of(const DatasetSplit& split);

}  // namespace quakenet
