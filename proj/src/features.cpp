#include "quakenet/features.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <set>

#include "quakenet/error.hpp"
#include "quakenet/random.hpp"

namespace quakenet {

std::string to_string(InputVariable v) {
  switch (v) {
    case InputVariable::Date: return "date";
    case InputVariable::Hour: return "hour";
    case InputVariable::Minute: return "minute";
    case InputVariable::Zone: return "zone";
  }
  return "?";
}

std::string to_string(OutputVariable v) {
  switch (v) {
    case OutputVariable::Latitude: return "latitude";
    case OutputVariable::Longitude: return "longitude";
    case OutputVariable::Depth: return "depth";
    case OutputVariable::Magnitude: return "magnitude";
  }
  return "?";
}

InputVariable parse_input_variable(std::string_view name) {
  for (auto v : {InputVariable::Date, InputVariable::Hour, InputVariable::Minute, InputVariable::Zone}) {
    if (to_string(v) == name) return v;
  }
  throw Error(ErrorCode::Config, "unknown input variable '" + std::string(name) + "'");
}

OutputVariable parse_output_variable(std::string_view name) {
  for (auto v : {OutputVariable::Latitude, OutputVariable::Longitude, OutputVariable::Depth, OutputVariable::Magnitude}) {
    if (to_string(v) == name) return v;
  }
  throw Error(ErrorCode::Config, "unknown output variable '" + std::string(name) + "'");
}

namespace {

template <typename T>
bool has_duplicates(const std::vector<T>& items) {
  std::set<T> seen(items.begin(), items.end());
  return seen.size() != items.size();
}

bool uses_zone(const EncoderConfig& c) {
  return std::find(c.inputs.begin(), c.inputs.end(), InputVariable::Zone) != c.inputs.end();
}

double target_value(const CatalogRecord& r, OutputVariable v) {
  switch (v) {
    case OutputVariable::Latitude: return r.latitude;
    case OutputVariable::Longitude: return r.longitude;
    case OutputVariable::Depth: return r.depth_km;
    case OutputVariable::Magnitude: return r.magnitude;
  }
  return 0.0;
}

}  // namespace

void EncoderConfig::validate() const {
  if (inputs.empty() || outputs.empty()) throw Error(ErrorCode::Config, "input and output variable lists must be non-empty");
  if (has_duplicates(inputs) || has_duplicates(outputs)) throw Error(ErrorCode::Config, "duplicate encoder variable");
  if (has_duplicates(zone_vocabulary)) throw Error(ErrorCode::Config, "duplicate zone vocabulary entry");
  if (uses_zone(*this) && zone_vocabulary.empty() && unknown_zone == UnknownZonePolicy::Reject) {
    throw Error(ErrorCode::Config, "zone input requires a non-empty zone vocabulary");
  }
  if (!epoch_origin.ok()) throw Error(ErrorCode::Config, "invalid epoch origin");
}

std::vector<std::string> EncoderConfig::input_columns() const {
  std::vector<std::string> cols;
  for (auto v : inputs) {
    if (v != InputVariable::Zone) {
      cols.push_back(to_string(v));
      continue;
    }
    for (const auto& z : zone_vocabulary) cols.push_back("zone=" + z);
    if (unknown_zone == UnknownZonePolicy::MapToOther) cols.push_back("zone=OTHER");
  }
  return cols;
}

std::vector<std::string> EncoderConfig::output_columns() const {
  std::vector<std::string> cols;
  for (auto v : outputs) cols.push_back(to_string(v));
  return cols;
}

std::vector<bool> EncoderConfig::scaled_input_columns() const {
  std::vector<bool> scaled;
  for (auto v : inputs) {
    if (v != InputVariable::Zone) {
      scaled.push_back(true);
      continue;
    }
    const std::size_t slots = zone_vocabulary.size() + (unknown_zone == UnknownZonePolicy::MapToOther ? 1 : 0);
    scaled.insert(scaled.end(), slots, false);
  }
  return scaled;
}

std::vector<Sample> encode_records(const std::vector<CatalogRecord>& records, const EncoderConfig& config) {
  config.validate();
  const std::size_t zone_slots =
      config.zone_vocabulary.size() + (config.unknown_zone == UnknownZonePolicy::MapToOther ? 1 : 0);
  std::vector<Sample> out;
  out.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    Sample s;
    s.source_index = i;
    for (auto v : config.inputs) {
      switch (v) {
        case InputVariable::Date: s.inputs.push_back(static_cast<double>(days_between(config.epoch_origin, r.date))); break;
        case InputVariable::Hour: s.inputs.push_back(r.hour); break;
        case InputVariable::Minute: s.inputs.push_back(r.minute); break;
        case InputVariable::Zone: {
          const auto it = std::find(config.zone_vocabulary.begin(), config.zone_vocabulary.end(), r.zone);
          std::size_t slot = static_cast<std::size_t>(it - config.zone_vocabulary.begin());
          if (it == config.zone_vocabulary.end()) {
            if (config.unknown_zone == UnknownZonePolicy::Reject) {
              throw Error(ErrorCode::UnknownZone, "record " + std::to_string(i) + " has zone '" + r.zone + "'");
            }
            slot = zone_slots - 1;
          }
          const auto base = s.inputs.size();
          s.inputs.resize(base + zone_slots, 0.0);
          s.inputs[base + slot] = 1.0;
          break;
        }
      }
    }
    for (auto v : config.outputs) s.targets_raw.push_back(target_value(r, v));
    out.push_back(std::move(s));
  }
  return out;
}

ScalerParams fit_scaler(std::span<const Sample> samples, const EncoderConfig& config) {
  if (samples.empty()) throw Error(ErrorCode::EmptySampleSet, "cannot fit a scaler on zero samples");
  ScalerParams p;
  p.input_names = config.input_columns();
  p.input_scaled = config.scaled_input_columns();
  p.target_names = config.output_columns();
  const std::size_t ni = p.input_names.size();
  const std::size_t nt = p.target_names.size();

  p.input_min.assign(ni, 0.0);
  p.input_max.assign(ni, 1.0);
  p.target_min = samples.front().targets_raw;
  p.target_max = samples.front().targets_raw;
  for (std::size_t i = 0; i < ni; ++i) {
    if (p.input_scaled[i]) p.input_min[i] = p.input_max[i] = samples.front().inputs.at(i);
  }
  for (const auto& s : samples) {
    if (s.inputs.size() != ni || s.targets_raw.size() != nt) {
      throw Error(ErrorCode::DimensionMismatch, "sample " + std::to_string(s.source_index) + " does not match encoder layout");
    }
    for (std::size_t i = 0; i < ni; ++i) {
      if (!p.input_scaled[i]) continue;
      p.input_min[i] = std::min(p.input_min[i], s.inputs[i]);
      p.input_max[i] = std::max(p.input_max[i], s.inputs[i]);
    }
    for (std::size_t i = 0; i < nt; ++i) {
      p.target_min[i] = std::min(p.target_min[i], s.targets_raw[i]);
      p.target_max[i] = std::max(p.target_max[i], s.targets_raw[i]);
    }
  }
  for (std::size_t i = 0; i < ni; ++i) {
    if (p.input_scaled[i] && !(p.input_max[i] > p.input_min[i])) {
      throw Error(ErrorCode::DegenerateVariable, "input '" + p.input_names[i] + "' has max = min");
    }
  }
  for (std::size_t i = 0; i < nt; ++i) {
    if (!(p.target_max[i] > p.target_min[i])) {
      throw Error(ErrorCode::DegenerateVariable, "target '" + p.target_names[i] + "' has max = min");
    }
  }
  return p;
}

Sample apply_scaler(const ScalerParams& params, const Sample& raw) {
  if (raw.inputs.size() != params.input_min.size() || raw.targets_raw.size() != params.target_min.size()) {
    throw Error(ErrorCode::DimensionMismatch, "sample does not match scaler layout");
  }
  Sample s = raw;
  for (std::size_t i = 0; i < s.inputs.size(); ++i) {
    if (params.input_scaled[i]) {
      s.inputs[i] = (raw.inputs[i] - params.input_min[i]) / (params.input_max[i] - params.input_min[i]);
    }
  }
  s.targets_normalized.resize(raw.targets_raw.size());
  for (std::size_t i = 0; i < raw.targets_raw.size(); ++i) {
    s.targets_normalized[i] = (raw.targets_raw[i] - params.target_min[i]) / (params.target_max[i] - params.target_min[i]);
  }
  return s;
}

std::vector<Sample> apply_scaler(const ScalerParams& params, std::span<const Sample> raw) {
  std::vector<Sample> out;
  out.reserve(raw.size());
  for (const auto& s : raw) out.push_back(apply_scaler(params, s));
  return out;
}

std::vector<double> invert_scaler(const ScalerParams& params, std::span<const double> normalized) {
  if (normalized.size() != params.target_min.size()) {
    throw Error(ErrorCode::DimensionMismatch, "target vector does not match scaler layout");
  }
  std::vector<double> out(normalized.size());
  for (std::size_t i = 0; i < normalized.size(); ++i) {
    out[i] = params.target_min[i] + normalized[i] * (params.target_max[i] - params.target_min[i]);
  }
  return out;
}

std::size_t count_out_of_range(std::span<const Sample> scaled) {
  std::size_t n = 0;
  auto outside = [](double x) { return x < 0.0 || x > 1.0; };
  for (const auto& s : scaled) {
    n += static_cast<std::size_t>(std::count_if(s.inputs.begin(), s.inputs.end(), outside));
    n += static_cast<std::size_t>(std::count_if(s.targets_normalized.begin(), s.targets_normalized.end(), outside));
  }
  return n;
}

SplitCounts resolve_split(const SplitRule& rule, std::size_t total) {
  if (const auto* counts = std::get_if<SplitCounts>(&rule)) {
    if (counts->training + counts->validation + counts->production != total) {
      throw Error(ErrorCode::CountMismatch, "split counts sum to " +
                                                std::to_string(counts->training + counts->validation + counts->production) +
                                                ", expected " + std::to_string(total));
    }
    return *counts;
  }
  const auto& p = std::get<SplitProportions>(rule);
  const double parts[3] = {p.training, p.validation, p.production};
  if (std::any_of(std::begin(parts), std::end(parts), [](double x) { return !(x >= 0.0); }) ||
      std::abs(parts[0] + parts[1] + parts[2] - 1.0) > 1e-9) {
    throw Error(ErrorCode::CountMismatch, "split proportions must be non-negative and sum to 1");
  }
  std::size_t sizes[3];
  double remainders[3];
  std::size_t assigned = 0;
  for (int i = 0; i < 3; ++i) {
    const double exact = parts[i] * static_cast<double>(total);
    sizes[i] = static_cast<std::size_t>(std::floor(exact));
    remainders[i] = exact - std::floor(exact);
    assigned += sizes[i];
  }
  std::array<int, 3> order = {0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return remainders[a] > remainders[b]; });
  for (std::size_t k = 0; assigned < total; ++k, ++assigned) ++sizes[order[k % 3]];
  return {sizes[0], sizes[1], sizes[2]};
}

DatasetSplit split_dataset(std::span<const Sample> samples, const SplitRule& rule, std::uint64_t seed) {
  if (samples.empty()) throw Error(ErrorCode::EmptyInput, "cannot split an empty sample list");
  const auto counts = resolve_split(rule, samples.size());
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));

  DatasetSplit split;
  std::size_t k = 0;
  auto take = [&](std::vector<Sample>& dst, std::size_t n) {
    dst.reserve(n);
    for (std::size_t i = 0; i < n; ++i) dst.push_back(samples[order[k++]]);
  };
  take(split.training, counts.training);
  take(split.validation, counts.validation);
  take(split.production, counts.production);
  return split;
}

SplitManifest manifest_of(const DatasetSplit& split) {
  SplitManifest m;
  for (const auto& s : split.training) m.training.push_back(s.source_index);
  for (const auto& s : split.validation) m.validation.push_back(s.source_index);
  for (const auto& s : split.production) m.production.push_back(s.source_index);
  return m;
}

}  // namespace quakenet
