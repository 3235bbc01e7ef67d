#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "quakenet/catalog.hpp"
#include "quakenet/features.hpp"
#include "quakenet/harness.hpp"
#include "quakenet/network.hpp"
#include "quakenet/trainer.hpp"

namespace quakenet {

enum class SynthLaw { GutenbergRichter, Smooth };

struct SynthParams {
  std::size_t count = 5798;
  SynthLaw law = SynthLaw::GutenbergRichter;
  double noise_fraction = 0.01;  // smooth law only
  SynthRegion region;
};

/// Everything a pipeline run depends on. Loaded from a JSON document (schema
/// in README.md); command-line flags override `seed` and `output_dir`.
struct PipelineConfig {
  std::optional<std::filesystem::path> catalog_path;
  bool strict_parse = false;
  std::optional<SynthParams> synth;

  double min_magnitude = 4.0;
  std::optional<DateRange> date_range;

  EncoderConfig encoder;  // empty vocabulary = sorted distinct zones of the data
  SplitRule split = SplitProportions{0.5176, 0.2675, 0.2149};

  ComparisonOptions compare;
  TrainingConfig compare_training;

  std::optional<std::vector<LayerSpec>> final_hidden_layers;  // default: full final topology
  TrainingConfig final_training;

  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 0;
  bool record_wall_time = true;

  /// Relative paths inside the document resolve against `base_dir`.
  static PipelineConfig from_json(const std::string& text, const std::filesystem::path& base_dir = {});
  static PipelineConfig from_file(const std::filesystem::path& path);

  void validate() const;
};

// Artifact file names inside the output directory.
inline constexpr const char* kCatalogFile = "catalog.csv";
inline constexpr const char* kSamplesFile = "samples.csv";
inline constexpr const char* kManifestFile = "split_manifest.json";
inline constexpr const char* kScalerFile = "scaler.json";
inline constexpr const char* kComparisonFile = "comparison.json";
inline constexpr const char* kModelFile = "model.qnet";
inline constexpr const char* kReportJsonFile = "report.json";
inline constexpr const char* kReportCsvFile = "report.csv";
inline constexpr const char* kHistoryCsvFile = "history.csv";
inline constexpr const char* kHistorySummaryFile = "history_summary.json";

std::string scaler_to_json(const ScalerParams& scaler);
ScalerParams scaler_from_json(const std::string& text);

/// Raw encoded samples: `source_index,<input columns>,<target columns>`.
void write_samples_csv(std::ostream& out, const std::vector<Sample>& samples, const ScalerParams& layout);
std::vector<Sample> read_samples_csv(std::istream& in, const ScalerParams& layout);

/// Runs the pipeline subcommands against one configuration. Each command
/// returns the text it would print for a user.
class Pipeline {
 public:
  explicit Pipeline(PipelineConfig config);

  const PipelineConfig& config() const { return config_; }
  PipelineConfig& config() { return config_; }

  std::string synth();
  std::string ingest();
  std::string compare();
  std::string train_final();
  /// Empty `reports` means `<output_dir>/report.json`.
  std::string report(const std::vector<std::filesystem::path>& reports) const;

  /// Dispatch by subcommand name: synth, ingest, compare, train-final.
  std::string run(std::string_view command);

 private:
  struct Loaded {
    ScalerParams scaler;
    DatasetSplit split;
  };
  Loaded load_ingested() const;
  std::vector<CatalogRecord> source_records(std::size_t& skipped) const;
  void ensure_output_dir() const;

  PipelineConfig config_;
};

}  // namespace quakenet
