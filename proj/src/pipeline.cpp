#include "quakenet/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "quakenet/error.hpp"
#include "quakenet/metrics.hpp"
#include "quakenet/random.hpp"
#include "text_util.hpp"

namespace quakenet {

using nlohmann::ordered_json;

namespace {

// Rejects keys outside `allowed` so typos in a config file surface as errors
// instead of silently falling back to defaults.
void check_keys(const ordered_json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw Error(ErrorCode::Config, where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw Error(ErrorCode::Config, "unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
void read_opt(const ordered_json& obj, const char* key, T& dst) {
  if (obj.contains(key)) dst = obj.at(key).get<T>();
}

TrainingConfig training_from_json(const ordered_json& j, TrainingConfig cfg, const std::string& where) {
  check_keys(j, {"rule", "learning_rate", "momentum", "quickprop_max_growth", "max_epochs", "patience",
                 "target_training_error", "shuffle_each_epoch"},
             where);
  if (j.contains("rule")) cfg.rule = parse_update_rule(j.at("rule").get<std::string>());
  read_opt(j, "learning_rate", cfg.learning_rate);
  read_opt(j, "momentum", cfg.momentum);
  read_opt(j, "quickprop_max_growth", cfg.quickprop_max_growth);
  read_opt(j, "max_epochs", cfg.max_epochs);
  read_opt(j, "patience", cfg.patience);
  read_opt(j, "target_training_error", cfg.target_training_error);
  read_opt(j, "shuffle_each_epoch", cfg.shuffle_each_epoch);
  return cfg;
}

SynthRegion region_from_json(const ordered_json& j) {
  SynthRegion r;
  check_keys(j, {"lat_min", "lat_max", "lon_min", "lon_max", "depth_max_km", "magnitude_floor", "magnitude_rate",
                 "magnitude_cap", "first_date", "last_date", "zone_rows", "zone_cols", "zone_names"},
             "synth.region");
  read_opt(j, "lat_min", r.lat_min);
  read_opt(j, "lat_max", r.lat_max);
  read_opt(j, "lon_min", r.lon_min);
  read_opt(j, "lon_max", r.lon_max);
  read_opt(j, "depth_max_km", r.depth_max_km);
  read_opt(j, "magnitude_floor", r.magnitude_floor);
  read_opt(j, "magnitude_rate", r.magnitude_rate);
  read_opt(j, "magnitude_cap", r.magnitude_cap);
  if (j.contains("first_date")) r.first_date = parse_date(j.at("first_date").get<std::string>());
  if (j.contains("last_date")) r.last_date = parse_date(j.at("last_date").get<std::string>());
  read_opt(j, "zone_rows", r.zone_rows);
  read_opt(j, "zone_cols", r.zone_cols);
  read_opt(j, "zone_names", r.zone_names);
  return r;
}

LayerKind parse_layer_kind(const std::string& name) {
  for (auto k : {LayerKind::DenseTanh, LayerKind::DenseLinear, LayerKind::RadialGaussian}) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorCode::Config, "unknown layer kind '" + name + "'");
}

std::string read_file(const std::filesystem::path& path, ErrorCode missing_code) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(missing_code, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << content)) throw Error(ErrorCode::IOFailure, "cannot write " + path.string());
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const std::string& text, const std::filesystem::path& base_dir) {
  PipelineConfig c;
  try {
    const auto j = ordered_json::parse(text);
    check_keys(j, {"seed", "output_dir", "catalog", "synth", "filter", "encoder", "split", "compare", "final",
                   "record_wall_time"},
               "config");
    read_opt(j, "seed", c.seed);
    if (j.contains("output_dir")) c.output_dir = base_dir / j.at("output_dir").get<std::string>();
    read_opt(j, "record_wall_time", c.record_wall_time);

    if (j.contains("catalog")) {
      const auto& cat = j.at("catalog");
      check_keys(cat, {"path", "strict"}, "catalog");
      c.catalog_path = base_dir / cat.at("path").get<std::string>();
      read_opt(cat, "strict", c.strict_parse);
    }
    if (j.contains("synth")) {
      const auto& s = j.at("synth");
      check_keys(s, {"count", "law", "noise_fraction", "region"}, "synth");
      SynthParams p;
      read_opt(s, "count", p.count);
      if (s.contains("law")) {
        const auto law = s.at("law").get<std::string>();
        if (law == "gutenberg_richter") p.law = SynthLaw::GutenbergRichter;
        else if (law == "smooth") p.law = SynthLaw::Smooth;
        else throw Error(ErrorCode::Config, "unknown synth law '" + law + "'");
      }
      read_opt(s, "noise_fraction", p.noise_fraction);
      if (s.contains("region")) p.region = region_from_json(s.at("region"));
      c.synth = p;
    }
    if (j.contains("filter")) {
      const auto& f = j.at("filter");
      check_keys(f, {"min_magnitude", "date_range"}, "filter");
      read_opt(f, "min_magnitude", c.min_magnitude);
      if (f.contains("date_range")) {
        const auto r = f.at("date_range").get<std::vector<std::string>>();
        if (r.size() != 2) throw Error(ErrorCode::Config, "filter.date_range needs two dates");
        c.date_range = DateRange{parse_date(r[0]), parse_date(r[1])};
      }
    }
    if (j.contains("encoder")) {
      const auto& e = j.at("encoder");
      check_keys(e, {"inputs", "outputs", "zone_vocabulary", "epoch_origin", "unknown_zone"}, "encoder");
      if (e.contains("inputs")) {
        c.encoder.inputs.clear();
        for (const auto& n : e.at("inputs")) c.encoder.inputs.push_back(parse_input_variable(n.get<std::string>()));
      }
      if (e.contains("outputs")) {
        c.encoder.outputs.clear();
        for (const auto& n : e.at("outputs")) c.encoder.outputs.push_back(parse_output_variable(n.get<std::string>()));
      }
      read_opt(e, "zone_vocabulary", c.encoder.zone_vocabulary);
      if (e.contains("epoch_origin")) c.encoder.epoch_origin = parse_date(e.at("epoch_origin").get<std::string>());
      if (e.contains("unknown_zone")) {
        const auto p = e.at("unknown_zone").get<std::string>();
        if (p == "reject") c.encoder.unknown_zone = UnknownZonePolicy::Reject;
        else if (p == "other") c.encoder.unknown_zone = UnknownZonePolicy::MapToOther;
        else throw Error(ErrorCode::Config, "unknown_zone must be 'reject' or 'other'");
      }
    }
    if (j.contains("split")) {
      const auto& s = j.at("split");
      check_keys(s, {"counts", "proportions"}, "split");
      if (s.contains("counts") == s.contains("proportions")) {
        throw Error(ErrorCode::Config, "split needs exactly one of 'counts' or 'proportions'");
      }
      if (s.contains("counts")) {
        const auto v = s.at("counts").get<std::vector<std::size_t>>();
        if (v.size() != 3) throw Error(ErrorCode::Config, "split.counts needs three values");
        c.split = SplitCounts{v[0], v[1], v[2]};
      } else {
        const auto v = s.at("proportions").get<std::vector<double>>();
        if (v.size() != 3) throw Error(ErrorCode::Config, "split.proportions needs three values");
        c.split = SplitProportions{v[0], v[1], v[2]};
      }
    }
    if (j.contains("compare")) {
      const auto& cmp = j.at("compare");
      check_keys(cmp, {"models", "preliminary_sample_count", "hidden_units", "radial_units", "default_rule_pairing", "training"},
                 "compare");
      if (cmp.contains("models")) {
        c.compare.models.clear();
        for (const auto& n : cmp.at("models")) c.compare.models.push_back(parse_preliminary_model(n.get<std::string>()));
      }
      read_opt(cmp, "preliminary_sample_count", c.compare.preliminary_sample_count);
      read_opt(cmp, "hidden_units", c.compare.hidden_units);
      read_opt(cmp, "radial_units", c.compare.radial_units);
      read_opt(cmp, "default_rule_pairing", c.compare.default_rule_pairing);
      if (cmp.contains("training")) c.compare_training = training_from_json(cmp.at("training"), c.compare_training, "compare.training");
    }
    if (j.contains("final")) {
      const auto& fin = j.at("final");
      check_keys(fin, {"hidden_layers", "training"}, "final");
      if (fin.contains("hidden_layers")) {
        std::vector<LayerSpec> layers;
        for (const auto& l : fin.at("hidden_layers")) {
          check_keys(l, {"kind", "units"}, "final.hidden_layers[]");
          layers.push_back({parse_layer_kind(l.at("kind").get<std::string>()), l.at("units").get<std::size_t>()});
        }
        c.final_hidden_layers = layers;
      }
      if (fin.contains("training")) c.final_training = training_from_json(fin.at("training"), c.final_training, "final.training");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Config, std::string("invalid config: ") + e.what());
  }
  return c;
}

PipelineConfig PipelineConfig::from_file(const std::filesystem::path& path) {
  return from_json(read_file(path, ErrorCode::Config), path.parent_path());
}

void PipelineConfig::validate() const {
  if (catalog_path.has_value() == synth.has_value()) {
    throw Error(ErrorCode::Config, "exactly one of 'catalog' or 'synth' must be configured");
  }
  if (synth) synth->region.validate();
  if (!(min_magnitude > 0.0)) throw Error(ErrorCode::Config, "filter.min_magnitude must be > 0");
  compare_training.validate();
  final_training.validate();
  if (compare.models.empty()) throw Error(ErrorCode::Config, "compare.models must not be empty");
}

std::string scaler_to_json(const ScalerParams& s) {
  ordered_json j;
  j["input_names"] = s.input_names;
  j["input_scaled"] = s.input_scaled;
  j["input_min"] = s.input_min;
  j["input_max"] = s.input_max;
  j["target_names"] = s.target_names;
  j["target_min"] = s.target_min;
  j["target_max"] = s.target_max;
  return j.dump(2) + "\n";
}

ScalerParams scaler_from_json(const std::string& text) {
  try {
    const auto j = ordered_json::parse(text);
    ScalerParams s;
    s.input_names = j.at("input_names").get<std::vector<std::string>>();
    s.input_scaled = j.at("input_scaled").get<std::vector<bool>>();
    s.input_min = j.at("input_min").get<std::vector<double>>();
    s.input_max = j.at("input_max").get<std::vector<double>>();
    s.target_names = j.at("target_names").get<std::vector<std::string>>();
    s.target_min = j.at("target_min").get<std::vector<double>>();
    s.target_max = j.at("target_max").get<std::vector<double>>();
    const auto ni = s.input_names.size();
    const auto nt = s.target_names.size();
    if (s.input_scaled.size() != ni || s.input_min.size() != ni || s.input_max.size() != ni ||
        s.target_min.size() != nt || s.target_max.size() != nt) {
      throw Error(ErrorCode::Config, "scaler file has inconsistent lengths");
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Config, std::string("malformed scaler file: ") + e.what());
  }
}

void write_samples_csv(std::ostream& out, const std::vector<Sample>& samples, const ScalerParams& layout) {
  out << "source_index";
  for (const auto& n : layout.input_names) out << ',' << n;
  for (const auto& n : layout.target_names) out << ",target:" << n;
  out << '\n';
  for (const auto& s : samples) {
    out << s.source_index;
    for (double v : s.inputs) out << ',' << detail::format_double(v);
    for (double v : s.targets_raw) out << ',' << detail::format_double(v);
    out << '\n';
  }
}

std::vector<Sample> read_samples_csv(std::istream& in, const ScalerParams& layout) {
  const std::size_t ni = layout.input_names.size();
  const std::size_t nt = layout.target_names.size();
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::Config, "sample store is empty");
  if (detail::split(detail::trim_cr(line), ',').size() != 1 + ni + nt) {
    throw Error(ErrorCode::Config, "sample store header does not match the scaler layout");
  }
  std::vector<Sample> samples;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    const auto cols = detail::split(detail::trim_cr(line), ',');
    if (cols.size() != 1 + ni + nt) throw Error(ErrorCode::Config, "sample store row " + std::to_string(row) + " is malformed");
    Sample s;
    const auto idx = detail::parse_int(cols[0]);
    if (!idx || *idx < 0) throw Error(ErrorCode::Config, "sample store row " + std::to_string(row) + " has a bad index");
    s.source_index = static_cast<std::size_t>(*idx);
    for (std::size_t i = 0; i < ni + nt; ++i) {
      const auto v = detail::parse_double(cols[1 + i]);
      if (!v) throw Error(ErrorCode::Config, "sample store row " + std::to_string(row) + " has a bad value");
      (i < ni ? s.inputs : s.targets_raw).push_back(*v);
    }
    samples.push_back(std::move(s));
  }
  return samples;
}

Pipeline::Pipeline(PipelineConfig config) : config_(std::move(config)) {}

void Pipeline::ensure_output_dir() const {
  std::error_code ec;
  std::filesystem::create_directories(config_.output_dir, ec);
  if (ec || !std::filesystem::is_directory(config_.output_dir)) {
    throw Error(ErrorCode::Config, "output directory " + config_.output_dir.string() + " is not writable");
  }
}

std::vector<CatalogRecord> Pipeline::source_records(std::size_t& skipped) const {
  skipped = 0;
  if (config_.catalog_path) {
    std::ifstream in(*config_.catalog_path);
    if (!in) throw Error(ErrorCode::Config, "cannot open catalog " + config_.catalog_path->string());
    auto parsed = parse_catalog(in, config_.strict_parse);
    skipped = parsed.skipped_rows;
    return std::move(parsed.records);
  }
  const auto& p = *config_.synth;
  const auto seed = derive_seed(config_.seed, "synth");
  return p.law == SynthLaw::Smooth ? generate_smooth_catalog(seed, p.count, p.region, p.noise_fraction)
                                   : generate_synthetic_catalog(seed, p.count, p.region);
}

std::string Pipeline::synth() {
  config_.validate();
  if (!config_.synth) throw Error(ErrorCode::Config, "synth requires a 'synth' section");
  ensure_output_dir();
  std::size_t skipped = 0;
  const auto records = source_records(skipped);
  std::ostringstream csv;
  write_catalog(csv, records);
  write_file(config_.output_dir / kCatalogFile, csv.str());
  return "wrote " + std::to_string(records.size()) + " records to " + (config_.output_dir / kCatalogFile).string() + "\n";
}

std::string Pipeline::ingest() {
  config_.validate();
  ensure_output_dir();
  std::size_t skipped = 0;
  const auto all = source_records(skipped);
  const auto records = filter_records(all, config_.min_magnitude, config_.date_range);
  if (records.empty()) throw Error(ErrorCode::Config, "empty dataset");

  EncoderConfig encoder = config_.encoder;
  if (encoder.zone_vocabulary.empty()) {
    std::set<std::string> zones;
    for (const auto& r : records) zones.insert(r.zone);
    encoder.zone_vocabulary.assign(zones.begin(), zones.end());
  }
  const auto raw = encode_records(records, encoder);
  const auto split = split_dataset(raw, config_.split, derive_seed(config_.seed, "split"));
  if (split.training.empty()) throw Error(ErrorCode::Config, "empty dataset: training split has no samples");
  const auto scaler = fit_scaler(split.training, encoder);

  std::ostringstream samples_csv;
  write_samples_csv(samples_csv, raw, scaler);
  write_file(config_.output_dir / kSamplesFile, samples_csv.str());
  write_file(config_.output_dir / kScalerFile, scaler_to_json(scaler));

  const auto manifest = manifest_of(split);
  ordered_json m;
  m["seed"] = config_.seed;
  m["records_read"] = all.size();
  m["rows_skipped"] = skipped;
  m["records_kept"] = records.size();
  m["counts"]["training"] = manifest.training.size();
  m["counts"]["validation"] = manifest.validation.size();
  m["counts"]["production"] = manifest.production.size();
  m["zone_vocabulary"] = encoder.zone_vocabulary;
  m["training"] = manifest.training;
  m["validation"] = manifest.validation;
  m["production"] = manifest.production;
  write_file(config_.output_dir / kManifestFile, m.dump(2) + "\n");

  std::ostringstream msg;
  msg << "records: " << all.size() << " read, " << skipped << " skipped, " << records.size() << " kept\n"
      << "training: " << manifest.training.size() << "\n"
      << "validation: " << manifest.validation.size() << "\n"
      << "production: " << manifest.production.size() << "\n";
  return msg.str();
}

Pipeline::Loaded Pipeline::load_ingested() const {
  const auto& dir = config_.output_dir;
  for (const char* f : {kSamplesFile, kScalerFile, kManifestFile}) {
    if (!std::filesystem::exists(dir / f)) {
      throw Error(ErrorCode::MissingArtifact, (dir / f).string() + " not found; run 'ingest' first");
    }
  }
  Loaded out;
  out.scaler = scaler_from_json(read_file(dir / kScalerFile, ErrorCode::MissingArtifact));
  std::istringstream samples_in(read_file(dir / kSamplesFile, ErrorCode::MissingArtifact));
  const auto raw = read_samples_csv(samples_in, out.scaler);

  std::vector<const Sample*> by_index;
  for (const auto& s : raw) {
    if (s.source_index >= by_index.size()) by_index.resize(s.source_index + 1, nullptr);
    by_index[s.source_index] = &s;
  }
  try {
    const auto m = ordered_json::parse(read_file(dir / kManifestFile, ErrorCode::MissingArtifact));
    auto collect = [&](const char* key, std::vector<Sample>& dst) {
      for (const auto idx : m.at(key).get<std::vector<std::size_t>>()) {
        if (idx >= by_index.size() || !by_index[idx]) {
          throw Error(ErrorCode::Config, "manifest references unknown sample " + std::to_string(idx));
        }
        dst.push_back(apply_scaler(out.scaler, *by_index[idx]));
      }
    };
    collect("training", out.split.training);
    collect("validation", out.split.validation);
    collect("production", out.split.production);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Config, std::string("malformed split manifest: ") + e.what());
  }
  return out;
}

std::string Pipeline::compare() {
  config_.validate();
  const auto data = load_ingested();
  TrainingConfig cfg = config_.compare_training;
  cfg.seed = derive_seed(config_.seed, "compare");
  const auto report = run_comparison(data.split, data.scaler, cfg, config_.compare);
  write_file(config_.output_dir / kComparisonFile, comparison_to_json(report));
  emit_comparison_plots(report, config_.output_dir);

  std::ostringstream msg;
  msg << "preliminary samples: " << report.preliminary_sample_count << "\nranking:\n";
  for (std::size_t i = 0; i < report.ranking.size(); ++i) {
    const auto& name = report.ranking[i];
    const auto it = std::find_if(report.models.begin(), report.models.end(), [&](const auto& m) { return m.name == name; });
    msg << "  " << (i + 1) << ". " << name << "  val_mse=" << detail::format_double(it->validation.mse)
        << "  cycles=" << it->cycles << "  stop=" << to_string(it->stop_reason) << "\n";
  }
  msg << "selected: " << report.selected << "\n";
  return msg.str();
}

std::string Pipeline::train_final() {
  config_.validate();
  const auto data = load_ingested();
  FinalOptions options;
  if (config_.final_hidden_layers) {
    NetworkSpec spec;
    spec.input_width = data.scaler.input_names.size();
    spec.output_width = data.scaler.target_names.size();
    spec.layers = *config_.final_hidden_layers;
    spec.layers.push_back({LayerKind::DenseLinear, spec.output_width});
    options.spec = spec;
  }
  TrainingConfig cfg = config_.final_training;
  cfg.seed = derive_seed(config_.seed, "final");

  const auto& dir = config_.output_dir;
  FinalResult result = [&] {
    try {
      return run_final(data.split, data.scaler, cfg, options);
    } catch (const TrainingDiverged& e) {
      auto history = e.partial().history;
      if (!config_.record_wall_time) history.wall_seconds = 0.0;
      std::ostringstream csv;
      write_history_csv(csv, history);
      write_file(dir / kHistoryCsvFile, csv.str());
      write_file(dir / kHistorySummaryFile, history_summary_json(history));
      throw;
    }
  }();
  if (!config_.record_wall_time) {
    result.history.wall_seconds = 0.0;
    result.report.wall_seconds = 0.0;
  }

  {
    std::ostringstream bin;
    save_network(bin, result.network);
    write_file(dir / kModelFile, bin.str());
  }
  write_file(dir / kReportJsonFile, report_to_json(result.report));
  {
    std::ostringstream csv;
    write_report_csv(csv, result.report);
    write_file(dir / kReportCsvFile, csv.str());
  }
  {
    std::ostringstream csv;
    write_history_csv(csv, result.history);
    write_file(dir / kHistoryCsvFile, csv.str());
  }
  write_file(dir / kHistorySummaryFile, history_summary_json(result.history));
  emit_prediction_plot(network_predictor(result.network), data.split.production, data.scaler, dir / kFigCompare);

  std::ostringstream msg;
  msg << "parameters: " << result.network.parameter_count() << "\n"
      << "cycles: " << result.history.cycles << " (best epoch " << result.history.best_epoch << ", "
      << to_string(result.history.stop_reason) << ")\n"
      << "production percent error:";
  for (std::size_t k = 0; k < result.report.variables.size(); ++k) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), " %s=%.2f%%", result.report.variables[k].c_str(), result.report.production.percent_error[k]);
    msg << buf;
  }
  msg << "\n";
  return msg.str();
}

std::string Pipeline::report(const std::vector<std::filesystem::path>& reports) const {
  std::vector<std::filesystem::path> paths = reports;
  if (paths.empty()) paths.push_back(config_.output_dir / kReportJsonFile);
  std::string out;
  for (const auto& p : paths) {
    if (!std::filesystem::is_regular_file(p)) throw Error(ErrorCode::MissingArtifact, p.string() + " not found");
    out += format_report_table(report_from_json(read_file(p, ErrorCode::MissingArtifact)));
  }
  return out;
}

std::string Pipeline::run(std::string_view command) {
  if (command == "synth") return synth();
  if (command == "ingest") return ingest();
  if (command == "compare") return compare();
  if (command == "train-final") return train_final();
  throw Error(ErrorCode::InvalidArgument, "unknown command '" + std::string(command) + "'");
}

}  // namespace quakenet
