#include "quakenet/harness.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "json.hpp"

#include "quakenet/error.hpp"
#include "quakenet/random.hpp"
#include "text_util.hpp"

namespace quakenet {

std::vector<Sample> preliminary_subset(const std::vector<Sample>& training, std::size_t count, std::uint64_t seed) {
  if (count > training.size()) {
    throw Error(ErrorCode::InsufficientSamples, "requested " + std::to_string(count) + " preliminary samples, training set has " +
                                                    std::to_string(training.size()));
  }
  std::vector<std::size_t> order(training.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng(seed).shuffle(std::span<std::size_t>(order));
  std::vector<Sample> subset;
  subset.reserve(count);
  for (std::size_t i = 0; i < count; ++i) subset.push_back(training[order[i]]);
  return subset;
}

std::vector<std::size_t> rank_models(const std::vector<ModelResult>& results) {
  std::vector<std::size_t> order(results.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& x = results[a];
    const auto& y = results[b];
    if (x.validation.mse != y.validation.mse) return x.validation.mse < y.validation.mse;
    if (x.production.mse != y.production.mse) return x.production.mse < y.production.mse;
    return x.parameter_count < y.parameter_count;
  });
  return order;
}

namespace {

SplitMetrics split_metrics(const Network& net, const std::vector<Sample>& samples, const ScalerParams& scaler) {
  Matrix pred_norm, target_norm, pred_raw, target_raw;
  const auto predict = network_predictor(net);
  for (const auto& s : samples) {
    auto y = predict(s);
    pred_raw.push_back(invert_scaler(scaler, y));
    pred_norm.push_back(std::move(y));
    target_norm.push_back(s.targets_normalized);
    target_raw.push_back(s.targets_raw);
  }
  return {percent_error_per_variable(pred_raw, target_raw, scaler), mse(pred_norm, target_norm)};
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

ComparisonReport run_comparison(const DatasetSplit& dataset, const ScalerParams& scaler, const TrainingConfig& config,
                                const ComparisonOptions& options) {
  config.validate();
  if (options.models.empty()) throw Error(ErrorCode::InvalidArgument, "no models to compare");
  if (dataset.validation.empty() || dataset.production.empty()) {
    throw Error(ErrorCode::EmptySplit, "comparison needs validation and production samples");
  }
  if (dataset.training.empty() || options.preliminary_sample_count == 0) {
    throw Error(ErrorCode::InsufficientSamples, "comparison needs at least one preliminary training sample");
  }

  ComparisonReport report;
  report.variables = scaler.target_names;
  report.seed = config.seed;
  report.preliminary_sample_count = options.preliminary_sample_count;
  report.config = config;

  DatasetSplit prelim;
  prelim.training = preliminary_subset(dataset.training, options.preliminary_sample_count,
                                       derive_seed(config.seed, "preliminary-subset"));
  prelim.validation = dataset.validation;
  prelim.production = dataset.production;

  const std::size_t in = dataset.training.front().inputs.size();
  const std::size_t out = dataset.training.front().targets_raw.size();
  std::vector<std::vector<double>> center_data;
  for (const auto& s : prelim.training) center_data.push_back(s.inputs);

  for (auto model : options.models) {
    const auto name = to_string(model);
    const auto spec = preliminary_network_spec(model, in, out, options.hidden_units, options.radial_units);
    TrainingConfig cfg = config;
    if (options.default_rule_pairing) cfg.rule = model == PreliminaryModel::Mlp ? UpdateRule::Momentum : UpdateRule::Quickprop;
    cfg.seed = derive_seed(config.seed, "train:" + name);
    const auto initial = build_network(spec, derive_seed(config.seed, "init:" + name), center_data);
    auto trained = train(initial, prelim, cfg);

    ModelResult r;
    r.name = name;
    r.rule = cfg.rule;
    r.parameter_count = trained.network.parameter_count();
    r.training = split_metrics(trained.network, prelim.training, scaler);
    r.validation = split_metrics(trained.network, prelim.validation, scaler);
    r.production = split_metrics(trained.network, prelim.production, scaler);
    r.cycles = trained.history.cycles;
    r.best_epoch = trained.history.best_epoch;
    r.stop_reason = trained.history.stop_reason;
    report.models.push_back(std::move(r));
  }

  for (auto i : rank_models(report.models)) report.ranking.push_back(report.models[i].name);
  report.selected = report.ranking.front();
  return report;
}

std::string comparison_to_json(const ComparisonReport& report) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["seed"] = report.seed;
  j["preliminary_sample_count"] = report.preliminary_sample_count;
  ordered_json cfg;
  cfg["learning_rate"] = report.config.learning_rate;
  cfg["momentum"] = report.config.momentum;
  cfg["quickprop_max_growth"] = report.config.quickprop_max_growth;
  cfg["max_epochs"] = report.config.max_epochs;
  cfg["patience"] = report.config.patience;
  cfg["target_training_error"] = report.config.target_training_error;
  cfg["shuffle_each_epoch"] = report.config.shuffle_each_epoch;
  j["config"] = cfg;

  j["models"] = ordered_json::array();
  for (const auto& m : report.models) {
    ordered_json e;
    e["name"] = m.name;
    e["rule"] = to_string(m.rule);
    e["parameter_count"] = m.parameter_count;
    e["cycles"] = m.cycles;
    e["best_epoch"] = m.best_epoch;
    e["stop_reason"] = to_string(m.stop_reason);
    const std::pair<const char*, const SplitMetrics*> splits[] = {
        {"training", &m.training}, {"validation", &m.validation}, {"production", &m.production}};
    for (const auto& [label, s] : splits) {
      ordered_json pe = ordered_json::object();
      for (std::size_t k = 0; k < report.variables.size(); ++k) pe[report.variables[k]] = s->percent_error.at(k);
      e["splits"][label]["mse"] = s->mse;
      e["splits"][label]["percent_error"] = pe;
      e["splits"][label]["percent_error_mean"] = mean_of(s->percent_error);
    }
    j["models"].push_back(e);
  }
  j["not_implemented"] = kReservedModelNames;
  j["ranking"] = report.ranking;
  j["selected"] = report.selected;
  return j.dump(2) + "\n";
}

FinalResult run_final(const DatasetSplit& dataset, const ScalerParams& scaler, const TrainingConfig& config,
                      const FinalOptions& options) {
  if (dataset.training.empty() || dataset.validation.empty() || dataset.production.empty()) {
    throw Error(ErrorCode::EmptySplit, "final training needs non-empty training, validation and production sets");
  }
  const std::size_t in = dataset.training.front().inputs.size();
  const std::size_t out = dataset.training.front().targets_raw.size();
  const NetworkSpec spec = options.spec ? *options.spec : final_network_spec(in, out);

  std::vector<std::vector<double>> center_data;
  for (const auto& s : dataset.training) center_data.push_back(s.inputs);

  TrainingConfig cfg = config;
  cfg.rule = UpdateRule::Quickprop;
  cfg.seed = derive_seed(config.seed, "train:final");
  const auto initial = build_network(spec, derive_seed(config.seed, "init:final"), center_data);
  auto trained = train(initial, dataset, cfg);
  auto report = build_report(trained.network, dataset, scaler, trained.history);
  return {std::move(trained.network), std::move(trained.history), std::move(report)};
}

namespace {

std::ofstream open_for_write(const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IOFailure, "cannot write " + file.string());
  return out;
}

}  // namespace

void emit_comparison_plots(const ComparisonReport& report, const std::filesystem::path& dir) {
  const std::pair<const char*, const SplitMetrics ModelResult::*> figs[] = {
      {kFigValidation, &ModelResult::validation},
      {kFigTraining, &ModelResult::training},
      {kFigProduction, &ModelResult::production},
  };
  for (const auto& [file, member] : figs) {
    auto out = open_for_write(dir / file);
    out << "model,mse,percent_error_mean\n";
    for (const auto& m : report.models) {
      const auto& s = m.*member;
      out << m.name << ',' << detail::format_double(s.mse) << ',' << detail::format_double(mean_of(s.percent_error)) << '\n';
    }
    if (!out) throw Error(ErrorCode::IOFailure, "failed writing " + (dir / file).string());
  }
}

void emit_prediction_plot(const Predictor& predictor, const std::vector<Sample>& production, const ScalerParams& scaler,
                          const std::filesystem::path& file) {
  auto out = open_for_write(file);
  out << "index,variable,actual,predicted\n";
  for (std::size_t i = 0; i < production.size(); ++i) {
    const auto predicted = invert_scaler(scaler, predictor(production[i]));
    for (std::size_t k = 0; k < predicted.size(); ++k) {
      out << i << ',' << scaler.target_names[k] << ',' << detail::format_double(production[i].targets_raw[k]) << ','
          << detail::format_double(predicted[k]) << '\n';
    }
  }
  if (!out) throw Error(ErrorCode::IOFailure, "failed writing " + file.string());
}

}  // namespace quakenet
