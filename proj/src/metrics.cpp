#include "quakenet/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "json.hpp"

#include "quakenet/error.hpp"
#include "text_util.hpp"

namespace quakenet {

namespace {

std::size_t check_shapes(const Matrix& predictions, const Matrix& targets) {
  if (predictions.empty() || targets.empty()) throw Error(ErrorCode::EmptyInput, "metrics need at least one sample");
  if (predictions.size() != targets.size()) {
    throw Error(ErrorCode::DimensionMismatch, "prediction and target counts differ");
  }
  const std::size_t width = targets.front().size();
  if (width == 0) throw Error(ErrorCode::EmptyInput, "zero-width vectors");
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (predictions[i].size() != width || targets[i].size() != width) {
      throw Error(ErrorCode::DimensionMismatch, "row " + std::to_string(i) + " has inconsistent width");
    }
  }
  return width;
}

}  // namespace

double mse(const Matrix& predictions, const Matrix& targets) {
  const std::size_t width = check_shapes(predictions, targets);
  double total = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    double sq = 0.0;
    for (std::size_t k = 0; k < width; ++k) {
      const double d = predictions[i][k] - targets[i][k];
      sq += d * d;
    }
    total += sq / static_cast<double>(width);
  }
  return total / static_cast<double>(targets.size());
}

double nmse(const Matrix& predictions, const Matrix& targets) {
  const std::size_t width = check_shapes(predictions, targets);
  std::vector<double> mean(width, 0.0);
  for (const auto& t : targets) {
    for (std::size_t k = 0; k < width; ++k) mean[k] += t[k];
  }
  for (double& m : mean) m /= static_cast<double>(targets.size());
  for (std::size_t k = 0; k < width; ++k) {
    bool varies = false;
    for (const auto& t : targets) varies = varies || t[k] != mean[k];
    if (!varies) throw Error(ErrorCode::ZeroVariance, "target component " + std::to_string(k) + " is constant");
  }
  const Matrix baseline(targets.size(), mean);
  return mse(predictions, targets) / mse(baseline, targets);
}

std::vector<double> percent_error_per_variable(const Matrix& raw_predictions, const Matrix& raw_targets,
                                               const ScalerParams& scaler) {
  const std::size_t width = check_shapes(raw_predictions, raw_targets);
  if (scaler.target_min.size() != width || scaler.target_max.size() != width) {
    throw Error(ErrorCode::DimensionMismatch, "scaler does not cover every output variable");
  }
  std::vector<double> out(width, 0.0);
  for (std::size_t k = 0; k < width; ++k) {
    const double range = scaler.target_max[k] - scaler.target_min[k];
    if (!(range > 0.0)) throw Error(ErrorCode::DegenerateVariable, "output " + std::to_string(k) + " has zero range");
    double total = 0.0;
    for (std::size_t i = 0; i < raw_targets.size(); ++i) total += std::abs(raw_predictions[i][k] - raw_targets[i][k]);
    out[k] = 100.0 * total / static_cast<double>(raw_targets.size()) / range;
  }
  return out;
}

Predictor network_predictor(const Network& network) {
  return [&network](const Sample& s) {
    std::vector<std::vector<double>> trace;
    network.evaluate(s.inputs, trace);
    return std::move(trace.back());
  };
}

namespace {

struct Evaluated {
  Matrix pred_norm, target_norm, pred_raw, target_raw;
  std::size_t out_of_range = 0;
};

Evaluated evaluate_split(const Predictor& predictor, const std::vector<Sample>& samples, const ScalerParams& scaler) {
  Evaluated e;
  for (const auto& s : samples) {
    auto y = predictor(s);
    if (y.size() != s.targets_normalized.size()) throw Error(ErrorCode::DimensionMismatch, "predictor output width");
    for (double v : y) e.out_of_range += (v < 0.0 || v > 1.0) ? 1 : 0;
    e.pred_raw.push_back(invert_scaler(scaler, y));
    e.pred_norm.push_back(std::move(y));
    e.target_norm.push_back(s.targets_normalized);
    e.target_raw.push_back(s.targets_raw);
  }
  return e;
}

}  // namespace

MetricsReport build_report(const Predictor& predictor, const DatasetSplit& split, const ScalerParams& scaler,
                           const TrainingHistory& history) {
  MetricsReport report;
  report.variables = scaler.target_names;
  auto fill = [&](const std::vector<Sample>& samples, SplitMetrics& out) -> Evaluated {
    auto e = evaluate_split(predictor, samples, scaler);
    out.percent_error = percent_error_per_variable(e.pred_raw, e.target_raw, scaler);
    out.mse = mse(e.pred_norm, e.target_norm);
    report.out_of_range_predictions += e.out_of_range;
    return e;
  };
  fill(split.training, report.training);
  fill(split.validation, report.validation);
  const auto production = fill(split.production, report.production);

  report.mse = report.production.mse;
  report.nmse = nmse(production.pred_norm, production.target_norm);
  double sum = 0.0;
  for (double p : report.production.percent_error) sum += p;
  report.percent_error_aggregate = sum / static_cast<double>(report.production.percent_error.size());
  report.cycles = history.cycles;
  report.wall_seconds = history.wall_seconds;
  return report;
}

MetricsReport build_report(const Network& network, const DatasetSplit& split, const ScalerParams& scaler,
                           const TrainingHistory& history) {
  network.check_finite();
  return build_report(network_predictor(network), split, scaler, history);
}

namespace {

constexpr const char* kSplitNames[] = {"training", "validation", "production"};

const SplitMetrics& split_of(const MetricsReport& r, int i) {
  return i == 0 ? r.training : i == 1 ? r.validation : r.production;
}
SplitMetrics& split_of(MetricsReport& r, int i) { return i == 0 ? r.training : i == 1 ? r.validation : r.production; }

}  // namespace

std::string report_to_json(const MetricsReport& report) {
  nlohmann::ordered_json j;
  for (int i = 0; i < 3; ++i) {
    nlohmann::ordered_json pe = nlohmann::ordered_json::object();
    const auto& s = split_of(report, i);
    for (std::size_t k = 0; k < report.variables.size(); ++k) pe[report.variables[k]] = s.percent_error.at(k);
    j["splits"][kSplitNames[i]]["percent_error"] = pe;
  }
  j["mse"] = report.mse;
  j["nmse"] = report.nmse;
  j["percent_error_aggregate"] = report.percent_error_aggregate;
  j["cycles"] = report.cycles;
  j["wall_seconds"] = report.wall_seconds;
  j["out_of_range_predictions"] = report.out_of_range_predictions;
  return j.dump(2) + "\n";
}

MetricsReport report_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::ordered_json::parse(text);
    MetricsReport r;
    for (const auto& [name, value] : j.at("splits").at("production").at("percent_error").items()) {
      r.variables.push_back(name);
    }
    for (int i = 0; i < 3; ++i) {
      const auto& pe = j.at("splits").at(kSplitNames[i]).at("percent_error");
      for (const auto& v : r.variables) split_of(r, i).percent_error.push_back(pe.at(v).get<double>());
    }
    r.mse = j.at("mse").get<double>();
    r.nmse = j.at("nmse").get<double>();
    r.percent_error_aggregate = j.at("percent_error_aggregate").get<double>();
    r.cycles = j.at("cycles").get<std::size_t>();
    r.wall_seconds = j.at("wall_seconds").get<double>();
    r.out_of_range_predictions = j.at("out_of_range_predictions").get<std::size_t>();
    r.production.mse = r.mse;
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Config, std::string("malformed report JSON: ") + e.what());
  }
}

void write_report_csv(std::ostream& out, const MetricsReport& report) {
  out << "field,value\n";
  for (int i = 0; i < 3; ++i) {
    const auto& s = split_of(report, i);
    for (std::size_t k = 0; k < report.variables.size(); ++k) {
      out << "splits." << kSplitNames[i] << ".percent_error." << report.variables[k] << ','
          << detail::format_double(s.percent_error.at(k)) << '\n';
    }
  }
  out << "mse," << detail::format_double(report.mse) << '\n';
  out << "nmse," << detail::format_double(report.nmse) << '\n';
  out << "percent_error_aggregate," << detail::format_double(report.percent_error_aggregate) << '\n';
  out << "cycles," << report.cycles << '\n';
  out << "wall_seconds," << detail::format_double(report.wall_seconds) << '\n';
  out << "out_of_range_predictions," << report.out_of_range_predictions << '\n';
}

std::string format_report_table(const MetricsReport& report) {
  std::string out;
  char line[128];
  auto row = [&](const char* label, const std::string& value) {
    std::snprintf(line, sizeof(line), "%-34s %s\n", label, value.c_str());
    out += line;
  };
  auto fixed = [&](double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return std::string(buf);
  };

  const auto total = static_cast<long long>(std::llround(report.wall_seconds));
  char hms[32];
  std::snprintf(hms, sizeof(hms), "%lld:%02lld:%02lld", total / 3600, (total / 60) % 60, total % 60);

  out += "Final network results\n";
  row("Cycles required", std::to_string(report.cycles));
  row("Time required", hms);
  // Production, validation, training: same order as the published table.
  for (int i : {2, 1, 0}) {
    static constexpr const char* kTitles[] = {"Training set", "Validation set", "Production set"};
    out += std::string(kTitles[i]) + "\n";
    const auto& s = split_of(report, i);
    for (std::size_t k = 0; k < report.variables.size(); ++k) {
      const std::string label = "  Mean error " + report.variables[k];
      row(label.c_str(), fixed(s.percent_error.at(k), 2) + "%");
    }
  }
  row("MSE", fixed(report.mse, 12));
  row("NMSE", fixed(report.nmse, 12));
  row("% Error", fixed(report.percent_error_aggregate, 12));
  row("Out-of-range predictions", std::to_string(report.out_of_range_predictions));
  return out;
}

}  // namespace quakenet
