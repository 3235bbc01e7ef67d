#include "doctest.h"

#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"

#include "quakenet/error.hpp"
#include "quakenet/harness.hpp"
#include "support.hpp"

using namespace quakenet;
using qtest::code_of;

namespace {

struct Data {
  DatasetSplit split;
  ScalerParams scaler;
};

// Smooth synthetic catalog pushed through the real encoding path.
Data smooth_data(std::size_t count, std::uint64_t seed) {
  const auto records = generate_smooth_catalog(seed, count);
  EncoderConfig enc;
  enc.zone_vocabulary = SynthRegion{}.zone_names;
  std::sort(enc.zone_vocabulary.begin(), enc.zone_vocabulary.end());
  const auto raw = encode_records(records, enc);
  const auto split = split_dataset(raw, SplitProportions{0.6, 0.2, 0.2}, seed);
  Data d;
  d.scaler = fit_scaler(split.training, enc);
  d.split.training = apply_scaler(d.scaler, split.training);
  d.split.validation = apply_scaler(d.scaler, split.validation);
  d.split.production = apply_scaler(d.scaler, split.production);
  return d;
}

std::vector<std::string> read_lines(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

ModelResult result(std::string name, double val, double prod, std::size_t params) {
  ModelResult r;
  r.name = std::move(name);
  r.validation.mse = val;
  r.production.mse = prod;
  r.parameter_count = params;
  return r;
}

ComparisonOptions quick_options() {
  ComparisonOptions o;
  o.hidden_units = {6, 4};
  o.radial_units = 5;
  o.preliminary_sample_count = 40;
  return o;
}

TrainingConfig quick_training(std::uint64_t seed) {
  TrainingConfig c;
  c.max_epochs = 40;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("ranking tie-breaks") {
  // identical validation and production error: smaller model first
  auto order = rank_models({result("big", 0.1, 0.2, 500), result("small", 0.1, 0.2, 50)});
  CHECK(order == std::vector<std::size_t>{1, 0});
  // validation decides before anything else
  order = rank_models({result("a", 0.3, 0.0, 1), result("b", 0.2, 0.9, 900), result("c", 0.2, 0.5, 900)});
  CHECK(order == std::vector<std::size_t>{2, 1, 0});
  // full tie keeps configured order
  order = rank_models({result("x", 0.1, 0.1, 10), result("y", 0.1, 0.1, 10)});
  CHECK(order == std::vector<std::size_t>{0, 1});
}

TEST_CASE("ranking is a stable permutation for random inputs") {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<ModelResult> models;
    const std::size_t n = 1 + gen() % 6;
    for (std::size_t i = 0; i < n; ++i) {
      models.push_back(result("m" + std::to_string(i), static_cast<double>(gen() % 3), static_cast<double>(gen() % 3), gen() % 3));
    }
    const auto order = rank_models(models);
    CHECK(std::set<std::size_t>(order.begin(), order.end()).size() == n);
    for (std::size_t i = 1; i < n; ++i) {
      const auto& a = models[order[i - 1]];
      const auto& b = models[order[i]];
      const auto key = [](const ModelResult& m) { return std::tuple(m.validation.mse, m.production.mse, m.parameter_count); };
      CHECK(key(a) <= key(b));
      if (key(a) == key(b)) CHECK(order[i - 1] < order[i]);
    }
    CHECK(rank_models(models) == order);
  }
}

TEST_CASE("preliminary subset is a prefix of one seeded shuffle") {
  std::vector<Sample> training(300);
  for (std::size_t i = 0; i < training.size(); ++i) training[i].source_index = i;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    std::vector<std::size_t> prev;
    for (std::size_t k = 0; k <= 300; k += 1 + k / 10) {
      const auto subset = preliminary_subset(training, k, seed);
      REQUIRE(subset.size() == k);
      std::vector<std::size_t> ids;
      for (const auto& s : subset) ids.push_back(s.source_index);
      CHECK(std::equal(prev.begin(), prev.end(), ids.begin()));
      CHECK(std::set<std::size_t>(ids.begin(), ids.end()).size() == k);
      prev = ids;
    }
    const auto k = preliminary_subset(training, 57, seed);
    const auto k1 = preliminary_subset(training, 58, seed);
    CHECK(std::equal(k.begin(), k.end(), k1.begin()));
  }
  CHECK(code_of([&] { preliminary_subset(training, 301, 1); }) == ErrorCode::InsufficientSamples);
}

TEST_CASE("comparison defaults") {
  const ComparisonOptions o;
  CHECK(o.preliminary_sample_count == 200);
  CHECK(o.models.size() == 3);
  CHECK(o.hidden_units == kPreliminaryHiddenUnits);
  CHECK(o.default_rule_pairing);
}

TEST_CASE("comparison runs, pairs rules, and is deterministic") {
  const auto d = smooth_data(200, 5);
  const auto a = run_comparison(d.split, d.scaler, quick_training(9), quick_options());
  const auto b = run_comparison(d.split, d.scaler, quick_training(9), quick_options());
  CHECK(comparison_to_json(a) == comparison_to_json(b));
  REQUIRE(a.models.size() == 3);
  CHECK(a.models[0].name == "mlp");
  CHECK(a.models[0].rule == UpdateRule::Momentum);
  CHECK(a.models[1].rule == UpdateRule::Quickprop);
  CHECK(a.models[2].rule == UpdateRule::Quickprop);
  CHECK(a.preliminary_sample_count == 40);
  CHECK(a.selected == a.ranking.front());
  CHECK(std::set<std::string>(a.ranking.begin(), a.ranking.end()) == std::set<std::string>{"mlp", "radial_general", "rbf_mlp"});
  for (const auto& m : a.models) {
    CHECK(std::isfinite(m.validation.mse));
    CHECK(m.cycles <= 40);
    CHECK(m.training.percent_error.size() == 3);
  }

  const auto j = nlohmann::json::parse(comparison_to_json(a));
  CHECK(j.at("not_implemented") == nlohmann::json({"recurrent_time_series", "recurrent_generalized"}));
  CHECK(j.at("selected") == a.selected);
  CHECK(j.at("models").size() == 3);

  auto opts = quick_options();
  opts.default_rule_pairing = false;
  auto cfg = quick_training(9);
  cfg.rule = UpdateRule::Momentum;
  for (const auto& m : run_comparison(d.split, d.scaler, cfg, opts).models) CHECK(m.rule == UpdateRule::Momentum);

  opts = quick_options();
  opts.preliminary_sample_count = d.split.training.size() + 1;
  CHECK(code_of([&] { run_comparison(d.split, d.scaler, quick_training(1), opts); }) == ErrorCode::InsufficientSamples);
}

TEST_CASE("comparison plot files have one row per model") {
  const auto d = smooth_data(200, 6);
  const auto report = run_comparison(d.split, d.scaler, quick_training(2), quick_options());
  const auto dir = qtest::scratch_dir("harness_plots");
  emit_comparison_plots(report, dir);
  for (const char* f : {kFigValidation, kFigTraining, kFigProduction}) {
    const auto lines = read_lines(dir / f);
    REQUIRE(lines.size() == 4);
    CHECK(lines[0] == "model,mse,percent_error_mean");
    CHECK(lines[1].rfind("mlp,", 0) == 0);
    CHECK(lines[2].rfind("radial_general,", 0) == 0);
    CHECK(lines[3].rfind("rbf_mlp,", 0) == 0);
  }
  const auto lines = read_lines(dir / kFigValidation);
  const auto& m = report.models[1];
  CHECK(lines[2].find(",") != std::string::npos);
  CHECK(std::stod(lines[2].substr(lines[2].find(',') + 1)) == m.validation.mse);
}

TEST_CASE("prediction plot replays actuals exactly for a perfect predictor") {
  const auto d = smooth_data(120, 7);
  const auto dir = qtest::scratch_dir("harness_fig5");
  const Predictor replay = [](const Sample& s) { return s.targets_normalized; };
  emit_prediction_plot(replay, d.split.production, d.scaler, dir / kFigCompare);
  const auto lines = read_lines(dir / kFigCompare);
  REQUIRE(lines.size() == 1 + d.split.production.size() * 3);
  CHECK(lines[0] == "index,variable,actual,predicted");
  std::size_t rows_per_variable[3] = {0, 0, 0};
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::stringstream row(lines[i]);
    std::string idx, var, actual, predicted;
    std::getline(row, idx, ',');
    std::getline(row, var, ',');
    std::getline(row, actual, ',');
    std::getline(row, predicted, ',');
    const auto k = static_cast<std::size_t>(std::find(d.scaler.target_names.begin(), d.scaler.target_names.end(), var) -
                                            d.scaler.target_names.begin());
    REQUIRE(k < 3);
    ++rows_per_variable[k];
    CHECK(std::abs(std::stod(actual) - std::stod(predicted)) <= 1e-9);
    CHECK(std::stod(actual) == d.split.production[std::stoul(idx)].targets_raw[k]);
  }
  for (auto n : rows_per_variable) CHECK(n == d.split.production.size());
}

TEST_CASE("final run with zero epochs reports on the untrained full topology") {
  const auto d = smooth_data(60, 8);
  TrainingConfig c;
  c.max_epochs = 0;
  const auto r = run_final(d.split, d.scaler, c);
  CHECK(r.network.spec() == final_network_spec(d.scaler.input_names.size(), 3));
  CHECK(r.history.cycles == 0);
  for (const auto* s : {&r.report.training, &r.report.validation, &r.report.production}) {
    CHECK(std::isfinite(s->mse));
    for (double v : s->percent_error) {
      CHECK(std::isfinite(v));
      CHECK(v >= 0.0);
    }
  }
  CHECK(std::isfinite(r.report.nmse));
  CHECK(r.report.nmse >= 0.0);
  CHECK(std::isfinite(r.report.percent_error_aggregate));
}

TEST_CASE("final run honours a reduced topology") {
  const auto d = smooth_data(150, 9);
  TrainingConfig c;
  c.max_epochs = 30;
  c.rule = UpdateRule::Momentum;  // forced to quickprop by run_final
  FinalOptions o;
  o.spec = NetworkSpec{d.scaler.input_names.size(), {{LayerKind::RadialGaussian, 8}, {LayerKind::DenseTanh, 6}, {LayerKind::DenseLinear, 3}}, 3};
  auto a = run_final(d.split, d.scaler, c, o);
  auto b = run_final(d.split, d.scaler, c, o);
  a.report.wall_seconds = b.report.wall_seconds = 0.0;  // only the clock may differ
  CHECK(a.network == b.network);
  CHECK(report_to_json(a.report) == report_to_json(b.report));
  CHECK(a.network.spec() == *o.spec);
  CHECK(std::abs(a.report.mse - evaluate_mse(a.network, d.split.production)) <= 1e-12);
  DatasetSplit empty = d.split;
  empty.production.clear();
  CHECK(code_of([&] { run_final(empty, d.scaler, c, o); }) == ErrorCode::EmptySplit);
}
