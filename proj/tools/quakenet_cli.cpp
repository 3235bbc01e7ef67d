// Command-line front end. Everything goes through the C API so the shared
// library is exercised exactly as an external caller would use it.
#include <cstdint>
#include <cstdio>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "quakenet/quakenet.h"

namespace {

struct PipelineDeleter {
  void operator()(qn_pipeline* p) const { qn_pipeline_free(p); }
};
using PipelinePtr = std::unique_ptr<qn_pipeline, PipelineDeleter>;

int report_failure(qn_status status) {
  std::fprintf(stderr, "quakenet: %s\n", qn_last_error());
  return qn_exit_code(status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Earthquake catalog regression toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  app.add_option("--config", config_path, "JSON pipeline configuration");
  app.add_option("--seed", seed, "Override the configured master seed");
  app.add_option("--out", out_dir, "Override the configured output directory");

  std::vector<std::string> report_paths;
  for (const char* name : {"synth", "ingest", "compare", "train-final"}) {
    app.add_subcommand(name, std::string("Run the ") + name + " stage");
  }
  auto* report = app.add_subcommand("report", "Print report tables");
  report->add_option("reports", report_paths, "report.json files (default: <out>/report.json)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  qn_pipeline* raw = nullptr;
  if (qn_status st = qn_pipeline_open(config_path.empty() ? nullptr : config_path.c_str(), &raw); st != QN_OK) {
    return report_failure(st);
  }
  PipelinePtr pipeline(raw);
  if (seed) qn_pipeline_set_seed(pipeline.get(), *seed);
  if (!out_dir.empty()) {
    if (qn_status st = qn_pipeline_set_output_dir(pipeline.get(), out_dir.c_str()); st != QN_OK) return report_failure(st);
  }

  const auto* sub = app.get_subcommands().front();
  qn_status st;
  if (sub == report) {
    std::vector<const char*> paths;
    for (const auto& p : report_paths) paths.push_back(p.c_str());
    st = qn_pipeline_report(pipeline.get(), paths.data(), paths.size());
  } else {
    st = qn_pipeline_run(pipeline.get(), sub->get_name().c_str());
  }
  if (st != QN_OK) return report_failure(st);
  std::fputs(qn_pipeline_output(pipeline.get()), stdout);
  return 0;
}
