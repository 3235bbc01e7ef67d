#include "quakenet/quakenet.h"

#include <fstream>
#include <memory>
#include <new>
#include <string>

#include "quakenet/error.hpp"
#include "quakenet/metrics.hpp"
#include "quakenet/network.hpp"
#include "quakenet/pipeline.hpp"
#include "quakenet/trainer.hpp"

struct qn_pipeline {
  quakenet::Pipeline pipeline;
  std::string output;
};

struct qn_network {
  quakenet::Network network;
};

namespace {

thread_local std::string g_last_error;

qn_status status_of(quakenet::ErrorCode code) {
  using quakenet::ErrorCode;
  switch (code) {
    case ErrorCode::Config:
    case ErrorCode::UnknownModel:
    case ErrorCode::InvalidRange:
    case ErrorCode::CountMismatch:
    case ErrorCode::InsufficientSamples:
      return QN_ERR_CONFIG;
    case ErrorCode::MissingHeader:
    case ErrorCode::MalformedRow:
    case ErrorCode::EmptyField:
      return QN_ERR_PARSE;
    case ErrorCode::UnknownZone:
    case ErrorCode::EmptySampleSet:
    case ErrorCode::DegenerateVariable:
    case ErrorCode::EmptyInput:
    case ErrorCode::EmptySplit:
      return QN_ERR_DATA;
    case ErrorCode::MissingArtifact:
      return QN_ERR_MISSING_ARTIFACT;
    case ErrorCode::NonFiniteLoss:
      return QN_ERR_DIVERGED;
    case ErrorCode::DimensionMismatch:
      return QN_ERR_DIMENSION;
    case ErrorCode::NonFiniteParameter:
    case ErrorCode::ZeroVariance:
      return QN_ERR_NUMERIC;
    case ErrorCode::IOFailure:
      return QN_ERR_IO;
    case ErrorCode::InvalidArgument:
      return QN_ERR_INVALID_ARGUMENT;
  }
  return QN_ERR_INTERNAL;
}

qn_status fail(qn_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <typename F>
qn_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return QN_OK;
  } catch (const quakenet::Error& e) {
    return fail(status_of(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(QN_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(QN_ERR_INTERNAL, e.what());
  }
}

quakenet::Matrix to_matrix(const double* data, std::size_t rows, std::size_t cols) {
  quakenet::Matrix m(rows, std::vector<double>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t k = 0; k < cols; ++k) m[i][k] = data[i * cols + k];
  }
  return m;
}

}  // namespace

extern "C" {

const char* qn_last_error(void) { return g_last_error.c_str(); }

int qn_exit_code(qn_status status) {
  switch (status) {
    case QN_OK:
      return 0;
    case QN_ERR_CONFIG:
    case QN_ERR_PARSE:
    case QN_ERR_DATA:
    case QN_ERR_INVALID_ARGUMENT:
      return 2;
    case QN_ERR_MISSING_ARTIFACT:
      return 3;
    case QN_ERR_DIVERGED:
      return 4;
    default:
      return 1;
  }
}

const char* qn_version(void) { return "1.0.0"; }

qn_status qn_pipeline_open(const char* config_path, qn_pipeline** out) {
  if (!out) return fail(QN_ERR_INVALID_ARGUMENT, "out must not be NULL");
  *out = nullptr;
  return guarded([&] {
    quakenet::PipelineConfig cfg;
    if (config_path) {
      cfg = quakenet::PipelineConfig::from_file(config_path);
    } else {
      cfg.synth = quakenet::SynthParams{};
    }
    *out = new qn_pipeline{quakenet::Pipeline(std::move(cfg)), {}};
  });
}

void qn_pipeline_free(qn_pipeline* pipeline) { delete pipeline; }

qn_status qn_pipeline_set_seed(qn_pipeline* pipeline, uint64_t seed) {
  if (!pipeline) return fail(QN_ERR_INVALID_ARGUMENT, "pipeline must not be NULL");
  pipeline->pipeline.config().seed = seed;
  return QN_OK;
}

qn_status qn_pipeline_set_output_dir(qn_pipeline* pipeline, const char* dir) {
  if (!pipeline || !dir || !*dir) return fail(QN_ERR_INVALID_ARGUMENT, "pipeline and dir must be non-empty");
  pipeline->pipeline.config().output_dir = dir;
  return QN_OK;
}

qn_status qn_pipeline_run(qn_pipeline* pipeline, const char* command) {
  if (!pipeline || !command) return fail(QN_ERR_INVALID_ARGUMENT, "pipeline and command must not be NULL");
  return guarded([&] { pipeline->output = pipeline->pipeline.run(command); });
}

qn_status qn_pipeline_report(qn_pipeline* pipeline, const char* const* paths, size_t n) {
  if (!pipeline || (n > 0 && !paths)) return fail(QN_ERR_INVALID_ARGUMENT, "pipeline and paths must not be NULL");
  return guarded([&] {
    std::vector<std::filesystem::path> files;
    for (size_t i = 0; i < n; ++i) files.emplace_back(paths[i]);
    pipeline->output = pipeline->pipeline.report(files);
  });
}

const char* qn_pipeline_output(const qn_pipeline* pipeline) { return pipeline ? pipeline->output.c_str() : ""; }

qn_status qn_network_load(const char* path, qn_network** out) {
  if (!path || !out) return fail(QN_ERR_INVALID_ARGUMENT, "path and out must not be NULL");
  *out = nullptr;
  return guarded([&] {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw quakenet::Error(quakenet::ErrorCode::MissingArtifact, std::string("cannot open ") + path);
    *out = new qn_network{quakenet::load_network(in)};
  });
}

void qn_network_free(qn_network* network) { delete network; }

size_t qn_network_input_width(const qn_network* network) { return network ? network->network.input_width() : 0; }
size_t qn_network_output_width(const qn_network* network) { return network ? network->network.output_width() : 0; }
size_t qn_network_parameter_count(const qn_network* network) {
  return network ? network->network.parameter_count() : 0;
}

qn_status qn_network_forward(const qn_network* network, const double* input, size_t input_len, double* output,
                             size_t output_len) {
  if (!network || !input || !output) return fail(QN_ERR_INVALID_ARGUMENT, "NULL argument");
  if (output_len != network->network.output_width()) return fail(QN_ERR_DIMENSION, "output buffer has wrong length");
  return guarded([&] {
    const auto y = network->network.forward(std::span<const double>(input, input_len));
    std::copy(y.begin(), y.end(), output);
  });
}

qn_status qn_metrics_mse(const double* predictions, const double* targets, size_t rows, size_t cols, double* out) {
  if (!predictions || !targets || !out) return fail(QN_ERR_INVALID_ARGUMENT, "NULL argument");
  return guarded([&] { *out = quakenet::mse(to_matrix(predictions, rows, cols), to_matrix(targets, rows, cols)); });
}

qn_status qn_metrics_nmse(const double* predictions, const double* targets, size_t rows, size_t cols, double* out) {
  if (!predictions || !targets || !out) return fail(QN_ERR_INVALID_ARGUMENT, "NULL argument");
  return guarded([&] { *out = quakenet::nmse(to_matrix(predictions, rows, cols), to_matrix(targets, rows, cols)); });
}

}  // extern "C"
