#include "quakenet/network.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>

#include "quakenet/error.hpp"
#include "quakenet/random.hpp"

namespace quakenet {

std::string to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::DenseTanh: return "dense_tanh";
    case LayerKind::DenseLinear: return "dense_linear";
    case LayerKind::RadialGaussian: return "radial_gaussian";
  }
  return "?";
}

void NetworkSpec::validate() const {
  if (input_width == 0 || output_width == 0) throw Error(ErrorCode::DimensionMismatch, "network widths must be >= 1");
  if (layers.empty()) throw Error(ErrorCode::DimensionMismatch, "network needs at least an output layer");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].units == 0) throw Error(ErrorCode::DimensionMismatch, "layer " + std::to_string(i) + " has zero units");
    if (layers[i].kind == LayerKind::RadialGaussian && i != 0) {
      throw Error(ErrorCode::DimensionMismatch, "a radial layer may only appear first");
    }
  }
  const auto& last = layers.back();
  if (last.kind != LayerKind::DenseLinear || last.units != output_width) {
    throw Error(ErrorCode::DimensionMismatch, "last layer must be dense_linear with output_width units");
  }
}

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double inverse_softplus(double y) { return y + std::log(-std::expm1(-y)); }

Network::Network(NetworkSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  std::size_t fan_in = spec_.input_width;
  std::size_t offset = 0;
  for (const auto& layer : spec_.layers) {
    blocks_.push_back({layer.kind, fan_in, layer.units, offset});
    offset += blocks_.back().size();
    fan_in = layer.units;
  }
  params_.assign(offset, 0.0);
  for (std::size_t l = 0; l < blocks_.size(); ++l) {
    if (blocks_[l].kind != LayerKind::RadialGaussian) continue;
    for (std::size_t j = 0; j < blocks_[l].units; ++j) set_width(l, j, 1.0);
  }
}

const LayerBlock& Network::block(std::size_t layer, LayerKind expected) const {
  const auto& b = blocks_.at(layer);
  const bool radial = b.kind == LayerKind::RadialGaussian;
  if (radial != (expected == LayerKind::RadialGaussian)) {
    throw Error(ErrorCode::InvalidArgument, "layer " + std::to_string(layer) + " is " + to_string(b.kind));
  }
  return b;
}

double& Network::weight(std::size_t l, std::size_t unit, std::size_t input) {
  const auto& b = block(l, LayerKind::DenseTanh);
  return params_.at(b.offset + unit * b.fan_in + input);
}
double Network::weight(std::size_t l, std::size_t unit, std::size_t input) const {
  const auto& b = block(l, LayerKind::DenseTanh);
  return params_.at(b.offset + unit * b.fan_in + input);
}
double& Network::bias(std::size_t l, std::size_t unit) {
  const auto& b = block(l, LayerKind::DenseTanh);
  return params_.at(b.vector_offset() + unit);
}
double Network::bias(std::size_t l, std::size_t unit) const {
  const auto& b = block(l, LayerKind::DenseTanh);
  return params_.at(b.vector_offset() + unit);
}
double& Network::center(std::size_t l, std::size_t unit, std::size_t input) {
  const auto& b = block(l, LayerKind::RadialGaussian);
  return params_.at(b.offset + unit * b.fan_in + input);
}
double Network::center(std::size_t l, std::size_t unit, std::size_t input) const {
  const auto& b = block(l, LayerKind::RadialGaussian);
  return params_.at(b.offset + unit * b.fan_in + input);
}
double Network::width(std::size_t l, std::size_t unit) const {
  const auto& b = block(l, LayerKind::RadialGaussian);
  return softplus(params_.at(b.vector_offset() + unit));
}

void Network::set_width(std::size_t l, std::size_t unit, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw Error(ErrorCode::InvalidArgument, "radial width must be positive");
  const auto& b = block(l, LayerKind::RadialGaussian);
  double raw = inverse_softplus(sigma);
  while (softplus(raw) < sigma) raw = std::nextafter(raw, std::numeric_limits<double>::infinity());
  params_.at(b.vector_offset() + unit) = raw;
}

void Network::check_finite() const {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (!std::isfinite(params_[i])) {
      throw Error(ErrorCode::NonFiniteParameter, "parameter " + std::to_string(i) + " is not finite");
    }
  }
}

void Network::evaluate(std::span<const double> input, std::vector<std::vector<double>>& trace) const {
  trace.resize(blocks_.size());
  std::span<const double> x = input;
  for (std::size_t l = 0; l < blocks_.size(); ++l) {
    const auto& b = blocks_[l];
    auto& y = trace[l];
    y.resize(b.units);
    const double* p = params_.data() + b.offset;
    const double* v = params_.data() + b.vector_offset();
    if (b.kind == LayerKind::RadialGaussian) {
      for (std::size_t j = 0; j < b.units; ++j) {
        const double* c = p + j * b.fan_in;
        double d2 = 0.0;
        for (std::size_t k = 0; k < b.fan_in; ++k) {
          const double diff = x[k] - c[k];
          d2 += diff * diff;
        }
        const double sigma = softplus(v[j]);
        y[j] = std::exp(-d2 / (2.0 * sigma * sigma));
      }
    } else {
      for (std::size_t j = 0; j < b.units; ++j) {
        const double* w = p + j * b.fan_in;
        double z = v[j];
        for (std::size_t k = 0; k < b.fan_in; ++k) z += w[k] * x[k];
        y[j] = b.kind == LayerKind::DenseTanh ? std::tanh(z) : z;
      }
    }
    x = y;
  }
}

std::vector<std::vector<double>> Network::forward_trace(std::span<const double> input) const {
  if (input.size() != spec_.input_width) {
    throw Error(ErrorCode::DimensionMismatch, "input has " + std::to_string(input.size()) + " values, network expects " +
                                                  std::to_string(spec_.input_width));
  }
  check_finite();
  std::vector<std::vector<double>> trace;
  evaluate(input, trace);
  return trace;
}

std::vector<double> Network::forward(std::span<const double> input) const { return forward_trace(input).back(); }

Network build_network(const NetworkSpec& spec, std::uint64_t seed, std::span<const std::vector<double>> center_init_data) {
  Network net(spec);
  Rng rng(seed);
  auto params = net.parameters();
  for (std::size_t l = 0; l < net.blocks().size(); ++l) {
    const auto& b = net.blocks()[l];
    if (b.kind != LayerKind::RadialGaussian) {
      const double limit = 1.0 / std::sqrt(static_cast<double>(b.fan_in));
      for (std::size_t i = 0; i < b.matrix_size(); ++i) params[b.offset + i] = rng.uniform(-limit, limit);
      continue;
    }

    // Radial layer: pick centers, then one shared width.
    if (!center_init_data.empty()) {
      for (const auto& row : center_init_data) {
        if (row.size() != b.fan_in) {
          throw Error(ErrorCode::DimensionMismatch, "center initialisation vector has " + std::to_string(row.size()) +
                                                        " values, expected " + std::to_string(b.fan_in));
        }
      }
      std::vector<std::size_t> picks;
      if (center_init_data.size() >= b.units) {
        std::vector<std::size_t> pool(center_init_data.size());
        std::iota(pool.begin(), pool.end(), std::size_t{0});
        // partial Fisher-Yates: the first `units` slots become the sample
        for (std::size_t j = 0; j < b.units; ++j) {
          const auto k = j + static_cast<std::size_t>(rng.below(pool.size() - j));
          std::swap(pool[j], pool[k]);
        }
        picks.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(b.units));
      } else {
        for (std::size_t j = 0; j < b.units; ++j) picks.push_back(static_cast<std::size_t>(rng.below(center_init_data.size())));
      }
      for (std::size_t j = 0; j < b.units; ++j) {
        std::copy(center_init_data[picks[j]].begin(), center_init_data[picks[j]].end(),
                  params.begin() + static_cast<std::ptrdiff_t>(b.offset + j * b.fan_in));
      }
    } else {
      for (std::size_t i = 0; i < b.matrix_size(); ++i) params[b.offset + i] = rng.uniform();
    }

    double sigma = 1.0;
    if (b.units > 1) {
      double total = 0.0;
      for (std::size_t j = 0; j < b.units; ++j) {
        double nearest = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < b.units; ++k) {
          if (k == j) continue;
          double d2 = 0.0;
          for (std::size_t i = 0; i < b.fan_in; ++i) {
            const double diff = params[b.offset + j * b.fan_in + i] - params[b.offset + k * b.fan_in + i];
            d2 += diff * diff;
          }
          nearest = std::min(nearest, std::sqrt(d2));
        }
        total += nearest;
      }
      sigma = total / static_cast<double>(b.units);
    }
    sigma = std::max(sigma, kMinRadialWidth);
    for (std::size_t j = 0; j < b.units; ++j) net.set_width(l, j, sigma);
  }
  return net;
}

NetworkSpec final_network_spec(std::size_t input_width, std::size_t output_width) {
  NetworkSpec spec;
  spec.input_width = input_width;
  spec.output_width = output_width;
  spec.layers.push_back({LayerKind::RadialGaussian, 100});
  for (std::size_t units : {50, 100, 200, 400, 200, 100, 50}) spec.layers.push_back({LayerKind::DenseTanh, units});
  spec.layers.push_back({LayerKind::DenseLinear, output_width});
  spec.validate();
  return spec;
}

std::string to_string(PreliminaryModel model) {
  switch (model) {
    case PreliminaryModel::Mlp: return "mlp";
    case PreliminaryModel::RadialGeneral: return "radial_general";
    case PreliminaryModel::RbfMlp: return "rbf_mlp";
  }
  return "?";
}

PreliminaryModel parse_preliminary_model(std::string_view name) {
  for (auto m : {PreliminaryModel::Mlp, PreliminaryModel::RadialGeneral, PreliminaryModel::RbfMlp}) {
    if (to_string(m) == name) return m;
  }
  throw Error(ErrorCode::UnknownModel, "unknown model '" + std::string(name) + "'");
}

NetworkSpec preliminary_network_spec(PreliminaryModel model, std::size_t input_width, std::size_t output_width,
                                     const std::vector<std::size_t>& hidden_units, std::size_t radial_units) {
  if (hidden_units.empty()) throw Error(ErrorCode::InvalidArgument, "preliminary network needs hidden layers");
  NetworkSpec spec;
  spec.input_width = input_width;
  spec.output_width = output_width;
  if (model == PreliminaryModel::RbfMlp) spec.layers.push_back({LayerKind::RadialGaussian, radial_units});
  for (std::size_t i = 0; i < hidden_units.size(); ++i) {
    const bool radial = model == PreliminaryModel::RadialGeneral && i == 0;
    spec.layers.push_back({radial ? LayerKind::RadialGaussian : LayerKind::DenseTanh, hidden_units[i]});
  }
  spec.layers.push_back({LayerKind::DenseLinear, output_width});
  spec.validate();
  return spec;
}

namespace {

constexpr char kMagic[8] = {'Q', 'N', 'E', 'T', 'M', 'D', 'L', '\0'};

void put_u64(std::ostream& out, std::uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(bytes, 8);
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw Error(ErrorCode::IOFailure, "truncated network file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return v;
}

}  // namespace

void save_network(std::ostream& out, const Network& network) {
  const auto& spec = network.spec();
  out.write(kMagic, sizeof(kMagic));
  put_u64(out, kNetworkFormatVersion);
  put_u64(out, spec.input_width);
  put_u64(out, spec.output_width);
  put_u64(out, spec.layers.size());
  for (const auto& layer : spec.layers) {
    put_u64(out, static_cast<std::uint64_t>(layer.kind));
    put_u64(out, layer.units);
  }
  put_u64(out, network.parameter_count());
  for (double p : network.parameters()) put_u64(out, std::bit_cast<std::uint64_t>(p));
  if (!out) throw Error(ErrorCode::IOFailure, "failed writing network");
}

Network load_network(std::istream& in) {
  char magic[sizeof(kMagic)];
  if (!in.read(magic, sizeof(magic)) || !std::equal(magic, magic + sizeof(magic), kMagic)) {
    throw Error(ErrorCode::IOFailure, "not a network file");
  }
  const auto version = get_u64(in);
  if (version != kNetworkFormatVersion) {
    throw Error(ErrorCode::IOFailure, "unsupported network format version " + std::to_string(version));
  }
  NetworkSpec spec;
  spec.input_width = get_u64(in);
  spec.output_width = get_u64(in);
  const auto n_layers = get_u64(in);
  if (n_layers > 4096) throw Error(ErrorCode::IOFailure, "implausible layer count");
  for (std::uint64_t i = 0; i < n_layers; ++i) {
    const auto kind = get_u64(in);
    if (kind > static_cast<std::uint64_t>(LayerKind::RadialGaussian)) throw Error(ErrorCode::IOFailure, "bad layer kind");
    spec.layers.push_back({static_cast<LayerKind>(kind), get_u64(in)});
  }
  Network net(spec);
  if (get_u64(in) != net.parameter_count()) throw Error(ErrorCode::IOFailure, "parameter count does not match spec");
  for (double& p : net.parameters()) p = std::bit_cast<double>(get_u64(in));
  return net;
}

}  // namespace quakenet
