#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace quakenet {

enum class LayerKind { DenseTanh, DenseLinear, RadialGaussian };

std::string to_string(LayerKind kind);

struct LayerSpec {
  LayerKind kind = LayerKind::DenseTanh;
  std::size_t units = 1;

  bool operator==(const LayerSpec&) const = default;
};

/// Layered feedforward topology. The last layer is a linear layer of
/// `output_width` units; a radial layer, if any, must come first.
struct NetworkSpec {
  std::size_t input_width = 1;
  std::vector<LayerSpec> layers;
  std::size_t output_width = 1;

  void validate() const;
  bool operator==(const NetworkSpec&) const = default;
};

/// Location of one layer's parameters inside the flat parameter vector.
///
/// Dense layers store a row-major `units x fan_in` weight matrix followed by
/// `units` biases. Radial layers store `units x fan_in` centers followed by
/// `units` raw width parameters; the Gaussian width is softplus(raw), which
/// keeps it positive under any update.
struct LayerBlock {
  LayerKind kind;
  std::size_t fan_in;
  std::size_t units;
  std::size_t offset;

  std::size_t matrix_size() const { return fan_in * units; }
  std::size_t vector_offset() const { return offset + matrix_size(); }
  std::size_t size() const { return matrix_size() + units; }
  bool operator==(const LayerBlock&) const = default;
};

double softplus(double x);
double inverse_softplus(double y);

class Network {
 public:
  explicit Network(NetworkSpec spec);  // all parameters zero, radial widths 1

  const NetworkSpec& spec() const { return spec_; }
  std::span<const LayerBlock> blocks() const { return blocks_; }
  std::size_t input_width() const { return spec_.input_width; }
  std::size_t output_width() const { return spec_.output_width; }

  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }
  std::size_t parameter_count() const { return params_.size(); }

  // Dense layers: weight(l, unit, input), bias(l, unit).
  double& weight(std::size_t layer, std::size_t unit, std::size_t input);
  double weight(std::size_t layer, std::size_t unit, std::size_t input) const;
  double& bias(std::size_t layer, std::size_t unit);
  double bias(std::size_t layer, std::size_t unit) const;

  // Radial layers: center(l, unit, input) and the effective width sigma.
  double& center(std::size_t layer, std::size_t unit, std::size_t input);
  double center(std::size_t layer, std::size_t unit, std::size_t input) const;
  double width(std::size_t layer, std::size_t unit) const;
  /// Stores the raw parameter so that width() >= sigma (sigma > 0).
  void set_width(std::size_t layer, std::size_t unit, double sigma);

  /// Checked evaluation: validates the input width and parameter finiteness.
  std::vector<double> forward(std::span<const double> input) const;
  /// Per-layer activations; the last entry is the network output.
  std::vector<std::vector<double>> forward_trace(std::span<const double> input) const;

  /// Unchecked evaluation into a reusable trace (one vector per layer). Used
  /// on hot paths after the caller has validated dimensions.
  void evaluate(std::span<const double> input, std::vector<std::vector<double>>& trace) const;

  void check_finite() const;

  bool operator==(const Network&) const = default;

 private:
  const LayerBlock& block(std::size_t layer, LayerKind expected) const;

  NetworkSpec spec_;
  std::vector<LayerBlock> blocks_;
  std::vector<double> params_;
};

/// Instantiates a spec. Dense weights are uniform in +-1/sqrt(fan_in), biases
/// zero. Radial centers are drawn from `center_init_data` (without
/// replacement when it has enough rows) or uniformly from [0,1]^d when no
/// data is given; every width is the mean nearest-other-center distance,
/// floored at 1e-6. Deterministic per seed.
Network build_network(const NetworkSpec& spec, std::uint64_t seed,
                      std::span<const std::vector<double>> center_init_data = {});

inline constexpr double kMinRadialWidth = 1e-6;

/// Table V style network: Gaussian input layer of 100 units, tanh stack
/// 50-100-200-400-200-100-50, linear output.
NetworkSpec final_network_spec(std::size_t input_width, std::size_t output_width);

enum class PreliminaryModel { Mlp, RadialGeneral, RbfMlp };

std::string to_string(PreliminaryModel model);
PreliminaryModel parse_preliminary_model(std::string_view name);

inline const std::vector<std::size_t> kPreliminaryHiddenUnits = {20, 60, 100, 150, 100, 60, 20};

/// Candidate topologies compared before choosing the final network.
///   mlp            tanh stack over `hidden_units`
///   radial_general first hidden layer replaced by a radial layer of the same size
///   rbf_mlp        radial layer of `radial_units` in front of the full tanh stack
NetworkSpec preliminary_network_spec(PreliminaryModel model, std::size_t input_width, std::size_t output_width,
                                     const std::vector<std::size_t>& hidden_units = kPreliminaryHiddenUnits,
                                     std::size_t radial_units = 20);

inline constexpr std::uint32_t kNetworkFormatVersion = 1;

/// Binary container: magic, format version, spec, then every parameter as
/// its IEEE-754 bit pattern (little endian), so reloads are bit-exact.
void save_network(std::ostream& out, const Network& network);
Network load_network(std::istream& in);

}  // namespace quakenet
