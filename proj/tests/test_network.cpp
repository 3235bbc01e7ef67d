#include "doctest.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "quakenet/error.hpp"
#include "quakenet/network.hpp"
#include "support.hpp"

using namespace quakenet;
using qtest::code_of;

namespace {

std::vector<std::size_t> units_of(const NetworkSpec& s) {
  std::vector<std::size_t> u;
  for (const auto& l : s.layers) u.push_back(l.units);
  return u;
}

NetworkSpec random_small_spec(std::mt19937_64& gen) {
  NetworkSpec s;
  s.input_width = 1 + gen() % 4;
  s.output_width = 1 + gen() % 3;
  const std::size_t hidden = gen() % 3;  // plus the output layer: <= 3 layers
  for (std::size_t i = 0; i < hidden; ++i) {
    const bool radial = i == 0 && gen() % 2 == 0;
    s.layers.push_back({radial ? LayerKind::RadialGaussian : LayerKind::DenseTanh, 1 + gen() % 10});
  }
  s.layers.push_back({LayerKind::DenseLinear, s.output_width});
  return s;
}

}  // namespace

TEST_CASE("final topology matches the published layer table") {
  const auto s = final_network_spec(9, 3);
  CHECK_NOTHROW(s.validate());
  CHECK(s.layers.size() == 9);
  CHECK(units_of(s) == std::vector<std::size_t>{100, 50, 100, 200, 400, 200, 100, 50, 3});
  CHECK(s.layers.front().kind == LayerKind::RadialGaussian);
  for (std::size_t i = 1; i < 8; ++i) CHECK(s.layers[i].kind == LayerKind::DenseTanh);
  CHECK(s.layers.back().kind == LayerKind::DenseLinear);
  CHECK(final_network_spec(4, 1).layers.back().units == 1);

  const Network net(s);
  const auto blocks = net.blocks();
  const std::size_t chain[] = {9, 100, 50, 100, 200, 400, 200, 100, 50, 3};
  std::size_t expected_params = 0;
  for (std::size_t l = 0; l < blocks.size(); ++l) {
    CHECK(blocks[l].fan_in == chain[l]);
    CHECK(blocks[l].units == chain[l + 1]);
    CHECK(blocks[l].offset == expected_params);
    expected_params += chain[l] * chain[l + 1] + chain[l + 1];
  }
  CHECK(net.parameter_count() == expected_params);
}

TEST_CASE("preliminary topologies") {
  const std::vector<std::size_t> table = {20, 60, 100, 150, 100, 60, 20};
  CHECK(kPreliminaryHiddenUnits == table);

  const auto mlp = preliminary_network_spec(PreliminaryModel::Mlp, 9, 3);
  CHECK(mlp.layers.size() == 8);
  CHECK(units_of(mlp) == std::vector<std::size_t>{20, 60, 100, 150, 100, 60, 20, 3});
  for (std::size_t i = 0; i < 7; ++i) CHECK(mlp.layers[i].kind == LayerKind::DenseTanh);

  const auto rg = preliminary_network_spec(PreliminaryModel::RadialGeneral, 9, 3);
  CHECK(units_of(rg) == std::vector<std::size_t>{20, 60, 100, 150, 100, 60, 20, 3});
  CHECK(rg.layers[0].kind == LayerKind::RadialGaussian);

  const auto rbf = preliminary_network_spec(PreliminaryModel::RbfMlp, 9, 3);
  CHECK(units_of(rbf) == std::vector<std::size_t>{20, 20, 60, 100, 150, 100, 60, 20, 3});
  CHECK(std::count_if(rbf.layers.begin(), rbf.layers.end(), [](auto& l) { return l.kind == LayerKind::RadialGaussian; }) == 1);
  CHECK(rbf.layers[0].kind == LayerKind::RadialGaussian);

  for (const auto& s : {mlp, rg, rbf}) {
    CHECK_NOTHROW(s.validate());
    CHECK(s.layers.back().kind == LayerKind::DenseLinear);
  }
  CHECK(parse_preliminary_model("rbf_mlp") == PreliminaryModel::RbfMlp);
  CHECK(code_of([] { parse_preliminary_model("recurrent_generalized"); }) == ErrorCode::UnknownModel);
}

TEST_CASE("spec validation") {
  NetworkSpec s{2, {{LayerKind::DenseTanh, 3}, {LayerKind::RadialGaussian, 2}, {LayerKind::DenseLinear, 1}}, 1};
  CHECK(code_of([&] { s.validate(); }) == ErrorCode::DimensionMismatch);
  s.layers = {{LayerKind::DenseTanh, 3}};
  CHECK(code_of([&] { s.validate(); }) == ErrorCode::DimensionMismatch);
  s.layers = {{LayerKind::DenseTanh, 0}, {LayerKind::DenseLinear, 1}};
  CHECK(code_of([&] { s.validate(); }) == ErrorCode::DimensionMismatch);
  s.layers = {{LayerKind::DenseLinear, 2}};
  CHECK(code_of([&] { s.validate(); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("radial unit values") {
  NetworkSpec s{2, {{LayerKind::RadialGaussian, 1}, {LayerKind::DenseLinear, 1}}, 1};
  Network net(s);
  net.set_width(0, 0, 1.0);
  CHECK(net.width(0, 0) >= 1.0);
  CHECK(net.width(0, 0) - 1.0 < 1e-15);
  const auto at_center = net.forward_trace(std::vector<double>{0.0, 0.0});
  CHECK(at_center[0][0] == 1.0);
  const auto off = net.forward_trace(std::vector<double>{1.0, 0.0});
  CHECK(off[0][0] == doctest::Approx(0.6065306597).epsilon(1e-10));
  CHECK(off[0][0] == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));
}

TEST_CASE("zero tanh layer gives zeros") {
  NetworkSpec s{3, {{LayerKind::DenseTanh, 4}, {LayerKind::DenseLinear, 2}}, 2};
  const Network net(s);
  const auto t = net.forward_trace(std::vector<double>{0.3, -2, 7});
  CHECK(t.size() == 2);
  for (double v : t[0]) CHECK(v == 0.0);
  for (double v : t[1]) CHECK(v == 0.0);
}

TEST_CASE("forward matches a straight-line reference") {
  std::mt19937_64 gen(31);
  for (int trial = 0; trial < 200; ++trial) {
    Network net(random_small_spec(gen));
    qtest::randomize(net, gen);
    const auto x = qtest::random_vector(gen, net.input_width(), -1, 2);
    const auto got = net.forward(x);
    const auto want = qtest::reference_forward(net, x);
    REQUIRE(got.size() == want.size());
    for (std::size_t k = 0; k < got.size(); ++k) CHECK(std::abs(got[k] - want[k]) <= 1e-12 * (1 + std::abs(want[k])));
    CHECK(net.forward_trace(x).size() == net.spec().layers.size());
  }
}

TEST_CASE("forward checks dimensions and finiteness") {
  NetworkSpec s{2, {{LayerKind::DenseTanh, 2}, {LayerKind::DenseLinear, 1}}, 1};
  Network net(s);
  CHECK(code_of([&] { net.forward(std::vector<double>{1.0}); }) == ErrorCode::DimensionMismatch);
  net.parameters()[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK(code_of([&] { net.forward(std::vector<double>{1.0, 2.0}); }) == ErrorCode::NonFiniteParameter);
}

TEST_CASE("activation ranges over a randomized sweep") {
  std::mt19937_64 gen(4);
  NetworkSpec s{3, {{LayerKind::RadialGaussian, 6}, {LayerKind::DenseTanh, 5}, {LayerKind::DenseLinear, 2}}, 2};
  Network net(s);
  for (int i = 0; i < 10000; ++i) {
    if (i % 100 == 0) qtest::randomize(net, gen, 3.0);
    const auto x = qtest::random_vector(gen, 3, -5, 5);
    const auto t = net.forward_trace(x);
    for (double v : t[0]) {
      CHECK(v > 0.0);
      CHECK(v <= 1.0);
    }
    for (double v : t[1]) {
      CHECK(v > -1.0);
      CHECK(v < 1.0);
    }
  }
}

TEST_CASE("permuting radial units leaves the output unchanged") {
  std::mt19937_64 gen(12);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t in = 1 + gen() % 4, units = 2 + gen() % 8, out = 1 + gen() % 3;
    NetworkSpec s{in, {{LayerKind::RadialGaussian, units}, {LayerKind::DenseTanh, 4}, {LayerKind::DenseLinear, out}}, out};
    Network a(s);
    qtest::randomize(a, gen);
    std::vector<std::size_t> perm(units);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), gen);

    Network b = a;
    const auto& rb = a.blocks()[0];
    for (std::size_t j = 0; j < units; ++j) {
      for (std::size_t i = 0; i < in; ++i) b.center(0, j, i) = a.center(0, perm[j], i);
      b.parameters()[rb.vector_offset() + j] = a.parameters()[rb.vector_offset() + perm[j]];
      for (std::size_t u = 0; u < 4; ++u) b.weight(1, u, j) = a.weight(1, u, perm[j]);
    }
    for (int probe = 0; probe < 5; ++probe) {
      const auto x = qtest::random_vector(gen, in);
      const auto ya = a.forward(x), yb = b.forward(x);
      for (std::size_t k = 0; k < out; ++k) CHECK(std::abs(ya[k] - yb[k]) <= 1e-12);
    }
  }
}

TEST_CASE("build_network is deterministic and respects initialisation bounds") {
  const auto spec = preliminary_network_spec(PreliminaryModel::RbfMlp, 5, 3, {8, 6}, 7);
  std::vector<std::vector<double>> data;
  std::mt19937_64 gen(1);
  for (int i = 0; i < 30; ++i) data.push_back(qtest::random_vector(gen, 5));
  const auto a = build_network(spec, 42, data);
  CHECK(a == build_network(spec, 42, data));
  CHECK(!(a == build_network(spec, 43, data)));

  for (std::size_t l = 0; l < a.blocks().size(); ++l) {
    const auto& b = a.blocks()[l];
    if (b.kind == LayerKind::RadialGaussian) {
      // centers are rows of the data, picked without replacement
      std::set<std::size_t> used;
      for (std::size_t j = 0; j < b.units; ++j) {
        std::vector<double> c(b.fan_in);
        for (std::size_t i = 0; i < b.fan_in; ++i) c[i] = a.center(l, j, i);
        const auto it = std::find(data.begin(), data.end(), c);
        REQUIRE(it != data.end());
        used.insert(static_cast<std::size_t>(it - data.begin()));
      }
      CHECK(used.size() == b.units);
      continue;
    }
    const double limit = 1.0 / std::sqrt(static_cast<double>(b.fan_in));
    for (std::size_t u = 0; u < b.units; ++u) {
      CHECK(a.bias(l, u) == 0.0);
      for (std::size_t i = 0; i < b.fan_in; ++i) CHECK(std::abs(a.weight(l, u, i)) <= limit);
    }
  }
}

TEST_CASE("radial width is the mean nearest-center distance") {
  NetworkSpec s{1, {{LayerKind::RadialGaussian, 3}, {LayerKind::DenseLinear, 1}}, 1};
  // Centers 0, 1, 3 -> nearest distances 1, 1, 2 -> mean 4/3.
  const std::vector<std::vector<double>> data = {{0.0}, {1.0}, {3.0}};
  const auto net = build_network(s, 9, data);
  for (std::size_t j = 0; j < 3; ++j) CHECK(net.width(0, j) == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("duplicate centers engage the width floor") {
  NetworkSpec s{2, {{LayerKind::RadialGaussian, 4}, {LayerKind::DenseLinear, 1}}, 1};
  const std::vector<std::vector<double>> data(6, std::vector<double>{0.25, 0.75});
  const auto net = build_network(s, 5, data);
  for (std::size_t j = 0; j < 4; ++j) {
    CHECK(net.width(0, j) >= kMinRadialWidth);
    CHECK(net.width(0, j) < 2 * kMinRadialWidth);
  }
  // fewer rows than units: sampling with replacement still succeeds
  const auto small = build_network(s, 5, std::vector<std::vector<double>>{{0.0, 0.0}, {1.0, 1.0}});
  for (std::size_t j = 0; j < 4; ++j) CHECK(small.width(0, j) >= kMinRadialWidth);
  CHECK(code_of([&] { build_network(s, 5, std::vector<std::vector<double>>{{1.0}}); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("serialization round trip is bit-exact") {
  std::mt19937_64 gen(90);
  for (int trial = 0; trial < 30; ++trial) {
    Network net(random_small_spec(gen));
    qtest::randomize(net, gen, 1e3);
    net.parameters()[0] = std::nextafter(0.0, 1.0);  // denormal survives too
    std::stringstream buf;
    save_network(buf, net);
    const auto back = load_network(buf);
    CHECK(back.spec() == net.spec());
    REQUIRE(back.parameter_count() == net.parameter_count());
    for (std::size_t i = 0; i < net.parameter_count(); ++i) {
      CHECK(std::bit_cast<std::uint64_t>(back.parameters()[i]) == std::bit_cast<std::uint64_t>(net.parameters()[i]));
    }
  }
}

TEST_CASE("corrupt network files are rejected") {
  std::stringstream bad("not a model");
  CHECK(code_of([&] { load_network(bad); }) == ErrorCode::IOFailure);

  NetworkSpec s{2, {{LayerKind::DenseLinear, 1}}, 1};
  std::stringstream buf;
  save_network(buf, Network(s));
  auto bytes = buf.str();
  std::stringstream truncated(bytes.substr(0, bytes.size() - 4));
  CHECK(code_of([&] { load_network(truncated); }) == ErrorCode::IOFailure);
  bytes[8] = 9;  // format version
  std::stringstream versioned(bytes);
  CHECK(code_of([&] { load_network(versioned); }) == ErrorCode::IOFailure);
}

TEST_CASE("softplus helpers") {
  for (double y : {1e-6, 0.01, 0.5, 1.0, 3.0, 40.0}) CHECK(softplus(inverse_softplus(y)) == doctest::Approx(y).epsilon(1e-9));
  CHECK(softplus(-800.0) >= 0.0);
  CHECK(std::isfinite(softplus(800.0)));
}
