#pragma once

// Shared fixtures and independent reference implementations for the tests.
// The reference code here deliberately avoids the library's own helpers so
// it can act as an oracle.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include "quakenet/catalog.hpp"
#include "quakenet/error.hpp"
#include "quakenet/features.hpp"
#include "quakenet/network.hpp"

namespace qtest {

inline quakenet::Date ymd(int y, unsigned m, unsigned d) {
  return quakenet::Date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
}

inline quakenet::CatalogRecord record(quakenet::Date date, double mag, std::string zone = "GUERRERO", int hour = 0,
                                      int minute = 0) {
  quakenet::CatalogRecord r;
  r.date = date;
  r.hour = hour;
  r.minute = minute;
  r.latitude = 16.0;
  r.longitude = -98.0;
  r.depth_km = 10.0;
  r.magnitude = mag;
  r.zone = std::move(zone);
  return r;
}

/// Straight-line evaluation of a network from its documented parameter
/// layout: Gaussian exp(-d^2 / (2 sigma^2)), tanh(Wx + b), Wx + b.
inline std::vector<double> reference_forward(const quakenet::Network& net, const std::vector<double>& input) {
  using quakenet::LayerKind;
  std::vector<double> x = input;
  const auto& layers = net.spec().layers;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    std::vector<double> y(layers[l].units);
    for (std::size_t u = 0; u < layers[l].units; ++u) {
      if (layers[l].kind == LayerKind::RadialGaussian) {
        double d2 = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
          const double diff = x[i] - net.center(l, u, i);
          d2 += diff * diff;
        }
        const double s = net.width(l, u);
        y[u] = std::exp(-d2 / (2.0 * s * s));
      } else {
        double z = net.bias(l, u);
        for (std::size_t i = 0; i < x.size(); ++i) z += net.weight(l, u, i) * x[i];
        y[u] = layers[l].kind == LayerKind::DenseTanh ? std::tanh(z) : z;
      }
    }
    x = std::move(y);
  }
  return x;
}

/// Fills every parameter with a random finite value; radial raw widths are
/// kept moderate so sigma stays in a numerically friendly band.
inline void randomize(quakenet::Network& net, std::mt19937_64& gen, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  for (double& p : net.parameters()) p = u(gen);
  for (const auto& b : net.blocks()) {
    if (b.kind != quakenet::LayerKind::RadialGaussian) continue;
    for (std::size_t j = 0; j < b.units; ++j) net.parameters()[b.vector_offset() + j] = 0.5 + std::abs(u(gen));
  }
}

inline std::vector<double> random_vector(std::mt19937_64& gen, std::size_t n, double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = u(gen);
  return v;
}

/// Error code thrown by `fn`, or nullopt when it returns normally.
inline std::optional<quakenet::ErrorCode> code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const quakenet::Error& e) {
    return e.code();
  }
  return std::nullopt;
}

/// Fresh, empty scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("quakenet_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace qtest
