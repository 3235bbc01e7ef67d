#include "quakenet/error.hpp"
#include "quakenet/random.hpp"

namespace quakenet {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::MissingHeader: return "MissingHeader";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::EmptyField: return "EmptyField";
    case ErrorCode::InvalidRange: return "InvalidRange";
    case ErrorCode::UnknownZone: return "UnknownZone";
    case ErrorCode::EmptySampleSet: return "EmptySampleSet";
    case ErrorCode::DegenerateVariable: return "DegenerateVariable";
    case ErrorCode::CountMismatch: return "CountMismatch";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFiniteParameter: return "NonFiniteParameter";
    case ErrorCode::UnknownModel: return "UnknownModel";
    case ErrorCode::EmptySplit: return "EmptySplit";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::IOFailure: return "IOFailure";
    case ErrorCode::Config: return "Config";
    case ErrorCode::MissingArtifact: return "MissingArtifact";
  }
  return "Unknown";
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::string_view stage) {
  // FNV-1a over the stage label, mixed with the root seed.
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : stage) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return splitmix64(splitmix64(seed) ^ h);
}

}  // namespace quakenet
