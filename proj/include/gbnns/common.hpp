#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace gbnns {

using NodeId = std::uint32_t;

enum class ErrorCode {
  InvalidArgument,
  MalformedHeader,
  InconsistentDimensions,
  TruncatedFile,
  IoFailure,
  NotUnitNorm,
  AngleOutOfRange,
  RegimeMismatch,
  DegenerateDistance,
  IndexMismatch,
  DimensionMismatch,
  DatasetMismatch,
};

std::string_view to_string(ErrorCode code);

/// Every failure the library reports. `code()` distinguishes the cases callers
/// are expected to branch on (e.g. a truncated vector file vs. a bad header).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// splitmix64 finalizer; used to derive independent per-node / per-query seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  return mix_seed(seed ^ mix_seed(stream));
}

// FNV-1a, 64 bit. Stable across platforms and runs.
constexpr std::uint64_t stable_hash(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace gbnns
