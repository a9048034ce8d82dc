#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace kinprim {

// SplitMix64 finalizer; used to decorrelate derived seeds.
std::uint64_t mix64(std::uint64_t x);

// Derives a per-stage seed from the root seed and a stage tag.
std::uint64_t derive_seed(std::uint64_t root, std::string_view tag);
std::uint64_t derive_seed(std::uint64_t root, std::string_view tag, std::uint64_t index);

// Incremental FNV-1a 64-bit hash for artifact fingerprints.
class Fingerprint {
public:
  Fingerprint& add(std::string_view s);
  Fingerprint& add(std::uint64_t v);
  Fingerprint& add(double v);
  Fingerprint& add(std::span<const double> values);

  std::uint64_t value() const { return state_; }
  std::string hex() const;

private:
  void bytes(const void* data, std::size_t n);
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

}  // namespace kinprim
