#include <kinprim/seed.hpp>

#include <bit>
#include <cstring>
#include <iomanip>
#include <sstream>

namespace kinprim {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t root, std::string_view tag) {
  return mix64(root ^ Fingerprint{}.add(tag).value());
}

std::uint64_t derive_seed(std::uint64_t root, std::string_view tag, std::uint64_t index) {
  return mix64(derive_seed(root, tag) + mix64(index));
}

void Fingerprint::bytes(const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    state_ ^= p[i];
    state_ *= 0x100000001b3ULL;
  }
}

Fingerprint& Fingerprint::add(std::string_view s) {
  const std::uint64_t n = s.size();
  bytes(&n, sizeof n);
  bytes(s.data(), s.size());
  return *this;
}

Fingerprint& Fingerprint::add(std::uint64_t v) {
  bytes(&v, sizeof v);
  return *this;
}

Fingerprint& Fingerprint::add(double v) {
  // +0 and -0 hash the same.
  if (v == 0.0) v = 0.0;
  return add(std::bit_cast<std::uint64_t>(v));
}

Fingerprint& Fingerprint::add(std::span<const double> values) {
  add(static_cast<std::uint64_t>(values.size()));
  for (double v : values) add(v);
  return *this;
}

std::string Fingerprint::hex() const {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << state_;
  return os.str();
}

}  // namespace kinprim
