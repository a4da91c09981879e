#include "acdc/core/random.hpp"

#include <cmath>
#include <numbers>

namespace acdc {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace

std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

RandomStream::RandomStream(std::uint64_t seed) : seed_(seed), key_(mix64(seed + kGolden)) {}

RandomStream RandomStream::substream(std::uint64_t id) const {
  return RandomStream(seed_, mix64(key_ ^ mix64(id + 0x632BE59BD9B4E019ull)));
}

RandomStream RandomStream::substream(std::string_view label) const {
  return substream(fnv1a(label));
}

std::uint64_t RandomStream::next_u64() {
  ++position_;
  return mix64(key_ + position_ * kGolden);
}

double RandomStream::uniform() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::normal() {
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Signal RandomStream::normal_vector(Index n) {
  Signal out(n);
  for (Index i = 0; i < n; ++i) out[i] = normal();
  return out;
}

std::uint64_t RandomStream::below(std::uint64_t n) {
  // Lemire's multiply-shift; the bias is below 2^-64 * n and irrelevant here.
  __extension__ using u128 = unsigned __int128;
  return static_cast<std::uint64_t>((static_cast<u128>(next_u64()) * n) >> 64);
}

}  // namespace acdc
