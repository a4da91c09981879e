#pragma once

#include "acdc/core/signal.hpp"

#include <cstdint>
#include <string_view>

namespace acdc {

/// Counter-based random stream.
///
/// Every draw is a pure function of (key, position): the k-th 64-bit word is
/// splitmix64(key + (k + 1) * golden). Substreams derive a new key from the
/// parent key and a label, so AC noise, DC noise and operator draws never
/// share words no matter how many draws each consumes.
class RandomStream {
public:
  explicit RandomStream(std::uint64_t seed = 0);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t position() const noexcept { return position_; }

  /// Rewind or fast-forward. The next draw depends only on (key, position).
  void seek(std::uint64_t position) noexcept { position_ = position; }

  /// Independent child stream; does not advance the parent.
  RandomStream substream(std::uint64_t id) const;
  RandomStream substream(std::string_view label) const;

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1).
  double uniform();
  /// Standard normal via Box-Muller; consumes two words, caches nothing.
  double normal();
  Signal normal_vector(Index n);
  /// Integer in [0, n).
  std::uint64_t below(std::uint64_t n);

private:
  RandomStream(std::uint64_t seed, std::uint64_t key) : seed_(seed), key_(key) {}

  std::uint64_t seed_;
  std::uint64_t key_;
  std::uint64_t position_ = 0;
};

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t z) noexcept;

}  // namespace acdc
