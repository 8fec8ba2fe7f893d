#pragma once

#include <cstdint>
#include <string_view>

#include "latent/matrix.hpp"

namespace latent {

/// Counter-based generator: draw i of stream (seed, name) is a pure function
/// of its arguments, so streams can be split by name without shared state.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::string_view stream);

  /// Child stream keyed by this stream's key and a sub-name.
  CounterRng split(std::string_view name) const;

  std::uint64_t next_u64();
  /// Uniform in [0, 1).
  double uniform();
  double normal();
  Vector normal_vector(std::size_t n, double scale = 1.0);

  std::uint64_t key() const noexcept { return key_; }

 private:
  explicit CounterRng(std::uint64_t key) : key_(key) {}
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace latent
