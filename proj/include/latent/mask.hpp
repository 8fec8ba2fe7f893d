#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace latent {

/// Binary pixel mask m; its complement is m̄.
struct PixelMask {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> bits;

  PixelMask() = default;
  PixelMask(int h, int w, bool value = false)
      : height(h), width(w), bits(static_cast<std::size_t>(h) * w, value ? 1 : 0) {}

  bool test(std::size_t pixel) const noexcept { return bits[pixel] != 0; }
  std::size_t count() const noexcept {
    std::size_t n = 0;
    for (auto b : bits) n += b;
    return n;
  }
  PixelMask complement() const {
    PixelMask m = *this;
    for (auto& b : m.bits) b = b ? 0 : 1;
    return m;
  }
  friend bool operator==(const PixelMask&, const PixelMask&) = default;
};

/// Selection over landmark indices.
struct LandmarkMask {
  std::vector<std::uint8_t> bits;

  std::size_t count() const noexcept {
    std::size_t n = 0;
    for (auto b : bits) n += b;
    return n;
  }
  LandmarkMask complement() const {
    LandmarkMask m = *this;
    for (auto& b : m.bits) b = b ? 0 : 1;
    return m;
  }
  friend bool operator==(const LandmarkMask&, const LandmarkMask&) = default;
};

}  // namespace latent
