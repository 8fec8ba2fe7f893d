#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "latent/matrix.hpp"

namespace latent {

/// RGB image, values stored interleaved as ((row * width) + col) * 3 + channel.
/// Values are unclamped reals; clamping happens only when emitting bytes.
struct Image {
  int height = 0;
  int width = 0;
  Vector values;

  Image() = default;
  Image(int h, int w, double fill = 0.0) : height(h), width(w), values(static_cast<std::size_t>(h) * w * 3, fill) {}
  Image(int h, int w, Vector v);

  std::size_t index(int row, int col, int channel) const noexcept {
    return (static_cast<std::size_t>(row) * width + col) * 3 + channel;
  }
  double& at(int row, int col, int channel) noexcept { return values[index(row, col, channel)]; }
  double at(int row, int col, int channel) const noexcept { return values[index(row, col, channel)]; }
  std::size_t pixel_count() const noexcept { return static_cast<std::size_t>(height) * width; }

  friend bool operator==(const Image&, const Image&) = default;
};

/// Binary P6 bytes, 8-bit, round(255·clamp(v, 0, 1)); optional comment lines.
std::vector<unsigned char> encode_ppm(const Image& image, const std::vector<std::string>& comments = {});
Image decode_ppm(const std::vector<unsigned char>& bytes);
void write_ppm(const std::filesystem::path& path, const Image& image, const std::vector<std::string>& comments = {});
Image read_ppm(const std::filesystem::path& path);

}  // namespace latent
