#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "latent/diffmap.hpp"
#include "latent/image.hpp"

namespace latent {

/// The generator's two parameterizations: a compact entangled input space
/// and the richer, locally wired style space the mapper feeds.
enum class LatentSpace { input, style };

std::string_view to_string(LatentSpace space);
LatentSpace parse_space(std::string_view name);

struct LatentSpaceSpec {
  LatentSpace space = LatentSpace::style;
  std::size_t dim = 60;
};

struct LatentCode {
  LatentSpaceSpec spec;
  Vector u;
};

struct GeneratorParams {
  std::uint64_t seed = 0;
  std::size_t input_dim = 24;
  int image_size = 64;
  double beta = 8.0;
};

/// Blob layers in draw-priority order (later layers sit on top).
enum class Blob : std::size_t { hair, skin, left_eye, right_eye, nose, lips, inner_mouth };
inline constexpr std::size_t kBlobCount = 7;
inline constexpr std::size_t kStyleDim = 60;
/// Per blob: center x/y, log semi-axes, rotation, color logits r/g/b.
inline constexpr std::size_t kParamsPerBlob = 8;
inline constexpr std::size_t kRenderParamCount = kBlobCount * kParamsPerBlob + 3;

std::string_view to_string(Blob blob);

/// Indices of the style coordinates with a fixed meaning.
namespace style_index {
inline constexpr std::size_t translate_x = 0;
inline constexpr std::size_t translate_y = 1;
inline constexpr std::size_t brightness = 2;
inline constexpr std::size_t face_scale = 3;
inline constexpr std::size_t eye_spacing = 4;
inline constexpr std::size_t mouth_open = 5;
/// First of seven per-blob entries: cx, cy, log ax, log ay, logit r, g, b.
constexpr std::size_t blob_base(Blob b) { return 6 + 7 * static_cast<std::size_t>(b); }
inline constexpr std::size_t skin_rotation = 55;
inline constexpr std::size_t mouth_rotation = 56;
inline constexpr std::size_t background = 57;
}  // namespace style_index

/// Reference colors of the template regions, shared with the analysis
/// models' prototypes.
struct Palette {
  std::array<std::array<double, 3>, kBlobCount> blob;
  std::array<double, 3> background;
};
const Palette& template_palette();

/// Procedural face renderer: soft ellipses σ(β(1 − q)) composited by
/// priority-weighted normalization against a background color.
///
/// Rendered values live on the 2⁻⁵² grid so that image differences and sums
/// used by the frequency split are exact. The rounding is treated as the
/// identity when differentiating.
class ToyGenerator {
 public:
  explicit ToyGenerator(GeneratorParams params = {});

  const GeneratorParams& params() const noexcept { return params_; }
  int height() const noexcept { return params_.image_size; }
  int width() const noexcept { return params_.image_size; }
  std::size_t image_dim() const noexcept { return static_cast<std::size_t>(height()) * width() * 3; }
  std::size_t dim(LatentSpace space) const noexcept {
    return space == LatentSpace::input ? params_.input_dim : kStyleDim;
  }
  LatentSpaceSpec spec(LatentSpace space) const { return {space, dim(space)}; }

  /// Input code → style code: B₂·tanh(B₁·z).
  Vector map_to_style(std::span<const double> z) const;
  /// Renderer parameters θ₀ + A·s.
  Vector render_params(std::span<const double> style) const;

  Image render(std::span<const double> style) const;
  Image generate(const LatentCode& code) const;
  Image generate(LatentSpace space, std::span<const double> code) const;

  DiffMap mapper_map() const;
  DiffMap renderer_map() const;
  /// Code in `space` → flattened image.
  DiffMap image_map(LatentSpace space) const;

  const Matrix& style_to_params() const noexcept { return style_to_params_; }

 private:
  GeneratorParams params_;
  Vector base_params_;
  Matrix style_to_params_;
  Matrix mapper_in_;
  Matrix mapper_out_;
  std::array<double, kBlobCount> priority_{};
};

/// `count` codes in `space` drawn from stream (seed, stream). Input codes are
/// N(0, 1); style codes are the mapped images of N(0, 1) input codes.
std::vector<Vector> sample_codes(const ToyGenerator& gen, LatentSpace space, std::uint64_t seed,
                                 std::string_view stream, std::size_t count);

/// x ↦ (x + 1) − 1: rounds values in [0, 1] onto the 2⁻⁵² grid.
inline double snap_to_grid(double v) {
  volatile double shifted = v + 1.0;
  return shifted - 1.0;
}

}  // namespace latent
