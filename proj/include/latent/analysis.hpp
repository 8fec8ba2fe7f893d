#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "latent/diffmap.hpp"
#include "latent/generator.hpp"
#include "latent/image.hpp"
#include "latent/mask.hpp"

namespace latent {

/// Parser labels.
enum class Label : std::uint8_t { skin, left_eye, right_eye, nose, inner_mouth, lip, hair, background };
inline constexpr std::size_t kLabelCount = 8;
std::string_view to_string(Label label);

/// Named pixel regions accepted by formulations: the eight labels plus the
/// composites eye, mouth (inner mouth and lips), face (all but hair and
/// background) and all.
std::vector<std::string> pixel_region_names();

struct ParseResult {
  int height = 0;
  int width = 0;
  std::vector<Label> labels;

  /// Throws ConfigError for an unknown region name.
  PixelMask mask(std::string_view region) const;
};

/// Landmark layout: five regions, five points each (soft centroid, then the
/// major-axis endpoints ±, then the minor-axis endpoints ±), stored as
/// (x, y) pairs.
enum class LandmarkRegion : std::size_t { face, left_eye, right_eye, nose, mouth };
inline constexpr std::size_t kLandmarkRegions = 5;
inline constexpr std::size_t kPointsPerRegion = 5;
inline constexpr std::size_t kLandmarkCount = kLandmarkRegions * kPointsPerRegion;
std::string_view to_string(LandmarkRegion region);

/// Landmark groups: face, left_eye, right_eye, eye, nose, mouth, all.
LandmarkMask landmark_group(std::string_view name);
std::vector<std::string> landmark_group_names();

struct AnalysisParams {
  std::uint64_t seed = 0;
  int image_size = 64;
  /// Soft-assignment temperature on squared color distances.
  double tau = 0.05;
};

inline constexpr std::size_t kIdentityDim = 16;

/// Differentiable stand-ins for a face parser, a landmark detector, an
/// identity feature extractor and attribute classifiers.
class AnalysisModels {
 public:
  explicit AnalysisModels(AnalysisParams params = {});

  const AnalysisParams& params() const noexcept { return params_; }
  std::size_t image_dim() const noexcept {
    return static_cast<std::size_t>(params_.image_size) * params_.image_size * 3;
  }

  /// Hard per-pixel labels (argmax of color/position scores). Not differentiable.
  ParseResult parse(const Image& image) const;

  /// Image → ℝ^{2L}. Throws DegenerateLandmarkError when a region's soft
  /// weight vanishes.
  DiffMap landmark_detector() const;
  /// Image → unit vector in ℝ¹⁶. Throws NumericError when the centered pooled
  /// features vanish.
  DiffMap identity_embedder() const;
  /// Scalar logit; names from classifier_names(). Throws ConfigError otherwise.
  DiffMap classifier(std::string_view name) const;
  static std::vector<std::string> classifier_names();

  /// Pixel window [row0, row1) × [col0, col1) read by the lip_redness classifier.
  std::array<int, 4> lip_window() const;
  static constexpr double kLipRednessScale = 20.0;

 private:
  AnalysisParams params_;
  Matrix identity_projection_;
};

}  // namespace latent
