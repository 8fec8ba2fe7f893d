#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "latent/analysis.hpp"
#include "latent/diffmap.hpp"
#include "latent/generator.hpp"
#include "latent/mask.hpp"

namespace latent {

/// x ↦ x ⊙ m over the flattened image.
DiffMap masked_photometry(const DiffMap& image_map, const PixelMask& mask);

/// Selected landmark coordinates of detector(image_map(u)), stacked (x, y).
/// Throws ConfigError for an empty selection.
DiffMap landmark_criterion(const DiffMap& image_map, const DiffMap& detector, const LandmarkMask& selection);

struct DelaunayMesh {
  std::vector<std::array<std::size_t, 3>> facets;
  std::size_t landmark_count = 0;
};

/// Bowyer–Watson triangulation of (x, y) pairs. Facets are counter-clockwise;
/// facets with area ≤ 1e-6 are dropped. Throws NumericError when the points
/// are collinear or fewer than three.
DelaunayMesh triangulate(std::span<const double> points);

struct BarySample {
  std::size_t facet = 0;
  std::array<double, 3> c{};
};
using BarySampleSet = std::vector<BarySample>;

/// [q_v0 q_v1 q_v2]·c. Throws DimensionError for a bad facet index.
std::array<double, 2> bary_point(std::span<const double> landmarks, const DelaunayMesh& mesh, std::size_t facet,
                                 const std::array<double, 3>& c);

double facet_area(std::span<const double> landmarks, const DelaunayMesh& mesh, std::size_t facet);

/// ⌈area/2⌉ points per facet from an R2 low-discrepancy sequence folded onto
/// the simplex, with a per-facet seeded offset.
BarySampleSet bary_samples(const DelaunayMesh& mesh, std::span<const double> landmarks, std::uint64_t seed);

/// Keeps samples whose reference position rounds to a pixel inside the mask.
BarySampleSet filter_samples(const BarySampleSet& samples, const DelaunayMesh& mesh,
                             std::span<const double> landmarks, const PixelMask& mask);

/// Bilinear sample of channel values at (x, y); coordinates are clamped to
/// [0.5, dim − 1.5].
std::array<double, 3> bilinear_sample(std::span<const double> image, int height, int width, double x, double y);

/// Image values at the deformed sample positions Delaunay(detector(x), i, c).
/// Both the positions and the sampled values are differentiated.
DiffMap aligned_photometry_image(const DiffMap& detector, const DelaunayMesh& mesh, const BarySampleSet& samples,
                                 int height, int width);
DiffMap aligned_photometry(const DiffMap& image_map, const DiffMap& detector, const DelaunayMesh& mesh,
                           const BarySampleSet& samples, int height, int width);

DiffMap identity_criterion(const DiffMap& image_map, const DiffMap& embedder);

/// Per-channel mean over masked pixels. Throws ConfigError for an empty mask.
DiffMap masked_avg_color(const DiffMap& image_map, const PixelMask& mask);
/// Masked pixel values minus their masked mean, stacked.
DiffMap masked_residual(const DiffMap& image_map, const PixelMask& mask);

/// Box down-sampling by `factor` then half-pixel bilinear up-sampling with
/// clamped edges. Output values are rounded onto the 2⁻⁵² grid.
Vector low_pass(std::span<const double> image, int height, int width, int factor);
/// Adjoint of the linear part of low_pass.
Vector low_pass_adjoint(std::span<const double> cotangent, int height, int width, int factor);

struct FrequencySplit {
  DiffMap low;
  DiffMap high;
};
/// h_low = f_low ∘ g and h_high = g − h_low. For images on the 2⁻⁵² grid
/// the sum h_low + h_high equals g bitwise. Throws ConfigError when factor
/// does not divide the image size.
FrequencySplit frequency_split(const DiffMap& image_map, int height, int width, int factor = 4);

// ---------------------------------------------------------------------------
// Named criteria, as used by formulation plans.

enum class CriterionKind { mp, fl, ap, id, mac, res, low, high };
std::string_view to_string(CriterionKind kind);
std::optional<CriterionKind> parse_criterion_kind(std::string_view name);
/// Whether the criterion takes a [region] argument.
bool takes_region(CriterionKind kind);

struct CriterionRef {
  CriterionKind kind = CriterionKind::mp;
  std::string region;
  bool complement = false;

  /// e.g. "mp[~mouth]" or "id".
  std::string label() const;
  friend bool operator==(const CriterionRef&, const CriterionRef&) = default;
};

struct CriterionContext {
  const ToyGenerator* generator = nullptr;
  const AnalysisModels* models = nullptr;
  LatentSpace space = LatentSpace::style;
  std::uint64_t sample_seed = 0;
  int frequency_factor = 4;
};

/// Masks and landmarks computed once from g(u_ref) and then held fixed.
struct ReferenceFrame {
  Image image;
  ParseResult parse;
  Vector landmarks;
};
ReferenceFrame reference_frame(const CriterionContext& ctx, std::span<const double> u_ref);

PixelMask region_mask(const ReferenceFrame& ref, const CriterionRef& crit);

/// Builds h for `crit`, freezing masks, mesh and samples at u_ref.
DiffMap build_criterion(const CriterionRef& crit, const CriterionContext& ctx, std::span<const double> u_ref);
DiffMap build_criterion(const CriterionRef& crit, const CriterionContext& ctx, const ReferenceFrame& ref);

}  // namespace latent
