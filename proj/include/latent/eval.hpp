#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "latent/analysis.hpp"
#include "latent/generator.hpp"
#include "latent/image.hpp"
#include "latent/subspace.hpp"

namespace latent {

struct AttenuationCurve {
  std::string space;
  /// Activation of component k over λ₀ of the suppress Gram.
  Vector ratios;
  Vector log10_ratios;
};

/// Curve of an already built subspace; uses the λ₀ of its single suppress
/// stage. Throws ConfigError when the provenance has other than one.
AttenuationCurve attenuation_curve(const Subspace& s);
/// Builds the subspace for `plan` in ctx.criteria.space first.
AttenuationCurve attenuation_curve(const FormulationPlan& plan, const SubspaceContext& ctx);

struct ManipulationMetrics {
  std::string plan;
  double magnitude = 0.0;
  std::size_t top_k = 0;
  double inside = 0.0;
  double outside = 0.0;
  double identity = 1.0;
  std::size_t n = 0;

  friend bool operator==(const ManipulationMetrics&, const ManipulationMetrics&) = default;
};

/// Mean over codes × the first top_k components of u + magnitude·S[:, k]:
/// mean-abs channel change inside the region mask of g(u), the same over
/// its complement, and the embedding cosine similarity.
ManipulationMetrics manipulation_metrics(const Subspace& s, std::size_t top_k, double magnitude,
                                         const std::vector<Vector>& codes, const ToyGenerator& gen,
                                         const AnalysisModels& models, std::string_view region = "mouth");

/// Tiles in row-major order separated and framed by 2-px white lines.
/// Tiles must share a size; unused cells stay white.
Image grid_image(const std::vector<Image>& images, int rows, int cols);
/// Labels are stored as PPM comments.
void emit_grid(const std::vector<Image>& images, int rows, int cols, const std::vector<std::string>& labels,
               const std::filesystem::path& path);
inline constexpr int kGridSeparator = 2;

std::string format_attenuation_csv(const AttenuationCurve& curve);
AttenuationCurve parse_attenuation_csv(std::string_view text);
std::string format_metrics_csv(const std::vector<ManipulationMetrics>& rows);
std::vector<ManipulationMetrics> parse_metrics_csv(std::string_view text);

void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

}  // namespace latent
