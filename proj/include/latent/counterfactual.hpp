#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "latent/analysis.hpp"
#include "latent/diffmap.hpp"
#include "latent/generator.hpp"
#include "latent/image.hpp"
#include "latent/subspace.hpp"

namespace latent {

struct CounterfactualConfig {
  double step_size = 0.05;
  std::size_t max_iters = 200;
  std::optional<double> target_logit;
  double plateau_tol = 1e-6;
  /// Largest allowed ‖Δu‖.
  std::optional<double> magnitude_cap;
  /// Minimize the logit instead.
  bool descend = false;

  friend bool operator==(const CounterfactualConfig&, const CounterfactualConfig&) = default;
};

enum class StopReason { target_reached, plateau, iter_budget, cap_reached, numeric_failure };
std::string_view to_string(StopReason reason);

struct TrajectoryPoint {
  std::size_t iteration = 0;
  double logit = 0.0;

  friend bool operator==(const TrajectoryPoint&, const TrajectoryPoint&) = default;
};

struct CounterfactualResult {
  Vector delta_u;
  /// Starts with (0, logit at u); one entry per accepted step.
  std::vector<TrajectoryPoint> trajectory;
  StopReason stop_reason = StopReason::iter_budget;
  Image before;
  Image after;
};

/// Projected gradient ascent Δu ← Δu + η·SSᵀ∇logit(u + Δu), kept in subspace
/// coordinates so Δu stays in span(S). A step that does not improve the
/// objective is halved up to six times before stopping as a plateau.
CounterfactualResult cf_optimize(const DiffMap& classifier_on_u, std::span<const double> u, const Subspace& s,
                                 const CounterfactualConfig& cfg = {});

/// cf_optimize on classifier∘g, with before/after renders filled in.
CounterfactualResult run_counterfactual(const ToyGenerator& gen, const AnalysisModels& models,
                                        std::string_view classifier, std::span<const double> u, const Subspace& s,
                                        const CounterfactualConfig& cfg = {});

/// Per-pixel mean-abs channel difference scaled so the largest is 1; gray.
Image difference_map(const Image& before, const Image& after);
/// Share of the map's total inside the mask; 0 for an all-zero map.
double mass_fraction(const Image& map, const PixelMask& mask);

std::string format_trajectory_csv(const std::vector<TrajectoryPoint>& trajectory);
std::vector<TrajectoryPoint> parse_trajectory_csv(std::string_view text);

}  // namespace latent
