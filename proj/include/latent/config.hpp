#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "latent/analysis.hpp"
#include "latent/counterfactual.hpp"
#include "latent/generator.hpp"
#include "latent/subspace.hpp"

namespace latent {

/// Everything a command needs. Randomness comes from `seed` alone: the
/// generator, the analysis models, sample placement and code sampling use
/// named streams of it.
struct RunConfig {
  std::uint64_t seed = 0;
  LatentSpace space = LatentSpace::style;
  std::size_t input_dim = 24;
  int image_size = 64;
  double beta = 8.0;
  double tau = 0.05;
  /// Library name or plan text.
  std::string plan = "mouth_photometry";
  double epsilon = kDefaultEpsilon;
  GramMethod method = GramMethod::automatic;
  double alpha = kDefaultAlpha;
  int frequency_factor = 4;
  /// Sampled from stream "train" unless explicit codes are given.
  std::size_t train_codes = 1;
  std::vector<Vector> train_code_values;
  /// Sampled from stream "test".
  std::size_t test_codes = 64;
  /// Test code used by manipulate and counterfactual.
  std::size_t code_index = 0;
  std::string region = "mouth";
  std::size_t top_k = 4;
  std::vector<double> magnitudes = {-10.0, -5.0, 0.0, 5.0, 10.0};
  std::size_t component = 0;
  std::string classifier = "lip_redness";
  CounterfactualConfig cf;
  std::string out = "out";

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// `key = value` lines; blank lines and lines starting with '#' are
/// skipped. Unknown keys and bad values raise ParseError with the line.
RunConfig parse_config(std::string_view text);
/// Every key in a fixed order; parse_config(emit_config(c)) == c.
std::string emit_config(const RunConfig& config);
RunConfig load_config(const std::filesystem::path& path);

std::vector<double> parse_number_list(std::string_view text);
std::string format_number_list(std::span<const double> values);

GeneratorParams generator_params(const RunConfig& config);
AnalysisParams analysis_params(const RunConfig& config);
std::vector<Vector> training_codes(const RunConfig& config, const ToyGenerator& gen, LatentSpace space);
std::vector<Vector> test_codes(const RunConfig& config, const ToyGenerator& gen, LatentSpace space);

/// Basis in SLMX plus a text manifest next to it (same stem, .manifest).
struct StoredSubspace {
  Subspace subspace;
  std::uint64_t seed = 0;
  GramMethod method = GramMethod::automatic;
  double alpha = kDefaultAlpha;
  std::vector<Vector> training_codes;
};
std::string format_manifest(const StoredSubspace& stored);
StoredSubspace parse_manifest(std::string_view text);
std::filesystem::path manifest_path(const std::filesystem::path& basis_path);
void save_subspace(const std::filesystem::path& basis_path, const StoredSubspace& stored);
/// Throws FormatError when the basis and manifest disagree.
StoredSubspace load_subspace(const std::filesystem::path& basis_path);

}  // namespace latent
