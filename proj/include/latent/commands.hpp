#pragma once

#include <exception>
#include <filesystem>
#include <vector>

#include "latent/config.hpp"

namespace latent {

/// Generator and analysis models built from one config.
struct Workspace {
  explicit Workspace(const RunConfig& config);

  CriterionContext criteria(LatentSpace space) const;
  SubspaceContext subspace_context(LatentSpace space) const;

  RunConfig config;
  ToyGenerator generator;
  AnalysisModels models;
};

using Outputs = std::vector<std::filesystem::path>;

/// subspace.slmx and subspace.manifest.
Outputs cmd_discover(const RunConfig& config);
/// manipulate_c<k>.ppm: one tile per magnitude for test code code_index.
Outputs cmd_manipulate(const RunConfig& config, const std::filesystem::path& basis);
/// cf_before.ppm, cf_after.ppm, cf_difference.ppm, cf_trajectory.csv, cf_summary.txt.
Outputs cmd_counterfactual(const RunConfig& config, const std::filesystem::path& basis);
/// attenuation_input.csv and attenuation_style.csv.
Outputs cmd_compare_spaces(const RunConfig& config);
/// metrics.csv: one row per subspace and magnitude.
Outputs cmd_evaluate(const RunConfig& config, const std::vector<std::filesystem::path>& bases);
/// split_V.slmx, split_W.slmx and split_values.csv for an external Gram.
Outputs cmd_split_gram(const std::filesystem::path& gram, double epsilon, const std::filesystem::path& out_dir);

/// 2 for config, parse and format errors, 3 for numeric failures, 4 for
/// an empty intersection, 1 otherwise.
int exit_code(const std::exception& e);

}  // namespace latent
