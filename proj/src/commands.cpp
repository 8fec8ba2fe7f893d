#include "latent/commands.hpp"

#include <algorithm>
#include <cmath>

#include "latent/error.hpp"
#include "latent/eval.hpp"
#include "latent/text.hpp"

namespace latent {

namespace fs = std::filesystem;

Workspace::Workspace(const RunConfig& c)
    : config(c), generator(generator_params(c)), models(analysis_params(c)) {}

CriterionContext Workspace::criteria(LatentSpace space) const {
  return {&generator, &models, space, config.seed, config.frequency_factor};
}

SubspaceContext Workspace::subspace_context(LatentSpace space) const {
  return {criteria(space), training_codes(config, generator, space), config.method, config.alpha};
}

namespace {

fs::path output_dir(const RunConfig& c) {
  fs::path dir(c.out);
  fs::create_directories(dir);
  return dir;
}

std::string summary_line(std::string_view key, const std::string& value) {
  return std::string(key) + " = " + value + "\n";
}

Vector pick_code(const Workspace& ws, LatentSpace space) {
  const auto codes = test_codes(ws.config, ws.generator, space);
  if (ws.config.code_index >= codes.size())
    throw ConfigError("code_index " + std::to_string(ws.config.code_index) + " but only " +
                      std::to_string(codes.size()) + " test codes");
  return codes[ws.config.code_index];
}

void check_space(const Workspace& ws, const Subspace& s) {
  if (s.space.dim != ws.generator.dim(s.space.space))
    throw ConfigError("subspace dimension " + std::to_string(s.space.dim) + " does not match the " +
                      std::string(to_string(s.space.space)) + " space of this generator");
}

}  // namespace

Outputs cmd_discover(const RunConfig& config) {
  const Workspace ws(config);
  const FormulationPlan plan = resolve_plan(config.plan, config.epsilon);
  const SubspaceContext ctx = ws.subspace_context(config.space);
  StoredSubspace st{build_subspace(plan, ctx), config.seed, config.method, config.alpha, ctx.codes};
  const fs::path basis = output_dir(config) / "subspace.slmx";
  save_subspace(basis, st);
  return {basis, manifest_path(basis)};
}

Outputs cmd_manipulate(const RunConfig& config, const fs::path& basis) {
  const Workspace ws(config);
  const StoredSubspace st = load_subspace(basis);
  const Subspace& s = st.subspace;
  check_space(ws, s);
  if (config.component >= s.dim())
    throw DimensionError("component " + std::to_string(config.component) + " out of range; subspace has " +
                         std::to_string(s.dim()) + " columns");
  if (config.magnitudes.empty()) throw ConfigError("no magnitudes given");
  const Vector u = pick_code(ws, s.space.space);
  std::vector<Image> tiles;
  std::vector<std::string> labels = {"formulation " + s.formulation, "component " + std::to_string(config.component)};
  for (double m : config.magnitudes) {
    tiles.push_back(ws.generator.generate(s.space.space, perturb(u, s.basis, config.component, m)));
    labels.push_back("magnitude " + format_double(m));
  }
  const fs::path out = output_dir(config) / ("manipulate_c" + std::to_string(config.component) + ".ppm");
  emit_grid(tiles, 1, static_cast<int>(tiles.size()), labels, out);
  return {out};
}

Outputs cmd_counterfactual(const RunConfig& config, const fs::path& basis) {
  const Workspace ws(config);
  const StoredSubspace st = load_subspace(basis);
  check_space(ws, st.subspace);
  const auto names = AnalysisModels::classifier_names();
  if (std::find(names.begin(), names.end(), config.classifier) == names.end())
    throw ConfigError("unknown classifier '" + config.classifier + "'");
  const Vector u = pick_code(ws, st.subspace.space.space);
  const CounterfactualResult r = run_counterfactual(ws.generator, ws.models, config.classifier, u, st.subspace, config.cf);
  const fs::path dir = output_dir(config);
  Outputs out = {dir / "cf_before.ppm", dir / "cf_after.ppm", dir / "cf_difference.ppm", dir / "cf_trajectory.csv",
                 dir / "cf_summary.txt"};
  write_ppm(out[0], r.before);
  write_ppm(out[1], r.after);
  write_ppm(out[2], difference_map(r.before, r.after));
  write_text(out[3], format_trajectory_csv(r.trajectory));
  std::string summary;
  summary += summary_line("classifier", config.classifier);
  summary += summary_line("formulation", st.subspace.formulation);
  summary += summary_line("stop_reason", std::string(to_string(r.stop_reason)));
  summary += summary_line("steps", std::to_string(r.trajectory.size() - 1));
  summary += summary_line("logit_before", format_double(r.trajectory.front().logit));
  summary += summary_line("logit_after", format_double(r.trajectory.back().logit));
  summary += summary_line("delta_norm", format_double(norm(r.delta_u)));
  write_text(out[4], summary);
  return out;
}

Outputs cmd_compare_spaces(const RunConfig& config) {
  const Workspace ws(config);
  const FormulationPlan plan = resolve_plan(config.plan, config.epsilon);
  const fs::path dir = output_dir(config);
  Outputs out;
  for (LatentSpace space : {LatentSpace::input, LatentSpace::style}) {
    const AttenuationCurve curve = attenuation_curve(plan, ws.subspace_context(space));
    out.push_back(dir / ("attenuation_" + std::string(to_string(space)) + ".csv"));
    write_text(out.back(), format_attenuation_csv(curve));
  }
  return out;
}

Outputs cmd_evaluate(const RunConfig& config, const std::vector<fs::path>& bases) {
  if (bases.empty()) throw ConfigError("evaluate needs at least one subspace file");
  if (config.magnitudes.empty()) throw ConfigError("no magnitudes given");
  const Workspace ws(config);
  std::vector<ManipulationMetrics> rows;
  for (const auto& b : bases) {
    const StoredSubspace st = load_subspace(b);
    check_space(ws, st.subspace);
    const auto codes = test_codes(config, ws.generator, st.subspace.space.space);
    for (double m : config.magnitudes)
      rows.push_back(manipulation_metrics(st.subspace, config.top_k, m, codes, ws.generator, ws.models, config.region));
  }
  const fs::path out = output_dir(config) / "metrics.csv";
  write_text(out, format_metrics_csv(rows));
  return {out};
}

Outputs cmd_split_gram(const fs::path& gram, double epsilon, const fs::path& out_dir) {
  const Matrix g = read_matrix(gram);
  if (g.rows() != g.cols()) throw DimensionError("Gram matrix must be square");
  double scale = 0.0;
  for (std::size_t i = 0; i < g.rows(); ++i)
    for (std::size_t j = 0; j < g.cols(); ++j) scale = std::max(scale, std::abs(g(i, j)));
  const double tol = 1e-9 * (1.0 + scale);
  if (asymmetry(g) > tol) throw DimensionError("Gram matrix is not symmetric");
  const EigenSplit split = eigen_split(g, epsilon);
  fs::create_directories(out_dir);
  Outputs out = {out_dir / "split_V.slmx", out_dir / "split_W.slmx", out_dir / "split_values.csv"};
  write_matrix(out[0], split.V);
  write_matrix(out[1], split.W);
  std::string csv = "index,lambda,role\n";
  for (std::size_t k = 0; k < split.values.size(); ++k)
    csv += std::to_string(k) + "," + format_double(split.values[k]) + "," +
           (k < split.V.cols() ? "activate" : "suppress") + "\n";
  write_text(out[2], csv);
  return out;
}

int exit_code(const std::exception& e) {
  if (dynamic_cast<const EmptyIntersectionError*>(&e)) return 4;
  if (dynamic_cast<const NumericError*>(&e)) return 3;
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ParseError*>(&e) ||
      dynamic_cast<const FormatError*>(&e) || dynamic_cast<const DimensionError*>(&e))
    return 2;
  return 1;
}

}  // namespace latent
