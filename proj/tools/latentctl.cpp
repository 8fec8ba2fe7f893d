#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "latent/commands.hpp"
#include "latent/error.hpp"
#include "latent/eval.hpp"
#include "latent/text.hpp"

namespace {

struct Overrides {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string space;
  std::string plan;
  std::optional<std::size_t> component;
  std::string magnitude;
  std::string classifier;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "Run configuration (key = value lines)");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--seed", o.seed, "Override the config seed");
  cmd->add_option("--space", o.space, "Latent space: input or style");
  cmd->add_option("--plan", o.plan, "Formulation name, plan text, or @file");
}

latent::RunConfig resolve(const Overrides& o) {
  latent::RunConfig c = o.config.empty() ? latent::RunConfig{} : latent::load_config(o.config);
  if (!o.out.empty()) c.out = o.out;
  if (o.seed) c.seed = *o.seed;
  if (!o.space.empty()) c.space = latent::parse_space(o.space);
  if (!o.plan.empty()) c.plan = o.plan.front() == '@' ? latent::read_text(o.plan.substr(1)) : o.plan;
  if (o.component) c.component = *o.component;
  if (!o.magnitude.empty()) c.magnitudes = latent::parse_number_list(o.magnitude);
  if (!o.classifier.empty()) c.classifier = o.classifier;
  return c;
}

void report(const latent::Outputs& outputs) {
  for (const auto& p : outputs) std::cout << p.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interpretable latent subspace toolkit"};
  app.require_subcommand(1);
  Overrides o;
  std::string basis;
  std::vector<std::string> bases;
  std::string gram;
  double epsilon = latent::kDefaultEpsilon;

  auto* discover = app.add_subcommand("discover", "Solve a subspace from a formulation plan");
  add_common(discover, o);

  auto* manipulate = app.add_subcommand("manipulate", "Render a component at several magnitudes");
  add_common(manipulate, o);
  manipulate->add_option("subspace", basis, "Subspace basis file")->required();
  manipulate->add_option("--component", o.component, "Component index");
  manipulate->add_option("--magnitude", o.magnitude, "Magnitudes, comma or space separated");

  auto* counterfactual = app.add_subcommand("counterfactual", "Optimize a classifier logit inside a subspace");
  add_common(counterfactual, o);
  counterfactual->add_option("subspace", basis, "Subspace basis file")->required();
  counterfactual->add_option("--classifier", o.classifier, "Classifier name");

  auto* compare = app.add_subcommand("compare-spaces", "Attenuation curves in the input and style spaces");
  add_common(compare, o);

  auto* evaluate = app.add_subcommand("evaluate", "Inside/outside/identity metrics of subspaces");
  add_common(evaluate, o);
  evaluate->add_option("subspaces", bases, "Subspace basis files")->required();
  evaluate->add_option("--magnitude", o.magnitude, "Magnitudes, comma or space separated");

  auto* split = app.add_subcommand("split-gram", "Eigen-split an external Gram matrix");
  split->add_option("gram", gram, "Gram matrix in SLMX format")->required();
  split->add_option("--epsilon", epsilon, "Relative eigenvalue threshold");
  split->add_option("--out", o.out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*discover) report(latent::cmd_discover(resolve(o)));
    if (*manipulate) report(latent::cmd_manipulate(resolve(o), basis));
    if (*counterfactual) report(latent::cmd_counterfactual(resolve(o), basis));
    if (*compare) report(latent::cmd_compare_spaces(resolve(o)));
    if (*evaluate) {
      std::vector<std::filesystem::path> paths(bases.begin(), bases.end());
      report(latent::cmd_evaluate(resolve(o), paths));
    }
    if (*split) report(latent::cmd_split_gram(gram, epsilon, o.out.empty() ? "out" : o.out));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return latent::exit_code(e);
  }
  return 0;
}
