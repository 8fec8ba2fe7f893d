#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "latent/criteria.hpp"

namespace latent {

enum class Role { activate, suppress };
std::string_view to_string(Role role);

struct PlanStage {
  Role role = Role::activate;
  CriterionRef criterion;
  double epsilon = 3e-3;

  friend bool operator==(const PlanStage&, const PlanStage&) = default;
};

/// One activate stage followed by suppress stages, in application order.
///
/// Text form, statements separated by ';' or newlines, '#' starts a comment:
///
///     activate: mp[mouth] eps=3e-3; suppress: mp[~mouth]; suppress: id eps=0.03
///
/// A missing eps takes the default passed to parse_plan.
struct FormulationPlan {
  std::vector<PlanStage> stages;

  const PlanStage& activate() const { return stages.front(); }
  friend bool operator==(const FormulationPlan&, const FormulationPlan&) = default;
};

/// Throws ParseError with line and column on malformed text, unknown
/// criteria, bad regions, or a plan that does not start with exactly one
/// activate stage.
FormulationPlan parse_plan(std::string_view text, double default_epsilon = 3e-3);
/// Canonical single-line form; parse_plan(print_plan(p)) == p.
std::string print_plan(const FormulationPlan& plan);

/// The subspace formulations of the reference table, by name.
const std::map<std::string, std::string>& formulation_library();
/// Library name or literal plan text.
FormulationPlan resolve_plan(std::string_view name_or_text, double default_epsilon = 3e-3);

}  // namespace latent
