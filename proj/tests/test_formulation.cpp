#include "doctest.h"
#include "latent/error.hpp"
#include "latent/formulation.hpp"

using namespace latent;

TEST_CASE("plan text parses into ordered stages") {
  const FormulationPlan p = parse_plan("activate: mp[mouth] eps=1e-3; suppress: mp[~mouth]\nsuppress: id eps=0.03");
  REQUIRE(p.stages.size() == 3);
  CHECK(p.activate().role == Role::activate);
  CHECK(p.activate().criterion == CriterionRef{CriterionKind::mp, "mouth", false});
  CHECK(p.activate().epsilon == 1e-3);
  CHECK(p.stages[1].criterion.complement);
  CHECK(p.stages[1].epsilon == 3e-3);
  CHECK(p.stages[2].criterion.kind == CriterionKind::id);
  CHECK(p.stages[2].epsilon == 0.03);
}

TEST_CASE("comments, blank lines and default epsilon") {
  const FormulationPlan p = parse_plan("# lips\n\nactivate: mac[lip]  # color\n;suppress: res[~lip]\n", 0.01);
  REQUIRE(p.stages.size() == 2);
  CHECK(p.stages[0].epsilon == 0.01);
  CHECK(p.stages[1].criterion.label() == "res[~lip]");
}

TEST_CASE("print and parse round trip") {
  for (const auto& [name, text] : formulation_library()) {
    const FormulationPlan p = parse_plan(text);
    CHECK_MESSAGE(parse_plan(print_plan(p)) == p, name);
  }
  const FormulationPlan odd = parse_plan("activate: high eps=0.123456789; suppress: low eps=1e-7");
  CHECK(parse_plan(print_plan(odd)) == odd);
  CHECK(print_plan(odd) == "activate: high eps=0.123456789; suppress: low eps=1e-07");
}

TEST_CASE("resolve_plan takes library names or text") {
  CHECK(resolve_plan("lip_color") == parse_plan("activate: mac[lip]; suppress: res[~lip]"));
  CHECK(resolve_plan(" mouth_photometry_id ").stages.size() == 3);
  CHECK(resolve_plan("activate: high").stages.size() == 1);
  CHECK(formulation_library().size() == 15);
}

namespace {

void expect_error(const char* text, std::size_t line, std::size_t column) {
  try {
    parse_plan(text);
    FAIL("no error for: " << text);
  } catch (const ParseError& e) {
    CHECK_MESSAGE(e.line() == line, text << " -> " << e.what());
    CHECK_MESSAGE(e.column() == column, text << " -> " << e.what());
  }
}

}  // namespace

TEST_CASE("malformed plans report line and column") {
  expect_error("", 1, 1);
  expect_error("suppress: id", 1, 1);
  expect_error("activate: id\nactivate: high", 2, 1);
  expect_error("activate: zz", 1, 11);
  expect_error("activate: mp", 1, 13);
  expect_error("activate: id[mouth]", 1, 13);
  expect_error("activate: mp[ears]", 1, 14);
  expect_error("activate: mp[mouth\n", 1, 19);
  expect_error("activate: high eps=2", 1, 20);
  expect_error("activate: high eps=x", 1, 20);
  expect_error("activate high", 1, 10);
  expect_error("activate: high\nsuppress: low extra", 2, 15);
  expect_error("activate: high $", 1, 16);
  expect_error("activate: fl[skin]", 1, 14);
}
