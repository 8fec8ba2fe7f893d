#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>

#include "doctest.h"
#include "helpers.hpp"
#include "latent/config.hpp"
#include "latent/counterfactual.hpp"
#include "latent/eval.hpp"

using namespace latent;
namespace fs = std::filesystem;

namespace {

int run(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(LATENTCTL_PATH) + " " + args + " > '" + log.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST_CASE("usage errors exit with 2") {
  const auto dir = testing::scratch_dir("cli_usage");
  CHECK(run("", dir / "log") == 2);
  CHECK(run("frobnicate", dir / "log") == 2);
  CHECK(run("discover --seed notanumber", dir / "log") == 2);
  CHECK(run("manipulate", dir / "log") == 2);
  CHECK(run("--help", dir / "log") == 0);
}

TEST_CASE("discover, manipulate, counterfactual and evaluate") {
  const auto dir = testing::scratch_dir("cli_flow");
  REQUIRE(run("discover --out " + q(dir), dir / "log") == 0);
  CHECK(fs::exists(dir / "subspace.slmx"));
  const StoredSubspace st = load_subspace(dir / "subspace.slmx");
  CHECK(st.subspace.dim() >= 1);
  CHECK(st.subspace.formulation == print_plan(resolve_plan("mouth_photometry")));
  CHECK(read_text(dir / "log").find("subspace.manifest") != std::string::npos);

  REQUIRE(run("manipulate " + q(dir / "subspace.slmx") + " --component 1 --magnitude -3,3 --out " + q(dir),
              dir / "log") == 0);
  const Image grid = read_ppm(dir / "manipulate_c1.ppm");
  CHECK(grid.width == 2 * 64 + 3 * kGridSeparator);
  CHECK(grid.height == 64 + 2 * kGridSeparator);

  REQUIRE(run("discover --plan lip_color --out " + q(dir / "lip"), dir / "log") == 0);
  REQUIRE(run("counterfactual " + q(dir / "lip" / "subspace.slmx") + " --out " + q(dir / "lip"), dir / "log") == 0);
  for (const char* f : {"cf_before.ppm", "cf_after.ppm", "cf_difference.ppm", "cf_summary.txt"})
    CHECK_MESSAGE(fs::exists(dir / "lip" / f), f);
  const auto traj = parse_trajectory_csv(read_text(dir / "lip" / "cf_trajectory.csv"));
  REQUIRE(traj.size() >= 2);
  CHECK(traj.back().logit > traj.front().logit);

  const auto cfg = dir / "eval.cfg";
  write_text(cfg, "test_codes = 3\ntop_k = 2\nmagnitudes = 0, 10\n");
  REQUIRE(run("evaluate " + q(dir / "subspace.slmx") + " " + q(dir / "lip" / "subspace.slmx") + " --config " + q(cfg) +
                  " --out " + q(dir),
              dir / "log") == 0);
  const auto rows = parse_metrics_csv(read_text(dir / "metrics.csv"));
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].magnitude == 0.0);
  CHECK(rows[0].inside == 0.0);
  CHECK(rows[1].inside > rows[1].outside);
  CHECK(rows[1].n == 3);
}

TEST_CASE("compare-spaces writes both curves") {
  const auto dir = testing::scratch_dir("cli_compare");
  REQUIRE(run("compare-spaces --out " + q(dir), dir / "log") == 0);
  const auto input = parse_attenuation_csv(read_text(dir / "attenuation_input.csv"));
  const auto style = parse_attenuation_csv(read_text(dir / "attenuation_style.csv"));
  REQUIRE(!input.ratios.empty());
  CHECK(style.ratios.size() >= input.ratios.size());
  CHECK(style.ratios[0] > input.ratios[0]);
}

TEST_CASE("command errors map to exit codes") {
  const auto dir = testing::scratch_dir("cli_errors");
  CHECK(run("discover --plan 'activate: mp[ears]' --out " + q(dir), dir / "log") == 2);
  CHECK(read_text(dir / "log").find("column") != std::string::npos);
  CHECK(run("discover --plan 'activate: mp[mouth]; suppress: mp[mouth]' --out " + q(dir), dir / "log") == 4);
  CHECK(read_text(dir / "log").find("empty intersection") != std::string::npos);
  CHECK(run("discover --space w --out " + q(dir), dir / "log") == 2);

  write_text(dir / "bad.cfg", "seed = 1\nshade = 3\n");
  CHECK(run("discover --config " + q(dir / "bad.cfg") + " --out " + q(dir), dir / "log") == 2);
  CHECK(read_text(dir / "log").find("line 2") != std::string::npos);

  REQUIRE(run("discover --out " + q(dir), dir / "log") == 0);
  CHECK(run("manipulate " + q(dir / "subspace.slmx") + " --component 99 --out " + q(dir), dir / "log") == 2);
  CHECK(run("counterfactual " + q(dir / "subspace.slmx") + " --classifier smile --out " + q(dir), dir / "log") == 2);
  CHECK(run("manipulate " + q(dir / "missing.slmx") + " --out " + q(dir), dir / "log") != 0);
}

TEST_CASE("split-gram on an external Gram") {
  const auto dir = testing::scratch_dir("cli_split");
  Matrix g(3, 3);
  g(0, 0) = 4.0;
  g(1, 1) = 1e-6;
  g(2, 2) = 1.0;
  write_matrix(dir / "g.slmx", g);
  REQUIRE(run("split-gram " + q(dir / "g.slmx") + " --epsilon 1e-3 --out " + q(dir), dir / "log") == 0);
  const Matrix v = read_matrix(dir / "split_V.slmx"), w = read_matrix(dir / "split_W.slmx");
  CHECK(v.rows() == 3);
  CHECK(v.cols() == 2);
  CHECK(w.cols() == 1);
  CHECK(std::abs(w(1, 0)) == doctest::Approx(1.0));
  const std::string values = read_text(dir / "split_values.csv");
  CHECK(values.rfind("index,lambda,role\n", 0) == 0);
  CHECK(values.find("0,4,activate\n") != std::string::npos);
  CHECK(values.find("2,1e-06,suppress\n") != std::string::npos);

  Matrix bad(3, 3);
  bad(0, 1) = 1.0;
  write_matrix(dir / "bad.slmx", bad);
  CHECK(run("split-gram " + q(dir / "bad.slmx") + " --out " + q(dir), dir / "log") == 2);
  write_matrix(dir / "rect.slmx", Matrix(2, 3));
  CHECK(run("split-gram " + q(dir / "rect.slmx") + " --out " + q(dir), dir / "log") == 2);
  write_text(dir / "junk.slmx", "not a matrix");
  CHECK(run("split-gram " + q(dir / "junk.slmx") + " --out " + q(dir), dir / "log") == 2);
}

TEST_CASE("identical runs give identical bytes") {
  const auto a = testing::scratch_dir("cli_det_a"), b = testing::scratch_dir("cli_det_b");
  for (const auto& d : {a, b}) {
    REQUIRE(run("discover --seed 5 --out " + q(d), d / "log") == 0);
    REQUIRE(run("manipulate " + q(d / "subspace.slmx") + " --seed 5 --out " + q(d), d / "log") == 0);
  }
  for (const char* f : {"subspace.slmx", "subspace.manifest", "manipulate_c0.ppm"})
    CHECK_MESSAGE(read_text(a / f) == read_text(b / f), f);
  const auto c = testing::scratch_dir("cli_det_c");
  REQUIRE(run("discover --seed 6 --out " + q(c), c / "log") == 0);
  CHECK(read_text(a / "subspace.manifest") != read_text(c / "subspace.manifest"));
}
