#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "json.hpp"
#include "oracles.hpp"
#include "rodkit/config.hpp"
#include "rodkit/errors.hpp"
#include "rodkit/experiments.hpp"

using namespace rod;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("rodkit_test_" + name);
  fs::remove_all(dir);
  return dir;
}

bool has_diagnostic(const std::vector<Diagnostic>& diags, const std::string& key, const std::string& text) {
  for (const auto& d : diags)
    if (d.where.find(key) != std::string::npos && d.message.find(text) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_CASE("numbers round-trip through their text form") {
  CHECK(format_number(0.0) == "0");
  CHECK(format_number(-0.0) == "0");
  CHECK(format_number(1.5) == "1.5");
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(1.0 / 0.0) == "inf");
  CHECK(format_number(-1.0 / 0.0) == "-inf");
  for (double x : {1.0 / 3.0, 1e-300, 123456.789, -2.5e17}) CHECK(std::stod(format_number(x)) == x);
}

TEST_CASE("CSV writer checks row width") {
  CsvWriter w({"a", "b"});
  w.row({"1", "2"});
  CHECK(w.str() == "a,b\n1,2\n");
  CHECK_THROWS_AS(w.row({"1"}), ShapeError);
}

TEST_CASE("option sets round-trip through CSV") {
  const auto mdp = oracle::grid(oracle::open_grid(3, 3));
  const Matrix p = induced_transition_matrix(mdp, Policy::uniform(9, 4));
  EigenoptionParams params;
  params.k = 4;
  const auto options = discover_eigenoptions(mdp, eigendecompose(sr_closed_form(p, 0.9).psi), params);
  const auto text = option_set_csv(options);
  const auto back = parse_option_set_csv(text);
  REQUIRE(back.size() == options.size());
  for (std::size_t i = 0; i < options.size(); ++i) {
    CHECK(back[i].label == options[i].label);
    CHECK(back[i].policy == options[i].policy);
    CHECK(back[i].termination == options[i].termination);
    CHECK(back[i].initiation == options[i].initiation);
  }
  CHECK(option_set_csv(back) == text);
}

TEST_CASE("artifact sets only expose files after commit") {
  const auto dir = scratch("artifacts");
  ArtifactSet set(dir);
  set.write("a.csv", "x\n");
  CHECK(fs::exists(dir / "a.csv.partial"));
  CHECK_FALSE(fs::exists(dir / "a.csv"));
  set.commit();
  CHECK(fs::exists(dir / "a.csv"));
  CHECK_FALSE(fs::exists(dir / "a.csv.partial"));
  CHECK(read_text_file(dir / "a.csv") == "x\n");
  fs::remove_all(dir);
}

TEST_CASE("config parsing reports the offending line") {
  const auto c = parse_config("# comment\n[env]\nname = openroom\n\n[method]\nname = covering\nk = 3 ; trailing\n");
  CHECK(c.env == "openroom");
  CHECK(c.method == Method::Covering);
  CHECK(c.k == 3);
  CHECK(c.origin.at("method.k") == "line 7");

  auto line_of = [](const char* text) -> std::size_t {
    try {
      parse_config(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  CHECK(line_of("[env]\nname = openroom\n[method]\nk = many\n") == 4);
  CHECK(line_of("[env]\nnope = 1\n") == 2);
  CHECK(line_of("k = 1\n") == 1);
  CHECK(line_of("[bogus]\n") == 1);
  CHECK(line_of("[env]\nname\n") == 2);
  CHECK(line_of("[method]\nname = magic\n") == 2);
}

TEST_CASE("settings from flags override the file") {
  auto c = parse_config("[method]\nk = 3\n");
  apply_setting(c, "method.k", "5", "--k");
  CHECK(c.k == 5);
  CHECK(c.origin.at("method.k") == "--k");
  CHECK_THROWS_AS(apply_setting(c, "method.kk", "5", "--kk"), ParseError);
  apply_setting(c, "eval.kinds", "diffusion,cover", "--kinds");
  CHECK(c.eval == std::vector<EvalKind>{EvalKind::Diffusion, EvalKind::Cover});
}

TEST_CASE("validation catches cross-field problems") {
  CHECK(validate_config(ExperimentConfig{}).empty());

  auto c = parse_config("[env]\nname = openroom\n[method]\nk = 201\n");
  CHECK(has_diagnostic(validate_config(c), "line 4", "exceeds 2|S| = 200"));

  c = parse_config("[method]\nname = keyboard\nk = 15\n");
  CHECK(has_diagnostic(validate_config(c), "method.k", "at most 14"));

  c = parse_config("[method]\nname = ceo\np_option = 0.25\n");
  CHECK(has_diagnostic(validate_config(c), "method.p_option", "p_option"));

  c = parse_config("[env]\nname = no_such_map\n");
  CHECK(has_diagnostic(validate_config(c), "env.name", "no_such_map"));

  c = parse_config("[env]\ngamma = 1.0\n[eval]\nstart = 500\n");
  const auto diags = validate_config(c);
  CHECK(has_diagnostic(diags, "env.gamma", "[0, 1)"));
  CHECK(has_diagnostic(diags, "eval.start", ""));
  CHECK_THROWS_AS(require_valid(c), ConfigError);
}

TEST_CASE("every bundled recipe validates") {
  for (const auto& id : reproduce_ids()) {
    INFO(id);
    CHECK(validate_config(recipe_config(id)).empty());
  }
  CHECK_THROWS_WITH_AS(recipe_config("fig99"), doctest::Contains("fig7"), ConfigError);
}

TEST_CASE("a discover run writes its files and a manifest") {
  const auto dir = scratch("discover");
  auto c = parse_config("[env]\nname = openroom\n[method]\nk = 4\n");
  c.out_dir = dir.string();
  const auto summary = run_command(Command::Discover, c);
  CHECK(fs::exists(dir / "options.csv"));
  CHECK(parse_option_set_csv(read_text_file(dir / "options.csv")).size() == 4);
  const auto manifest = nlohmann::json::parse(read_text_file(dir / "manifest.json"));
  CHECK(manifest["command"] == "discover");
  CHECK(manifest["version"] == toolkit_version());
  CHECK(manifest["config"]["method.k"] == "4");
  for (const auto& entry : fs::directory_iterator(dir)) CHECK(entry.path().extension() != ".partial");
  fs::remove_all(dir);
}
