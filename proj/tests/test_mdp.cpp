#include "doctest.h"
#include "oracles.hpp"
#include "rodkit/errors.hpp"
#include "rodkit/solvers.hpp"

using namespace rod;

TEST_CASE("bundled grids have the expected number of states") {
  CHECK(load_grid(resolve_asset("fourroom")).accessible_count() == 104);
  CHECK(load_grid(resolve_asset("openroom")).accessible_count() == 100);
  const auto mdp = build_mdp(load_grid(resolve_asset("fourroom")));
  CHECK(mdp.num_states() == 104);
  CHECK(mdp.num_actions() == 4);
  CHECK(mdp.deterministic());
}

TEST_CASE("grid parsing rejects malformed maps with a line number") {
  CHECK_THROWS_AS(parse_grid("###\n#.#\n##\n"), ParseError);
  try {
    parse_grid("####\n#.x#\n####\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse_grid("###\n#..\n###\n"), ParseError);
  CHECK_THROWS_AS(parse_grid("###\n###\n"), ParseError);
  CHECK_THROWS_AS(parse_grid(""), ParseError);
}

TEST_CASE("moves into walls stay in place and kernels are stochastic") {
  const auto mdp = oracle::grid(oracle::corridor(3));
  CHECK(mdp.num_states() == 3);
  CHECK(mdp.next_state(0, kLeft) == 0);
  CHECK(mdp.next_state(0, kRight) == 1);
  CHECK(mdp.next_state(1, kUp) == 1);
  CHECK(mdp.next_state(2, kRight) == 2);
  for (int a = 0; a < 4; ++a) CHECK(is_stochastic(mdp.kernel(a)));
}

TEST_CASE("corner states follow row-major state order") {
  const auto mdp = oracle::grid(oracle::open_grid(3, 4));
  CHECK(top_right_state(mdp) == 3);
  CHECK(bottom_left_state(mdp) == 8);
}

TEST_CASE("uniform policy induces the average of the action kernels") {
  const auto mdp = oracle::grid(oracle::open_grid(2, 2));
  const Matrix p = induced_transition_matrix(mdp, Policy::uniform(4, 4));
  Matrix expect = Matrix::Zero(4, 4);
  for (int a = 0; a < 4; ++a) expect += 0.25 * mdp.kernel(a);
  CHECK((p - expect).cwiseAbs().maxCoeff() < 1e-15);
  // From the top-left cell: up and left stay, right and down move.
  CHECK(p(0, 0) == doctest::Approx(0.5));
  CHECK(p(0, 1) == doctest::Approx(0.25));
  CHECK(p(0, 2) == doctest::Approx(0.25));
}

TEST_CASE("dataset validation catches out-of-range records") {
  TransitionDataset d;
  d.append({0, 1, 0.0, 1, true});
  CHECK_NOTHROW(d.validate(2, 4));
  d.append({0, 7, 0.0, 5, true});
  CHECK_THROWS_AS(d.validate(2, 4), ShapeError);
  CHECK(d.prefix(1).size() == 1);
}
