#include "doctest.h"

#include "ltlac/model.hpp"
#include "support.hpp"

using namespace ltlac;

TEST_SUITE("model") {

TEST_CASE("nts file matches the support of the corresponding mdp file") {
  const auto mdp = parse_model(R"(
states 4
initial 0
props a b
actions go stay
label 1: a
label 3: a b
trans 0 go 1 0.5
trans 0 go 2 0.5
trans 0 stay 0 1
trans 1 go 3 1
trans 2 go 3 0.25
trans 2 go 0 0.75
trans 3 stay 3 1
)");
  const auto nts = parse_model(R"(
states 4
initial 0
mode nts
props a b
actions go stay
label 1: a
label 3: a b
trans 0 go 1 1
trans 0 go 2 1
trans 0 go 3 0
trans 0 stay 0 1
trans 1 go 3 1
trans 2 go 3 1
trans 2 go 0 1
trans 3 stay 3 1
)");
  CHECK(nts.is_nts());
  CHECK(nts == nts_from_mdp(mdp));
  CHECK(nts_from_mdp(nts) == nts);
  CHECK(mdp.num_choices() == 5);
  CHECK(mdp.label_string(3) == "{a,b}");
}

TEST_CASE("nts conversion keeps the positive support of random models") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const auto m = testing::random_model(rng, {.states = 5, .actions = 2});
    const auto n = nts_from_mdp(m);
    REQUIRE(n.num_states() == m.num_states());
    for (StateId q = 0; q < m.num_states(); ++q) {
      REQUIRE(n.enabled(q) == m.enabled(q));
      for (const auto& c : m.choices(q)) {
        std::vector<StateId> support;
        for (const auto& e : c.edges) {
          if (e.weight > 0.0) support.push_back(e.target);
        }
        std::vector<StateId> got;
        for (const auto& e : n.find_choice(q, c.action)->edges) {
          CHECK(e.weight == 1.0);
          got.push_back(e.target);
        }
        CHECK(got == support);
      }
    }
  }
}

TEST_CASE("serialization round-trips") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const auto m = testing::random_model(rng, {.states = 6, .actions = 3, .props = 2});
    CHECK(parse_model(serialize_model(m)) == m);
    const auto n = nts_from_mdp(m);
    CHECK(parse_model(serialize_model(n)) == n);
  }
}

TEST_CASE("malformed models report the offending line") {
  auto line_of = [](const char* text) {
    try {
      parse_model(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return -1;
  };
  CHECK(line_of("states 2\ninitial 0\ntrans 0 a 5 1\n") == 3);
  CHECK(line_of("states 2\ninitial 0\nfrobnicate\n") == 3);
  CHECK(line_of("states 2\n# comment\ninitial 0\nlabel 1: q\ntrans 0 a 1 1\ntrans 1 a 1 1\n") == 4);
  CHECK_THROWS_AS(parse_model("states 2\ninitial 0\ntrans 0 a 1 0.5\ntrans 1 a 1 1\n"), ModelError);
  CHECK_THROWS_AS(parse_model("states 2\ninitial 0\ntrans 0 a 1 1\n"), Error);  // state 1 has no action
}

TEST_CASE("policy validation") {
  const auto m = parse_model("states 2\ninitial 0\ntrans 0 a 1 1\ntrans 0 b 0 1\ntrans 1 a 1 1\n");
  StationaryPolicy ok(PolicyKind::Randomized, {{{0, 0.25}, {1, 0.75}}, {{0, 1.0}}});
  CHECK_NOTHROW(ok.validate(m));
  CHECK(ok.prob(0, 1) == doctest::Approx(0.75));
  StationaryPolicy unnormalized(PolicyKind::Randomized, {{{0, 0.25}}, {{0, 1.0}}});
  CHECK_THROWS_AS(unnormalized.validate(m), ModelError);
  StationaryPolicy disabled(PolicyKind::Randomized, {{{0, 1.0}}, {{1, 1.0}}});
  CHECK_THROWS_AS(disabled.validate(m), ModelError);
  const auto det = StationaryPolicy::deterministic({1, kNoState});
  CHECK(det.kind() == PolicyKind::Deterministic);
  CHECK(det.defined(0));
  CHECK_FALSE(det.defined(1));
}

}
