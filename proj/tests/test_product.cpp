#include "doctest.h"

#include "ltlac/pipeline.hpp"
#include "ltlac/product.hpp"
#include "support.hpp"

using namespace ltlac;

namespace {

StateId find_state(const ProductModel& p, StateId q, StateId s) {
  for (StateId x = 0; x < p.projection.size(); ++x) {
    if (p.projection[x] == ProductState{q, s}) return x;
  }
  return kNoState;
}

const char* kChain = R"(
states 2
initial 0
props p
actions go
label 1: p
trans 0 go 1 1
trans 1 go 1 1
)";

}  // namespace

TEST_SUITE("product") {

TEST_CASE("chain times eventually-p: hand-enumerated transition table") {
  const auto m = parse_model(kChain);
  const auto r = parse_dra(read_file(testing::data_path("eventually_p.dra")));
  const auto p = build_product(m, r, {LabelAlignment::NextState, false});
  REQUIRE(p.model.num_states() == 4);
  CHECK(p.unpruned_states == 4);
  const StateId s00 = find_state(p, 0, 0);
  const StateId s11 = find_state(p, 1, 1);
  REQUIRE(s00 != kNoState);
  REQUIRE(s11 != kNoState);
  CHECK(p.model.initial() == s00);

  // (q, s) --go--> (q', delta(s, h(q'))) for every one of the 4 states.
  const StateId expected[2][2][2] = {{{1, 1}, {1, 1}}, {{1, 1}, {1, 1}}};
  for (StateId q = 0; q < 2; ++q) {
    for (StateId s = 0; s < 2; ++s) {
      const auto* c = p.model.find_choice(find_state(p, q, s), 0);
      REQUIRE(c != nullptr);
      REQUIRE(c->edges.size() == 1);
      CHECK(c->edges[0].weight == 1.0);
      CHECK(p.projection[c->edges[0].target] == ProductState{expected[q][s][0], expected[q][s][1]});
    }
  }
  REQUIRE(p.pairs.size() == 1);
  CHECK(p.pairs[0].recur[s11]);
  CHECK_FALSE(p.pairs[0].recur[s00]);

  const auto pruned = build_product(m, r);
  CHECK(pruned.model.num_states() == 2);
}

TEST_CASE("the initial automaton state reads the initial label") {
  const auto m = parse_model("states 2\ninitial 1\nprops p\nlabel 1: p\ntrans 0 go 1 1\ntrans 1 go 0 1\n");
  const auto r = parse_dra(read_file(testing::data_path("eventually_p.dra")));
  const auto next = build_product(m, r);
  CHECK(next.projection[next.model.initial()] == ProductState{1, 1});
  const auto current = build_product(m, r, {LabelAlignment::CurrentState, true});
  CHECK(current.projection[current.model.initial()] == ProductState{1, 0});
  // Current-state alignment reads h(q) on leaving q.
  const StateId x0 = current.model.initial();
  const auto& e = current.model.find_choice(x0, 0)->edges;
  REQUIRE(e.size() == 1);
  CHECK(current.projection[e[0].target] == ProductState{0, 1});
}

TEST_CASE("labels are translated onto the automaton's propositions") {
  const auto m = parse_model("states 1\ninitial 0\nprops x p y\nlabel 0: p y\ntrans 0 go 0 1\n");
  const auto r = parse_dra(read_file(testing::data_path("eventually_p.dra")));
  CHECK(translate_labels(m, r) == std::vector<Letter>{1});
  const auto missing = parse_model("states 1\ninitial 0\nprops x\ntrans 0 go 0 1\n");
  CHECK_THROWS_AS(translate_labels(missing, r), Error);
}

TEST_CASE("product weights are copied from the model") {
  std::mt19937_64 rng(17);
  const auto r = parse_dra(read_file(testing::data_path("formula7.dra")));
  for (int trial = 0; trial < 5; ++trial) {
    ModelData d = testing::random_model(rng, {.states = 6, .actions = 2}).data();
    d.propositions = r.propositions();
    for (auto& l : d.labels) l = static_cast<Letter>(rng() % 32);
    const LabeledModel m(std::move(d));
    const auto letters = translate_labels(m, r);
    const auto p = build_product(m, r);
    CHECK(p.unpruned_states == 6 * 17);
    for (StateId x = 0; x < p.model.num_states(); ++x) {
      const auto [q, s] = p.projection[x];
      REQUIRE(p.model.enabled(x) == m.enabled(q));
      for (const auto& c : p.model.choices(x)) {
        const auto& base = m.find_choice(q, c.action)->edges;
        REQUIRE(c.edges.size() == base.size());
        double total = 0.0;
        for (const auto& e : c.edges) {
          const auto [q2, s2] = p.projection[e.target];
          CHECK(s2 == r.step(s, letters[q2]));
          total += e.weight;
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
      }
    }
  }
}

}
