#include "doctest.h"

#include <Eigen/Dense>
#include <random>

#include "ltlac/exact.hpp"
#include "ltlac/graph.hpp"
#include "ltlac/pipeline.hpp"
#include "ltlac/synthesis.hpp"
#include "support.hpp"

using namespace ltlac;

using testing::brute_force_mecs;

TEST_SUITE("synthesis") {

TEST_CASE("maximal end components equal exhaustive enumeration") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 1 + rng() % 8;
    const auto m = testing::random_model(rng, {.states = n, .actions = 3, .mode = ModelMode::Nts,
                                               .enable = 0.6, .max_successors = 2});
    CHECK(max_end_components(m) == brute_force_mecs(m, (1U << n) - 1));
    std::vector<char> allowed(n);
    std::uint32_t mask = 0;
    for (StateId s = 0; s < n; ++s) {
      allowed[s] = rng() % 3 != 0;
      mask |= allowed[s] ? 1U << s : 0U;
    }
    CHECK(max_end_components(m, allowed) == brute_force_mecs(m, mask));
  }
}

TEST_CASE("accepting components equal restrict-then-enumerate") {
  std::mt19937_64 rng(23);
  int nonempty = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const auto p = testing::random_small_product(rng, 4);
    REQUIRE(p.model.num_states() == 8);
    const auto expected = testing::brute_force_amecs(p);
    const auto got = amecs(p);
    REQUIRE(got.size() == expected.size());
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(static_cast<const EndComponent&>(got[i]) == expected[i]);
    nonempty += !got.empty();
  }
  CHECK(nonempty > 5);
}

TEST_CASE("zero-probability states are those that cannot reach the goal") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 30; ++trial) {
    const auto m = testing::random_model(rng, {.states = 3 + rng() % 20, .actions = 2,
                                               .mode = ModelMode::Nts, .max_successors = 2});
    std::vector<char> goal(m.num_states(), 0);
    for (auto& g : goal) g = rng() % 7 == 0;
    const auto sets = goal_and_bad_sets(m, goal);
    const auto reach = testing::closure(graph::successor_graph(m));
    for (StateId i = 0; i < m.num_states(); ++i) {
      bool can = false;
      for (StateId j = 0; j < m.num_states(); ++j) can = can || (reach[i][j] && goal[j]);
      CHECK(static_cast<bool>(sets.bad[i]) == !can);
      CHECK(sets.goal[i] == goal[i]);
    }
  }
}

TEST_CASE("restart construction: expected cost is (1 - p) / p") {
  for (double p : {1.0, 0.5}) {
    ModelData d;
    d.actions = {"go"};
    d.labels.assign(3, 0);
    d.choices.resize(3);
    d.choices[0].push_back({0, {{1, p}, {2, 1.0 - p}}});
    d.choices[1].push_back({0, {{1, 1.0}}});
    d.choices[2].push_back({0, {{2, 1.0}}});
    const LabeledModel m(std::move(d));
    const auto sets = goal_and_bad_sets(m, std::vector<char>{0, 1, 0});
    CHECK(sets.bad[2]);
    const auto ssp = mrp_to_ssp(m, sets);
    CHECK(ssp.model.num_states() == 3);
    CHECK(ssp.terminal == 2);
    CHECK(ssp.from_product[1] == ssp.terminal);
    const auto mu = StationaryPolicy::deterministic({0, 0, 0});
    CHECK(expected_total_cost(ssp, mu) == doctest::Approx((1.0 - p) / p).epsilon(1e-12));
    CHECK(eval_policy_reach(m, mu, sets) == doctest::Approx(p).epsilon(1e-12));
  }
}

TEST_CASE("nts conversion flags the terminal and restarts bad states") {
  const auto m = parse_model("states 4\ninitial 0\nmode nts\ntrans 0 a 1 1\ntrans 0 a 2 1\ntrans 0 b 3 1\n"
                             "trans 1 a 1 1\ntrans 2 a 2 1\ntrans 3 a 0 1\n");
  const auto sets = goal_and_bad_sets(m, std::vector<char>{0, 1, 0, 0});
  const auto ssp = mrp_to_ssp(m, sets);
  CHECK(ssp.model.is_nts());
  // product 0, 2, 3 -> ssp 0, 1, 2; terminal 3
  CHECK(ssp.terminal == 3);
  CHECK(ssp.bad == std::vector<char>{0, 1, 0, 0});
  CHECK(ssp.model.find_choice(0, 0)->edges == std::vector<Edge>{{1, 1.0}, {3, 1.0}});
  CHECK(ssp.model.find_choice(1, 0)->edges == std::vector<Edge>{{0, 1.0}});
  CHECK(ssp.cost(1, 0) == 1.0);
  CHECK(ssp.cost(0, 0) == 0.0);
  CHECK(ssp.model.choices(3).size() == 2);
  const auto back = parse_ssp(serialize_ssp(ssp));
  CHECK(back.model == ssp.model);
  CHECK(back.terminal == ssp.terminal);
  CHECK(back.bad == ssp.bad);
}

TEST_CASE("the uniform in-component policy visits every state of an accepting component") {
  auto cfg = testing::desk_config();
  const auto p = Problem::load(cfg);
  const auto& mdp = p->product_mdp();
  REQUIRE_FALSE(p->accepting_components().empty());
  const auto& a = p->accepting_components().front();
  const auto mu = inside_amec_policy(a, mdp.num_states());
  const std::size_t n = a.states.size();
  std::vector<int> local(mdp.num_states(), -1);
  for (std::size_t i = 0; i < n; ++i) local[a.states[i]] = static_cast<int>(i);

  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& ap : mu.at(a.states[i])) {
      for (const auto& e : mdp.find_choice(a.states[i], ap.action)->edges) {
        REQUIRE(local[e.target] >= 0);  // closed under the policy
        P(i, local[e.target]) += ap.prob * e.weight;
      }
    }
  }
  // Stationary distribution: pi (P - I) = 0 with sum(pi) = 1.
  Eigen::MatrixXd M(n + 1, n);
  M.topRows(n) = (P - Eigen::MatrixXd::Identity(n, n)).transpose();
  M.row(n).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
  rhs[n] = 1.0;
  const Eigen::VectorXd pi = M.colPivHouseholderQr().solve(rhs);
  CHECK((M * pi - rhs).norm() < 1e-9);
  graph::Adjacency adj(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (P(i, j) > 0.0) adj[i].push_back(static_cast<StateId>(j));
  const StateId origin[] = {0};
  for (auto d : graph::bfs_distances(adj, origin)) CHECK(d != graph::kUnreachable);
  for (auto d : graph::bfs_distances(graph::reversed(adj), origin)) CHECK(d != graph::kUnreachable);
  bool recur_seen = false;
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(pi[i] > 1e-12);
    recur_seen = recur_seen || p->product().pairs[a.pair].recur[a.states[i]];
  }
  CHECK(recur_seen);
}

}
