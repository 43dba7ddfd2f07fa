// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 iff all pass.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "ltlac/exact.hpp"
#include "ltlac/pipeline.hpp"
#include "support.hpp"

using namespace ltlac;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

void report(int n, const std::string& title, const Outcome& o) {
  std::cout << fmt::format("criterion {}: {} - {} ({})\n", n, o.pass ? "PASS" : "FAIL", title, o.detail)
            << std::flush;
}

// 1. Maximal reachability against brute-force policy enumeration.
Outcome max_reach_vs_enumeration() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  double worst = 0.0;
  int done = 0;
  while (done < 25) {
    const std::size_t states = 2 + rng() % 5;
    const std::size_t actions = 1 + rng() % 3;
    const auto m = testing::random_model(rng, {.states = states, .actions = actions});
    std::vector<char> goal(states, 0);
    for (StateId s = 1; s < states; ++s) goal[s] = rng() % 4 == 0;
    if (std::count(goal.begin(), goal.end(), 1) == 0) continue;
    const auto sets = goal_and_bad_sets(m, goal);
    const double v = max_reach(m, sets).initial_value(m);
    double best = 0.0;
    for_each_deterministic_policy(m, [&](const StationaryPolicy& mu) {
      best = std::max(best, eval_policy_reach(m, mu, sets));
    });
    worst = std::max(worst, std::abs(v - best));
    ++done;
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-9 && secs < 10.0, fmt::format("25 MDPs, max |error| {:.2e}, {:.2f} s", worst, secs)};
}

// 2. Accepting components against exhaustive enumeration.
Outcome amecs_vs_enumeration() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(202);
  int mismatches = 0;
  int with_components = 0;
  for (int trial = 0; trial < 25; ++trial) {
    const auto p = testing::random_small_product(rng, 2 + rng() % 3);
    const auto got = amecs(p);
    const auto expected = testing::brute_force_amecs(p);
    bool same = got.size() == expected.size();
    for (std::size_t i = 0; same && i < got.size(); ++i) {
      same = static_cast<const EndComponent&>(got[i]) == expected[i];
    }
    mismatches += same ? 0 : 1;
    with_components += got.empty() ? 0 : 1;
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && secs < 30.0,
          fmt::format("25 products of <= 8 states, {} mismatches, {} with components, {:.2f} s", mismatches,
                      with_components, secs)};
}

// 3. Restart-cost minimization selects reachability maximizers.
Outcome ssp_equivalence() {
  std::mt19937_64 rng(303);
  double worst = 0.0;
  int done = 0;
  while (done < 10) {
    const std::size_t states = 2 + rng() % 4;
    const auto m = testing::random_model(rng, {.states = states, .actions = 2});
    std::vector<char> goal(states, 0);
    for (StateId s = 1; s < states; ++s) goal[s] = rng() % 3 == 0;
    if (std::count(goal.begin(), goal.end(), 1) == 0) continue;
    const auto sets = goal_and_bad_sets(m, goal);
    const double pmax = max_reach(m, sets).initial_value(m);
    if (pmax == 0.0) continue;
    const auto ssp = mrp_to_ssp(m, sets);
    double best_cost = std::numeric_limits<double>::infinity();
    double reach_at_best = -1.0;
    for_each_deterministic_policy(ssp.model, [&](const StationaryPolicy& mu) {
      double cost = std::numeric_limits<double>::infinity();
      try {
        cost = expected_total_cost(ssp, mu);
      } catch (const ImproperPolicyError&) {
      }
      if (!(cost < best_cost)) return;
      std::vector<ActionId> lifted(states, kNoState);
      for (StateId s = 0; s < states; ++s) {
        if (!sets.goal[s]) lifted[s] = mu.at(ssp.from_product[s]).front().action;
      }
      best_cost = cost;
      reach_at_best = eval_policy_reach(m, StationaryPolicy::deterministic(lifted), sets);
    });
    worst = std::max(worst, std::abs(reach_at_best - pmax));
    ++done;
  }

  ModelData d;
  d.actions = {"go"};
  d.labels.assign(3, 0);
  d.choices.resize(3);
  d.choices[0].push_back({0, {{1, 0.5}, {2, 0.5}}});
  d.choices[1].push_back({0, {{1, 1.0}}});
  d.choices[2].push_back({0, {{2, 1.0}}});
  const LabeledModel geo(std::move(d));
  const auto geo_ssp = mrp_to_ssp(geo, goal_and_bad_sets(geo, std::vector<char>{0, 1, 0}));
  const double alpha = expected_total_cost(geo_ssp, StationaryPolicy::deterministic({0, 0, 0}));
  return {worst <= 1e-9 && std::abs(alpha - 1.0) <= 1e-12,
          fmt::format("10 products, max |reach gap| {:.2e}; restart cost at p = 1/2 is {:.15g}", worst, alpha)};
}

// 4. Log-policy gradient identities.
Outcome psi_checks() {
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  const double h = 1e-5;
  double worst_fd = 0.0, worst_sum = 0.0, worst_mean = 0.0;
  for (int instance = 0; instance < 100; ++instance) {
    const auto ssp = testing::random_nts_ssp(rng, 4 + rng() % 7, 3);
    RspOptions opt;
    opt.horizon = 1 + instance % 3;
    const LookaheadPolicy policy(ssp, opt);
    StateId i = 0;
    for (int tries = 0; tries < 100; ++tries) {
      i = static_cast<StateId>(rng() % ssp.model.num_states());
      if (i != ssp.terminal && ssp.model.choices(i).size() > 1) break;
    }
    const Vec2 theta(coord(rng), coord(rng));
    const auto dist = policy.action_distribution(theta, i);
    double sum = 0.0;
    Vec2 mean = Vec2::Zero();
    for (const auto& ap : dist) {
      const Vec2 g = policy.log_policy_gradient(theta, i, ap.action);
      Vec2 fd;
      for (int k = 0; k < 2; ++k) {
        Vec2 up = theta, down = theta;
        up[k] += h;
        down[k] -= h;
        fd[k] = (policy.log_action_prob(up, i, ap.action) - policy.log_action_prob(down, i, ap.action)) / (2 * h);
      }
      worst_fd = std::max(worst_fd, (g - fd).norm() / std::max(g.norm(), 1.0));
      sum += ap.prob;
      mean += ap.prob * g;
    }
    worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
    worst_mean = std::max(worst_mean, mean.norm());
  }
  return {worst_fd <= 1e-5 && worst_sum <= 1e-12 && worst_mean <= 1e-9,
          fmt::format("100 instances, t in 1..3: finite-difference error {:.2e}, |sum mu - 1| {:.2e}, "
                      "|sum mu psi| {:.2e}",
                      worst_fd, worst_sum, worst_mean)};
}

/// Records every query it forwards.
class LoggingSource : public TransitionSource {
 public:
  explicit LoggingSource(std::unique_ptr<TransitionSource> inner) : inner_(std::move(inner)) {}
  std::vector<Edge> transition_probs(StateId q, ActionId u) override {
    ++queries_;
    distinct_.insert({q, u});
    return inner_->transition_probs(q, u);
  }
  std::size_t pairs_computed() const override { return inner_->pairs_computed(); }
  std::size_t queries() const { return queries_; }
  std::size_t distinct() const { return distinct_.size(); }

 private:
  std::unique_ptr<TransitionSource> inner_;
  std::size_t queries_ = 0;
  std::set<std::pair<StateId, ActionId>> distinct_;
};

struct DeskResult {
  Outcome quality;
  Outcome lazy;
};

// 5 and 6. The desk mission over five seeds.
DeskResult desk_mission() {
  const auto t0 = Clock::now();
  auto cfg = testing::desk_config();
  cfg.threads = 0;
  const auto p = Problem::load(cfg);
  const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  const auto runs = run_seeds(*p, seeds);
  const double secs = seconds_since(t0);

  std::vector<double> finals;
  bool periodic = true;
  std::size_t evaluations = 0;
  bool within_cap = true;
  for (const auto& r : runs) {
    finals.push_back(*r.final_probability);
    within_cap = within_cap && r.run.iterations <= 5000;
    for (std::size_t k = 0; k < r.run.trace.size(); ++k) {
      const bool due = (k + 1) % 25 == 0 || k + 1 == r.run.trace.size();
      periodic = periodic && (r.run.trace[k].exact_prob.has_value() == due);
      evaluations += r.run.trace[k].exact_prob ? 1 : 0;
    }
  }
  std::sort(finals.begin(), finals.end());
  const double median = finals[finals.size() / 2];
  const double opt = *runs.front().optimal_probability;
  std::string per_seed;
  for (const auto& r : runs) {
    per_seed += fmt::format("{}{:.4f}@{}", per_seed.empty() ? "" : " ", *r.final_probability, r.run.iterations);
  }

  DeskResult out;
  out.quality = {median >= 0.7 * opt && periodic && within_cap && secs <= 300.0,
                 fmt::format("median {:.4f} vs optimum {:.4f} (ratio {:.3f}); seeds {}; {} periodic evaluations; "
                             "{:.1f} s",
                             median, opt, median / opt, per_seed, evaluations, secs)};

  const std::size_t product_pairs = p->product_mdp().num_choices();
  const std::size_t base_pairs = p->base().num_choices();
  bool lazy = true;
  std::size_t worst = 0;
  for (const auto& r : runs) {
    lazy = lazy && r.pairs_computed <= r.run.iterations && r.ssp_pairs_computed <= r.run.iterations;
    lazy = lazy && 2 * r.pairs_computed <= product_pairs;
    worst = std::max(worst, r.pairs_computed);
  }

  // Replay seed 1 with every simulator query logged.
  auto logged = LoggingSource(p->make_source());
  ProductProbabilityProvider provider(p->product(), p->automaton(), p->base(), p->ssp(), logged);
  auto ac = cfg.ac;
  ac.seed = seeds.front();
  const auto replay = run_actor_critic(p->ssp(), provider, p->policy(), ac,
                                       [&](const Vec2& th) { return p->rsp_probability(th); });
  const bool same_run = replay.theta == runs.front().run.theta && replay.iterations == runs.front().run.iterations;
  const bool no_recompute = logged.pairs_computed() == logged.distinct() &&
                            logged.pairs_computed() == runs.front().pairs_computed;
  out.lazy = {lazy && same_run && no_recompute,
              fmt::format("at most {} pairs computed per run against {} product pairs ({:.1f}%) and {} base pairs; "
                          "seed 1 replay: {} simulator queries, {} distinct, counter {}",
                          worst, product_pairs, 100.0 * worst / product_pairs, base_pairs, logged.queries(),
                          logged.distinct(), logged.pairs_computed())};
  return out;
}

// 7. Byte-identical reruns.
Outcome reruns_identical() {
  auto cfg = testing::desk_config();
  cfg.seeds = {1, 2, 3, 4, 5};
  const auto base = fs::temp_directory_path() / "ltlac_acceptance";
  fs::remove_all(base);
  std::ostringstream sink;
  auto* saved = std::cout.rdbuf(sink.rdbuf());
  cfg.output_dir = base / "a";
  cfg.threads = 0;
  const int first = compare(cfg);
  cfg.output_dir = base / "b";
  cfg.threads = 1;
  const int second = compare(cfg);
  std::cout.rdbuf(saved);
  if (first == kExitError || second == kExitError) return {false, "compare failed"};
  std::size_t files = 0, differing = 0;
  for (const auto& entry : fs::recursive_directory_iterator(base / "a")) {
    if (!entry.is_regular_file()) continue;
    ++files;
    const auto other = base / "b" / fs::relative(entry.path(), base / "a");
    if (!fs::exists(other) || read_file(entry.path()) != read_file(other)) ++differing;
  }
  return {files > 0 && differing == 0,
          fmt::format("{} output files compared across two runs, {} differ", files, differing)};
}

}  // namespace

int main() {
  std::cout.setf(std::ios::unitbuf);
  bool all = true;
  auto run = [&](int n, const std::string& title, auto&& check) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    report(n, title, o);
    all = all && o.pass;
  };
  run(1, "maximal reachability equals enumeration", max_reach_vs_enumeration);
  run(2, "accepting components equal enumeration", amecs_vs_enumeration);
  run(3, "restart cost and reachability agree", ssp_equivalence);
  run(4, "log-policy gradient", psi_checks);
  DeskResult desk;
  try {
    desk = desk_mission();
  } catch (const std::exception& e) {
    desk.quality = desk.lazy = {false, std::string("error: ") + e.what()};
  }
  report(5, "desk mission reaches 0.7 of the optimum", desk.quality);
  report(6, "probabilities computed lazily", desk.lazy);
  all = all && desk.quality.pass && desk.lazy.pass;
  run(7, "reruns are byte-identical", reruns_identical);
  return all ? 0 : 1;
}
