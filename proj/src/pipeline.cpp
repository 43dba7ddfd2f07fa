#include "ltlac/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "json.hpp"
#include "text_util.hpp"

namespace ltlac {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot read '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

void write_file(const fs::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
  out << text;
  if (!out) throw Error(fmt::format("write to '{}' failed", path.string()));
}

template <typename F>
auto with_context(const fs::path& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ParseError& e) {
    throw ParseError(e.line(), fmt::format("{}:{}: {}", path.string(), e.line(), e.what()));
  } catch (const NoAmecError&) {
    throw;
  } catch (const Error& e) {
    throw Error(fmt::format("{}: {}", path.string(), e.what()));
  }
}

}  // namespace

void validate(const RunConfig& cfg) {
  if (cfg.map_path.empty() == cfg.model_path.empty()) {
    throw Error("exactly one of a map file and a model file is required");
  }
  if (cfg.dra_path.empty()) throw Error("a DRA file is required");
  if (cfg.rsp.horizon < 1) throw Error("the lookahead horizon t must be >= 1");
  if (!(cfg.ac.epsilon > 0.0)) throw Error("epsilon must be > 0");
  if (cfg.ac.eval_every < 1) throw Error("the evaluation cadence must be >= 1");
  if (cfg.ac.max_iterations < 1) throw Error("max iterations must be >= 1");
  if (!(cfg.ac.lambda >= 0.0 && cfg.ac.lambda < 1.0)) throw Error("lambda must be in [0, 1)");
  if (!cfg.ac.theta0.allFinite()) throw Error("theta0 must be finite");
  if (!(cfg.ac.critic_step.scale > 0.0) || !(cfg.ac.actor_step.scale > 0.0) ||
      cfg.ac.critic_step.exponent < 0.0 || cfg.ac.actor_step.exponent < 0.0) {
    throw Error("step-size schedules must be positive and non-increasing");
  }
  if (!(cfg.ac.actor.gamma_bound > 0.0)) throw Error("the step bound C must be > 0");
  if (!(cfg.noise.eta_ok > 0.0 && cfg.noise.eta_ok <= 1.0)) throw Error("eta_ok must be in (0, 1]");
}

std::unique_ptr<const Problem> Problem::load(const RunConfig& cfg, bool require_amec) {
  validate(cfg);
  std::unique_ptr<Problem> p(new Problem(cfg));
  if (!cfg.map_path.empty()) {
    p->env_ = with_context(cfg.map_path, [&] { return parse_map(read_file(cfg.map_path)); });
    p->grid_ = with_context(cfg.map_path, [&] { return build_nts(*p->env_, cfg.noise); });
    p->base_ = std::make_unique<LabeledModel>(p->grid_->model);
  } else {
    p->base_source_model_ = std::make_unique<LabeledModel>(
        with_context(cfg.model_path, [&] { return parse_model(read_file(cfg.model_path)); }));
    p->base_ = std::make_unique<LabeledModel>(nts_from_mdp(*p->base_source_model_));
  }
  p->dra_ = std::make_unique<RabinAutomaton>(
      with_context(cfg.dra_path, [&] { return parse_dra(read_file(cfg.dra_path)); }));

  ProductOptions opts;
  opts.alignment = cfg.alignment;
  p->product_ = std::make_unique<ProductModel>(build_product(*p->base_, *p->dra_, opts));
  p->amecs_ = amecs(*p->product_);
  if (p->amecs_.empty()) {
    if (require_amec) throw NoAmecError();
    return p;
  }
  p->sets_ = goal_and_bad_sets(p->product_->model, p->amecs_);
  if (p->sets_.goal[p->product_->model.initial()]) {
    throw Error("the initial product state already lies in an AMEC; nothing to learn");
  }
  p->ssp_ = std::make_unique<SspModel>(mrp_to_ssp(p->product_->model, p->sets_));
  p->policy_ = std::make_unique<LookaheadPolicy>(*p->ssp_, cfg.rsp);
  return p;
}

std::unique_ptr<TransitionSource> Problem::make_source() const {
  if (grid_) return std::make_unique<GridTransitionSource>(*env_, *grid_, cfg_.noise);
  if (base_source_model_->is_nts()) {
    throw Error("the model file has no transition probabilities (NTS mode)");
  }
  return std::make_unique<ModelTransitionSource>(*base_source_model_);
}

std::string Problem::base_state_name(StateId q) const {
  if (grid_) return pair_name(*env_, grid_->states[q]);
  return std::to_string(q);
}

std::size_t Problem::ssp_pair_count() const {
  std::size_t n = 0;
  for (StateId x = 0; x < ssp_->model.num_states(); ++x) {
    if (x == ssp_->terminal || ssp_->bad[x]) continue;
    n += ssp_->model.choices(x).size();
  }
  return n;
}

void Problem::build_oracle() const {
  std::call_once(oracle_once_, [this] {
    if (!ssp_) throw NoAmecError();
    auto o = std::make_unique<Oracle>();
    o->source = make_source();
    o->mdp = std::make_unique<LabeledModel>(ltlac::product_mdp(*product_, *dra_, *base_, *o->source));
    o->sets = goal_and_bad_sets(*o->mdp, sets_.goal);
    o->optimum = max_reach(*o->mdp, o->sets);
    oracle_ = std::move(o);
  });
}

const LabeledModel& Problem::product_mdp() const {
  build_oracle();
  return *oracle_->mdp;
}

const GoalSets& Problem::mdp_sets() const {
  build_oracle();
  return oracle_->sets;
}

const ReachResult& Problem::optimum() const {
  build_oracle();
  return oracle_->optimum;
}

double Problem::ssp_policy_probability(const StationaryPolicy& ssp_policy) const {
  build_oracle();
  return eval_policy_reach(*oracle_->mdp, lift_to_product(*this, ssp_policy), oracle_->sets);
}

double Problem::rsp_probability(const Vec2& theta) const {
  return ssp_policy_probability(policy_->policy_table(theta));
}

StationaryPolicy lift_to_product(const Problem& p, const StationaryPolicy& ssp_policy) {
  const auto& ssp = p.ssp();
  if (ssp_policy.num_states() != ssp.model.num_states()) {
    throw ModelError("policy size does not match the SSP");
  }
  const std::size_t n = p.product().model.num_states();
  std::vector<std::vector<ActionProb>> table(n);
  for (StateId s = 0; s < n; ++s) {
    const StateId x = ssp.from_product[s];
    if (x == ssp.terminal) continue;
    const auto dist = ssp_policy.at(x);
    table[s].assign(dist.begin(), dist.end());
  }
  return StationaryPolicy(PolicyKind::Randomized, std::move(table));
}

RunReport run_once(const Problem& p, std::uint64_t seed) {
  if (!p.has_ssp()) throw NoAmecError();
  const auto& cfg = p.config();
  auto source = p.make_source();
  ProductProbabilityProvider provider(p.product(), p.automaton(), p.base(), p.ssp(), *source);

  ActorCriticConfig ac = cfg.ac;
  ac.seed = seed;
  PolicyEvaluator evaluate;
  if (cfg.exact) evaluate = [&p](const Vec2& theta) { return p.rsp_probability(theta); };

  RunReport r;
  r.seed = seed;
  r.run = run_actor_critic(p.ssp(), provider, p.policy(), ac, evaluate);
  r.pairs_computed = source->pairs_computed();
  r.ssp_pairs_computed = provider.pairs_computed();
  if (cfg.exact) {
    const auto& last = r.run.trace.back();
    r.final_probability = last.exact_prob ? *last.exact_prob : p.rsp_probability(r.run.theta);
    r.optimal_probability = p.optimum().initial_value(p.product_mdp());
  }
  return r;
}

std::vector<RunReport> run_seeds(const Problem& p, const std::vector<std::uint64_t>& seeds,
                                 std::size_t threads) {
  std::vector<RunReport> out(seeds.size());
  std::vector<std::exception_ptr> errors(seeds.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, seeds.size());
  if (p.config().exact && !seeds.empty()) p.optimum();  // build the oracle once, up front

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++) {
      try {
        out[i] = run_once(p, seeds[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::jthread> pool;
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  pool.clear();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

namespace {

Json problem_json(const Problem& p) {
  Json j;
  j["task"] = p.config().task;
  j["base_states"] = p.base().num_states();
  j["base_pairs"] = p.base().num_choices();
  j["dra_states"] = p.automaton().num_states();
  j["product_states"] = p.product().model.num_states();
  j["product_states_unpruned"] = p.product().unpruned_states;
  j["product_pairs"] = p.product().model.num_choices();
  j["amec_count"] = p.accepting_components().size();
  if (p.has_ssp()) {
    j["goal_states"] = std::count(p.sets().goal.begin(), p.sets().goal.end(), 1);
    j["bad_states"] = std::count(p.sets().bad.begin(), p.sets().bad.end(), 1);
    j["ssp_states"] = p.ssp().model.num_states();
    j["ssp_pairs"] = p.ssp_pair_count();
  }
  return j;
}

Json run_json(const RunReport& r) {
  Json j;
  j["seed"] = r.seed;
  j["converged"] = r.run.converged;
  j["iterations"] = r.run.iterations;
  j["episodes"] = r.run.episodes;
  j["theta"] = {r.run.theta[0], r.run.theta[1]};
  j["grad_norm_ema"] = r.run.trace.empty() ? 0.0 : r.run.trace.back().grad_norm_ema;
  j["pairs_computed"] = r.pairs_computed;
  j["ssp_pairs_computed"] = r.ssp_pairs_computed;
  j["singular_solves"] = r.run.singular_solves;
  if (r.final_probability) j["final_probability"] = *r.final_probability;
  if (r.optimal_probability) j["optimal_probability"] = *r.optimal_probability;
  if (r.final_probability && r.optimal_probability && *r.optimal_probability > 0.0) {
    j["ratio"] = *r.final_probability / *r.optimal_probability;
  }
  return j;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::string summary_json(const Problem& p, const RunReport& r) {
  Json j = problem_json(p);
  j["run"] = run_json(r);
  return j.dump(2) + "\n";
}

std::string aggregate_json(const Problem& p, const std::vector<RunReport>& runs) {
  Json j = problem_json(p);
  j["runs"] = Json::array();
  std::vector<double> ratios;
  for (const auto& r : runs) {
    j["runs"].push_back(run_json(r));
    if (r.final_probability && r.optimal_probability && *r.optimal_probability > 0.0) {
      ratios.push_back(*r.final_probability / *r.optimal_probability);
    }
  }
  if (!ratios.empty()) j["median_ratio"] = median(ratios);
  return j.dump(2) + "\n";
}

std::string policy_tsv(const Problem& p, const StationaryPolicy& ssp_policy) {
  const auto& ssp = p.ssp();
  std::string out = "ssp_state\tproduct_state\tbase_state\tdra_state\taction\tprob\n";
  for (StateId x = 0; x < ssp.model.num_states(); ++x) {
    if (x == ssp.terminal) continue;
    const StateId s = ssp.to_product[x];
    const auto [q, a] = p.product().projection[s];
    for (const auto& [u, prob] : ssp_policy.at(x)) {
      out += fmt::format("{}\t{}\t{}\t{}\t{}\t{:.17g}\n", x, s, p.base_state_name(q), a,
                         ssp.model.action_name(u), prob);
    }
  }
  return out;
}

StationaryPolicy parse_policy_tsv(const Problem& p, std::string_view text) {
  const auto& m = p.ssp().model;
  std::vector<std::vector<ActionProb>> table(m.num_states());
  int line = 0;
  std::istringstream in{std::string(text)};
  std::string row;
  while (std::getline(in, row)) {
    ++line;
    if (!row.empty() && row.back() == '\r') row.pop_back();
    if (row.empty() || row.starts_with("ssp_state")) continue;
    const auto toks = detail::split_ws(row);
    if (toks.size() != 6) throw ParseError(line, "expected 6 tab-separated columns");
    const auto x = detail::parse_number<StateId>(toks[0], line, "SSP state");
    if (x >= m.num_states() || x == p.ssp().terminal) {
      throw ParseError(line, fmt::format("SSP state {} out of range", x));
    }
    const auto u = m.find_action(toks[4]);
    if (!u || !m.is_enabled(x, *u)) {
      throw ParseError(line, fmt::format("action '{}' not enabled at SSP state {}", toks[4], x));
    }
    const auto prob = detail::parse_number<double>(toks[5], line, "probability");
    table[x].push_back({*u, prob});
  }
  StationaryPolicy mu(PolicyKind::Randomized, std::move(table));
  mu.validate(m);
  return mu;
}

void write_run_outputs(const Problem& p, const RunReport& r, const fs::path& dir) {
  fs::create_directories(dir);
  std::ostringstream trace;
  write_trace_csv(trace, r.run.trace);
  write_file(dir / "trace.csv", trace.str());
  write_file(dir / "summary.json", summary_json(p, r));
  write_file(dir / "policy.tsv", policy_tsv(p, p.policy().policy_table(r.run.theta)));
}

namespace {

void print_run(const RunReport& r) {
  std::cout << fmt::format("seed {}: {} after {} iterations, theta = ({:.6g}, {:.6g})\n", r.seed,
                           r.run.converged ? "converged" : "iteration cap", r.run.iterations,
                           r.run.theta[0], r.run.theta[1]);
  std::cout << fmt::format("  pairs computed: {} base, {} product\n", r.pairs_computed,
                           r.ssp_pairs_computed);
  if (r.final_probability && r.optimal_probability) {
    std::cout << fmt::format("  RSP probability {:.6f}, optimum {:.6f}\n", *r.final_probability,
                             *r.optimal_probability);
  }
}

template <typename F>
int guarded(F&& f) {
  try {
    return f();
  } catch (const NoAmecError& e) {
    std::cerr << e.what() << "\n";
    return kExitNoAmec;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
}

}  // namespace

int synthesize(const RunConfig& cfg) {
  return guarded([&] {
    auto p = Problem::load(cfg);
    if (cfg.seeds.size() <= 1) {
      const auto seed = cfg.seeds.empty() ? cfg.ac.seed : cfg.seeds.front();
      const auto r = run_once(*p, seed);
      write_run_outputs(*p, r, cfg.output_dir);
      print_run(r);
      return r.run.converged ? kExitConverged : kExitCapped;
    }
    const auto runs = run_seeds(*p, cfg.seeds, cfg.threads);
    bool all_converged = true;
    for (const auto& r : runs) {
      write_run_outputs(*p, r, cfg.output_dir / fmt::format("seed_{}", r.seed));
      print_run(r);
      all_converged = all_converged && r.run.converged;
    }
    fs::create_directories(cfg.output_dir);
    write_file(cfg.output_dir / "summary.json", aggregate_json(*p, runs));
    return all_converged ? kExitConverged : kExitCapped;
  });
}

namespace {

void write_compare_outputs(const Problem& p, const RunReport& r, const fs::path& dir) {
  write_run_outputs(p, r, dir);
  const double opt = *r.optimal_probability;
  std::string curve = "k,rsp_probability,optimal_probability\n";
  for (const auto& row : r.run.trace) {
    if (row.exact_prob) curve += fmt::format("{},{:.17g},{:.17g}\n", row.k + 1, *row.exact_prob, opt);
  }
  write_file(dir / "curve.csv", curve);
}

}  // namespace

int compare(const RunConfig& cfg) {
  return guarded([&] {
    RunConfig c = cfg;
    c.exact = true;
    auto p = Problem::load(c);
    std::vector<RunReport> runs;
    if (c.seeds.size() <= 1) {
      runs.push_back(run_once(*p, c.seeds.empty() ? c.ac.seed : c.seeds.front()));
      write_compare_outputs(*p, runs.front(), c.output_dir);
    } else {
      runs = run_seeds(*p, c.seeds, c.threads);
      for (const auto& r : runs) write_compare_outputs(*p, r, c.output_dir / fmt::format("seed_{}", r.seed));
      write_file(c.output_dir / "summary.json", aggregate_json(*p, runs));
    }

    const auto& values = p->optimum().values;
    std::string table = "product_state,base_state,dra_state,value\n";
    for (StateId s = 0; s < values.size(); ++s) {
      const auto [q, a] = p->product().projection[s];
      table += fmt::format("{},{},{},{:.17g}\n", s, p->base_state_name(q), a, values[s]);
    }
    write_file(c.output_dir / "values.csv", table);

    bool all_converged = true;
    std::vector<double> finals;
    for (const auto& r : runs) {
      print_run(r);
      finals.push_back(*r.final_probability);
      all_converged = all_converged && r.run.converged;
    }
    const double opt = *runs.front().optimal_probability;
    std::cout << fmt::format("exact optimum {:.6f}, actor-critic {:.6f}{}\n", opt, median(finals),
                             runs.size() > 1 ? " (median)" : "");
    return all_converged ? kExitConverged : kExitCapped;
  });
}

int eval_policy_file(const RunConfig& cfg, const fs::path& policy_path) {
  return guarded([&] {
    auto p = Problem::load(cfg);
    const auto mu = with_context(policy_path, [&] { return parse_policy_tsv(*p, read_file(policy_path)); });
    const double prob = p->ssp_policy_probability(mu);
    const double opt = p->optimum().initial_value(p->product_mdp());
    std::cout << fmt::format("probability {:.17g}\noptimum {:.17g}\n", prob, opt);
    return 0;
  });
}

int build_models(const RunConfig& cfg) {
  return guarded([&] {
    auto p = Problem::load(cfg, false);
    fs::create_directories(cfg.output_dir);
    write_file(cfg.output_dir / "base.model", serialize_model(p->base()));
    write_file(cfg.output_dir / "product.model", serialize_model(p->product().model));
    if (p->grid()) {
      std::string names = "state\tpair\n";
      for (StateId q = 0; q < p->base().num_states(); ++q) {
        names += fmt::format("{}\t{}\n", q, p->base_state_name(q));
      }
      write_file(cfg.output_dir / "base_states.tsv", names);
    }
    Json j = problem_json(*p);
    if (p->has_ssp()) {
      write_file(cfg.output_dir / "ssp.model", serialize_ssp(p->ssp()));
      if (p->has_probabilities()) {
        write_file(cfg.output_dir / "product_mdp.model", serialize_model(p->product_mdp()));
      }
    }
    write_file(cfg.output_dir / "summary.json", j.dump(2) + "\n");
    std::cout << j.dump(2) << "\n";
    return p->has_ssp() ? 0 : kExitNoAmec;
  });
}

}  // namespace ltlac
