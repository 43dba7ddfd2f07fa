// ltlac: temporal-logic motion control by LSTD actor-critic.
//
//   ltlac synthesize --map data/desk.map --dra data/formula7.dra --out out/
//   ltlac compare    --config data/desk.toml
//   ltlac eval       --config data/desk.toml --policy out/policy.tsv
//   ltlac build      --model m.model --dra f.dra --out models/

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ltlac/pipeline.hpp"

namespace {

using ltlac::CriticIndexing;
using ltlac::LabelAlignment;
using ltlac::RunConfig;

struct ExtraOptions {
  std::vector<double> theta0;
  std::vector<double> confusion;
  std::string confusion_preset = "uniform";
};

void add_run_options(CLI::App& app, RunConfig& cfg, ExtraOptions& extra) {
  app.set_config("--config", "", "TOML/INI configuration file; flags override it");

  app.add_option("--task", cfg.task, "Task name shown in reports");
  auto* map = app.add_option("--map", cfg.map_path, "Environment map file")->check(CLI::ExistingFile);
  auto* model = app.add_option("--model", cfg.model_path, "Labeled MDP model file")->check(CLI::ExistingFile);
  map->excludes(model);
  app.add_option("--dra", cfg.dra_path, "Rabin automaton file")->check(CLI::ExistingFile);
  app.add_option("--out", cfg.output_dir, "Output directory");

  app.add_option("--eta-ok", cfg.noise.eta_ok, "Probability that a primitive does what it is asked");
  app.add_option("--confusion-preset", extra.confusion_preset,
                 "uniform: any wrong arm; adjacent: never left for right")
      ->check(CLI::IsMember({"uniform", "adjacent"}));
  app.add_option("--confusion", extra.confusion,
                 "3x3 wrong-outcome weights [intended][actual], row-major L S R")
      ->expected(9);
  app.add_option("--mc-samples", cfg.noise.monte_carlo_samples,
                 "Estimate probabilities from this many sampled outcomes (0: closed form)");
  app.add_option("--noise-seed", cfg.noise.seed, "Seed of the sampled probability estimates");
  app.add_option("--alignment", cfg.alignment, "Automaton reads the label of the next or current state")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, LabelAlignment>{{"next", LabelAlignment::NextState},
                                                {"current", LabelAlignment::CurrentState}},
          CLI::ignore_case));

  app.add_option("--horizon,-t", cfg.rsp.horizon, "Lookahead window t");
  app.add_option("--radius", cfg.rsp.radius, "Neighborhood radius (0: same as t)");
  app.add_option("--dmax", cfg.rsp.unreachable_progress,
                 "Progress value of states that cannot reach the goal (<0: number of states)");
  app.add_option("--max-sequences", cfg.rsp.max_sequences, "Cap on action sequences per state");

  app.add_option("--lambda", cfg.ac.lambda, "Eligibility trace decay");
  app.add_option("--theta0", extra.theta0, "Initial parameters")->expected(2);
  app.add_option("--critic-step-scale", cfg.ac.critic_step.scale);
  app.add_option("--critic-step-exponent", cfg.ac.critic_step.exponent);
  app.add_option("--actor-step-scale", cfg.ac.actor_step.scale);
  app.add_option("--actor-step-exponent", cfg.ac.actor_step.exponent);
  app.add_option("--gamma-bound", cfg.ac.actor.gamma_bound, "C in min(1, C/|r|)");
  app.add_option("--ema-decay", cfg.ac.actor.ema_decay, "Decay of the gradient-norm average");
  app.add_option("--epsilon", cfg.ac.epsilon, "Stop once the gradient-norm average falls below this");
  app.add_option("--max-iterations", cfg.ac.max_iterations);
  app.add_option("--min-iterations", cfg.ac.min_iterations, "No stopping before this many iterations");
  app.add_option("--warmup", cfg.ac.warmup_iterations, "Iterations before the critic is solved");
  app.add_option("--min-singular-value", cfg.ac.min_singular_value);
  app.add_option("--r-indexing", cfg.ac.indexing, "Critic solve from pre- or post-update statistics")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, CriticIndexing>{{"literal", CriticIndexing::Literal},
                                                {"updated", CriticIndexing::Updated}},
          CLI::ignore_case));
  app.add_flag("--reset-trace-on-restart", cfg.ac.reset_trace_on_restart);
  app.add_option("--seed", cfg.ac.seed);
  app.add_option("--seeds", cfg.seeds, "Run one pipeline per seed, concurrently");
  app.add_option("--threads", cfg.threads, "Worker threads for --seeds (0: all cores)");
  app.add_option("--eval-every", cfg.ac.eval_every, "Exact evaluation cadence in iterations");
  app.add_flag("!--no-exact", cfg.exact, "Skip the exact oracle");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LSTD actor-critic synthesis of temporal-logic motion policies"};
  app.require_subcommand(1);
  app.fallthrough();

  RunConfig cfg;
  ExtraOptions extra;
  extra.theta0 = {cfg.ac.theta0[0], cfg.ac.theta0[1]};
  add_run_options(app, cfg, extra);

  auto* synth = app.add_subcommand("synthesize", "Learn an RSP and report it");
  auto* cmp = app.add_subcommand("compare", "Learn an RSP and compare it with the exact optimum");
  auto* eval = app.add_subcommand("eval", "Exact reachability of a saved policy table");
  std::string policy_path;
  eval->add_option("--policy", policy_path, "policy.tsv written by synthesize")
      ->required()
      ->check(CLI::ExistingFile);
  auto* build = app.add_subcommand("build", "Write base, product and SSP model files");

  CLI11_PARSE(app, argc, argv);
  cfg.ac.theta0 = ltlac::Vec2(extra.theta0[0], extra.theta0[1]);
  if (extra.confusion_preset == "adjacent") cfg.noise.confusion = ltlac::kAdjacentConfusion;
  if (!extra.confusion.empty()) {
    for (std::size_t i = 0; i < 9; ++i) cfg.noise.confusion[i / 3][i % 3] = extra.confusion[i];
  }

  if (*synth) return ltlac::synthesize(cfg);
  if (*cmp) return ltlac::compare(cfg);
  if (*eval) return ltlac::eval_policy_file(cfg, policy_path);
  if (*build) return ltlac::build_models(cfg);
  return ltlac::kExitError;
}
