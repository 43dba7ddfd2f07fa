#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "ltlac/actor_critic.hpp"
#include "ltlac/exact.hpp"
#include "ltlac/grid_env.hpp"
#include "ltlac/model.hpp"
#include "ltlac/product.hpp"
#include "ltlac/provider.hpp"
#include "ltlac/rabin.hpp"
#include "ltlac/rsp.hpp"
#include "ltlac/synthesis.hpp"

namespace ltlac {

struct RunConfig {
  std::string task = "task";
  /// Exactly one of map_path / model_path.
  std::filesystem::path map_path;
  std::filesystem::path model_path;
  std::filesystem::path dra_path;
  std::filesystem::path output_dir = "out";

  NoiseModel noise;
  LabelAlignment alignment = LabelAlignment::NextState;
  RspOptions rsp;
  ActorCriticConfig ac;
  /// Compute the optimum and evaluate the RSP exactly along the run.
  bool exact = true;
  /// Multi-seed mode when non-empty; otherwise ac.seed alone.
  std::vector<std::uint64_t> seeds;
  std::size_t threads = 0;  // 0 = hardware concurrency

  RunConfig() { ac.eval_every = 25; }
};

/// Throws Error on inconsistent settings.
void validate(const RunConfig& cfg);

/// No accepting maximal end component: every policy satisfies the task with
/// probability 0.
class NoAmecError : public Error {
 public:
  NoAmecError() : Error("satisfaction probability is 0 for all policies (no AMEC)") {}
};

/// Everything derived from the inputs before learning starts. Immutable
/// after load(), so runs with different seeds may share one instance.
class Problem {
 public:
  /// Throws NoAmecError when `require_amec` and there is none; otherwise the
  /// SSP and policy are left empty in that case.
  static std::unique_ptr<const Problem> load(const RunConfig& cfg, bool require_amec = true);
  bool has_ssp() const { return ssp_ != nullptr; }

  Problem(const Problem&) = delete;
  Problem& operator=(const Problem&) = delete;

  const RunConfig& config() const { return cfg_; }
  const LabeledModel& base() const { return *base_; }
  const RabinAutomaton& automaton() const { return *dra_; }
  const ProductModel& product() const { return *product_; }
  const std::vector<Amec>& accepting_components() const { return amecs_; }
  const GoalSets& sets() const { return sets_; }
  const SspModel& ssp() const { return *ssp_; }
  const LookaheadPolicy& policy() const { return *policy_; }
  const EnvMap* env() const { return env_ ? &*env_ : nullptr; }
  const GridNts* grid() const { return grid_ ? &*grid_ : nullptr; }
  bool has_probabilities() const { return grid_.has_value() || !base_source_model_->is_nts(); }

  /// Fresh, uncounted probability source for one run.
  std::unique_ptr<TransitionSource> make_source() const;
  /// Base-model name of a state ("C1-I2" on maps, the id otherwise).
  std::string base_state_name(StateId q) const;
  /// Enabled pairs outside S-bar* and the terminal of the SSP.
  std::size_t ssp_pair_count() const;

  /// Exact oracle; built on first use, requires probabilities.
  const LabeledModel& product_mdp() const;
  const GoalSets& mdp_sets() const;
  const ReachResult& optimum() const;
  /// Exact reachability of the RSP at theta.
  double rsp_probability(const Vec2& theta) const;
  /// Reachability of a policy given over SSP states.
  double ssp_policy_probability(const StationaryPolicy& ssp_policy) const;

 private:
  explicit Problem(const RunConfig& cfg) : cfg_(cfg) {}
  void build_oracle() const;

  RunConfig cfg_;
  std::optional<EnvMap> env_;
  std::optional<GridNts> grid_;
  std::unique_ptr<LabeledModel> base_source_model_;  // model file contents
  std::unique_ptr<LabeledModel> base_;               // NTS view
  std::unique_ptr<RabinAutomaton> dra_;
  std::unique_ptr<ProductModel> product_;
  std::vector<Amec> amecs_;
  GoalSets sets_;
  std::unique_ptr<SspModel> ssp_;
  std::unique_ptr<LookaheadPolicy> policy_;

  struct Oracle {
    std::unique_ptr<TransitionSource> source;
    std::unique_ptr<LabeledModel> mdp;
    GoalSets sets;
    ReachResult optimum;
  };
  mutable std::once_flag oracle_once_;
  mutable std::unique_ptr<Oracle> oracle_;
};

/// Lifts a policy over SSP states onto product states (undefined on S*).
StationaryPolicy lift_to_product(const Problem& p, const StationaryPolicy& ssp_policy);

struct RunReport {
  std::uint64_t seed = 0;
  RunResult run;
  /// Distinct base (state, action) pairs the probability source computed.
  std::size_t pairs_computed = 0;
  /// Distinct SSP (state, action) pairs requested by the learner.
  std::size_t ssp_pairs_computed = 0;
  std::optional<double> final_probability;
  std::optional<double> optimal_probability;
};

/// One actor-critic run with its own probability source.
RunReport run_once(const Problem& p, std::uint64_t seed);
/// run_once for every seed, concurrently; results in seed order.
std::vector<RunReport> run_seeds(const Problem& p, const std::vector<std::uint64_t>& seeds,
                                 std::size_t threads = 0);

/// Summary record as pretty-printed JSON text.
std::string summary_json(const Problem& p, const RunReport& r);
std::string aggregate_json(const Problem& p, const std::vector<RunReport>& runs);

/// Per-SSP-state action probabilities, one row per (state, action).
std::string policy_tsv(const Problem& p, const StationaryPolicy& ssp_policy);
StationaryPolicy parse_policy_tsv(const Problem& p, std::string_view text);

/// Writes trace.csv, summary.json and policy.tsv into `dir`.
void write_run_outputs(const Problem& p, const RunReport& r, const std::filesystem::path& dir);

/// Exit statuses of the synthesize / compare commands.
inline constexpr int kExitConverged = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitCapped = 2;
inline constexpr int kExitNoAmec = 3;

int synthesize(const RunConfig& cfg);
int compare(const RunConfig& cfg);
/// Exact reachability of a saved policy table; prints it and returns 0.
int eval_policy_file(const RunConfig& cfg, const std::filesystem::path& policy_path);
/// Writes base, product and SSP model files (and the product MDP when
/// probabilities are available).
int build_models(const RunConfig& cfg);

std::string read_file(const std::filesystem::path& path);

}  // namespace ltlac
