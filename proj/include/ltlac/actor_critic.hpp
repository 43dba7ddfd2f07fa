#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "ltlac/provider.hpp"
#include "ltlac/rsp.hpp"
#include "ltlac/synthesis.hpp"

namespace ltlac {

using Mat2 = Eigen::Matrix2d;

/// scale / (1 + k)^exponent
struct StepSchedule {
  double scale = 1.0;
  double exponent = 0.6;

  double operator()(std::size_t k) const {
    return scale / std::pow(1.0 + static_cast<double>(k), exponent);
  }
};

/// Which statistics produce the critic solution at step k.
///  - Literal: r_{k+1} = -A_k^{-1} b_k (pre-update statistics).
///  - Updated: r_{k+1} = -A_{k+1}^{-1} b_{k+1}.
enum class CriticIndexing { Literal, Updated };

struct CriticState {
  Vec2 z = Vec2::Zero();
  Vec2 b = Vec2::Zero();
  Mat2 A = Mat2::Zero();
  Vec2 r = Vec2::Zero();
  double lambda = 0.9;
  /// Set when the last update recomputed r.
  bool solved = false;
};

struct CriticGate {
  bool open = true;  // false before the warm-up iteration count
  double min_singular_value = 1e-8;
  CriticIndexing indexing = CriticIndexing::Literal;
};

/// z' = lambda z + psi_now; b' = b + gamma (g z - b);
/// A' = A + gamma (z (psi_next - psi_now)^T - A); r from the gated solve.
CriticState critic_update(const CriticState& c, const Vec2& psi_now, const Vec2& psi_next,
                          double cost, double gamma, const CriticGate& gate = {});

struct ActorState {
  Vec2 theta = Vec2(5.0, -0.5);
  /// Moving average of ||(r^T psi) psi||, the gradient-norm surrogate.
  double grad_norm_ema = 0.0;
};

struct ActorParams {
  double gamma_bound = 10.0;  // C in Gamma(r) = min(1, C / ||r||)
  double ema_decay = 0.99;
};

inline double step_bound(const Vec2& r, double c) {
  const double n = r.norm();
  return n <= c ? 1.0 : c / n;
}

/// theta' = theta - beta Gamma(r) (r^T psi_next) psi_next.
ActorState actor_update(const ActorState& a, const Vec2& r, const Vec2& psi_next, double beta,
                        const ActorParams& params = {});

/// Exponential moving average starting from zero.
double gradient_norm_estimate(std::span<const double> magnitudes, double decay = 0.99);

struct ActorCriticConfig {
  double lambda = 0.9;
  Vec2 theta0 = Vec2(5.0, -0.5);
  StepSchedule critic_step{1.0, 0.6};
  StepSchedule actor_step{0.05, 0.85};
  ActorParams actor;
  double epsilon = 1e-3;
  std::size_t max_iterations = 5000;
  /// The stopping rule is not checked before this many iterations.
  std::size_t min_iterations = 500;
  /// The critic solve stays closed until this many iterations have passed.
  std::size_t warmup_iterations = 50;
  double min_singular_value = 1e-8;
  CriticIndexing indexing = CriticIndexing::Literal;
  bool reset_trace_on_restart = false;
  std::uint64_t seed = 1;
  /// Exact evaluation cadence in iterations; 0 disables it.
  std::size_t eval_every = 0;
};

struct TraceRow {
  std::size_t k = 0;
  Vec2 theta = Vec2::Zero();
  Vec2 r = Vec2::Zero();
  double cost = 0.0;
  std::size_t episodes = 0;
  std::size_t pairs_computed = 0;
  double grad_norm_ema = 0.0;
  std::optional<double> exact_prob;
};

struct RunResult {
  Vec2 theta = Vec2::Zero();
  bool converged = false;
  std::size_t iterations = 0;
  std::size_t episodes = 0;
  std::size_t singular_solves = 0;
  std::vector<TraceRow> trace;
};

/// Maps a parameter vector to the exact reachability probability of its RSP.
using PolicyEvaluator = std::function<double(const Vec2&)>;

/// Runs the LSTD actor-critic on `ssp` (NTS mode), drawing transition
/// probabilities from `provider` only along the simulated path.
RunResult run_actor_critic(const SspModel& ssp, ProbabilityProvider& provider,
                           const LookaheadPolicy& policy, const ActorCriticConfig& cfg,
                           const PolicyEvaluator& evaluate = {});

void write_trace_csv(std::ostream& out, std::span<const TraceRow> trace);

}  // namespace ltlac
