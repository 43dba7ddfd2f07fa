#include "ltlac/actor_critic.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>
#include <fmt/format.h>

namespace ltlac {

CriticState critic_update(const CriticState& c, const Vec2& psi_now, const Vec2& psi_next,
                          double cost, double gamma, const CriticGate& gate) {
  CriticState out = c;
  out.z = c.lambda * c.z + psi_now;
  out.b = c.b + gamma * (cost * c.z - c.b);
  out.A = c.A + gamma * (c.z * (psi_next - psi_now).transpose() - c.A);
  out.solved = false;
  if (!gate.open) return out;

  const Mat2& A = gate.indexing == CriticIndexing::Literal ? c.A : out.A;
  const Vec2& b = gate.indexing == CriticIndexing::Literal ? c.b : out.b;
  Eigen::JacobiSVD<Mat2> svd(A);
  if (svd.singularValues().minCoeff() < gate.min_singular_value) return out;
  const Vec2 r = -A.fullPivLu().solve(b);
  if (!r.allFinite()) return out;
  out.r = r;
  out.solved = true;
  return out;
}

ActorState actor_update(const ActorState& a, const Vec2& r, const Vec2& psi_next, double beta,
                        const ActorParams& params) {
  const Vec2 direction = r.dot(psi_next) * psi_next;
  ActorState out;
  out.theta = a.theta - beta * step_bound(r, params.gamma_bound) * direction;
  out.grad_norm_ema = params.ema_decay * a.grad_norm_ema + (1.0 - params.ema_decay) * direction.norm();
  return out;
}

double gradient_norm_estimate(std::span<const double> magnitudes, double decay) {
  double ema = 0.0;
  for (double m : magnitudes) ema = decay * ema + (1.0 - decay) * m;
  return ema;
}

namespace {

StateId sample_successor(const std::vector<Edge>& edges, Rng& rng) {
  if (edges.empty()) throw Error("provider returned an empty distribution");
  const double x = uniform01(rng);
  double acc = 0.0;
  for (const auto& e : edges) {
    acc += e.weight;
    if (x < acc) return e.target;
  }
  return edges.back().target;
}

}  // namespace

RunResult run_actor_critic(const SspModel& ssp, ProbabilityProvider& provider,
                           const LookaheadPolicy& policy, const ActorCriticConfig& cfg,
                           const PolicyEvaluator& evaluate) {
  if (cfg.max_iterations == 0) throw Error("max_iterations must be positive");
  if (!(cfg.epsilon > 0.0)) throw Error("epsilon must be positive");

  Rng rng(cfg.seed);
  const StateId x0 = ssp.initial();
  const StateId terminal = ssp.terminal;

  CriticState critic;
  critic.lambda = cfg.lambda;
  ActorState actor;
  actor.theta = cfg.theta0;

  // psi at the terminal is zero: its action does not influence anything.
  auto psi = [&](StateId x, ActionId u) -> Vec2 {
    if (x == terminal) return Vec2::Zero();
    return policy.log_policy_gradient(actor.theta, x, u);
  };
  auto act = [&](StateId x) -> ActionId {
    if (x == terminal) return ssp.model.enabled(x).front();
    return policy.sample_action(actor.theta, x, rng);
  };

  RunResult result;
  result.trace.reserve(cfg.max_iterations);

  StateId x = x0;
  ActionId u = act(x);
  Vec2 psi_now = psi(x, u);
  std::size_t episodes = 0;

  for (std::size_t k = 0; k < cfg.max_iterations; ++k) {
    const double g = ssp.cost(x, u);
    StateId x_next;
    if (x == terminal) {
      x_next = x0;
    } else {
      x_next = sample_successor(provider.probabilities(x, u), rng);
    }
    if (x_next == terminal) ++episodes;
    const bool restarted = x == terminal;

    const ActionId u_next = act(x_next);
    const Vec2 psi_next = psi(x_next, u_next);

    if (restarted && cfg.reset_trace_on_restart) critic.z.setZero();
    const Vec2 r_k = critic.r;
    CriticGate gate;
    gate.open = k >= cfg.warmup_iterations;
    gate.min_singular_value = cfg.min_singular_value;
    gate.indexing = cfg.indexing;
    critic = critic_update(critic, psi_now, psi_next, g, cfg.critic_step(k), gate);
    if (gate.open && !critic.solved) ++result.singular_solves;
    actor = actor_update(actor, r_k, psi_next, cfg.actor_step(k), cfg.actor);

    TraceRow row;
    row.k = k;
    row.theta = actor.theta;
    row.r = critic.r;
    row.cost = g;
    row.episodes = episodes;
    row.pairs_computed = provider.pairs_computed();
    row.grad_norm_ema = actor.grad_norm_ema;

    const bool stop = k + 1 >= cfg.min_iterations && actor.grad_norm_ema <= cfg.epsilon;
    const bool last = stop || k + 1 == cfg.max_iterations;
    if (evaluate && cfg.eval_every > 0 && ((k + 1) % cfg.eval_every == 0 || last)) {
      row.exact_prob = evaluate(actor.theta);
    }
    result.trace.push_back(row);

    x = x_next;
    u = u_next;
    psi_now = psi_next;
    if (stop) {
      result.converged = true;
      break;
    }
  }

  result.theta = actor.theta;
  result.iterations = result.trace.size();
  result.episodes = episodes;
  return result;
}

void write_trace_csv(std::ostream& out, std::span<const TraceRow> trace) {
  out << "k,theta1,theta2,r1,r2,cost,episodes,pairs_computed,grad_norm_ema,exact_prob\n";
  for (const auto& row : trace) {
    out << fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{},{},{:.17g},", row.k,
                       row.theta[0], row.theta[1], row.r[0], row.r[1], row.cost, row.episodes,
                       row.pairs_computed, row.grad_norm_ema);
    if (row.exact_prob) out << fmt::format("{:.17g}", *row.exact_prob);
    out << '\n';
  }
}

}  // namespace ltlac
