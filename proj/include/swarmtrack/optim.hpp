#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "swarmtrack/config.hpp"
#include "swarmtrack/core.hpp"

/// Swarm optimizers used as the redistribution stage of the tracker: classic
/// PSO, quantum-behaved PSO with a mean-best attractor, and the annealed
/// weighted variant (rank-weighted mean best plus Metropolis acceptance).
///
/// Every kernel minimizes. Trackers pass the negated likelihood as the cost.
namespace swarmtrack {

struct Particle {
  TargetState state;
  TargetState velocity;
  double weight = 0.0;
  /// Cost of `state`; the incumbent for Metropolis acceptance.
  double cost = std::numeric_limits<double>::infinity();
  TargetState personal_best;
  double personal_best_cost = std::numeric_limits<double>::infinity();
};

struct Swarm {
  std::vector<Particle> particles;
  TargetState global_best;
  double global_best_cost = std::numeric_limits<double>::infinity();
  int iteration = 0;
  Bounds bounds;

  [[nodiscard]] std::size_t size() const noexcept { return particles.size(); }
  [[nodiscard]] std::size_t dim() const noexcept {
    return particles.empty() ? 0 : particles.front().state.size();
  }
};

/// Builds a swarm at `states` with zero velocity, uniform weights and
/// personal bests equal to the states (costs unknown until evaluated).
inline Swarm make_swarm(std::span<const TargetState> states, Bounds bounds) {
  if (states.empty()) throw std::invalid_argument("make_swarm: empty population");
  Swarm swarm;
  swarm.bounds = std::move(bounds);
  swarm.particles.reserve(states.size());
  const double w = 1.0 / static_cast<double>(states.size());
  for (const auto& s : states) {
    Particle p;
    p.state = s;
    p.velocity = TargetState(s.size());
    p.weight = w;
    p.personal_best = s;
    swarm.particles.push_back(p);
  }
  swarm.global_best = states.front();
  return swarm;
}

namespace detail {

inline TargetState clamp_if_bounded(TargetState s, std::span<const Interval> bounds) {
  if (bounds.empty()) return s;
  for (std::size_t d = 0; d < s.size(); ++d) s[d] = std::clamp(s[d], bounds[d].lo, bounds[d].hi);
  return s;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// PSO
// ---------------------------------------------------------------------------

/// One velocity/position update for every particle. `streams[i]` supplies the
/// r1, r2 draws of particle i, in dimension order (r1 then r2).
template <UniformSource R>
Swarm pso_step(Swarm swarm, double omega, double c1, double c2, std::span<R> streams) {
  if (streams.size() != swarm.size()) throw std::invalid_argument("pso_step: one stream per particle required");
  for (std::size_t i = 0; i < swarm.size(); ++i) {
    auto& p = swarm.particles[i];
    auto& rng = streams[i];
    for (std::size_t d = 0; d < p.state.size(); ++d) {
      const double r1 = rng.uniform();
      const double r2 = rng.uniform();
      p.velocity[d] = omega * p.velocity[d] + c1 * r1 * (p.personal_best[d] - p.state[d]) +
                      c2 * r2 * (swarm.global_best[d] - p.state[d]);
      p.state[d] += p.velocity[d];
    }
    p.state = detail::clamp_if_bounded(p.state, swarm.bounds);
  }
  return swarm;
}

/// Replaces the personal best only on strict improvement.
inline Particle update_personal_best(Particle p, double cost) {
  if (!std::isfinite(cost)) throw std::invalid_argument("update_personal_best: non-finite cost");
  if (cost < p.personal_best_cost) {
    p.personal_best = p.state;
    p.personal_best_cost = cost;
  }
  return p;
}

/// Sets the global best to the lowest personal best (lowest index on ties).
inline void refresh_global_best(Swarm& swarm) {
  if (swarm.particles.empty()) return;
  std::size_t best = 0;
  for (std::size_t i = 1; i < swarm.size(); ++i) {
    if (swarm.particles[i].personal_best_cost < swarm.particles[best].personal_best_cost) best = i;
  }
  swarm.global_best = swarm.particles[best].personal_best;
  swarm.global_best_cost = swarm.particles[best].personal_best_cost;
}

// ---------------------------------------------------------------------------
// QPSO
// ---------------------------------------------------------------------------

/// Per-dimension mean of the personal bests.
inline TargetState mean_best(const Swarm& swarm) {
  if (swarm.particles.empty()) throw std::invalid_argument("mean_best: empty swarm");
  TargetState sum(swarm.dim());
  for (const auto& p : swarm.particles) {
    for (std::size_t d = 0; d < sum.size(); ++d) sum[d] += 1.0 * p.personal_best[d];
  }
  const auto m = static_cast<double>(swarm.size());
  for (auto& v : sum) v /= m;
  return sum;
}

/// Rank weights for the weighted mean best: the best particle (lowest
/// personal-best cost, ties by index) gets alpha_max, the worst alpha_min,
/// linear in between. Returned in particle-index order; they sum to M.
inline std::vector<double> rank_weights(const Swarm& swarm, double alpha_max, double alpha_min) {
  const std::size_t m = swarm.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return swarm.particles[a].personal_best_cost < swarm.particles[b].personal_best_cost;
  });
  std::vector<double> tau(m, 1.0);
  if (m > 1) {
    const double span = alpha_max - alpha_min;
    for (std::size_t r = 0; r < m; ++r) {
      tau[order[r]] = alpha_max - span * static_cast<double>(r) / static_cast<double>(m - 1);
    }
  }
  return tau;
}

/// Mean best with fitness-rank weights. With alpha_max == alpha_min == 1 the
/// result is bitwise equal to mean_best.
inline TargetState weighted_mean_best(const Swarm& swarm, double alpha_max, double alpha_min) {
  if (swarm.particles.empty()) throw std::invalid_argument("weighted_mean_best: empty swarm");
  if (!(alpha_max >= alpha_min && alpha_min > 0.0)) {
    throw std::invalid_argument("weighted_mean_best: require alpha_max >= alpha_min > 0");
  }
  const auto tau = rank_weights(swarm, alpha_max, alpha_min);
  TargetState sum(swarm.dim());
  for (std::size_t i = 0; i < swarm.size(); ++i) {
    const auto& pb = swarm.particles[i].personal_best;
    for (std::size_t d = 0; d < sum.size(); ++d) sum[d] += tau[i] * pb[d];
  }
  const auto m = static_cast<double>(swarm.size());
  for (auto& v : sum) v /= m;
  return sum;
}

/// Random point between pBest and gBest, one Phi draw per dimension.
template <UniformSource R>
TargetState local_attractor(const TargetState& personal_best, const TargetState& global_best, R& rng) {
  TargetState p(personal_best.size());
  for (std::size_t d = 0; d < p.size(); ++d) {
    const double phi = rng.uniform();
    p[d] = phi * personal_best[d] + (1.0 - phi) * global_best[d];
  }
  return p;
}

/// Mean-best QPSO move. Per dimension draws u ~ U(0,1] then the sign draw;
/// the jump is added when the sign draw is below 0.5.
template <UniformSource R>
TargetState qpso_position_update(const TargetState& x, const TargetState& attractor, const TargetState& mbest,
                                 double beta, R& rng, std::span<const Interval> bounds = {}) {
  if (!(beta > 0.0)) throw std::invalid_argument("qpso_position_update: beta must be positive");
  TargetState next(x.size());
  for (std::size_t d = 0; d < x.size(); ++d) {
    const double u = uniform_open_closed(rng);
    const double sign = rng.uniform();
    const double jump = beta * std::abs(mbest[d] - x[d]) * std::log(1.0 / u);
    next[d] = sign < 0.5 ? attractor[d] + jump : attractor[d] - jump;
  }
  return detail::clamp_if_bounded(next, bounds);
}

/// Contraction-expansion coefficient, linear from beta_hi at t = 0 to
/// beta_lo at t = t_max.
inline double beta_schedule(int t_current, int t_max, double beta_hi = 0.9, double beta_lo = 0.5) {
  if (t_max <= 0) throw std::invalid_argument("beta_schedule: t_max must be positive");
  if (t_current < 0 || t_current > t_max) throw std::out_of_range("beta_schedule: t_current outside [0, t_max]");
  return (beta_hi - beta_lo) * static_cast<double>(t_max - t_current) / static_cast<double>(t_max) + beta_lo;
}

// ---------------------------------------------------------------------------
// Annealing
// ---------------------------------------------------------------------------

struct AnnealState {
  double t0 = 100.0;
  double temperature = 100.0;
  int iteration = 0;
};

inline AnnealState make_anneal(double t0) { return {t0, t0, 0}; }

/// T_t = T0 * exp(-t).
inline AnnealState cooling_step(AnnealState a) {
  ++a.iteration;
  a.temperature = a.t0 * std::exp(-static_cast<double>(a.iteration));
  return a;
}

/// Metropolis criterion for a minimization step; delta_f is candidate cost
/// minus incumbent cost. Always consumes one draw.
template <UniformSource R>
bool metropolis_accept(double delta_f, double temperature, R& rng) {
  const double draw = rng.uniform();
  if (delta_f < 0.0) return true;
  const double theta = std::exp(-delta_f / temperature);
  return draw < theta;
}

// ---------------------------------------------------------------------------
// Driver
// ---------------------------------------------------------------------------

enum class Algorithm { PSO, QPSO, AWQPSO };

inline std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::PSO: return "PSO";
    case Algorithm::QPSO: return "QPSO";
    case Algorithm::AWQPSO: return "AWQPSO";
  }
  return "?";
}

inline std::optional<Algorithm> parse_algorithm(std::string_view s) {
  if (s == "PSO" || s == "pso") return Algorithm::PSO;
  if (s == "QPSO" || s == "qpso") return Algorithm::QPSO;
  if (s == "AWQPSO" || s == "awqpso") return Algorithm::AWQPSO;
  return std::nullopt;
}

struct OptimizerVariant {
  Algorithm tag = Algorithm::AWQPSO;
  double omega = 0.5;
  double c1 = 2.05;
  double c2 = 2.05;
  double beta_hi = 0.9;
  double beta_lo = 0.5;
  double t0 = 100.0;
  double alpha_max = 1.5;
  double alpha_min = 0.5;

  static OptimizerVariant from_config(Algorithm tag, const TrackerConfig& c) {
    return {tag, c.omega, c.c1, c.c2, c.beta_hi, c.beta_lo, c.t0, c.alpha_max, c.alpha_min};
  }
};

class NonFiniteCost : public std::runtime_error {
 public:
  explicit NonFiniteCost(const TargetState& s)
      : std::runtime_error(describe(s)), state_(s) {}
  [[nodiscard]] const TargetState& state() const noexcept { return state_; }

 private:
  static std::string describe(const TargetState& s) {
    std::string msg = "cost function returned a non-finite value at (";
    for (std::size_t d = 0; d < s.size(); ++d) {
      if (d) msg += ", ";
      msg += format_number(s[d]);
    }
    return msg + ")";
  }
  TargetState state_;
};

/// Per-particle random streams of one optimizer run: one for moves, one for
/// acceptance draws, so annealing does not shift the move sequence.
struct OptimizerStreams {
  std::vector<RandomStream> motion;
  std::vector<RandomStream> acceptance;

  OptimizerStreams(std::size_t n, std::uint64_t seed, std::uint64_t key) {
    motion.reserve(n);
    acceptance.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      motion.emplace_back(seed, stream_key(key, i, 0));
      acceptance.emplace_back(seed, stream_key(key, i, 1));
    }
  }
};

struct OptimizerLimits {
  int t_max = 50;
  /// Stop once the global best cost is at or below this value.
  double stop_cost = -std::numeric_limits<double>::infinity();
};

namespace detail {

template <class Cost>
double checked_cost(Cost& cost, const TargetState& s) {
  const double c = static_cast<double>(cost(s));
  if (!std::isfinite(c)) throw NonFiniteCost(s);
  return c;
}

}  // namespace detail

/// Evaluates the swarm's current positions and seeds personal and global
/// bests from them.
template <class Cost>
void evaluate_initial(Swarm& swarm, Cost& cost) {
  for (auto& p : swarm.particles) {
    p.cost = detail::checked_cost(cost, p.state);
    p.personal_best_cost = std::numeric_limits<double>::infinity();
    p = update_personal_best(p, p.cost);
  }
  refresh_global_best(swarm);
}

/// Runs one optimizer to completion. The loop body executes at least once and
/// repeats until `limits.t_max` iterations or the global best reaches
/// `limits.stop_cost`. `swarm.iteration` reports the iterations performed.
///
/// The cost callable must be deterministic; all reductions run in particle
/// index order.
template <class Cost>
Swarm run_optimizer(const OptimizerVariant& variant, Cost&& cost, const OptimizerLimits& limits, Swarm swarm,
                    std::uint64_t seed, std::uint64_t stream_base = 0) {
  if (swarm.particles.empty()) throw std::invalid_argument("run_optimizer: empty swarm");
  if (limits.t_max <= 0) throw std::invalid_argument("run_optimizer: t_max must be positive");
  OptimizerStreams streams(swarm.size(), seed, stream_base);
  evaluate_initial(swarm, cost);
  for (auto& p : swarm.particles) p.velocity = TargetState(p.state.size());

  AnnealState anneal = make_anneal(variant.t0);
  int t = 0;
  do {
    switch (variant.tag) {
      case Algorithm::PSO: {
        swarm = pso_step(std::move(swarm), variant.omega, variant.c1, variant.c2, std::span(streams.motion));
        for (auto& p : swarm.particles) {
          p.cost = detail::checked_cost(cost, p.state);
          p = update_personal_best(p, p.cost);
        }
        break;
      }
      case Algorithm::QPSO:
      case Algorithm::AWQPSO: {
        const bool annealed = variant.tag == Algorithm::AWQPSO;
        const double beta = beta_schedule(t, limits.t_max, variant.beta_hi, variant.beta_lo);
        const TargetState mbest =
            annealed ? weighted_mean_best(swarm, variant.alpha_max, variant.alpha_min) : mean_best(swarm);
        for (std::size_t i = 0; i < swarm.size(); ++i) {
          auto& p = swarm.particles[i];
          auto& rng = streams.motion[i];
          const TargetState attractor = local_attractor(p.personal_best, swarm.global_best, rng);
          const TargetState candidate = qpso_position_update(p.state, attractor, mbest, beta, rng, swarm.bounds);
          const double candidate_cost = detail::checked_cost(cost, candidate);
          if (!annealed || metropolis_accept(candidate_cost - p.cost, anneal.temperature, streams.acceptance[i])) {
            p.state = candidate;
            p.cost = candidate_cost;
          }
          p = update_personal_best(p, p.cost);
        }
        break;
      }
    }
    refresh_global_best(swarm);
    anneal = cooling_step(anneal);
    ++t;
  } while (t < limits.t_max && !(swarm.global_best_cost <= limits.stop_cost));
  swarm.iteration = t;
  return swarm;
}

}  // namespace swarmtrack
