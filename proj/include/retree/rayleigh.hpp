#pragma once
// One-dimensional height dynamics: unit-speed growth, jumps at rate equal to
// the current value, uniform re-entry on [0, value]. Direct simulator,
// Poisson-field construction, the closed-form transition law, return times,
// jump statistics, and the birth-death chain that approximates the process.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "retree/rng.hpp"
#include "retree/tree.hpp"

namespace retree {

inline void require_nonneg(double v, const char* what) {
  if (!(v >= 0.0))
    throw TreeError(TreeErrorCode::BadInput,
                    std::string(what) + " must be >= 0");
}

// Stationary tail exp(-x^2/2) and friends.
inline double rayleigh_tail(double x) {
  require_nonneg(x, "x");
  return std::exp(-0.5 * x * x);
}

inline double rayleigh_cdf(double x) { return 1.0 - rayleigh_tail(x); }

// Density of the value seen just before a jump, in steady state: jumps
// arrive at rate x, which size-biases the stationary density x e^{-x^2/2}.
inline double size_biased_pdf(double r) {
  require_nonneg(r, "r");
  return std::sqrt(2.0 / M_PI) * r * r * std::exp(-0.5 * r * r);
}

inline double size_biased_cdf(double r) {
  require_nonneg(r, "r");
  return std::erf(r / std::sqrt(2.0)) -
         std::sqrt(2.0 / M_PI) * r * std::exp(-0.5 * r * r);
}

// Law of the value just after a jump (a uniform fraction of a size-biased
// draw): half-normal.
inline double half_normal_pdf(double r) {
  require_nonneg(r, "r");
  return std::sqrt(2.0 / M_PI) * std::exp(-0.5 * r * r);
}

inline double half_normal_cdf(double r) {
  require_nonneg(r, "r");
  return std::erf(r / std::sqrt(2.0));
}

// P{value at time t exceeds x | started at r}. The law mixes a density on
// [0, r+t) with an atom at r+t (no jump yet), so the tail is evaluated
// strictly: the value never exceeds r+t.
inline double transition_tail(double r, double t, double x) {
  require_nonneg(r, "r");
  require_nonneg(t, "t");
  require_nonneg(x, "x");
  if (!(r + t > x)) return 0.0;
  double back = std::max(x - t, 0.0);
  return std::exp(-0.5 * x * x + 0.5 * back * back);
}

struct RayleighPath {
  double r0 = 0.0;
  double horizon = 0.0;
  std::vector<double> jump_times;   // strictly increasing, within [0, horizon]
  std::vector<double> post_values;  // value immediately after each jump
};

inline double path_value(const RayleighPath& p, double t) {
  if (t < 0.0 || t > p.horizon)
    throw TreeError(TreeErrorCode::BadInput, "time outside simulated horizon");
  auto it = std::upper_bound(p.jump_times.begin(), p.jump_times.end(), t);
  if (it == p.jump_times.begin()) return p.r0 + t;
  std::size_t k = static_cast<std::size_t>(it - p.jump_times.begin()) - 1;
  return p.post_values[k] + (t - p.jump_times[k]);
}

inline RayleighPath pdmp_simulate(double r0, double t_max, Rng& rng) {
  require_nonneg(r0, "r0");
  if (!(t_max > 0.0))
    throw TreeError(TreeErrorCode::BadInput, "t_max must be > 0");
  RayleighPath p;
  p.r0 = r0;
  p.horizon = t_max;
  double t = 0.0, cur = r0;
  for (;;) {
    double gap = ramp_gap(cur, rng);
    if (t + gap > t_max) return p;
    t += gap;
    cur = (cur + gap) * rng.uniform();
    p.jump_times.push_back(t);
    p.post_values.push_back(cur);
  }
}

// Value at time t drawn through the graphical construction: a unit Poisson
// field on time x space, where a point (s, y) with y below the path forces
// the value at t down to y + (t - s). Only points with y <= r + s matter,
// a region of area rt + t^2/2.
inline double poisson_construction_sample(double r, double t, Rng& rng) {
  require_nonneg(r, "r");
  if (!(t > 0.0))
    throw TreeError(TreeErrorCode::BadInput, "t must be > 0");
  double area = r * t + 0.5 * t * t;
  double best = r + t;
  std::uint64_t k = rng.poisson(area);
  for (std::uint64_t i = 0; i < k; ++i) {
    // s has density (r+s)/area on [0,t]; invert r s + s^2/2 = U * area.
    double a = rng.uniform() * area;
    double s = 2.0 * a / (r + std::sqrt(r * r + 2.0 * a));
    double y = rng.uniform() * (r + s);
    best = std::min(best, y + (t - s));
  }
  return best;
}

inline double mean_return_time(double x) {
  if (!(x > 0.0))
    throw TreeError(TreeErrorCode::BadInput, "x must be > 0");
  return std::exp(0.5 * x * x) / x;
}

// One realization of the first return to level x from a start at x. The
// first event is necessarily a jump; afterwards the path re-attains x at the
// end of a growth segment, detected in closed form.
inline double simulate_return_time(double x, Rng& rng) {
  if (!(x > 0.0))
    throw TreeError(TreeErrorCode::BadInput, "x must be > 0");
  double t = 0.0, cur = x;
  for (;;) {
    double gap = ramp_gap(cur, rng);
    if (cur < x && cur + gap >= x) return t + (x - cur);
    t += gap;
    cur = (cur + gap) * rng.uniform();
  }
}

struct MeanWithError {
  double mean = 0.0;
  double se = 0.0;
};

inline MeanWithError estimate_return_time(double x, std::uint64_t replicates,
                                          Rng& rng) {
  if (replicates == 0)
    throw TreeError(TreeErrorCode::BadInput, "need at least one replicate");
  double sum = 0.0, sumsq = 0.0;
  for (std::uint64_t i = 0; i < replicates; ++i) {
    double v = simulate_return_time(x, rng);
    sum += v;
    sumsq += v * v;
  }
  double n = static_cast<double>(replicates);
  double mean = sum / n;
  double var = std::max(0.0, (sumsq - n * mean * mean) / (n - 1.0));
  return {mean, std::sqrt(var / n)};
}

// Values around one jump: after the previous jump, just before this jump,
// just after it.
struct JumpTriple {
  double prev_post;
  double pre;
  double post;
};

// Long-run jump statistics, recorded after discarding `burn_in` jumps. The
// default burn-in is far past the relaxation scale of the process; the
// asymptotic laws are size-biased (pre) and half-normal (post) values.
inline std::vector<JumpTriple> jump_triples(std::uint64_t n,
                                            std::uint64_t burn_in, Rng& rng) {
  if (n == 0)
    throw TreeError(TreeErrorCode::BadInput, "need at least one triple");
  std::vector<JumpTriple> out;
  out.reserve(n);
  double cur = 0.0;
  for (std::uint64_t k = 0; k < burn_in + n; ++k) {
    double pre = cur + ramp_gap(cur, rng);
    double post = pre * rng.uniform();
    if (k >= burn_in) out.push_back({cur, pre, post});
    cur = post;
  }
  return out;
}

// Jumps per unit time over [0, t_max].
inline double jump_rate(double t_max, Rng& rng, double r0 = 0.0) {
  require_nonneg(r0, "r0");
  if (!(t_max > 0.0))
    throw TreeError(TreeErrorCode::BadInput, "t_max must be > 0");
  double t = 0.0, cur = r0;
  std::uint64_t jumps = 0;
  for (;;) {
    double gap = ramp_gap(cur, rng);
    if (t + gap > t_max) break;
    t += gap;
    cur = (cur + gap) * rng.uniform();
    ++jumps;
  }
  return static_cast<double>(jumps) / t_max;
}

// Continuous-time birth-death walk on {1..N}: up one at rate (N-i)/N, down
// to each lower state at rate 1/N. Rescaling state by N^{-1/2} and time by
// N^{1/2} approaches the continuous dynamics above.
struct DiscreteChainPath {
  int n_states = 0;
  std::vector<double> times;  // event times, starting at 0
  std::vector<int> states;    // states[k] holds on [times[k], times[k+1])
};

inline int discrete_state_at(const DiscreteChainPath& p, double t) {
  auto it = std::upper_bound(p.times.begin(), p.times.end(), t);
  return p.states[static_cast<std::size_t>(it - p.times.begin()) - 1];
}

inline DiscreteChainPath discrete_chain(int N, int i0, double t_max,
                                        Rng& rng) {
  if (N < 2 || i0 < 1 || i0 > N)
    throw TreeError(TreeErrorCode::BadInput,
                    "need N >= 2 and a start in {1..N}");
  if (!(t_max > 0.0))
    throw TreeError(TreeErrorCode::BadInput, "t_max must be > 0");
  DiscreteChainPath p;
  p.n_states = N;
  p.times.push_back(0.0);
  p.states.push_back(i0);
  double t = 0.0;
  int cur = i0;
  const double exit_rate = static_cast<double>(N - 1) / N;
  for (;;) {
    t += rng.exponential() / exit_rate;
    if (t > t_max) return p;
    // Up with probability (N - cur)/(N - 1), else uniform below.
    if (rng.uniform() * (N - 1) < N - cur)
      cur += 1;
    else
      cur = 1 + static_cast<int>(rng.uniform_int(cur - 1));
    p.times.push_back(t);
    p.states.push_back(cur);
  }
}

}  // namespace retree
