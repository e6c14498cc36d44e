#pragma once

// Brute-force reference computations for tests. Nothing here calls into the
// solver modules beyond reading ModelSpec / policy tables, so agreement
// between the two is meaningful.

#include <cstdint>
#include <vector>

#include "seqrd/model.hpp"

namespace seqrd::oracle {

// Exact Bayesian belief over world states given the observation history.
struct BeliefState {
  std::vector<double> dist;
};

// B_1(w) proportional to P_1(w) sigma(o | w).
BeliefState first_belief(const ModelSpec& spec, int o);
// B'(w') proportional to sum_w B(w) p(w' | w) sigma(o | w').
BeliefState exact_belief_step(const BeliefState& b, const ModelSpec& spec, int o);

// Cost-minimizing action under a belief; ties go to the lowest index.
int greedy_action(const BeliefState& b, const ModelSpec& spec);

struct MonteCarloEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  double ci_low = 0.0;   // mean - 1.96 stderr
  double ci_high = 0.0;  // mean + 1.96 stderr
  std::int64_t rollouts = 0;
};

// Average per-step distortion of the unbounded agent that keeps the exact
// belief and acts greedily on it. Rollout i draws from its own generator
// seeded with (seed, i).
MonteCarloEstimate unbounded_baseline(const ModelSpec& spec, std::int64_t num_rollouts, std::uint64_t seed,
                                      int threads = 1);

// The same quantity computed exactly by enumerating world and observation
// histories. Cost grows like (|W| |O|)^n; intended for n <= 8 or so.
double unbounded_exact(const ModelSpec& spec);

// Minimum of the one-step Lagrangian over a grid of policies, |M| = 2 only.
// Every (m, o) slice is parameterized by q(m'=0 | m, o) on {0, step, ..., 1};
// the best grid point is then polished by coordinate search at step / 100.
struct GridSearchResult {
  double lagrangian = 0.0;
  std::vector<double> params;  // q(m'=0 | m, o), index m * |O| + o
};

GridSearchResult grid_search_onestep(const Matrix& theta, const ModelSpec& spec, const Multipliers& mult,
                                     double grid_step = 0.02);

// One-step Lagrangian of the |M| = 2 policy given by params, written with
// entropies: I_C = H(M') - H(M'|M,O), I_M = H(M'|O) - H(M'|M,O),
// I_S = H(M'|M) - H(M'|M,O).
double onestep_lagrangian(const Matrix& theta, const ModelSpec& spec, const Multipliers& mult,
                          const std::vector<double>& params);

struct EnumeratedCost {
  double distortion = 0.0;  // per-step averages
  double i_c = 0.0;
  double i_m = 0.0;
  double i_s = 0.0;
  double lagrangian = 0.0;  // distortion + sum_x gamma_x I_x, averaged
};

// Exact Problem-1 objective of a policy by pushing the joint over
// (M_{t-1}, W_t) forward one dense table at a time.
inline constexpr int kEnumerateLimit = 10000;
EnumeratedCost enumerate_cost(const ModelSpec& spec, const std::vector<Matrix>& policy_tables,
                              const Multipliers& mult = {});

}  // namespace seqrd::oracle
