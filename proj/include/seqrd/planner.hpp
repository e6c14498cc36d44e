#pragma once

// Sequential bounded planning. A policy q_1..q_n is scored by the mean of
// the one-step Lagrangians along the joint beliefs it induces; the
// cost-to-go vectors nu carry the future part of that score back in time
// so that each step can be re-optimized with a modified cost.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "seqrd/infotheory.hpp"
#include "seqrd/model.hpp"
#include "seqrd/onestep.hpp"

namespace seqrd {

struct Trajectory {
  std::vector<JointBelief> beliefs;    // theta_t for each step of the (sub)horizon
  Policy policies;                     // q_t
  std::vector<CostToGoVector> nus;     // nus[i] precedes step i: nu_{t-1} for step t
  std::vector<Marginals> marginals;    // consistent marginals of q_t under theta_t
  std::vector<StepReport> reports;
  double total_cost = 0.0;             // mean of the per-step Lagrangians

  // Per-step averages of the problem's constraint quantities.
  double distortion = 0.0;
  double i_c = 0.0;
  double i_m = 0.0;
  double i_s = 0.0;

  // Filled by plan(): outer iterations, convergence flag and the cost of
  // the accepted policy after every outer iteration (entry 0 = initial).
  int iterations = 0;
  bool converged = true;
  std::vector<double> cost_trace;
};

JointBelief initial_belief(const ModelSpec& spec);

JointBelief forward_step(const JointBelief& theta, const ModelSpec& spec, const StepPolicy& q);

// d(w, m) + sum_{w'} p(w' | w) nu(m, w').
Matrix modified_cost(const ModelSpec& spec, const CostToGoVector& nu);

StepPolicy update_policy_with_future(const JointBelief& theta, const ModelSpec& spec, const Marginals& marg,
                             const Multipliers& mult, const CostToGoVector& nu);

// nu_{t-1}(m, w) from nu_t: the (O_t, M_t | m, w) expectation of the
// pointwise energy under the modified cost, minus gamma times the expected
// policy entropy. Defined on every cell, including those theta_t gives zero
// mass.
CostToGoVector backward_nu(const ModelSpec& spec, const StepPolicy& q, const Marginals& marg,
                           const Multipliers& mult, const CostToGoVector& nu);

// Runs the policies forward from theta and the cost-to-go backward from
// zero. total_cost is the mean Lagrangian over the given steps.
Trajectory evaluate_suffix(const ModelSpec& spec, const JointBelief& theta, std::span<const StepPolicy> policies,
                           const Multipliers& mult);

Trajectory evaluate_policy(const ModelSpec& spec, const Policy& policy, const Multipliers& mult);

struct StepOptimization {
  StepPolicy policy;
  Trajectory suffix;  // from theta_t, starting with the optimized policy
  double cost = 0.0;  // suffix.total_cost
  int iterations = 0;
  bool converged = false;
  std::vector<double> cost_trace;
};

// Optimizes q_t given theta_t and a fixed suffix q_{t+1..n}, alternating a
// forward pass, a backward pass for nu and a modified-cost Gibbs update.
// The suffix is never modified. opts.init seeds q_t.
StepOptimization optimize_step(const JointBelief& theta, const ModelSpec& spec, const Multipliers& mult,
                               std::span<const StepPolicy> suffix, const SolveOptions& opts);

struct PlanOptions {
  SolveOptions inner{};
  double outer_tol = 1e-7;
  int max_outer_iters = 1000;
  std::uint64_t seed = 0;
};

// Default starting policy: one seeded Dirichlet draw per step.
Policy default_initial_policy(const ModelSpec& spec, std::uint64_t seed);

// Belief-filter starting policy for models whose memory states name world
// states (num_mem == num_world): q(m' | m, o) is the one-step filter
// posterior over w' from a belief that puts 1 - smoothing on w = m and
// spreads the rest uniformly. Useful when the random start sits in the
// basin of the memoryless policy.
Policy filter_initial_policy(const ModelSpec& spec, double smoothing = 0.5);

// Locally optimal bounded inference policy over the whole horizon.
// When the cost change of an outer iteration falls below outer_tol the
// policy that started that iteration is returned, which is the one the
// local-optimality guarantee applies to.
Trajectory plan(const ModelSpec& spec, const Multipliers& mult, const PlanOptions& opts = {},
                const std::optional<Policy>& init_policy = std::nullopt);

// Trajectory export, 17 significant digits.
void write_trajectory_json(std::ostream& os, const Trajectory& traj, const Multipliers& mult);
// Reads back the policies of a trajectory document.
Policy read_trajectory_policies(std::istream& is);

}  // namespace seqrd
