#pragma once

// Last-step optimization: alternating minimization of the one-step
// Lagrangian between the policy (a Gibbs distribution over the energy G)
// and its marginals.

#include <cstdint>
#include <variant>
#include <vector>

#include "seqrd/infotheory.hpp"
#include "seqrd/model.hpp"

namespace seqrd {

struct UniformInit {};

struct RandomDirichletInit {
  std::uint64_t seed = 0;
  double concentration = 1.0;
};

struct WarmInit {
  StepPolicy policy;
};

using InitStrategy = std::variant<RandomDirichletInit, UniformInit, WarmInit>;

struct SolveOptions {
  double tol = 1e-9;
  int max_iters = 10000;
  InitStrategy init = RandomDirichletInit{};
};

struct OneStepSolution {
  StepPolicy policy;
  Marginals marginals;
  StepReport report;
  int iterations = 0;
  bool converged = false;
  // Lagrangian of (q^r, marginals of q^r) for r = 0..iterations.
  std::vector<double> lagrangian_trace;
};

StepPolicy initial_policy(int num_mem, int num_obs, const InitStrategy& init);

// Pointwise energy d(w, m') - gamma_C log qbar(m') - gamma_M log qbar(m'|o)
// - gamma_S log qbar(m'|m); +inf when a log argument is zero under a
// positive multiplier.
double g_pointwise(const ModelSpec& spec, const Marginals& marg, const Multipliers& mult, int m_prev, int w, int o,
                   int m_next);

// Expectation of g_pointwise over the posterior Pr(w | m_prev, o). Throws
// std::domain_error if Pr(m_prev, o) = 0.
double g_expect_world(const JointBelief& theta, const ModelSpec& spec, const Marginals& marg,
                      const Multipliers& mult, int m_prev, int o, int m_next);

// Posterior expected cost sum_w Pr(w | m, o) cost(w, m'), one row per (m, o)
// in StepPolicy row order. Rows with Pr(m, o) = 0 are zero.
Matrix posterior_cost(const JointBelief& theta, const ModelSpec& spec, const Matrix& cost);

// Softmax of -G / gamma per (m, o) slice with `cost` as the distortion,
// evaluated in the log domain. Zero-probability slices are uniform.
StepPolicy gibbs_update(const JointBelief& theta, const ModelSpec& spec, const Marginals& marg,
                        const Multipliers& mult, const Matrix& cost);

StepPolicy update_policy(const JointBelief& theta, const ModelSpec& spec, const Marginals& marg,
                             const Multipliers& mult);

// max |a - b| over slices (m, o) with Pr(m, o) > 0.
double policy_change(const Matrix& pmo, const StepPolicy& a, const StepPolicy& b);

OneStepSolution solve_last_step(const JointBelief& theta, const ModelSpec& spec, const Multipliers& mult,
                                const SolveOptions& opts = {});

}  // namespace seqrd
