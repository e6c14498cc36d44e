#pragma once

// Exact discrete information functionals of one step of the process
// (M_{t-1}, W_t) ~ theta, O_t ~ sigma(.|W_t), M_t ~ q(.|M_{t-1}, O_t).
// All logarithms are natural; 0 log 0 = 0.

#include <cmath>
#include <limits>
#include <vector>

#include "seqrd/model.hpp"

namespace seqrd {

struct StepReport {
  double distortion = 0.0;
  double i_c = 0.0;  // I(M_{t-1}, O_t; M_t)
  double i_m = 0.0;  // I(M_{t-1}; M_t | O_t)
  double i_s = 0.0;  // I(O_t; M_t | M_{t-1})
  double entropy_q = 0.0;
  double lagrangian = 0.0;
};

struct InformationRates {
  double i_c = 0.0;
  double i_m = 0.0;
  double i_s = 0.0;
};

// Dense joint Pr(m, w, o, m').
class JointDistribution {
 public:
  JointDistribution(int num_mem, int num_world, int num_obs);

  double operator()(int m, int w, int o, int m_next) const { return p_[index(m, w, o, m_next)]; }
  double& operator()(int m, int w, int o, int m_next) { return p_[index(m, w, o, m_next)]; }

  int num_mem() const { return num_mem_; }
  int num_world() const { return num_world_; }
  int num_obs() const { return num_obs_; }
  double total() const;

 private:
  std::size_t index(int m, int w, int o, int m_next) const {
    return ((static_cast<std::size_t>(m) * num_world_ + w) * num_obs_ + o) * num_mem_ + m_next;
  }

  int num_mem_;
  int num_world_;
  int num_obs_;
  std::vector<double> p_;
};

// Informations computed straight from entropies of the joint rather than
// through the policy marginals. Used to cross-check the KL forms.
struct JointInformation {
  double i_c = 0.0;         // I(M, O; M')
  double i_m = 0.0;         // I(M; M' | O)
  double i_s = 0.0;         // I(O; M' | M)
  double obs_next = 0.0;    // I(O; M')
  double prev_next = 0.0;   // I(M; M')
  double world_next = 0.0;  // I(W; M')
};

void check_dimensions(const JointBelief& theta, const ModelSpec& spec, const StepPolicy& q);

JointDistribution joint_distribution(const JointBelief& theta, const ModelSpec& spec, const StepPolicy& q);
JointInformation joint_information(const JointDistribution& joint);

// Pr(m, o) = sum_w theta(m, w) sigma(o | w), mem x obs.
Matrix obs_joint(const JointBelief& theta, const ModelSpec& spec);

// Pr(m, w, o) laid out with rows (m, o) in StepPolicy row order and one
// column per world state.
Matrix slice_weights(const JointBelief& theta, const ModelSpec& spec);

double distortion(const JointBelief& theta, const ModelSpec& spec, const StepPolicy& q);
InformationRates information_rates(const JointBelief& theta, const ModelSpec& spec, const StepPolicy& q);
Marginals marginalize(const JointBelief& theta, const ModelSpec& spec, const StepPolicy& q);

// Conditional entropy H(M_t | M_{t-1}, O_t) of the policy under theta.
double policy_entropy(const JointBelief& theta, const ModelSpec& spec, const StepPolicy& q);

// One-step Lagrangian G_{theta,q}(d, qbar) - gamma H(q) for arbitrary
// (not necessarily consistent) marginals. Returns +inf when q puts mass on
// a cell whose marginal is zero under a positive multiplier.
double lagrangian_onestep(const JointBelief& theta, const ModelSpec& spec, const StepPolicy& q, const Marginals& marg,
                          const Multipliers& mult);

// Distortion, rates, entropy and Lagrangian with consistent marginals.
StepReport evaluate_step(const JointBelief& theta, const ModelSpec& spec, const StepPolicy& q,
                         const Multipliers& mult);
StepReport evaluate_step(const JointBelief& theta, const ModelSpec& spec, const StepPolicy& q,
                         const Marginals& marg, const Multipliers& mult);

// -gamma * log(p) with the conventions 0 * log 0 = 0 and -log 0 = +inf.
inline double neg_log_term(double gamma, double p) {
  if (gamma == 0.0) return 0.0;
  if (p <= 0.0) return std::numeric_limits<double>::infinity();
  return -gamma * std::log(p);
}

}  // namespace seqrd
