#include "seqrd/onestep.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace seqrd {

StepPolicy initial_policy(int num_mem, int num_obs, const InitStrategy& init) {
  if (const auto* warm = std::get_if<WarmInit>(&init)) {
    if (warm->policy.num_mem() != num_mem || warm->policy.num_obs != num_obs) {
      throw std::invalid_argument("warm-start policy does not match the model alphabets");
    }
    return warm->policy;
  }
  if (std::holds_alternative<UniformInit>(init)) return StepPolicy::uniform(num_mem, num_obs);

  const auto& dir = std::get<RandomDirichletInit>(init);
  if (!(dir.concentration > 0.0)) throw std::invalid_argument("Dirichlet concentration must be positive");
  std::mt19937_64 rng(dir.seed);
  std::gamma_distribution<double> draw(dir.concentration, 1.0);
  StepPolicy q(num_mem, num_obs);
  for (Eigen::Index r = 0; r < q.table.rows(); ++r) {
    double z = 0.0;
    for (int c = 0; c < num_mem; ++c) z += q.table(r, c) = draw(rng);
    if (z > 0.0) {
      q.table.row(r) /= z;
    } else {
      q.table.row(r).setConstant(1.0 / num_mem);
    }
  }
  return q;
}

double g_pointwise(const ModelSpec& spec, const Marginals& marg, const Multipliers& mult, int m_prev, int w, int o,
                   int m_next) {
  return spec.cost(w, m_next) + neg_log_term(mult.gamma_c, marg.free(m_next)) +
         neg_log_term(mult.gamma_m, marg.given_obs(o, m_next)) +
         neg_log_term(mult.gamma_s, marg.given_mem(m_prev, m_next));
}

double g_expect_world(const JointBelief& theta, const ModelSpec& spec, const Marginals& marg,
                      const Multipliers& mult, int m_prev, int o, int m_next) {
  double z = 0.0, acc = 0.0;
  for (int w = 0; w < spec.num_world; ++w) {
    const double p = theta.table(m_prev, w) * spec.obs(w, o);
    if (p == 0.0) continue;
    z += p;
    acc += p * g_pointwise(spec, marg, mult, m_prev, w, o, m_next);
  }
  if (z == 0.0) throw std::domain_error("undefined posterior: Pr(m_prev, o) = 0");
  return acc / z;
}

Matrix posterior_cost(const JointBelief& theta, const ModelSpec& spec, const Matrix& cost) {
  const int nm = spec.num_mem, no = spec.num_obs, nw = spec.num_world;
  const Matrix weights = slice_weights(theta, spec);
  const Vector z = weights.rowwise().sum();
  Matrix out;
  if (cost.allFinite()) {
    out = weights * cost;
  } else {
    // Worlds with zero weight are skipped outright: cost may hold +inf
    // entries there and 0 * inf must not leak in.
    out = Matrix::Zero(static_cast<Eigen::Index>(nm) * no, nm);
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
      for (int w = 0; w < nw; ++w) {
        if (weights(r, w) != 0.0) out.row(r) += weights(r, w) * cost.row(w);
      }
    }
  }
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    if (z(r) > 0.0) {
      out.row(r) /= z(r);
    } else {
      out.row(r).setZero();
    }
  }
  return out;
}

StepPolicy gibbs_update(const JointBelief& theta, const ModelSpec& spec, const Marginals& marg,
                        const Multipliers& mult, const Matrix& cost) {
  require_positive(mult);
  const int nm = spec.num_mem, no = spec.num_obs;
  const double gamma = mult.gamma();
  const Matrix pmo = obs_joint(theta, spec);
  const Matrix expected = posterior_cost(theta, spec, cost);

  // Marginal energy terms do not depend on w.
  Vector free_term(nm);
  for (int mn = 0; mn < nm; ++mn) free_term(mn) = neg_log_term(mult.gamma_c, marg.free(mn));

  StepPolicy q(nm, no);
  Vector logits(nm);
  for (int m = 0; m < nm; ++m) {
    for (int o = 0; o < no; ++o) {
      const auto r = q.row(m, o);
      if (pmo(m, o) == 0.0) {
        q.table.row(r).setConstant(1.0 / nm);
        continue;
      }
      double top = -std::numeric_limits<double>::infinity();
      for (int mn = 0; mn < nm; ++mn) {
        const double energy = expected(r, mn) + free_term(mn) + neg_log_term(mult.gamma_m, marg.given_obs(o, mn)) +
                              neg_log_term(mult.gamma_s, marg.given_mem(m, mn));
        logits(mn) = -energy / gamma;
        top = std::max(top, logits(mn));
      }
      if (!std::isfinite(top)) {
        q.table.row(r).setConstant(1.0 / nm);
        continue;
      }
      double z = 0.0;
      for (int mn = 0; mn < nm; ++mn) z += q.table(r, mn) = std::exp(logits(mn) - top);
      q.table.row(r) /= z;
    }
  }
  return q;
}

StepPolicy update_policy(const JointBelief& theta, const ModelSpec& spec, const Marginals& marg,
                             const Multipliers& mult) {
  return gibbs_update(theta, spec, marg, mult, spec.cost);
}

double policy_change(const Matrix& pmo, const StepPolicy& a, const StepPolicy& b) {
  double worst = 0.0;
  for (Eigen::Index m = 0; m < pmo.rows(); ++m) {
    for (Eigen::Index o = 0; o < pmo.cols(); ++o) {
      if (pmo(m, o) == 0.0) continue;
      const auto r = a.row(static_cast<int>(m), static_cast<int>(o));
      worst = std::max(worst, (a.table.row(r) - b.table.row(r)).cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

OneStepSolution solve_last_step(const JointBelief& theta, const ModelSpec& spec, const Multipliers& mult,
                                const SolveOptions& opts) {
  require_positive(mult);
  if (!(opts.tol > 0.0) || opts.max_iters < 1) throw std::invalid_argument("tol must be > 0 and max_iters >= 1");

  const Matrix pmo = obs_joint(theta, spec);
  OneStepSolution sol;
  sol.policy = initial_policy(spec.num_mem, spec.num_obs, opts.init);
  check_dimensions(theta, spec, sol.policy);
  sol.marginals = marginalize(theta, spec, sol.policy);
  double value = lagrangian_onestep(theta, spec, sol.policy, sol.marginals, mult);
  sol.lagrangian_trace.push_back(value);

  for (int it = 1; it <= opts.max_iters; ++it) {
    StepPolicy next = update_policy(theta, spec, sol.marginals, mult);
    Marginals next_marg = marginalize(theta, spec, next);
    const double next_value = lagrangian_onestep(theta, spec, next, next_marg, mult);
    const double change = policy_change(pmo, sol.policy, next);

    sol.policy = std::move(next);
    sol.marginals = std::move(next_marg);
    sol.lagrangian_trace.push_back(next_value);
    sol.iterations = it;
    const bool settled = change < opts.tol && std::abs(value - next_value) < opts.tol;
    value = next_value;
    if (settled) {
      sol.converged = true;
      break;
    }
  }
  sol.report = evaluate_step(theta, spec, sol.policy, sol.marginals, mult);
  return sol;
}

}  // namespace seqrd
