#include "seqrd/planner.hpp"

#include <cmath>
#include <stdexcept>

namespace seqrd {

JointBelief initial_belief(const ModelSpec& spec) {
  return {spec.init_mem * spec.init_world.transpose()};
}

JointBelief forward_step(const JointBelief& theta, const ModelSpec& spec, const StepPolicy& q) {
  check_dimensions(theta, spec, q);
  // carried(m', w) = sum_{m, o} q(m' | m, o) Pr(m, w, o)
  const Matrix carried = q.table.transpose() * slice_weights(theta, spec);
  return {carried * spec.trans};
}

Matrix modified_cost(const ModelSpec& spec, const CostToGoVector& nu) {
  if (nu.table.rows() != spec.num_mem || nu.table.cols() != spec.num_world) {
    throw std::invalid_argument("dimension mismatch: cost-to-go vector does not match the model");
  }
  if (nu.table.allFinite()) return spec.cost + spec.trans * nu.table.transpose();
  // nu may be +inf on memory states that are never reached; transitions of
  // probability zero must contribute nothing rather than 0 * inf.
  Matrix out = spec.cost;
  for (int w = 0; w < spec.num_world; ++w) {
    for (int v = 0; v < spec.num_world; ++v) {
      const double p = spec.trans(w, v);
      if (p == 0.0) continue;
      out.row(w) += p * nu.table.col(v).transpose();
    }
  }
  return out;
}

StepPolicy update_policy_with_future(const JointBelief& theta, const ModelSpec& spec, const Marginals& marg,
                             const Multipliers& mult, const CostToGoVector& nu) {
  return gibbs_update(theta, spec, marg, mult, modified_cost(spec, nu));
}

namespace {

// Per slice (m, o): sum_{m'} q [gamma log q - sum_x gamma_x log qbar_x],
// the information part of the Lagrangian before weighting by Pr(m, o).
Matrix slice_terms(const ModelSpec& spec, const StepPolicy& q, const Marginals& marg, const Multipliers& mult) {
  const int nm = spec.num_mem, no = spec.num_obs;
  const double gamma = mult.gamma();
  Vector log_free(nm);
  Matrix log_obs(no, nm), log_mem(nm, nm);
  for (int mn = 0; mn < nm; ++mn) {
    log_free(mn) = neg_log_term(mult.gamma_c, marg.free(mn));
    for (int o = 0; o < no; ++o) log_obs(o, mn) = neg_log_term(mult.gamma_m, marg.given_obs(o, mn));
    for (int m = 0; m < nm; ++m) log_mem(m, mn) = neg_log_term(mult.gamma_s, marg.given_mem(m, mn));
  }
  Matrix internal = Matrix::Zero(nm, no);
  for (int m = 0; m < nm; ++m) {
    for (int o = 0; o < no; ++o) {
      const auto r = q.row(m, o);
      double acc = 0.0;
      for (int mn = 0; mn < nm; ++mn) {
        const double x = q.table(r, mn);
        if (x <= 0.0) continue;
        acc += x * (log_free(mn) + log_obs(o, mn) + log_mem(m, mn) + gamma * std::log(x));
      }
      internal(m, o) = acc;
    }
  }
  return internal;
}

CostToGoVector nu_from_terms(const ModelSpec& spec, const StepPolicy& q, const Matrix& internal,
                             const CostToGoVector& nu) {
  const int nm = spec.num_mem, nw = spec.num_world, no = spec.num_obs;
  const Matrix cost = modified_cost(spec, nu);
  CostToGoVector out{Matrix::Zero(nm, nw)};

  if (cost.allFinite() && internal.allFinite()) {
    const Matrix slice_cost = q.table * cost.transpose();  // rows (m, o), cols w
    for (int m = 0; m < nm; ++m) {
      const auto block = slice_cost.middleRows(static_cast<Eigen::Index>(m) * no, no);  // o x w
      out.table.row(m) = (spec.obs.transpose().array() * block.array()).colwise().sum().matrix() +
                         (spec.obs * internal.row(m).transpose()).transpose();
    }
    return out;
  }

  // Slow path with infinite entries: only terms of positive probability count.
  Vector mixed(nm);
  for (int m = 0; m < nm; ++m) {
    for (int w = 0; w < nw; ++w) {
      // mixed(m') = sum_o sigma(o | w) q(m' | m, o)
      mixed.setZero();
      double inner = 0.0;
      for (int o = 0; o < no; ++o) {
        const double s = spec.obs(w, o);
        if (s == 0.0) continue;
        mixed += s * q.table.row(q.row(m, o)).transpose();
        inner += s * internal(m, o);
      }
      double external = 0.0;
      for (int mn = 0; mn < nm; ++mn) {
        if (mixed(mn) > 0.0) external += mixed(mn) * cost(w, mn);
      }
      out.table(m, w) = external + inner;
    }
  }
  return out;
}

// Lagrangian of one step from its slice terms.
double step_cost(const JointBelief& theta, const ModelSpec& spec, const StepPolicy& q, const Matrix& internal) {
  const Matrix pmo = obs_joint(theta, spec);
  double info = 0.0;
  for (int m = 0; m < spec.num_mem; ++m) {
    for (int o = 0; o < spec.num_obs; ++o) {
      if (pmo(m, o) > 0.0) info += pmo(m, o) * internal(m, o);
    }
  }
  return distortion(theta, spec, q) + info;
}

// What optimize_step needs per iteration: the suffix cost, the marginals
// of the first step and the cost-to-go that follows it.
struct SuffixPass {
  double cost = 0.0;
  Marginals first_marginals;
  CostToGoVector next_nu;
};

SuffixPass suffix_pass(const ModelSpec& spec, const JointBelief& theta, std::span<const StepPolicy> policies,
                       const Multipliers& mult) {
  const std::size_t k = policies.size();
  std::vector<JointBelief> beliefs;
  beliefs.reserve(k);
  beliefs.push_back(theta);
  for (std::size_t i = 0; i + 1 < k; ++i) beliefs.push_back(forward_step(beliefs[i], spec, policies[i]));

  SuffixPass out;
  CostToGoVector nu = CostToGoVector::zero(spec.num_mem, spec.num_world);
  out.next_nu = nu;
  for (std::size_t i = k; i-- > 0;) {
    Marginals marg = marginalize(beliefs[i], spec, policies[i]);
    const Matrix internal = slice_terms(spec, policies[i], marg, mult);
    out.cost += step_cost(beliefs[i], spec, policies[i], internal);
    if (i == 0) {
      out.first_marginals = std::move(marg);
    } else {
      nu = nu_from_terms(spec, policies[i], internal, nu);
      if (i == 1) out.next_nu = nu;
    }
  }
  out.cost /= static_cast<double>(k);
  return out;
}

}  // namespace

CostToGoVector backward_nu(const ModelSpec& spec, const StepPolicy& q, const Marginals& marg,
                           const Multipliers& mult, const CostToGoVector& nu) {
  return nu_from_terms(spec, q, slice_terms(spec, q, marg, mult), nu);
}

Trajectory evaluate_suffix(const ModelSpec& spec, const JointBelief& theta, std::span<const StepPolicy> policies,
                           const Multipliers& mult) {
  const std::size_t k = policies.size();
  if (k == 0) throw std::invalid_argument("evaluate_suffix needs at least one policy");
  Trajectory traj;
  traj.policies.assign(policies.begin(), policies.end());
  traj.beliefs.reserve(k);
  traj.beliefs.push_back(theta);
  for (std::size_t i = 0; i + 1 < k; ++i) traj.beliefs.push_back(forward_step(traj.beliefs[i], spec, policies[i]));

  traj.marginals.reserve(k);
  traj.reports.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    traj.marginals.push_back(marginalize(traj.beliefs[i], spec, policies[i]));
    traj.reports.push_back(evaluate_step(traj.beliefs[i], spec, policies[i], traj.marginals[i], mult));
  }

  traj.nus.resize(k);
  CostToGoVector next = CostToGoVector::zero(spec.num_mem, spec.num_world);
  for (std::size_t i = k; i-- > 0;) {
    traj.nus[i] = backward_nu(spec, policies[i], traj.marginals[i], mult, next);
    next = traj.nus[i];
  }

  for (const auto& r : traj.reports) {
    traj.total_cost += r.lagrangian;
    traj.distortion += r.distortion;
    traj.i_c += r.i_c;
    traj.i_m += r.i_m;
    traj.i_s += r.i_s;
  }
  const double inv = 1.0 / static_cast<double>(k);
  traj.total_cost *= inv;
  traj.distortion *= inv;
  traj.i_c *= inv;
  traj.i_m *= inv;
  traj.i_s *= inv;
  return traj;
}

Trajectory evaluate_policy(const ModelSpec& spec, const Policy& policy, const Multipliers& mult) {
  if (static_cast<int>(policy.size()) != spec.horizon) {
    throw std::invalid_argument("policy length must equal the model horizon");
  }
  return evaluate_suffix(spec, initial_belief(spec), policy, mult);
}

StepOptimization optimize_step(const JointBelief& theta, const ModelSpec& spec, const Multipliers& mult,
                               std::span<const StepPolicy> suffix, const SolveOptions& opts) {
  require_positive(mult);
  if (!(opts.tol > 0.0) || opts.max_iters < 1) throw std::invalid_argument("tol must be > 0 and max_iters >= 1");

  const Matrix pmo = obs_joint(theta, spec);
  Policy steps;
  steps.reserve(suffix.size() + 1);
  steps.push_back(initial_policy(spec.num_mem, spec.num_obs, opts.init));
  steps.insert(steps.end(), suffix.begin(), suffix.end());

  StepOptimization out;
  SuffixPass pass = suffix_pass(spec, theta, steps, mult);
  double cost = pass.cost;
  out.cost_trace.push_back(cost);

  for (int it = 1; it <= opts.max_iters; ++it) {
    StepPolicy next = update_policy_with_future(theta, spec, pass.first_marginals, mult, pass.next_nu);
    const double change = policy_change(pmo, steps[0], next);
    steps[0] = std::move(next);
    pass = suffix_pass(spec, theta, steps, mult);
    out.cost_trace.push_back(pass.cost);
    out.iterations = it;
    const bool settled = change < opts.tol && std::abs(cost - pass.cost) < opts.tol;
    cost = pass.cost;
    if (settled) {
      out.converged = true;
      break;
    }
  }
  out.policy = steps[0];
  out.suffix = evaluate_suffix(spec, theta, steps, mult);
  out.cost = out.suffix.total_cost;
  return out;
}

Policy default_initial_policy(const ModelSpec& spec, std::uint64_t seed) {
  Policy policy;
  policy.reserve(spec.horizon);
  for (int t = 0; t < spec.horizon; ++t) {
    policy.push_back(
        initial_policy(spec.num_mem, spec.num_obs, RandomDirichletInit{seed + static_cast<std::uint64_t>(t), 1.0}));
  }
  return policy;
}

Policy filter_initial_policy(const ModelSpec& spec, double smoothing) {
  if (spec.num_mem != spec.num_world) throw std::invalid_argument("filter start needs num_mem == num_world");
  if (!(smoothing > 0.0 && smoothing <= 1.0)) throw std::invalid_argument("filter smoothing must be in (0, 1]");
  const int nw = spec.num_world;
  StepPolicy q(spec.num_mem, spec.num_obs);
  for (int m = 0; m < spec.num_mem; ++m) {
    Vector belief = Vector::Constant(nw, smoothing / nw);
    belief(m) += 1.0 - smoothing;
    const Vector predicted = spec.trans.transpose() * belief;
    for (int o = 0; o < spec.num_obs; ++o) {
      Vector post = predicted.cwiseProduct(spec.obs.col(o));
      const double z = post.sum();
      if (z > 0.0) {
        post /= z;
      } else {
        post.setConstant(1.0 / nw);
      }
      q.table.row(q.row(m, o)) = post.transpose();
    }
  }
  return Policy(spec.horizon, q);
}

namespace {

bool same_policies(std::span<const StepPolicy> a, std::span<const StepPolicy> b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].table != b[i].table) return false;
  }
  return true;
}

}  // namespace

Trajectory plan(const ModelSpec& spec, const Multipliers& mult, const PlanOptions& opts,
                const std::optional<Policy>& init_policy) {
  require_positive(mult);
  const int n = spec.horizon;
  Policy current = init_policy ? *init_policy : default_initial_policy(spec, opts.seed);
  if (static_cast<int>(current.size()) != n) throw std::invalid_argument("initial policy length must equal horizon");
  for (const auto& q : current) validate_policy(spec, q);

  Trajectory accepted = evaluate_policy(spec, current, mult);
  std::vector<double> trace{accepted.total_cost};
  bool converged = false;
  int iterations = 0;

  for (int r = 1; r <= opts.max_outer_iters; ++r) {
    iterations = r;
    const std::vector<JointBelief>& beliefs = accepted.beliefs;
    // built[t..n-1] is the new suffix chosen for steps t..n-1.
    Policy built;
    Trajectory built_traj;
    for (int t = n - 1; t >= 0; --t) {
      SolveOptions inner = opts.inner;
      inner.init = WarmInit{current[t]};
      const std::span<const StepPolicy> fresh(built);
      const std::span<const StepPolicy> previous(current.begin() + t + 1, current.end());

      StepOptimization best = optimize_step(beliefs[t], spec, mult, fresh, inner);
      bool from_fresh = true;
      if (!same_policies(fresh, previous)) {
        StepOptimization alt = optimize_step(beliefs[t], spec, mult, previous, inner);
        if (alt.cost < best.cost) {
          best = std::move(alt);
          from_fresh = false;
        }
      }
      Policy next;
      next.reserve(n - t);
      next.push_back(std::move(best.policy));
      if (from_fresh) {
        next.insert(next.end(), built.begin(), built.end());
      } else {
        next.insert(next.end(), previous.begin(), previous.end());
      }
      built = std::move(next);
      if (t == 0) built_traj = std::move(best.suffix);
    }

    // The previous policy is always a feasible candidate, so the cost can
    // only go down; anything else is rounding.
    if (accepted.total_cost - built_traj.total_cost < opts.outer_tol) {
      converged = true;
      break;
    }
    current = std::move(built);
    accepted = std::move(built_traj);
    trace.push_back(accepted.total_cost);
  }

  accepted.iterations = iterations;
  accepted.converged = converged;
  accepted.cost_trace = std::move(trace);
  return accepted;
}

}  // namespace seqrd
