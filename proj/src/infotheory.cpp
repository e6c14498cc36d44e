#include "seqrd/infotheory.hpp"

#include <limits>
#include <stdexcept>

namespace seqrd {

JointDistribution::JointDistribution(int num_mem, int num_world, int num_obs)
    : num_mem_(num_mem),
      num_world_(num_world),
      num_obs_(num_obs),
      p_(static_cast<std::size_t>(num_mem) * num_world * num_obs * num_mem, 0.0) {}

double JointDistribution::total() const {
  double s = 0.0;
  for (double x : p_) s += x;
  return s;
}

void check_dimensions(const JointBelief& theta, const ModelSpec& spec, const StepPolicy& q) {
  if (theta.num_mem() != spec.num_mem || theta.num_world() != spec.num_world) {
    throw std::invalid_argument("dimension mismatch: joint belief does not match the model");
  }
  if (q.num_obs != spec.num_obs || q.num_mem() != spec.num_mem ||
      q.table.rows() != static_cast<Eigen::Index>(spec.num_mem) * spec.num_obs) {
    throw std::invalid_argument("dimension mismatch: policy does not match the model");
  }
}

JointDistribution joint_distribution(const JointBelief& theta, const ModelSpec& spec, const StepPolicy& q) {
  check_dimensions(theta, spec, q);
  JointDistribution joint(spec.num_mem, spec.num_world, spec.num_obs);
  for (int m = 0; m < spec.num_mem; ++m) {
    for (int w = 0; w < spec.num_world; ++w) {
      for (int o = 0; o < spec.num_obs; ++o) {
        const double pmwo = theta.table(m, w) * spec.obs(w, o);
        for (int mn = 0; mn < spec.num_mem; ++mn) joint(m, w, o, mn) = pmwo * q(m, o, mn);
      }
    }
  }
  return joint;
}

namespace {

double entropy_of(const std::vector<double>& p) {
  double h = 0.0;
  for (double x : p) {
    if (x > 0.0) h -= x * std::log(x);
  }
  return h;
}

}  // namespace

JointInformation joint_information(const JointDistribution& joint) {
  const int nm = joint.num_mem(), nw = joint.num_world(), no = joint.num_obs();
  std::vector<double> p_next(nm, 0.0), p_obs(no, 0.0), p_prev(nm, 0.0), p_world(nw, 0.0);
  std::vector<double> p_prev_obs(static_cast<std::size_t>(nm) * no, 0.0);
  std::vector<double> p_prev_obs_next(static_cast<std::size_t>(nm) * no * nm, 0.0);
  std::vector<double> p_obs_next(static_cast<std::size_t>(no) * nm, 0.0);
  std::vector<double> p_prev_next(static_cast<std::size_t>(nm) * nm, 0.0);
  std::vector<double> p_world_next(static_cast<std::size_t>(nw) * nm, 0.0);

  for (int m = 0; m < nm; ++m)
    for (int w = 0; w < nw; ++w)
      for (int o = 0; o < no; ++o)
        for (int mn = 0; mn < nm; ++mn) {
          const double x = joint(m, w, o, mn);
          p_next[mn] += x;
          p_obs[o] += x;
          p_prev[m] += x;
          p_world[w] += x;
          p_prev_obs[m * no + o] += x;
          p_prev_obs_next[(m * no + o) * nm + mn] += x;
          p_obs_next[o * nm + mn] += x;
          p_prev_next[m * nm + mn] += x;
          p_world_next[w * nm + mn] += x;
        }

  const double h_next = entropy_of(p_next);
  const double h_obs = entropy_of(p_obs);
  const double h_prev = entropy_of(p_prev);
  const double h_world = entropy_of(p_world);
  const double h_prev_obs = entropy_of(p_prev_obs);
  const double h_prev_obs_next = entropy_of(p_prev_obs_next);
  const double h_obs_next = entropy_of(p_obs_next);
  const double h_prev_next = entropy_of(p_prev_next);
  const double h_world_next = entropy_of(p_world_next);

  JointInformation info;
  info.i_c = h_next + h_prev_obs - h_prev_obs_next;
  info.i_m = h_prev_obs + h_obs_next - h_obs - h_prev_obs_next;
  info.i_s = h_prev_obs + h_prev_next - h_prev - h_prev_obs_next;
  info.obs_next = h_obs + h_next - h_obs_next;
  info.prev_next = h_prev + h_next - h_prev_next;
  info.world_next = h_world + h_next - h_world_next;
  return info;
}

Matrix obs_joint(const JointBelief& theta, const ModelSpec& spec) { return theta.table * spec.obs; }

Matrix slice_weights(const JointBelief& theta, const ModelSpec& spec) {
  const int nm = spec.num_mem, no = spec.num_obs;
  Matrix out(static_cast<Eigen::Index>(nm) * no, spec.num_world);
  for (int m = 0; m < nm; ++m) {
    for (int o = 0; o < no; ++o) {
      out.row(static_cast<Eigen::Index>(m) * no + o) = theta.table.row(m).cwiseProduct(spec.obs.col(o).transpose());
    }
  }
  return out;
}

double distortion(const JointBelief& theta, const ModelSpec& spec, const StepPolicy& q) {
  check_dimensions(theta, spec, q);
  // Expected cost per (m, o, m'), then weighted by the policy.
  const Matrix expected = slice_weights(theta, spec) * spec.cost;
  return (q.table.array() * expected.array()).sum();
}

Marginals marginalize(const JointBelief& theta, const ModelSpec& spec, const StepPolicy& q) {
  check_dimensions(theta, spec, q);
  const int nm = spec.num_mem, no = spec.num_obs;
  const Matrix pmo = obs_joint(theta, spec);

  Marginals marg;
  marg.free = Vector::Zero(nm);
  marg.given_obs = Matrix::Zero(no, nm);
  marg.given_mem = Matrix::Zero(nm, nm);

  for (int m = 0; m < nm; ++m) {
    for (int o = 0; o < no; ++o) {
      const double p = pmo(m, o);
      if (p == 0.0) continue;
      const auto slice = q.table.row(q.row(m, o));
      marg.free += p * slice.transpose();
      marg.given_obs.row(o) += p * slice;
      marg.given_mem.row(m) += p * slice;
    }
  }

  const Eigen::VectorXd p_obs = pmo.colwise().sum().transpose();
  const Eigen::VectorXd p_mem = pmo.rowwise().sum();
  for (int o = 0; o < no; ++o) {
    if (p_obs(o) > 0.0) {
      marg.given_obs.row(o) /= p_obs(o);
    } else {
      marg.given_obs.row(o).setConstant(1.0 / nm);
    }
  }
  for (int m = 0; m < nm; ++m) {
    if (p_mem(m) > 0.0) {
      marg.given_mem.row(m) /= p_mem(m);
    } else {
      marg.given_mem.row(m).setConstant(1.0 / nm);
    }
  }

  // Pr(m, o) q(m' | m, o) can underflow to zero while q itself is positive.
  // A marginal that is positive in exact arithmetic is kept positive so the
  // log ratios stay finite.
  constexpr double tiny = std::numeric_limits<double>::denorm_min();
  for (int m = 0; m < nm; ++m) {
    for (int o = 0; o < no; ++o) {
      if (pmo(m, o) == 0.0) continue;
      const auto r = q.row(m, o);
      for (int mn = 0; mn < nm; ++mn) {
        if (q.table(r, mn) <= 0.0) continue;
        if (marg.free(mn) == 0.0) marg.free(mn) = tiny;
        if (marg.given_obs(o, mn) == 0.0) marg.given_obs(o, mn) = tiny;
        if (marg.given_mem(m, mn) == 0.0) marg.given_mem(m, mn) = tiny;
      }
    }
  }
  return marg;
}

namespace {

// sum_{m,o} Pr(m,o) sum_{m'} q log(q / ref(m,o,m')) for the three reference
// marginals, each weighted by its multiplier.
struct KlTerms {
  double c = 0.0;
  double m = 0.0;
  double s = 0.0;
  double entropy = 0.0;
};

double log_ratio_term(double weight, double q, double ref) {
  if (weight == 0.0) return 0.0;
  if (ref <= 0.0) return std::numeric_limits<double>::infinity();
  return weight * (std::log(q) - std::log(ref));
}

KlTerms kl_terms(const Matrix& pmo, const StepPolicy& q, const Marginals& marg, const Multipliers& weights) {
  KlTerms out;
  const int nm = q.num_mem(), no = q.num_obs;
  for (int m = 0; m < nm; ++m) {
    for (int o = 0; o < no; ++o) {
      const double p = pmo(m, o);
      if (p == 0.0) continue;
      double c = 0.0, mm = 0.0, s = 0.0, h = 0.0;
      for (int mn = 0; mn < nm; ++mn) {
        const double x = q(m, o, mn);
        if (x <= 0.0) continue;
        c += x * log_ratio_term(weights.gamma_c, x, marg.free(mn));
        mm += x * log_ratio_term(weights.gamma_m, x, marg.given_obs(o, mn));
        s += x * log_ratio_term(weights.gamma_s, x, marg.given_mem(m, mn));
        h -= x * std::log(x);
      }
      out.c += p * c;
      out.m += p * mm;
      out.s += p * s;
      out.entropy += p * h;
    }
  }
  return out;
}

}  // namespace

InformationRates information_rates(const JointBelief& theta, const ModelSpec& spec, const StepPolicy& q) {
  const Marginals marg = marginalize(theta, spec, q);
  const KlTerms kl = kl_terms(obs_joint(theta, spec), q, marg, {1.0, 1.0, 1.0});
  return {kl.c, kl.m, kl.s};
}

double policy_entropy(const JointBelief& theta, const ModelSpec& spec, const StepPolicy& q) {
  check_dimensions(theta, spec, q);
  const Matrix pmo = obs_joint(theta, spec);
  double h = 0.0;
  for (int m = 0; m < spec.num_mem; ++m) {
    for (int o = 0; o < spec.num_obs; ++o) {
      if (pmo(m, o) == 0.0) continue;
      double hs = 0.0;
      for (int mn = 0; mn < spec.num_mem; ++mn) {
        const double x = q(m, o, mn);
        if (x > 0.0) hs -= x * std::log(x);
      }
      h += pmo(m, o) * hs;
    }
  }
  return h;
}

double lagrangian_onestep(const JointBelief& theta, const ModelSpec& spec, const StepPolicy& q, const Marginals& marg,
                          const Multipliers& mult) {
  check_dimensions(theta, spec, q);
  // G - gamma H regrouped per cell: gamma log q - sum_x gamma_x log qbar_x
  // = sum_x gamma_x log(q / qbar_x).
  const KlTerms kl = kl_terms(obs_joint(theta, spec), q, marg, mult);
  return distortion(theta, spec, q) + kl.c + kl.m + kl.s;
}

StepReport evaluate_step(const JointBelief& theta, const ModelSpec& spec, const StepPolicy& q,
                         const Marginals& marg, const Multipliers& mult) {
  check_dimensions(theta, spec, q);
  const Matrix pmo = obs_joint(theta, spec);
  const KlTerms rates = kl_terms(pmo, q, marg, {1.0, 1.0, 1.0});
  StepReport r;
  r.distortion = distortion(theta, spec, q);
  r.i_c = rates.c;
  r.i_m = rates.m;
  r.i_s = rates.s;
  r.entropy_q = rates.entropy;
  r.lagrangian = r.distortion + mult.gamma_c * r.i_c + mult.gamma_m * r.i_m + mult.gamma_s * r.i_s;
  return r;
}

StepReport evaluate_step(const JointBelief& theta, const ModelSpec& spec, const StepPolicy& q,
                         const Multipliers& mult) {
  return evaluate_step(theta, spec, q, marginalize(theta, spec, q), mult);
}

}  // namespace seqrd
