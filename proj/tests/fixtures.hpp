#pragma once

// Random model, belief and policy generators shared by the test binaries.

#include <cstdint>
#include <random>

#include "seqrd/model.hpp"

namespace seqrd::testing {

inline Vector random_simplex(int n, std::mt19937_64& rng, double floor = 0.0) {
  std::gamma_distribution<double> g(1.0, 1.0);
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = g(rng) + floor;
  return v / v.sum();
}

inline Matrix random_stochastic(int rows, int cols, std::mt19937_64& rng, double floor = 0.0) {
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) m.row(r) = random_simplex(cols, rng, floor).transpose();
  return m;
}

// Random model with full-support distributions and costs in [0, 1).
inline ModelSpec random_model(int nw, int no, int nm, int horizon, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ModelSpec spec;
  spec.num_world = nw;
  spec.num_obs = no;
  spec.num_mem = nm;
  spec.horizon = horizon;
  spec.init_world = random_simplex(nw, rng, 0.05);
  spec.init_mem = random_simplex(nm, rng, 0.05);
  spec.trans = random_stochastic(nw, nw, rng, 0.05);
  spec.obs = random_stochastic(nw, no, rng, 0.05);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  spec.cost = Matrix(nw, nm);
  for (int w = 0; w < nw; ++w)
    for (int m = 0; m < nm; ++m) spec.cost(w, m) = u(rng);
  return validate(spec);
}

inline JointBelief random_belief(int nm, int nw, std::mt19937_64& rng, double floor = 0.05) {
  Vector flat = random_simplex(nm * nw, rng, floor);
  JointBelief theta{Matrix(nm, nw)};
  for (int m = 0; m < nm; ++m)
    for (int w = 0; w < nw; ++w) theta.table(m, w) = flat(m * nw + w);
  return theta;
}

inline StepPolicy random_policy(int nm, int no, std::mt19937_64& rng, double floor = 0.0) {
  StepPolicy q(nm, no);
  q.table = random_stochastic(nm * no, nm, rng, floor);
  return q;
}

inline Policy random_plan(const ModelSpec& spec, std::mt19937_64& rng, double floor = 0.0) {
  Policy p;
  for (int t = 0; t < spec.horizon; ++t) p.push_back(random_policy(spec.num_mem, spec.num_obs, rng, floor));
  return p;
}

inline Multipliers random_multipliers(std::mt19937_64& rng, double lo = 0.02, double hi = 1.0) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  std::bernoulli_distribution keep(0.6);
  Multipliers m{std::exp(u(rng)), keep(rng) ? std::exp(u(rng)) : 0.0, keep(rng) ? std::exp(u(rng)) : 0.0};
  return m;
}

// Copy-the-observation policy on a model with |M| = |O|.
inline StepPolicy copy_observation(int nm, int no) {
  StepPolicy q(nm, no);
  for (int m = 0; m < nm; ++m)
    for (int o = 0; o < no; ++o) q(m, o, o) = 1.0;
  return q;
}

}  // namespace seqrd::testing
