#include "seqrd/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <thread>

namespace seqrd::oracle {

namespace {

std::vector<double> normalized(std::vector<double> v) {
  double total = 0.0;
  for (double x : v) total += x;
  if (!(total > 0.0)) throw std::domain_error("impossible observation");
  for (double& x : v) x /= total;
  return v;
}

void check_obs(const ModelSpec& spec, int o) {
  if (o < 0 || o >= spec.num_obs) throw std::out_of_range("observation index out of range");
}

}  // namespace

BeliefState first_belief(const ModelSpec& spec, int o) {
  check_obs(spec, o);
  std::vector<double> b(spec.num_world);
  for (int w = 0; w < spec.num_world; ++w) b[w] = spec.init_world(w) * spec.obs(w, o);
  return {normalized(std::move(b))};
}

BeliefState exact_belief_step(const BeliefState& b, const ModelSpec& spec, int o) {
  check_obs(spec, o);
  if (static_cast<int>(b.dist.size()) != spec.num_world) throw std::invalid_argument("belief size mismatch");
  std::vector<double> next(spec.num_world, 0.0);
  for (int w = 0; w < spec.num_world; ++w) {
    if (b.dist[w] == 0.0) continue;
    for (int v = 0; v < spec.num_world; ++v) next[v] += b.dist[w] * spec.trans(w, v);
  }
  for (int v = 0; v < spec.num_world; ++v) next[v] *= spec.obs(v, o);
  return {normalized(std::move(next))};
}

int greedy_action(const BeliefState& b, const ModelSpec& spec) {
  int best = 0;
  double best_cost = std::numeric_limits<double>::infinity();
  for (int m = 0; m < spec.num_mem; ++m) {
    double c = 0.0;
    for (int w = 0; w < spec.num_world; ++w) c += b.dist[w] * spec.cost(w, m);
    if (c < best_cost) {
      best_cost = c;
      best = m;
    }
  }
  return best;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

template <class Row>
int draw(const Row& probs, int n, std::mt19937_64& rng) {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double acc = 0.0;
  int last = 0;
  for (int i = 0; i < n; ++i) {
    if (probs(i) <= 0.0) continue;
    acc += probs(i);
    last = i;
    if (u < acc) return i;
  }
  return last;
}

double rollout(const ModelSpec& spec, std::mt19937_64& rng) {
  int w = draw([&](int i) { return spec.init_world(i); }, spec.num_world, rng);
  int o = draw([&](int i) { return spec.obs(w, i); }, spec.num_obs, rng);
  BeliefState b = first_belief(spec, o);
  double total = 0.0;
  for (int t = 0;; ++t) {
    total += spec.cost(w, greedy_action(b, spec));
    if (t + 1 == spec.horizon) break;
    w = draw([&](int i) { return spec.trans(w, i); }, spec.num_world, rng);
    o = draw([&](int i) { return spec.obs(w, i); }, spec.num_obs, rng);
    b = exact_belief_step(b, spec, o);
  }
  return total / spec.horizon;
}

}  // namespace

MonteCarloEstimate unbounded_baseline(const ModelSpec& spec, std::int64_t num_rollouts, std::uint64_t seed,
                                      int threads) {
  if (num_rollouts < 2) throw std::invalid_argument("need at least two rollouts");
  if (spec.horizon < 1) throw std::invalid_argument("horizon must be positive");
  std::vector<double> values(static_cast<std::size_t>(num_rollouts));
  auto work = [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t i = begin; i < end; ++i) {
      std::mt19937_64 rng(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(i))));
      values[i] = rollout(spec, rng);
    }
  };
  const int n_threads = std::max(1, threads);
  if (n_threads == 1) {
    work(0, num_rollouts);
  } else {
    std::vector<std::thread> pool;
    const std::int64_t chunk = (num_rollouts + n_threads - 1) / n_threads;
    for (int k = 0; k < n_threads; ++k) {
      const std::int64_t begin = std::min<std::int64_t>(num_rollouts, k * chunk);
      const std::int64_t end = std::min<std::int64_t>(num_rollouts, begin + chunk);
      pool.emplace_back(work, begin, end);
    }
    for (auto& t : pool) t.join();
  }

  // Summed in index order so the result does not depend on threads.
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / num_rollouts;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double se = std::sqrt(ss / (num_rollouts - 1) / num_rollouts);
  return {mean, se, mean - 1.96 * se, mean + 1.96 * se, num_rollouts};
}

double unbounded_exact(const ModelSpec& spec) {
  if (spec.horizon < 1) throw std::invalid_argument("horizon must be positive");
  if (std::pow(static_cast<double>(spec.num_obs), spec.horizon) > 1e8) {
    throw std::invalid_argument("observation history space too large to enumerate");
  }
  const int nw = spec.num_world;
  // alpha(w) = Pr(W_t = w, o_1..o_t), carried down the observation tree.
  std::function<double(const std::vector<double>&, int)> expand = [&](const std::vector<double>& alpha, int t) {
    double mass = 0.0;
    for (double a : alpha) mass += a;
    if (mass == 0.0) return 0.0;
    std::vector<double> belief(alpha);
    for (double& x : belief) x /= mass;
    const int act = greedy_action({belief}, spec);
    double total = 0.0;
    for (int w = 0; w < nw; ++w) total += alpha[w] * spec.cost(w, act);
    if (t + 1 == spec.horizon) return total;

    std::vector<double> moved(nw, 0.0);
    for (int w = 0; w < nw; ++w) {
      for (int v = 0; v < nw; ++v) moved[v] += alpha[w] * spec.trans(w, v);
    }
    std::vector<double> next(nw);
    for (int o = 0; o < spec.num_obs; ++o) {
      for (int v = 0; v < nw; ++v) next[v] = moved[v] * spec.obs(v, o);
      total += expand(next, t + 1);
    }
    return total;
  };

  double total = 0.0;
  std::vector<double> alpha(nw);
  for (int o = 0; o < spec.num_obs; ++o) {
    for (int w = 0; w < nw; ++w) alpha[w] = spec.init_world(w) * spec.obs(w, o);
    total += expand(alpha, 0);
  }
  return total / spec.horizon;
}

// ---------------------------------------------------------------------------
// Grid search for |M| = 2.

namespace {

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

// Binary entropy in nats.
double h2(double p) { return -xlogx(p) - xlogx(1.0 - p); }

struct SliceData {
  int no = 0;
  std::vector<double> p_mo;     // Pr(m, o), index m * no + o
  std::vector<double> e0, e1;   // sum_w theta sigma d(w, m') for m' = 0, 1
  std::vector<double> p_o;      // Pr(o)
  std::vector<double> p_m;      // Pr(m)
};

SliceData slice_data(const Matrix& theta, const ModelSpec& spec) {
  if (spec.num_mem != 2) throw std::invalid_argument("grid search supports |M| = 2 only");
  if (theta.rows() != 2 || theta.cols() != spec.num_world) throw std::invalid_argument("theta shape mismatch");
  SliceData s;
  s.no = spec.num_obs;
  const int k = 2 * s.no;
  s.p_mo.assign(k, 0.0);
  s.e0.assign(k, 0.0);
  s.e1.assign(k, 0.0);
  s.p_o.assign(s.no, 0.0);
  s.p_m.assign(2, 0.0);
  for (int m = 0; m < 2; ++m) {
    for (int o = 0; o < s.no; ++o) {
      const int i = m * s.no + o;
      for (int w = 0; w < spec.num_world; ++w) {
        const double p = theta(m, w) * spec.obs(w, o);
        s.p_mo[i] += p;
        s.e0[i] += p * spec.cost(w, 0);
        s.e1[i] += p * spec.cost(w, 1);
      }
      s.p_o[o] += s.p_mo[i];
      s.p_m[m] += s.p_mo[i];
    }
  }
  return s;
}

double lagrangian_of(const SliceData& s, const Multipliers& mult, const std::vector<double>& x) {
  const int no = s.no;
  double dist = 0.0, h_cond = 0.0, free0 = 0.0;
  std::vector<double> by_o(no, 0.0);
  double h_m = 0.0;
  for (int m = 0; m < 2; ++m) {
    double by_m = 0.0;
    for (int o = 0; o < no; ++o) {
      const int i = m * no + o;
      dist += x[i] * s.e0[i] + (1.0 - x[i]) * s.e1[i];
      h_cond += s.p_mo[i] * h2(x[i]);
      free0 += s.p_mo[i] * x[i];
      by_o[o] += s.p_mo[i] * x[i];
      by_m += s.p_mo[i] * x[i];
    }
    if (s.p_m[m] > 0.0) h_m += s.p_m[m] * h2(by_m / s.p_m[m]);
  }
  double h_o = 0.0;
  for (int o = 0; o < no; ++o) {
    if (s.p_o[o] > 0.0) h_o += s.p_o[o] * h2(by_o[o] / s.p_o[o]);
  }
  const double h_free = h2(free0);
  return dist + mult.gamma_c * (h_free - h_cond) + mult.gamma_m * (h_o - h_cond) + mult.gamma_s * (h_m - h_cond);
}

}  // namespace

double onestep_lagrangian(const Matrix& theta, const ModelSpec& spec, const Multipliers& mult,
                          const std::vector<double>& params) {
  const SliceData s = slice_data(theta, spec);
  if (static_cast<int>(params.size()) != 2 * s.no) throw std::invalid_argument("parameter count mismatch");
  return lagrangian_of(s, mult, params);
}

GridSearchResult grid_search_onestep(const Matrix& theta, const ModelSpec& spec, const Multipliers& mult,
                                     double grid_step) {
  if (!(grid_step > 0.0 && grid_step <= 0.02)) throw std::invalid_argument("grid step must be in (0, 0.02]");
  const SliceData s = slice_data(theta, spec);
  const int no = s.no;
  const int k = 2 * no;
  const int levels = static_cast<int>(std::llround(1.0 / grid_step)) + 1;
  if (std::pow(static_cast<double>(levels), k) > 2e8) throw std::invalid_argument("grid too large");

  std::vector<double> grid(levels), grid_h(levels);
  for (int i = 0; i < levels; ++i) {
    grid[i] = std::min(1.0, i * grid_step);
    grid_h[i] = h2(grid[i]);
  }

  // Depth-first over slices in (m, o) order with running partial sums, so
  // each leaf only finishes the entropies of the marginals.
  GridSearchResult best;
  best.lagrangian = std::numeric_limits<double>::infinity();
  std::vector<int> idx(k, 0);
  std::vector<double> by_o(no, 0.0);
  const double gc = mult.gamma_c, gm = mult.gamma_m, gs = mult.gamma_s;
  const double g_cond = gc + gm + gs;

  std::function<void(int, double, double, double, double)> descend =
      [&](int i, double partial, double free0, double by_m, double h_m) {
        const int m = i / no;
        const int o = i % no;
        for (int l = 0; l < levels; ++l) {
          const double x = grid[l];
          idx[i] = l;
          const double part = partial + x * s.e0[i] + (1.0 - x) * s.e1[i] - g_cond * s.p_mo[i] * grid_h[l];
          const double f0 = free0 + s.p_mo[i] * x;
          const double bm = by_m + s.p_mo[i] * x;
          const double saved = by_o[o];
          by_o[o] += s.p_mo[i] * x;
          double hm = h_m;
          const bool block_done = (o == no - 1);
          if (block_done && s.p_m[m] > 0.0) hm += s.p_m[m] * h2(bm / s.p_m[m]);
          if (i + 1 < k) {
            descend(i + 1, part, f0, block_done ? 0.0 : bm, hm);
          } else {
            double h_o = 0.0;
            for (int oo = 0; oo < no; ++oo) {
              if (s.p_o[oo] > 0.0) h_o += s.p_o[oo] * h2(by_o[oo] / s.p_o[oo]);
            }
            const double value = part + gc * h2(f0) + gm * h_o + gs * hm;
            if (value < best.lagrangian) {
              best.lagrangian = value;
              best.params.resize(k);
              for (int j = 0; j < k; ++j) best.params[j] = grid[idx[j]];
            }
          }
          by_o[o] = saved;
        }
      };
  descend(0, 0.0, 0.0, 0.0, 0.0);

  // Coordinate refinement around the best grid point, repeated while it
  // still improves.
  const double fine = grid_step / 100.0;
  std::vector<double> x = best.params;
  double value = lagrangian_of(s, mult, x);
  for (int pass = 0; pass < 100; ++pass) {
    const double before = value;
    for (int j = 0; j < k; ++j) {
      const double centre = x[j];
      double best_x = centre;
      for (int step = -100; step <= 100; ++step) {
        const double cand = std::clamp(centre + step * fine, 0.0, 1.0);
        x[j] = cand;
        const double v = lagrangian_of(s, mult, x);
        if (v < value) {
          value = v;
          best_x = cand;
        }
      }
      x[j] = best_x;
    }
    if (!(value < before - 1e-15)) break;
  }
  best.params = x;
  best.lagrangian = value;
  return best;
}

// ---------------------------------------------------------------------------
// Enumeration of the sequential objective.

EnumeratedCost enumerate_cost(const ModelSpec& spec, const std::vector<Matrix>& policy_tables,
                              const Multipliers& mult) {
  const int nm = spec.num_mem, nw = spec.num_world, no = spec.num_obs;
  if (static_cast<long long>(nm) * nw > kEnumerateLimit) throw std::invalid_argument("state product exceeds size guard");
  if (policy_tables.empty()) throw std::invalid_argument("empty policy");
  for (const Matrix& q : policy_tables) {
    if (q.rows() != nm * no || q.cols() != nm) throw std::invalid_argument("policy table shape mismatch");
  }

  // joint[m * nw + w] = Pr(M_{t-1} = m, W_t = w)
  std::vector<double> joint(static_cast<std::size_t>(nm) * nw);
  for (int m = 0; m < nm; ++m) {
    for (int w = 0; w < nw; ++w) joint[m * nw + w] = spec.init_mem(m) * spec.init_world(w);
  }

  auto entropy_sum = [](const std::vector<double>& p) {
    double h = 0.0;
    for (double x : p) h -= xlogx(x);
    return h;
  };

  EnumeratedCost out;
  const std::size_t steps = policy_tables.size();
  std::vector<double> full(static_cast<std::size_t>(nm) * no * nm);  // Pr(m, o, m')
  std::vector<double> next_m(nm), obs_next(static_cast<std::size_t>(no) * nm), prev_next(static_cast<std::size_t>(nm) * nm);
  std::vector<double> prev_obs(static_cast<std::size_t>(nm) * no), obs_only(no), prev_only(nm);
  for (std::size_t t = 0; t < steps; ++t) {
    const Matrix& q = policy_tables[t];
    std::fill(full.begin(), full.end(), 0.0);
    std::vector<double> next_joint(static_cast<std::size_t>(nm) * nw, 0.0);
    double dist = 0.0;
    for (int m = 0; m < nm; ++m) {
      for (int w = 0; w < nw; ++w) {
        const double pmw = joint[m * nw + w];
        if (pmw == 0.0) continue;
        for (int o = 0; o < no; ++o) {
          const double pmwo = pmw * spec.obs(w, o);
          if (pmwo == 0.0) continue;
          for (int mn = 0; mn < nm; ++mn) {
            const double p = pmwo * q(m * no + o, mn);
            if (p == 0.0) continue;
            full[(m * no + o) * nm + mn] += p;
            dist += p * spec.cost(w, mn);
            for (int v = 0; v < nw; ++v) next_joint[mn * nw + v] += p * spec.trans(w, v);
          }
        }
      }
    }

    std::fill(next_m.begin(), next_m.end(), 0.0);
    std::fill(obs_next.begin(), obs_next.end(), 0.0);
    std::fill(prev_next.begin(), prev_next.end(), 0.0);
    std::fill(prev_obs.begin(), prev_obs.end(), 0.0);
    std::fill(obs_only.begin(), obs_only.end(), 0.0);
    std::fill(prev_only.begin(), prev_only.end(), 0.0);
    for (int m = 0; m < nm; ++m) {
      for (int o = 0; o < no; ++o) {
        for (int mn = 0; mn < nm; ++mn) {
          const double p = full[(m * no + o) * nm + mn];
          next_m[mn] += p;
          obs_next[o * nm + mn] += p;
          prev_next[m * nm + mn] += p;
          prev_obs[m * no + o] += p;
          obs_only[o] += p;
          prev_only[m] += p;
        }
      }
    }
    // H(M'|M,O) = H(M,O,M') - H(M,O) etc.
    const double h_full = entropy_sum(full);
    const double h_mo = entropy_sum(prev_obs);
    const double h_cond = h_full - h_mo;
    const double i_c = entropy_sum(next_m) - h_cond;
    const double i_m = (entropy_sum(obs_next) - entropy_sum(obs_only)) - h_cond;
    const double i_s = (entropy_sum(prev_next) - entropy_sum(prev_only)) - h_cond;

    out.distortion += dist;
    out.i_c += i_c;
    out.i_m += i_m;
    out.i_s += i_s;
    out.lagrangian += dist + mult.gamma_c * i_c + mult.gamma_m * i_m + mult.gamma_s * i_s;
    joint = std::move(next_joint);
  }
  const double inv = 1.0 / static_cast<double>(steps);
  out.distortion *= inv;
  out.i_c *= inv;
  out.i_m *= inv;
  out.i_s *= inv;
  out.lagrangian *= inv;
  return out;
}

}  // namespace seqrd::oracle
