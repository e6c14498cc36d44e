// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <Eigen/QR>

#include "fixtures.hpp"
#include "seqrd/boundary.hpp"
#include "seqrd/infotheory.hpp"
#include "seqrd/onestep.hpp"
#include "seqrd/oracle.hpp"
#include "seqrd/planner.hpp"

using namespace seqrd;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// Small fixture suite shared by several criteria.
struct Fixture {
  ModelSpec spec;
  Multipliers mult;
};

std::vector<Fixture> fixture_suite() {
  std::vector<Fixture> out;
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 8; ++i) {
    const int n = 2 + i % 4;
    out.push_back({testing::random_model(2 + i % 2, 2 + (i / 2) % 2, 2 + (i / 4) % 2, n, 7000 + i),
                   testing::random_multipliers(rng, 0.02, 0.5)});
  }
  ModelSpec sym = build_symmetric_channel();
  sym.horizon = 10;
  out.push_back({sym, {0.1, 0.0, 0.05}});
  out.push_back({sym, {0.05, 0.02, 0.0}});
  out.push_back({build_kelly(), {0.05, 0.0, 0.05}});
  return out;
}

// 1. Last-step solver reaches the grid-search minimum.
Outcome criterion1() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1);
  double worst = -1e300;
  for (int i = 0; i < 20; ++i) {
    const ModelSpec spec = testing::random_model(2, 2, 2, 1, 100 + i);
    const JointBelief theta = testing::random_belief(2, 2, rng);
    const Multipliers mult = testing::random_multipliers(rng, 0.05, 1.0);
    const auto sol = solve_last_step(theta, spec, mult);
    const auto grid = oracle::grid_search_onestep(theta.table, spec, mult, 0.02);
    worst = std::max(worst, sol.report.lagrangian - grid.lagrangian);
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-4 && secs < 30.0,
          "max(L_solver - L_grid) = " + fmt("%.3e", worst) + ", " + fmt("%.1f s", secs)};
}

// 2. Inner and outer monotonicity across the fixture suite.
Outcome criterion2(const std::vector<Fixture>& suite) {
  double inner_worst = 0.0, outer_worst = 0.0;
  std::mt19937_64 rng(2);
  for (const auto& f : suite) {
    const JointBelief theta = initial_belief(f.spec);
    const auto sol = solve_last_step(theta, f.spec, f.mult);
    for (std::size_t i = 1; i < sol.lagrangian_trace.size(); ++i)
      inner_worst = std::max(inner_worst, sol.lagrangian_trace[i] - sol.lagrangian_trace[i - 1]);
    PlanOptions opts;
    opts.seed = 3;
    const Trajectory tr = plan(f.spec, f.mult, opts);
    for (std::size_t i = 1; i < tr.cost_trace.size(); ++i)
      outer_worst = std::max(outer_worst, tr.cost_trace[i] - tr.cost_trace[i - 1]);
    // In-sequence inner traces at the first step.
    const std::span<const StepPolicy> suffix(tr.policies.begin() + 1, tr.policies.end());
    SolveOptions inner;
    inner.init = RandomDirichletInit{5, 1.0};
    const auto step = optimize_step(theta, f.spec, f.mult, suffix, inner);
    for (std::size_t i = 1; i < step.cost_trace.size(); ++i)
      inner_worst = std::max(inner_worst, step.cost_trace[i] - step.cost_trace[i - 1]);
  }
  return {inner_worst <= 1e-12 && outer_worst <= 1e-10,
          "max inner increase " + fmt("%.2e", inner_worst) + ", max outer increase " + fmt("%.2e", outer_worst)};
}

// 3. Fixed-point residuals of converged solutions.
Outcome criterion3(const std::vector<Fixture>& suite) {
  double worst_ratio = 0.0;
  std::mt19937_64 rng(3);
  for (const auto& f : suite) {
    SolveOptions opts;
    const JointBelief theta = initial_belief(f.spec);
    const auto sol = solve_last_step(theta, f.spec, f.mult, opts);
    if (sol.converged) {
      const Matrix pmo = obs_joint(theta, f.spec);
      const Marginals fresh = marginalize(theta, f.spec, sol.policy);
      const double marg_res = std::max({(fresh.free - sol.marginals.free).cwiseAbs().maxCoeff(),
                                        (fresh.given_obs - sol.marginals.given_obs).cwiseAbs().maxCoeff(),
                                        (fresh.given_mem - sol.marginals.given_mem).cwiseAbs().maxCoeff()});
      const double pol_res = policy_change(pmo, update_policy(theta, f.spec, fresh, f.mult), sol.policy);
      worst_ratio = std::max({worst_ratio, marg_res / opts.tol, pol_res / opts.tol});
    }
    // In sequence: step 1 against a random suffix.
    if (f.spec.horizon < 2) continue;
    const Policy suffix = [&] {
      Policy p = testing::random_plan(f.spec, rng, 0.05);
      p.erase(p.begin());
      return p;
    }();
    const auto step = optimize_step(theta, f.spec, f.mult, suffix, opts);
    if (!step.converged) continue;
    const Marginals marg = marginalize(theta, f.spec, step.policy);
    const CostToGoVector& nu = step.suffix.nus[1];
    const StepPolicy again = update_policy_with_future(theta, f.spec, marg, f.mult, nu);
    worst_ratio = std::max(worst_ratio, policy_change(obs_joint(theta, f.spec), again, step.policy) / opts.tol);
    // The cost-to-go handed back is the one recomputed from the final suffix.
    const CostToGoVector direct = backward_nu(f.spec, step.suffix.policies[1], step.suffix.marginals[1], f.mult,
                                              step.suffix.nus.size() > 2 ? step.suffix.nus[2]
                                                                         : CostToGoVector::zero(f.spec.num_mem,
                                                                                                f.spec.num_world));
    worst_ratio = std::max(worst_ratio, (direct.table - nu.table).cwiseAbs().maxCoeff() / opts.tol);
  }
  return {worst_ratio < 10.0, "max residual / tol = " + fmt("%.3f", worst_ratio)};
}

// 4. Chain-rule identities on every evaluated (theta, q).
Outcome criterion4(const std::vector<Fixture>& suite) {
  double worst = 0.0;
  long checked = 0;
  auto check = [&](const JointBelief& theta, const ModelSpec& spec, const StepPolicy& q) {
    const auto rates = information_rates(theta, spec, q);
    const auto info = joint_information(joint_distribution(theta, spec, q));
    worst = std::max({worst, std::abs(rates.i_c - rates.i_m - info.obs_next),
                      std::abs(rates.i_c - rates.i_s - info.prev_next), std::abs(rates.i_c - info.i_c)});
    ++checked;
  };
  std::mt19937_64 rng(4);
  for (int i = 0; i < 200; ++i) {
    const int nm = 2 + i % 3, nw = 2 + i % 4, no = 2 + i % 2;
    const ModelSpec spec = testing::random_model(nw, no, nm, 1, 8000 + i);
    check(testing::random_belief(nm, nw, rng, i % 2 ? 0.0 : 0.05), spec, testing::random_policy(nm, no, rng));
  }
  for (const auto& f : suite) {
    const Trajectory tr = plan(f.spec, f.mult);
    for (int t = 0; t < f.spec.horizon; ++t) check(tr.beliefs[t], f.spec, tr.policies[t]);
  }
  return {worst <= 1e-10, std::to_string(checked) + " pairs, max deviation " + fmt("%.2e", worst)};
}

// 5. Suffix cost equals the belief-weighted cost-to-go, including along
// the outer iterations of plan().
Outcome criterion5() {
  double worst = 0.0;
  std::mt19937_64 rng(5);
  auto check = [&](const Trajectory& tr, int n) {
    for (int i = 0; i < n; ++i) {
      double suffix = 0.0;
      for (int j = i; j < n; ++j) suffix += tr.reports[j].lagrangian;
      const double weighted = tr.beliefs[i].table.cwiseProduct(tr.nus[i].table).sum();
      worst = std::max(worst, std::abs(weighted - suffix) / (n - i));
    }
  };
  for (int k = 0; k < 30; ++k) {
    const int n = 1 + k % 4;
    const ModelSpec spec = testing::random_model(2, 2, 2, n, 9000 + k);
    const Multipliers mult = testing::random_multipliers(rng);
    check(evaluate_policy(spec, testing::random_plan(spec, rng, 0.02), mult), n);
    for (int r = 1; r <= 3; ++r) {
      PlanOptions opts;
      opts.max_outer_iters = r;
      opts.seed = k;
      check(plan(spec, mult, opts), n);
    }
  }
  return {worst <= 1e-8, "max |suffix L - E_theta nu / k| = " + fmt("%.2e", worst)};
}

// 6. No single-step re-optimization beats the converged plan by more than
// the outer tolerance.
Outcome criterion6() {
  double worst = -1e300;
  int runs = 0;
  std::mt19937_64 rng(6);
  for (int k = 0; k < 12; ++k) {
    const int n = 1 + k % 5;
    const ModelSpec spec = testing::random_model(2 + k % 2, 2, 2 + (k / 2) % 2, n, 9500 + k);
    const Multipliers mult = testing::random_multipliers(rng, 0.02, 0.5);
    PlanOptions opts;
    opts.outer_tol = 1e-7;
    opts.seed = k;
    const Trajectory tr = plan(spec, mult, opts);
    if (!tr.converged) return {false, "plan did not converge on fixture " + std::to_string(k)};
    ++runs;
    for (int t = 0; t < n; ++t) {
      SolveOptions inner = opts.inner;
      inner.init = WarmInit{tr.policies[t]};
      const std::span<const StepPolicy> suffix(tr.policies.begin() + t + 1, tr.policies.end());
      const auto step = optimize_step(tr.beliefs[t], spec, mult, suffix, inner);
      Policy swapped = tr.policies;
      swapped[t] = step.policy;
      worst = std::max(worst, tr.total_cost - evaluate_policy(spec, swapped, mult).total_cost);
    }
  }
  return {worst < 1e-7 + 1e-9, std::to_string(runs) + " plans, max single-step gain " + fmt("%.2e", worst)};
}

// 7. Entropy-dominated and distortion-dominated limits.
Outcome criterion7() {
  const ModelSpec spec = build_symmetric_channel();
  const Trajectory big = plan(spec, {1e6, 1e6, 1e6});
  const Trajectory tiny = plan(spec, {1e-4, 0.0, 0.0});
  const auto mc = oracle::unbounded_baseline(spec, 1000000, 7);
  const double a = std::abs(big.distortion - 0.5), b = std::abs(tiny.distortion - mc.mean);
  return {a <= 1e-3 && b <= 5e-3, "|D - 0.5| = " + fmt("%.2e", a) + "; |D - baseline| = " + fmt("%.2e", b) +
                                      " (baseline " + fmt("%.5f", mc.mean) + " +- " + fmt("%.5f", mc.stderr_) + ")"};
}

// 8. Three boundary parts of the symmetric channel.
Outcome criterion8() {
  const auto t0 = Clock::now();
  const ModelSpec spec = build_symmetric_channel();
  const auto grid = symmetric_channel_grid(20);
  const auto pts = sweep(spec, grid);
  const double secs = seconds_since(t0);

  std::set<Regime> seen;
  for (const auto& p : pts)
    if (p.regime) seen.insert(*p.regime);
  const std::set<Regime> expected{Regime::GammaM_Zero, Regime::GammaMS_Zero, Regime::GammaS_Zero};
  const bool regimes_ok = seen == expected;

  // Distortion does not increase when both rates grow.
  std::vector<const BoundaryPoint*> ok;
  for (const auto& p : pts)
    if (p.regime && p.converged) ok.push_back(&p);
  double mono = 0.0;
  for (const auto* a : ok)
    for (const auto* b : ok)
      if (a->r_m >= b->r_m && a->r_s >= b->r_s) mono = std::max(mono, a->distortion - b->distortion);

  // Within a distortion band of +-0.01, R_S falls as R_M rises at fixed D. The
  // slope is the R_M coefficient of a least-squares fit R_S ~ 1 + R_M + D, so
  // the spread of D inside a band does not leak into it. The plain R_S ~ R_M
  // slope is reported alongside.
  int bands = 0, negative = 0, plain_negative = 0;
  for (double center = 0.21; center < 0.5; center += 0.02) {
    std::vector<const BoundaryPoint*> band;
    for (const auto* p : ok)
      if (std::abs(p->distortion - center) <= 0.01) band.push_back(p);
    if (band.size() < 4) continue;
    Matrix a(band.size(), 3);
    Vector y(band.size());
    for (std::size_t i = 0; i < band.size(); ++i) {
      a.row(i) << 1.0, band[i]->r_m, band[i]->distortion;
      y(i) = band[i]->r_s;
    }
    const Eigen::ColPivHouseholderQR<Matrix> qr(a);
    if (qr.rank() < 3) continue;
    ++bands;
    negative += qr.solve(y)(1) < 0.0 ? 1 : 0;
    const Vector plain = a.leftCols(2).colPivHouseholderQr().solve(y);
    plain_negative += plain(1) < 0.0 ? 1 : 0;
  }
  const bool tradeoff_ok = bands > 0 && negative == bands;
  const bool pass = regimes_ok && mono <= 1e-6 && tradeoff_ok && secs < 300.0;
  std::string d = std::to_string(pts.size()) + " points, regimes " + (regimes_ok ? "ok" : "WRONG") +
                  ", max dominated increase " + fmt("%.2e", mono) + ", negative slope in " +
                  std::to_string(negative) + "/" + std::to_string(bands) + " bands at fixed D (" +
                  std::to_string(plain_negative) + " without the D term), " + fmt("%.1f s", secs);
  return {pass, d};
}

// 9. Horse-race contour sweep.
Outcome criterion9() {
  const auto t0 = Clock::now();
  const ModelSpec spec = build_kelly();
  SweepOptions opts;
  opts.init = filter_initial_policy(spec);
  const auto pts = sweep(spec, kelly_grid(5), opts);
  const double secs = seconds_since(t0);
  int converged = 0;
  for (const auto& p : pts) converged += p.converged ? 1 : 0;
  const bool pass = pts.size() >= 25 && secs < 900.0;
  return {pass, std::to_string(pts.size()) + " rows, " + std::to_string(converged) + " converged, " +
                    std::to_string(pts.size() - converged) + " flagged, " + fmt("%.1f s", secs)};
}

// 10. Enumeration oracle agrees with evaluate_policy.
Outcome criterion10() {
  std::mt19937_64 rng(10);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const ModelSpec spec = testing::random_model(2 + k % 3, 2 + (k / 3) % 2, 2 + (k / 6) % 3, 1 + k % 5, 9900 + k);
    const Policy p = testing::random_plan(spec, rng);
    const Multipliers mult = testing::random_multipliers(rng);
    std::vector<Matrix> tables;
    for (const auto& q : p) tables.push_back(q.table);
    const auto e = oracle::enumerate_cost(spec, tables, mult);
    const Trajectory tr = evaluate_policy(spec, p, mult);
    worst = std::max({worst, std::abs(e.lagrangian - tr.total_cost), std::abs(e.distortion - tr.distortion),
                      std::abs(e.i_c - tr.i_c), std::abs(e.i_m - tr.i_m), std::abs(e.i_s - tr.i_s)});
  }
  return {worst <= 1e-10, "max deviation " + fmt("%.2e", worst)};
}

// 11. The full one-step boundary is the max of the three two-constraint
// boundaries.
Outcome criterion11() {
  // Symmetric channel at its first belief and at a random one. A cost with
  // one best memory state for every world would make every cell equal.
  std::mt19937_64 rng(11);
  const ModelSpec spec = build_symmetric_channel();
  std::vector<RatePair> cells;
  for (double rm : {0.0, 0.05, 0.1, 0.2, 0.4})
    for (double rs : {0.0, 0.05, 0.1, 0.2, 0.4}) cells.push_back({rm, rs});
  double gap = 0.0, excess = 0.0, lo = 1e300, hi = -1e300;
  for (const JointBelief& theta : {initial_belief(spec), testing::random_belief(2, 2, rng)}) {
    const auto rep = decomposition_check(theta, spec, cells);
    gap = std::max(gap, rep.max_gap);
    excess = std::max(excess, rep.max_excess);
    for (const auto& c : rep.cells) lo = std::min(lo, c.full), hi = std::max(hi, c.full);
  }
  return {gap <= 1e-4, "2 x 25 cells, D* in [" + fmt("%.4f", lo) + ", " + fmt("%.4f", hi) +
                           "], max |D* - max of three| = " + fmt("%.2e", gap) + ", max excess " + fmt("%.2e", excess)};
}

}  // namespace

int main() {
  const std::vector<Fixture> suite = fixture_suite();
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"last-step optimality vs grid search", criterion1},
      {"monotone inner and outer iterations", [&] { return criterion2(suite); }},
      {"fixed-point residuals", [&] { return criterion3(suite); }},
      {"chain-rule identities", [&] { return criterion4(suite); }},
      {"suffix cost vs cost-to-go identity", criterion5},
      {"single-step local optimality", criterion6},
      {"entropy- and distortion-dominated limits", criterion7},
      {"symmetric-channel three-part boundary", criterion8},
      {"horse-race contour sweep", criterion9},
      {"enumeration oracle agreement", criterion10},
      {"three-constraint decomposition", criterion11},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s criterion %zu (%s): %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
