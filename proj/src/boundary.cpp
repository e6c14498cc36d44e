#include "seqrd/boundary.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <future>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>

#include "seqrd/infotheory.hpp"
#include "seqrd/onestep.hpp"

namespace seqrd {

std::string_view regime_name(Regime r) {
  switch (r) {
    case Regime::GammaM_Zero:
      return "GammaM_Zero";
    case Regime::GammaS_Zero:
      return "GammaS_Zero";
    case Regime::GammaMS_Zero:
      return "GammaMS_Zero";
    case Regime::GammaC_Zero:
      return "GammaC_Zero";
  }
  return "Unknown";
}

std::optional<Regime> parse_regime(std::string_view name) {
  for (Regime r : {Regime::GammaM_Zero, Regime::GammaS_Zero, Regime::GammaMS_Zero, Regime::GammaC_Zero}) {
    if (regime_name(r) == name) return r;
  }
  return std::nullopt;
}

Classification classify_regime(double i_c, double i_m, double i_s, const Multipliers& mult, double tol) {
  const double gc = mult.gamma_c, gm = mult.gamma_m, gs = mult.gamma_s;
  const bool joint_dominates = i_c >= i_m + i_s - tol;
  const bool joint_dominated = i_c <= i_m + i_s + tol;

  Classification out;
  if (gm == 0.0 && gs == 0.0 && joint_dominates) {
    out.feasible = true;
    out.regime = Regime::GammaMS_Zero;
    out.rates = {{i_c - i_s, i_s}, {i_m, i_c - i_m}};
    out.slope_m = -gc;
    out.slope_s = -gc;
  } else if (gm == 0.0 && joint_dominates) {
    out.feasible = true;
    out.regime = Regime::GammaM_Zero;
    out.rates = {{i_c - i_s, i_s}};
    out.slope_m = -gc;
    out.slope_s = -gc - gs;
  } else if (gs == 0.0 && joint_dominates) {
    out.feasible = true;
    out.regime = Regime::GammaS_Zero;
    out.rates = {{i_m, i_c - i_m}};
    out.slope_m = -gc - gm;
    out.slope_s = -gc;
  } else if (gc == 0.0 && joint_dominated) {
    out.feasible = true;
    out.regime = Regime::GammaC_Zero;
    out.rates = {{i_m, i_s}};
    out.slope_m = -gm;
    out.slope_s = -gs;
  } else {
    out.rates = {{i_m, i_s}};
    out.slope_m = -gc - gm;
    out.slope_s = -gc - gs;
  }
  return out;
}

Classification classify_regime(const StepReport& averaged, const Multipliers& mult, double tol) {
  return classify_regime(averaged.i_c, averaged.i_m, averaged.i_s, mult, tol);
}

std::vector<Multipliers> multipliers_from_subgradient(double alpha_m, double alpha_s, Branch hint) {
  if (!(alpha_m >= 0.0 && alpha_s >= 0.0) || (alpha_m == 0.0 && alpha_s == 0.0)) {
    throw std::invalid_argument("subgradient components must be non-negative and not both zero");
  }
  std::vector<std::pair<Branch, Multipliers>> candidates = {
      {Branch::GammaC_Zero, {0.0, alpha_m, alpha_s}},
  };
  if (alpha_m <= alpha_s) candidates.push_back({Branch::GammaM_Zero, {alpha_m, 0.0, alpha_s - alpha_m}});
  if (alpha_m >= alpha_s) candidates.push_back({Branch::GammaS_Zero, {alpha_s, alpha_m - alpha_s, 0.0}});

  std::vector<Multipliers> out;
  for (const auto& [branch, mult] : candidates) {
    if (hint != Branch::All && hint != branch) continue;
    if (std::find(out.begin(), out.end(), mult) == out.end()) out.push_back(mult);
  }
  return out;
}

std::vector<BoundaryPoint> boundary_points(const Trajectory& traj, const Multipliers& mult) {
  const Classification cls = classify_regime(traj.i_c, traj.i_m, traj.i_s, mult);
  std::vector<BoundaryPoint> out;
  for (const RatePair& rp : cls.rates) {
    BoundaryPoint p;
    p.mult = mult;
    p.r_m = rp.r_m;
    p.r_s = rp.r_s;
    p.i_c = traj.i_c;
    p.i_m = traj.i_m;
    p.i_s = traj.i_s;
    p.distortion = traj.distortion;
    p.lagrangian = traj.total_cost;
    if (cls.feasible) p.regime = cls.regime;
    p.slope_m = cls.slope_m;
    p.slope_s = cls.slope_s;
    p.converged = traj.converged;
    p.iterations = traj.iterations;
    out.push_back(p);
  }
  return out;
}

namespace {

int zero_pattern(const Multipliers& m) {
  return (m.gamma_c == 0.0 ? 1 : 0) | (m.gamma_m == 0.0 ? 2 : 0) | (m.gamma_s == 0.0 ? 4 : 0);
}

std::vector<BoundaryPoint> run_chain(const ModelSpec& spec, std::vector<Multipliers> chain, const PlanOptions& opts,
                                     const std::optional<Policy>& init) {
  std::stable_sort(chain.begin(), chain.end(),
                   [](const Multipliers& a, const Multipliers& b) { return a.gamma() > b.gamma(); });
  std::vector<BoundaryPoint> out;
  std::optional<Policy> warm = init;
  for (const Multipliers& mult : chain) {
    Trajectory traj = plan(spec, mult, opts, warm);
    auto pts = boundary_points(traj, mult);
    out.insert(out.end(), pts.begin(), pts.end());
    warm = std::move(traj.policies);
  }
  return out;
}

}  // namespace

std::vector<BoundaryPoint> sweep(const ModelSpec& spec, std::span<const Multipliers> grid, const SweepOptions& opts) {
  if (grid.empty()) throw std::invalid_argument("sweep grid is empty");
  for (const auto& m : grid) require_positive(m);

  std::vector<int> order;
  std::map<int, std::vector<Multipliers>> by_pattern;
  for (const auto& m : grid) {
    const int key = zero_pattern(m);
    if (!by_pattern.count(key)) order.push_back(key);
    by_pattern[key].push_back(m);
  }

  std::vector<std::vector<BoundaryPoint>> results(order.size());
  const std::size_t jobs = static_cast<std::size_t>(std::max(1, opts.jobs));
  for (std::size_t start = 0; start < order.size(); start += jobs) {
    const std::size_t stop = std::min(order.size(), start + jobs);
    if (stop - start == 1) {
      results[start] = run_chain(spec, by_pattern[order[start]], opts.plan, opts.init);
      continue;
    }
    std::vector<std::future<std::vector<BoundaryPoint>>> pending;
    for (std::size_t i = start; i < stop; ++i) {
      pending.push_back(std::async(std::launch::async, run_chain, std::cref(spec), by_pattern[order[i]],
                                   std::cref(opts.plan), std::cref(opts.init)));
    }
    for (std::size_t i = start; i < stop; ++i) results[i] = pending[i - start].get();
  }

  std::vector<BoundaryPoint> out;
  for (auto& r : results) out.insert(out.end(), r.begin(), r.end());
  return out;
}

std::size_t infeasible_count(std::span<const BoundaryPoint> points) {
  return static_cast<std::size_t>(
      std::count_if(points.begin(), points.end(), [](const BoundaryPoint& p) { return !p.regime; }));
}

std::vector<double> log_space(double lo, double hi, int count) {
  if (count < 1) throw std::invalid_argument("grid count must be >= 1");
  if (count == 1) return {lo};
  if (!(lo > 0.0 && hi > 0.0)) throw std::invalid_argument("log-spaced grid needs positive endpoints");
  std::vector<double> out(count);
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < count; ++i) out[i] = std::exp(a + (b - a) * i / (count - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

namespace {

double parse_double(std::string_view s, std::string_view what) {
  // std::from_chars for double is available from GCC 11.
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::invalid_argument("bad number in grid spec " + std::string(what) + ": '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = s.find(sep, pos);
    parts.push_back(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return parts;
}

}  // namespace

GridAxis parse_grid_axis(std::string_view text) {
  const auto parts = split(text, ':');
  if (parts.size() != 4 || parts[0].size() != 1 || std::string_view("cms").find(parts[0][0]) == std::string_view::npos) {
    throw std::invalid_argument("grid axis must read <c|m|s>:lo:hi:count, got '" + std::string(text) + "'");
  }
  GridAxis axis;
  axis.axis = parts[0][0];
  axis.lo = parse_double(parts[1], text);
  axis.hi = parse_double(parts[2], text);
  const double count = parse_double(parts[3], text);
  if (count < 1 || count != std::floor(count)) throw std::invalid_argument("grid count must be a positive integer");
  axis.count = static_cast<int>(count);
  if (axis.lo < 0.0 || axis.hi < 0.0) throw std::invalid_argument("grid multipliers must be non-negative");
  return axis;
}

std::vector<Multipliers> grid_block(std::span<const GridAxis> axes) {
  std::vector<Multipliers> out{Multipliers{}};
  for (const GridAxis& axis : axes) {
    const auto values = log_space(axis.lo, axis.hi, axis.count);
    std::vector<Multipliers> next;
    next.reserve(out.size() * values.size());
    for (const auto& base : out) {
      for (double v : values) {
        Multipliers m = base;
        (axis.axis == 'c' ? m.gamma_c : axis.axis == 'm' ? m.gamma_m : m.gamma_s) = v;
        next.push_back(m);
      }
    }
    out = std::move(next);
  }
  return out;
}

std::vector<Multipliers> parse_grid_block(std::string_view text) {
  std::vector<GridAxis> axes;
  for (auto part : split(text, ',')) axes.push_back(parse_grid_axis(part));
  return grid_block(axes);
}

std::vector<Multipliers> symmetric_channel_grid(int count) {
  std::vector<Multipliers> grid;
  const auto append = [&grid](const std::vector<Multipliers>& block) { grid.insert(grid.end(), block.begin(), block.end()); };
  append(grid_block(std::vector<GridAxis>{{'c', 0.02, 0.5, count}, {'s', 0.01, 0.5, count}}));
  append(grid_block(std::vector<GridAxis>{{'c', 0.02, 0.5, count}}));
  append(grid_block(std::vector<GridAxis>{{'c', 0.02, 0.5, count}, {'m', 0.01, 0.5, count}}));
  return grid;
}

std::vector<Multipliers> kelly_grid(int count) {
  return grid_block(std::vector<GridAxis>{{'c', 2e-4, 1.5e-3, count}, {'s', 2e-4, 1.5e-3, count}});
}

// ---------------------------------------------------------------------------
// One-step boundary by duality.

namespace {

// Which input a restricted policy may read. A zero budget on I_S forces
// q(m' | m, o) = q(m' | m) on the support of Pr(m, o), and a zero budget on
// I_M forces q(m' | m, o) = q(m' | o); the matching multiplier is then
// infinite, so those cells are solved over the restricted family instead.
enum class Tie { None, Mem, Obs };

// Minimizes the one-step Lagrangian over policies restricted by `tie` with
// alternating Gibbs updates. The multiplier of the constraint the
// restriction satisfies exactly is ignored. `q` is the start and the result.
StepReport solve_tied(const JointBelief& theta, const ModelSpec& spec, Multipliers mult, Tie tie, StepPolicy& q) {
  if (tie == Tie::Mem) mult.gamma_s = 0.0;
  if (tie == Tie::Obs) mult.gamma_m = 0.0;
  const int nm = spec.num_mem, no = spec.num_obs;
  const Matrix pmo = obs_joint(theta, spec);
  const Matrix cost = posterior_cost(theta, spec, spec.cost);
  const double gamma = mult.gamma();
  const double tiny = std::numeric_limits<double>::denorm_min();
  const int groups = tie == Tie::Mem ? nm : no;
  const auto group_of = [&](int m, int o) { return tie == Tie::Mem ? m : o; };

  double prev = std::numeric_limits<double>::infinity();
  StepReport report;
  for (int iter = 0; iter < 100000; ++iter) {
    // Marginals of the current policy.
    Vector free = Vector::Zero(nm);
    Matrix given_obs = Matrix::Zero(no, nm), given_mem = Matrix::Zero(nm, nm);
    for (int m = 0; m < nm; ++m)
      for (int o = 0; o < no; ++o) {
        const auto row = q.table.row(q.row(m, o));
        free += pmo(m, o) * row.transpose();
        given_obs.row(o) += pmo(m, o) * row;
        given_mem.row(m) += pmo(m, o) * row;
      }
    for (int o = 0; o < no; ++o) given_obs.row(o) /= std::max(given_obs.row(o).sum(), tiny);
    for (int m = 0; m < nm; ++m) given_mem.row(m) /= std::max(given_mem.row(m).sum(), tiny);
    const auto log_floor = [tiny](double x) { return std::log(std::max(x, tiny)); };

    // Gibbs step per group: average the pointwise cost over its (m, o) cells.
    Matrix exponent = Matrix::Zero(groups, nm);
    Vector weight = Vector::Zero(groups);
    for (int m = 0; m < nm; ++m)
      for (int o = 0; o < no; ++o) {
        const double p = pmo(m, o);
        if (p <= 0.0) continue;
        const int g = group_of(m, o);
        weight(g) += p;
        for (int k = 0; k < nm; ++k) {
          double gk = cost(q.row(m, o), k);
          if (mult.gamma_c > 0.0) gk -= mult.gamma_c * log_floor(free(k));
          if (mult.gamma_m > 0.0) gk -= mult.gamma_m * log_floor(given_obs(o, k));
          if (mult.gamma_s > 0.0) gk -= mult.gamma_s * log_floor(given_mem(m, k));
          exponent(g, k) += p * gk;
        }
      }
    Matrix next = Matrix::Constant(groups, nm, 1.0 / nm);
    for (int g = 0; g < groups; ++g) {
      if (weight(g) <= 0.0) continue;
      const Eigen::RowVectorXd e = exponent.row(g) / weight(g);
      Eigen::Index best = 0;
      const double lo = e.minCoeff(&best);
      if (gamma > 0.0) {
        next.row(g) = (-(e.array() - lo) / gamma).exp().matrix();
        next.row(g) /= next.row(g).sum();
      } else {
        next.row(g).setZero();
        next(g, best) = 1.0;
      }
    }
    for (int m = 0; m < nm; ++m)
      for (int o = 0; o < no; ++o) q.table.row(q.row(m, o)) = next.row(group_of(m, o));

    report = evaluate_step(theta, spec, q, mult);
    if (iter > 0 && prev - report.lagrangian <= 1e-15 * (1.0 + std::abs(prev))) break;
    prev = report.lagrangian;
  }
  return report;
}

class DualFunction {
 public:
  struct Eval {
    double value = 0.0;
    std::array<double, 3> grad{};  // d/d(gamma_c, gamma_m, gamma_s)
  };

  DualFunction(const JointBelief& theta, const ModelSpec& spec, double r_m, double r_s, Tie tie)
      : theta_(theta), spec_(spec), budget_{r_m + r_s, r_m, r_s}, tie_(tie) {
    // Deterministic posterior-argmin policy: the gamma -> 0 limit.
    const Matrix pmo = obs_joint(theta, spec);
    const Matrix expected = posterior_cost(theta, spec, spec.cost);
    StepPolicy greedy(spec.num_mem, spec.num_obs);
    unbounded_ = 0.0;
    for (int m = 0; m < spec.num_mem; ++m) {
      for (int o = 0; o < spec.num_obs; ++o) {
        const auto r = greedy.row(m, o);
        Eigen::Index best = 0;
        expected.row(r).minCoeff(&best);
        greedy.table(r, best) = 1.0;
        unbounded_ += pmo(m, o) * expected(r, best);
      }
    }
    const InformationRates rates = information_rates(theta, spec, greedy);
    greedy_rates_ = {rates.i_c, rates.i_m, rates.i_s};

    const Vector world = theta.table.colwise().sum().transpose();
    constant_ = (world.transpose() * spec.cost).minCoeff();
  }

  double unbounded() const { return unbounded_; }
  double constant() const { return constant_; }
  const std::array<double, 3>& budget() const { return budget_; }

  Eval operator()(const std::array<double, 3>& g) {
    Eval e;
    const double total = g[0] + g[1] + g[2];
    std::array<double, 3> rates{};
    if (tie_ != Tie::None) {
      StepPolicy q = warm_ ? *warm_ : StepPolicy::uniform(spec_.num_mem, spec_.num_obs);
      q.table = (1.0 - 1e-9) * q.table.array() + 1e-9 / spec_.num_mem;
      const StepReport r = solve_tied(theta_, spec_, {g[0], g[1], g[2]}, tie_, q);
      warm_ = std::move(q);
      e.value = r.lagrangian;
      rates = {r.i_c, r.i_m, r.i_s};
    } else if (total <= 0.0) {
      e.value = unbounded_;
      rates = greedy_rates_;
    } else {
      SolveOptions opts;
      opts.tol = 1e-12;
      opts.max_iters = 200000;
      if (warm_) {
        // Blend toward uniform so entries that underflowed to zero can recover.
        StepPolicy start = *warm_;
        start.table = (1.0 - 1e-9) * start.table.array() + 1e-9 / spec_.num_mem;
        opts.init = WarmInit{std::move(start)};
      } else {
        opts.init = UniformInit{};
      }
      const OneStepSolution sol = solve_last_step(theta_, spec_, {g[0], g[1], g[2]}, opts);
      warm_ = sol.policy;
      e.value = sol.report.lagrangian;
      rates = {sol.report.i_c, sol.report.i_m, sol.report.i_s};
    }
    for (int k = 0; k < 3; ++k) {
      e.value -= g[k] * budget_[k];
      e.grad[k] = rates[k] - budget_[k];
    }
    return e;
  }

 private:
  const JointBelief& theta_;
  const ModelSpec& spec_;
  std::array<double, 3> budget_;
  std::array<double, 3> greedy_rates_{};
  double unbounded_ = 0.0;
  double constant_ = 0.0;
  Tie tie_ = Tie::None;
  std::optional<StepPolicy> warm_;
};

// Maximizes the concave dual over the listed coordinates, holding the
// others at their current values in `g`. On return `g` holds the
// maximizer and the returned evaluation belongs to it.
DualFunction::Eval maximize(DualFunction& f, std::array<double, 3>& g, std::span<const int> coords,
                            const std::array<double, 3>& upper) {
  if (coords.empty()) return f(g);
  const int k = coords[0];
  const auto rest = coords.subspan(1);
  auto at = [&](double x) {
    g[k] = x;
    return maximize(f, g, rest, upper);
  };

  DualFunction::Eval lo_eval = at(0.0);
  if (lo_eval.grad[k] <= 0.0) return lo_eval;
  DualFunction::Eval hi_eval = at(upper[k]);
  if (hi_eval.grad[k] >= 0.0) return hi_eval;

  // Illinois false position on the (decreasing) partial derivative.
  double a = 0.0, fa = lo_eval.grad[k];
  double b = upper[k], fb = hi_eval.grad[k];
  int side = 0;
  DualFunction::Eval last = hi_eval;
  for (int iter = 0; iter < 200; ++iter) {
    double x = b - fb * (b - a) / (fb - fa);
    if (!(x > a && x < b)) x = 0.5 * (a + b);
    last = at(x);
    const double fx = last.grad[k];
    if (std::abs(fx) < 1e-12 || (b - a) < 1e-13 * (1.0 + b)) break;
    if (fx > 0.0) {
      a = x;
      fa = fx;
      if (side == 1) fb *= 0.5;
      side = 1;
    } else {
      b = x;
      fb = fx;
      if (side == -1) fa *= 0.5;
      side = -1;
    }
  }
  return last;
}

}  // namespace

BoundaryValue onestep_boundary(const JointBelief& theta, const ModelSpec& spec, double r_m, double r_s,
                               unsigned constraints) {
  if (r_m < 0.0 || r_s < 0.0) throw std::invalid_argument("rates must be non-negative");
  if ((constraints & kAllConstraints) == 0) throw std::invalid_argument("at least one constraint must be kept");

  // Zero total budget on the joint constraint forces M_t independent of
  // (M_{t-1}, O_t); so do two zero conditional budgets when Pr(m, o) has
  // full support.
  const Matrix pmo = obs_joint(theta, spec);
  const bool full_support = (pmo.array() > 0.0).all();
  const bool keep_m = constraints & kConstraintM, keep_s = constraints & kConstraintS;
  if (((constraints & kConstraintC) && r_m + r_s == 0.0) || (keep_m && keep_s && r_m == 0.0 && r_s == 0.0 && full_support)) {
    return {DualFunction(theta, spec, r_m, r_s, Tie::None).constant(), {}};
  }

  // A single zero conditional budget is met exactly by a restricted policy.
  Tie tie = Tie::None;
  if (keep_s && r_s == 0.0) {
    tie = Tie::Mem;
    constraints &= ~kConstraintS;
  } else if (keep_m && r_m == 0.0) {
    tie = Tie::Obs;
    constraints &= ~kConstraintM;
  }
  DualFunction f(theta, spec, r_m, r_s, tie);

  // An optimal multiplier satisfies unbounded <= dual <= constant - sum_x
  // gamma_x budget_x, which bounds each coordinate.
  const double spread = std::max(f.constant() - f.unbounded(), 0.0);
  std::array<double, 3> upper{};
  std::vector<int> coords;
  for (int k = 0; k < 3; ++k) {
    if (!(constraints & (1u << k))) continue;
    const double budget = f.budget()[k];
    upper[k] = budget > 0.0 ? 2.0 * spread / budget + 1e-6 : 1e4;
    coords.push_back(k);
  }
  std::array<double, 3> g{};
  const auto best = maximize(f, g, coords, upper);
  const double inf = std::numeric_limits<double>::infinity();
  if (tie == Tie::Mem) g[2] = inf;
  if (tie == Tie::Obs) g[1] = inf;
  return {best.value, {g[0], g[1], g[2]}};
}

double DecompositionCell::max_of_three() const { return std::max({drop_c, drop_m, drop_s}); }

DecompositionReport decomposition_check(const JointBelief& theta, const ModelSpec& spec, std::span<const RatePair> cells) {
  DecompositionReport report;
  for (const RatePair& rp : cells) {
    DecompositionCell cell;
    cell.rates = rp;
    cell.full = onestep_boundary(theta, spec, rp.r_m, rp.r_s, kAllConstraints).distortion;
    cell.drop_c = onestep_boundary(theta, spec, rp.r_m, rp.r_s, kConstraintM | kConstraintS).distortion;
    cell.drop_m = onestep_boundary(theta, spec, rp.r_m, rp.r_s, kConstraintC | kConstraintS).distortion;
    cell.drop_s = onestep_boundary(theta, spec, rp.r_m, rp.r_s, kConstraintC | kConstraintM).distortion;
    report.max_gap = std::max(report.max_gap, std::abs(cell.full - cell.max_of_three()));
    report.max_excess = std::max({report.max_excess, cell.drop_c - cell.full, cell.drop_m - cell.full,
                                  cell.drop_s - cell.full});
    report.cells.push_back(cell);
  }
  return report;
}

}  // namespace seqrd
