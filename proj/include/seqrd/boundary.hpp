#pragma once

// Tracing the memory/sensing rate-distortion boundary: which constraints
// are active at a Lagrangian minimizer, where the minimizer sits on the
// boundary, multiplier sweeps, and an exact one-step boundary evaluator
// based on Lagrange duality.

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "seqrd/model.hpp"
#include "seqrd/planner.hpp"

namespace seqrd {

enum class Regime { GammaM_Zero, GammaS_Zero, GammaMS_Zero, GammaC_Zero };

std::string_view regime_name(Regime r);
std::optional<Regime> parse_regime(std::string_view name);

struct RatePair {
  double r_m = 0.0;
  double r_s = 0.0;
};

struct Classification {
  bool feasible = false;
  Regime regime = Regime::GammaM_Zero;  // meaningful only when feasible
  std::vector<RatePair> rates;          // one point, or both ends of the flat interval
  double slope_m = 0.0;                 // subgradient (slope_m, slope_s) of D*
  double slope_s = 0.0;
};

// Tolerance used on the I_C vs I_M + I_S conditions.
inline constexpr double kRegimeTol = 1e-9;

Classification classify_regime(double i_c, double i_m, double i_s, const Multipliers& mult,
                               double tol = kRegimeTol);
Classification classify_regime(const StepReport& averaged, const Multipliers& mult, double tol = kRegimeTol);

enum class Branch { All, GammaC_Zero, GammaM_Zero, GammaS_Zero };

// Candidate multipliers that reach the boundary point with subgradient
// (-alpha_m, -alpha_s). Which one applies depends on whether the minimizer
// has I_C <= I_M + I_S, so all admissible candidates are returned (or the
// one selected by `hint`), duplicates removed.
std::vector<Multipliers> multipliers_from_subgradient(double alpha_m, double alpha_s, Branch hint = Branch::All);

struct BoundaryPoint {
  Multipliers mult;
  double r_m = 0.0;
  double r_s = 0.0;
  double i_c = 0.0;
  double i_m = 0.0;
  double i_s = 0.0;
  double distortion = 0.0;
  double lagrangian = 0.0;
  std::optional<Regime> regime;  // empty when no row of the table matched
  double slope_m = 0.0;
  double slope_s = 0.0;
  bool converged = false;
  int iterations = 0;
};

// Points contributed by one planning run: two for the flat interval, one
// otherwise. An unmatched run is reported at (I_M, I_S) without a regime.
std::vector<BoundaryPoint> boundary_points(const Trajectory& traj, const Multipliers& mult);

struct SweepOptions {
  PlanOptions plan{};
  int jobs = 1;
  // Start of the first run in each chain; plan()'s seeded default if empty.
  std::optional<Policy> init;
};

// Runs plan() over the grid. Points are grouped into chains by which
// multipliers are zero; within a chain runs go in order of decreasing total
// gamma, each warm-started from the previous result. Chains are independent,
// so the output depends only on the grid and seed, never on `jobs`.
std::vector<BoundaryPoint> sweep(const ModelSpec& spec, std::span<const Multipliers> grid,
                                 const SweepOptions& opts = {});

std::size_t infeasible_count(std::span<const BoundaryPoint> points);

// Grids. An axis spec reads "<c|m|s>:lo:hi:count" with log spacing; a block
// is a comma-separated list of axes whose product forms the block, with
// unlisted axes held at zero.
struct GridAxis {
  char axis = 'c';
  double lo = 0.0;
  double hi = 0.0;
  int count = 1;
};

std::vector<double> log_space(double lo, double hi, int count);
GridAxis parse_grid_axis(std::string_view text);
std::vector<Multipliers> grid_block(std::span<const GridAxis> axes);
std::vector<Multipliers> parse_grid_block(std::string_view text);

// The three boundary parts of the symmetric channel: gamma_M = 0,
// gamma_M = gamma_S = 0 and gamma_S = 0.
std::vector<Multipliers> symmetric_channel_grid(int count);
// count x count grid over (gamma_C, gamma_S) for the horse-race contour.
std::vector<Multipliers> kelly_grid(int count);

// One-step boundary D*(r_m, r_s) for a fixed joint belief, keeping the
// constraints whose bits are set. Evaluated as the maximum over
// multipliers of the dual function min_q L1 - rate budget, each inner
// minimum found by the last-step solver. A kept constraint with zero budget
// is met exactly by restricting the policy (no O_t input for I_S, no
// M_{t-1} input for I_M); its multiplier is reported as infinity.
enum ConstraintBits : unsigned { kConstraintC = 1u, kConstraintM = 2u, kConstraintS = 4u, kAllConstraints = 7u };

struct BoundaryValue {
  double distortion = 0.0;
  Multipliers mult;  // maximizing multipliers
};

BoundaryValue onestep_boundary(const JointBelief& theta, const ModelSpec& spec, double r_m, double r_s,
                               unsigned constraints = kAllConstraints);

struct DecompositionCell {
  RatePair rates;
  double full = 0.0;
  double drop_c = 0.0;  // constraints M and S only
  double drop_m = 0.0;  // constraints C and S only
  double drop_s = 0.0;  // constraints C and M only
  double max_of_three() const;
};

struct DecompositionReport {
  std::vector<DecompositionCell> cells;
  double max_gap = 0.0;            // max |full - max_of_three|
  double max_excess = 0.0;         // max over cells and sub-boundaries of (sub - full), should be <= 0
};

DecompositionReport decomposition_check(const JointBelief& theta, const ModelSpec& spec, std::span<const RatePair> cells);

enum class Units { Nats, Bits };

void write_boundary_csv(std::ostream& os, std::span<const BoundaryPoint> points, Units units = Units::Nats);
// Parses a CSV written in nats.
std::vector<BoundaryPoint> read_boundary_csv(std::istream& is);

}  // namespace seqrd
