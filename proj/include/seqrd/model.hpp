#pragma once

// Domain types for finite Passive POMDPs: a hidden Markov world observed
// through a noisy channel, tracked by a bounded agent whose memory state
// doubles as its action.

#include <Eigen/Core>

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace seqrd {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Tolerance on the unit-sum of every probability vector in a model.
inline constexpr double kStochasticTol = 1e-12;

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ModelSpec {
  int num_world = 0;
  int num_obs = 0;
  int num_mem = 0;
  int horizon = 0;
  Vector init_world;  // P1(w)
  Vector init_mem;    // distribution of M0
  Matrix trans;       // world x world, p(w' | w)
  Matrix obs;         // world x obs, sigma(o | w)
  Matrix cost;        // world x mem, d(w, m)
};

// Joint distribution of the previous memory state and the current world
// state, stored mem x world.
struct JointBelief {
  Matrix table;

  int num_mem() const { return static_cast<int>(table.rows()); }
  int num_world() const { return static_cast<int>(table.cols()); }
};

// Stochastic memory update q(m' | m, o). Row (m * num_obs + o) holds the
// distribution over m'.
struct StepPolicy {
  int num_obs = 0;
  Matrix table;

  StepPolicy() = default;
  StepPolicy(int num_mem, int num_obs_);

  static StepPolicy uniform(int num_mem, int num_obs);

  int num_mem() const { return static_cast<int>(table.cols()); }
  Eigen::Index row(int m_prev, int o) const { return static_cast<Eigen::Index>(m_prev) * num_obs + o; }
  double operator()(int m_prev, int o, int m_next) const { return table(row(m_prev, o), m_next); }
  double& operator()(int m_prev, int o, int m_next) { return table(row(m_prev, o), m_next); }
};

using Policy = std::vector<StepPolicy>;

// Marginals of a step policy under a joint belief.
struct Marginals {
  Vector free;       // qbar(m')
  Matrix given_obs;  // obs x mem, qbar(m' | o)
  Matrix given_mem;  // mem x mem, qbar(m' | m)
};

struct Multipliers {
  double gamma_c = 0.0;
  double gamma_m = 0.0;
  double gamma_s = 0.0;

  double gamma() const { return gamma_c + gamma_m + gamma_s; }
  friend bool operator==(const Multipliers&, const Multipliers&) = default;
};

// Throws std::invalid_argument unless all components are >= 0 and the sum
// is positive.
void require_positive(const Multipliers& mult);

// Cost-to-go correction nu(m_t, w_{t+1}), stored mem x world.
struct CostToGoVector {
  Matrix table;

  static CostToGoVector zero(int num_mem, int num_world) {
    return {Matrix::Zero(num_mem, num_world)};
  }
};

// Returns the model unchanged if every invariant holds, otherwise throws
// ModelError with a diagnostic naming the offending field and row.
ModelSpec validate(ModelSpec spec);

// Checks a standalone policy against the model's alphabets.
void validate_policy(const ModelSpec& spec, const StepPolicy& q);

ModelSpec build_symmetric_channel();
ModelSpec build_kelly();

// Horse-race model helpers. Fitness vectors are numbered base-3
// little-endian over horses with digits f_i - 1; observations are
// (winner, loser) pairs numbered 2 * pair + bit over pairs (0,1), (0,2),
// (1,2), bit 0 meaning the lower-numbered horse won.
namespace kelly {

inline constexpr int kHorses = 3;
inline constexpr int kLevels = 3;
inline constexpr int kStates = 27;
inline constexpr int kObservations = 6;
inline constexpr int kRaces = 10;
inline constexpr double kMoveProb = 0.1;

struct Fitness {
  int f[kHorses];
};

int state_index(const Fitness& fit);
Fitness fitness_of(int index);
// Softmax win probabilities for a fitness vector.
std::vector<double> win_probabilities(const Fitness& fit);
// Per-horse fitness transition probability.
double horse_transition(int from, int to);
int observation_index(int winner, int loser);

}  // namespace kelly

ModelSpec load_model(const std::filesystem::path& path);
void save_model(const ModelSpec& spec, const std::filesystem::path& path);

// String forms of the model file format, used by load_model/save_model.
ModelSpec parse_model(std::string_view text);
std::string serialize_model(const ModelSpec& spec);

}  // namespace seqrd
