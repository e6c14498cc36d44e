#include "seqrd/model.hpp"

#include <cmath>
#include <sstream>

namespace seqrd {

StepPolicy::StepPolicy(int num_mem, int num_obs_)
    : num_obs(num_obs_), table(Matrix::Zero(static_cast<Eigen::Index>(num_mem) * num_obs_, num_mem)) {}

StepPolicy StepPolicy::uniform(int num_mem, int num_obs) {
  StepPolicy q(num_mem, num_obs);
  q.table.setConstant(1.0 / num_mem);
  return q;
}

void require_positive(const Multipliers& mult) {
  if (!(mult.gamma_c >= 0.0 && mult.gamma_m >= 0.0 && mult.gamma_s >= 0.0)) {
    throw std::invalid_argument("multipliers must be non-negative");
  }
  if (!(mult.gamma() > 0.0) || !std::isfinite(mult.gamma())) {
    throw std::invalid_argument("total multiplier gamma must be positive and finite");
  }
}

namespace {

[[noreturn]] void fail(const std::string& msg) { throw ModelError(msg); }

void check_shape(std::string_view name, const Matrix& m, int rows, int cols) {
  if (m.rows() != rows || m.cols() != cols) {
    std::ostringstream os;
    os << "dimension mismatch: " << name << " is " << m.rows() << "x" << m.cols() << ", expected " << rows << "x"
       << cols;
    fail(os.str());
  }
}

void check_distribution(std::string_view name, const Vector& v, int size) {
  if (v.size() != size) {
    std::ostringstream os;
    os << "dimension mismatch: " << name << " has " << v.size() << " entries, expected " << size;
    fail(os.str());
  }
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v(i)) || v(i) < 0.0) {
      std::ostringstream os;
      os << "negative entry: " << name << "[" << i << "] = " << v(i);
      fail(os.str());
    }
  }
  const double sum = v.sum();
  if (std::abs(sum - 1.0) > kStochasticTol) {
    std::ostringstream os;
    os.precision(17);
    os << "not a probability vector: " << name << " sums to " << sum;
    fail(os.str());
  }
}

void check_stochastic_rows(std::string_view name, const Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (!std::isfinite(m(r, c)) || m(r, c) < 0.0) {
        std::ostringstream os;
        os << "negative entry: " << name << "[" << r << "][" << c << "] = " << m(r, c);
        fail(os.str());
      }
    }
    const double sum = m.row(r).sum();
    if (std::abs(sum - 1.0) > kStochasticTol) {
      std::ostringstream os;
      os.precision(17);
      os << "row not stochastic: " << name << " row " << r << " sums to " << sum;
      fail(os.str());
    }
  }
}

}  // namespace

ModelSpec validate(ModelSpec spec) {
  if (spec.num_world <= 0 || spec.num_obs <= 0 || spec.num_mem <= 0 || spec.horizon <= 0) {
    fail("dimension mismatch: num_world, num_obs, num_mem and horizon must be positive");
  }
  check_distribution("init_world", spec.init_world, spec.num_world);
  check_distribution("init_mem", spec.init_mem, spec.num_mem);
  check_shape("trans", spec.trans, spec.num_world, spec.num_world);
  check_shape("obs", spec.obs, spec.num_world, spec.num_obs);
  check_shape("cost", spec.cost, spec.num_world, spec.num_mem);
  check_stochastic_rows("trans", spec.trans);
  check_stochastic_rows("obs", spec.obs);
  if (!spec.cost.allFinite()) fail("cost matrix has non-finite entries");
  return spec;
}

void validate_policy(const ModelSpec& spec, const StepPolicy& q) {
  if (q.num_obs != spec.num_obs || q.num_mem() != spec.num_mem ||
      q.table.rows() != static_cast<Eigen::Index>(spec.num_mem) * spec.num_obs) {
    fail("dimension mismatch: policy does not match the model alphabets");
  }
  check_stochastic_rows("policy", q.table);
}

ModelSpec build_symmetric_channel() {
  ModelSpec spec;
  spec.num_world = spec.num_obs = spec.num_mem = 2;
  spec.horizon = 30;
  spec.init_world = Vector::Constant(2, 0.5);
  spec.init_mem = Vector::Constant(2, 0.5);
  spec.trans.resize(2, 2);
  spec.trans << 0.8, 0.2, 0.2, 0.8;
  spec.obs.resize(2, 2);
  spec.obs << 0.8, 0.2, 0.2, 0.8;
  spec.cost = Matrix::Ones(2, 2) - Matrix::Identity(2, 2);
  return spec;
}

namespace kelly {

int state_index(const Fitness& fit) {
  int index = 0;
  for (int i = kHorses - 1; i >= 0; --i) index = index * kLevels + (fit.f[i] - 1);
  return index;
}

Fitness fitness_of(int index) {
  Fitness fit{};
  for (int i = 0; i < kHorses; ++i) {
    fit.f[i] = index % kLevels + 1;
    index /= kLevels;
  }
  return fit;
}

std::vector<double> win_probabilities(const Fitness& fit) {
  std::vector<double> p(kHorses);
  double z = 0.0;
  for (int i = 0; i < kHorses; ++i) z += p[i] = std::exp(static_cast<double>(fit.f[i]));
  for (auto& x : p) x /= z;
  return p;
}

double horse_transition(int from, int to) {
  const double up = from < kLevels ? kMoveProb : 0.0;
  const double down = from > 1 ? kMoveProb : 0.0;
  if (to == from + 1) return up;
  if (to == from - 1) return down;
  if (to == from) return 1.0 - up - down;
  return 0.0;
}

int observation_index(int winner, int loser) {
  const int lo = std::min(winner, loser);
  const int hi = std::max(winner, loser);
  // pairs (0,1) -> 0, (0,2) -> 1, (1,2) -> 2
  const int pair = lo == 0 ? hi - 1 : 2;
  return 2 * pair + (winner == lo ? 0 : 1);
}

}  // namespace kelly

ModelSpec build_kelly() {
  using namespace kelly;
  ModelSpec spec;
  spec.num_world = kStates;
  spec.num_mem = kStates;
  spec.num_obs = kObservations;
  spec.horizon = kRaces;
  spec.init_world = Vector::Constant(kStates, 1.0 / kStates);
  spec.init_mem = Vector::Constant(kStates, 1.0 / kStates);

  spec.trans = Matrix::Zero(kStates, kStates);
  for (int w = 0; w < kStates; ++w) {
    const Fitness from = fitness_of(w);
    for (int v = 0; v < kStates; ++v) {
      const Fitness to = fitness_of(v);
      double p = 1.0;
      for (int i = 0; i < kHorses; ++i) p *= horse_transition(from.f[i], to.f[i]);
      spec.trans(w, v) = p;
    }
  }

  // One of the three pairs races, chosen uniformly; the winner is drawn by
  // softmax over the two fitnesses.
  spec.obs = Matrix::Zero(kStates, kObservations);
  for (int w = 0; w < kStates; ++w) {
    const Fitness fit = fitness_of(w);
    for (int i = 0; i < kHorses; ++i) {
      for (int j = i + 1; j < kHorses; ++j) {
        const double ei = std::exp(static_cast<double>(fit.f[i]));
        const double ej = std::exp(static_cast<double>(fit.f[j]));
        spec.obs(w, observation_index(i, j)) = (ei / (ei + ej)) / 3.0;
        spec.obs(w, observation_index(j, i)) = (ej / (ei + ej)) / 3.0;
      }
    }
  }

  // Negative expected log return of a double-or-nothing bet with
  // proportions softmax(presumed fitness).
  spec.cost = Matrix::Zero(kStates, kStates);
  for (int w = 0; w < kStates; ++w) {
    const auto win = win_probabilities(fitness_of(w));
    for (int m = 0; m < kStates; ++m) {
      const auto bet = win_probabilities(fitness_of(m));
      double growth = 0.0;
      for (int i = 0; i < kHorses; ++i) growth += win[i] * std::log(2.0 * bet[i]);
      spec.cost(w, m) = -growth;
    }
  }
  return spec;
}

}  // namespace seqrd
