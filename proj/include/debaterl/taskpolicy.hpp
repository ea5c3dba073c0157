#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "debaterl/network.hpp"
#include "debaterl/synthenv.hpp"

namespace debaterl {

// Dueling architecture: Q(s,a) = V(s) + A(s,a) - mean_a A(s,a).
struct QNet {
  std::size_t state_dim = 0;
  Network trunk;     // 2 x hidden, leaky-relu
  Network v_stream;  // hidden -> 1
  Network a_stream;  // hidden -> 25
};

struct DqnConfig {
  std::size_t hidden = 128;
  float lr = 1e-4f;
  std::size_t batch = 256;
  double polyak_tau = 1e-3;
  double gamma = 0.99;
  double lambda = 0.0;       // debate-reward mixing coefficient
  double q_thresh = 20.0;
  double penalty_beta = 5.0;
  double per_alpha = 0.6;
  double per_beta = 0.9;
  std::size_t iterations = 25000;
  std::size_t eval_every = 50;
  std::size_t n_step = 0;  // 0 = derive from lambda
};

// Table 2: 6 at lambda=0, 3 for intermediate lambdas, 1 at lambda=1.
std::size_t n_step_for(double lambda);

QNet make_qnet(std::size_t state_dim, std::size_t hidden, Rng& rng);

std::vector<double> q_values(const QNet& net, const PatientState& state);
// Batched variant; rows are states, columns actions.
Matrix q_values_batch(const QNet& net, const Matrix& states);
int greedy_action(const QNet& net, const PatientState& state);

double mixed_reward(double r_env, double r_debate, double lambda);

// Prioritized replay over n-step transitions.
struct PerBuffer {
  std::size_t state_dim = 0;
  std::vector<PatientState> state;
  std::vector<int> action;
  std::vector<double> reward;  // n-step folded mixed reward
  std::vector<PatientState> next_state;
  std::vector<std::uint8_t> terminal;
  std::vector<double> gamma_n;  // discount applied to the bootstrap
  std::vector<double> priority;
  double max_priority = 1.0;

  std::size_t size() const { return action.size(); }
  void add(PatientState s, int a, double r, PatientState s2, bool term,
           double gn);

  struct Sample {
    std::vector<std::size_t> idx;
    std::vector<double> is_weight;  // normalized, <= 1
  };
  // P(i) proportional to priority^alpha; weights (N P)^-beta / max.
  Sample sample(std::size_t batch, double alpha, double beta, Rng& rng) const;
  void update_priorities(const std::vector<std::size_t>& idx,
                         const std::vector<double>& td_error);
};

// r^d(s, a, a_B), already alpha-scaled; never called when a == a_B.
using DebateRewardFn =
    std::function<double(const PatientState& s, int a, int a_b)>;

// n-step loading with mixed rewards; rd may be null when lambda == 0.
PerBuffer load_replay(const Cohort& cohort, double lambda,
                      const DebateRewardFn& rd, const QNet* baseline,
                      const DqnConfig& config);

struct DqnBatch {
  Matrix states;
  std::vector<int> actions;
  std::vector<double> rewards;
  Matrix next_states;
  std::vector<std::uint8_t> terminal;
  std::vector<double> gamma_n;
  std::vector<double> is_weight;
};

DqnBatch gather_batch(const PerBuffer& buffer,
                      const std::vector<std::size_t>& idx,
                      const std::vector<double>& is_weight);

struct DqnLossResult {
  double loss = 0.0;
  std::vector<double> td_error;  // target - Q(s,a), for priority updates
};

// Forward-only: double-DQN targets with target outputs clipped to
// +-q_thresh, squared error plus the |Q| threshold penalty, IS-weighted.
DqnLossResult dqn_loss(const DqnBatch& batch, const QNet& online,
                       const QNet& target, const DqnConfig& config);

void polyak_update(QNet& target, const QNet& online, double tau);

using EvalFn = std::function<double(const QNet&)>;

// Offline DQN from a preloaded buffer. eval_fn, when given, is called every
// eval_every iterations; results land in eval_log and, when csv_path is
// non-empty, in a CSV keyed by iteration.
QNet train_policy_from_buffer(
    const PerBuffer& buffer0, const DqnConfig& config, Rng& rng,
    const EvalFn& eval_fn = nullptr,
    std::vector<std::pair<std::size_t, double>>* eval_log = nullptr,
    const std::string& csv_path = "");

QNet train_policy(const Cohort& cohort, double lambda,
                  const DebateRewardFn& rd, const QNet* baseline,
                  const DqnConfig& config, Rng& rng,
                  const EvalFn& eval_fn = nullptr,
                  std::vector<std::pair<std::size_t, double>>* eval_log =
                      nullptr,
                  const std::string& csv_path = "");

struct BcPolicy {
  std::size_t state_dim = 0;
  Network net;  // 2 x 64, softmax over 25 actions
};

struct BcConfig {
  std::size_t hidden = 64;
  float lr = 1e-3f;
  float weight_decay = 1e-1f;
  std::size_t epochs = 100;
  std::size_t batch = 64;
};

std::vector<double> bc_probs(const BcPolicy& policy,
                             const PatientState& state);
BcPolicy train_bc(const Cohort& cohort, const BcConfig& config, Rng& rng);
// Mean negative log-likelihood of logged actions.
double bc_logloss(const BcPolicy& policy, const Cohort& cohort);

void save_qnet(const QNet& net, const std::string& stem);
QNet load_qnet(const std::string& stem);
void save_bc(const BcPolicy& policy, const std::string& path);
BcPolicy load_bc(const std::string& path);

}  // namespace debaterl
