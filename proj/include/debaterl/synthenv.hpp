#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "debaterl/matrix.hpp"

namespace debaterl {

constexpr int kNumIv = 5;
constexpr int kNumVc = 5;
constexpr int kNumActions = kNumIv * kNumVc;
constexpr float kTerminalReward = 15.0f;

// Intermediate reward shaping constants.
constexpr float kShapeC0 = -0.025f;
constexpr float kShapeC1 = -0.125f;
constexpr float kShapeC2 = -2.0f;

struct EnvConfig {
  std::size_t state_dim = 8;  // >= 4, up to 44
  std::size_t horizon = 20;
  std::size_t sofa_index = 0;
  std::size_t lactate_index = 1;
  std::size_t n_patients = 500;
  std::uint64_t seed = 0;
};

using PatientState = std::vector<float>;  // length state_dim

enum class Outcome { None, Survival, Death };

struct Transition {
  PatientState state;
  int action = 0;  // [0, 25)
  float env_reward = 0.0f;
  PatientState next_state;
  bool terminal = false;
  Outcome outcome = Outcome::None;
};

using Trajectory = std::vector<Transition>;

// Hidden ground-truth scorer: defines the synthetic clinician and the
// ground-truth preference. score(s, a) = -(iv - t_iv(s))^2 - (vc - t_vc(s))^2
// with dose targets t(s) = 4 * sigmoid(w . s).
struct HiddenScorer {
  std::vector<float> w_iv;
  std::vector<float> w_vc;

  float target_iv(const PatientState& s) const;
  float target_vc(const PatientState& s) const;
  double score(const PatientState& s, int action) const;
  // Softmax(score / temperature) over all 25 actions.
  std::vector<double> clinician_probs(const PatientState& s,
                                      double temperature = 1.0) const;
};

struct Cohort {
  EnvConfig config;
  std::vector<Trajectory> trajectories;
  HiddenScorer scorer;

  std::size_t n_transitions() const {
    std::size_t n = 0;
    for (const auto& t : trajectories) n += t.size();
    return n;
  }
  double mortality() const;
};

int encode_action(int iv, int vc);
void decode_action(int action, int* iv, int* vc);

float shaped_reward(const PatientState& s, const PatientState& s_next,
                    const EnvConfig& cfg);
float terminal_reward(Outcome outcome);

// Deterministic given config.seed. Clinician actions come from a softmax
// over the hidden scorer; scorer-preferred doses lower expected SOFA.
Cohort generate_cohort(const EnvConfig& config);
// Same dynamics but the clinician acts greedily w.r.t. the hidden scorer.
Cohort generate_cohort_deterministic_clinician(const EnvConfig& config);

// Line-oriented text serialization; bit-exact round trip at 9 significant
// digits for f32.
void save_cohort(const Cohort& cohort, const std::string& path);
Cohort load_cohort(const std::string& path);

// Desk-scale tabular MDP oracle (D=2 features: SOFA level, lactate level).
struct TabularMdp {
  std::size_t n_states = 0;  // includes one absorbing terminal state (last)
  std::size_t n_actions = kNumActions;
  std::vector<double> transition;  // [s*A*S + a*S + s']
  std::vector<double> reward;      // [s*A + a] expected immediate reward
  std::vector<bool> terminal;      // per state
  std::vector<double> initial;     // initial distribution
  double discount = 0.99;

  // Feature vector fed to function approximators for a state.
  std::vector<float> features(std::size_t s) const;
  std::size_t n_sofa = 0;
  std::size_t n_lact = 0;

  double p(std::size_t s, std::size_t a, std::size_t s2) const {
    return transition[s * n_actions * n_states + a * n_states + s2];
  }
};

TabularMdp build_tabular(double discount = 0.99);

// Value iteration to sup-norm Bellman residual < 1e-8; returns Q*.
std::vector<double> value_iteration(const TabularMdp& mdp);

// Exact evaluation of a deterministic policy (action per state);
// returns expected discounted return from the initial distribution.
double evaluate_policy_tabular(const TabularMdp& mdp,
                               const std::vector<int>& policy);

// Expected optimal return from the initial distribution.
double optimal_return(const TabularMdp& mdp, const std::vector<double>& q);

// Offline data from the tabular MDP under an epsilon-soft behavior policy
// mixing greedy(Q*) with uniform. Feature vectors come from
// TabularMdp::features.
Cohort rollout_tabular(const TabularMdp& mdp, const std::vector<double>& q,
                       double epsilon, std::size_t n_episodes,
                       std::uint64_t seed);

}  // namespace debaterl
