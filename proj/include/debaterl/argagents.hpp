#pragma once

#include <string>
#include <utility>
#include <vector>

#include "debaterl/debate.hpp"
#include "debaterl/network.hpp"
#include "debaterl/prefdata.hpp"

namespace debaterl {

// Policy and value share a trunk; observation layout is
// [state (D) | one-hot argued action (25) | proposed-evidence mask (D)].
struct ArgPolicy {
  std::size_t state_dim = 0;
  Network trunk;        // 2 x hidden, leaky-relu
  Network policy_head;  // hidden -> D logits
  Network value_head;   // hidden -> 1

  std::size_t obs_dim() const { return 2 * state_dim + kNumActions; }
};

struct PpoConfig {
  std::size_t hidden = 512;
  float lr = 5e-4f;
  float entropy_coef = 1e-2f;
  float clip = 0.1f;
  float gamma = 0.9f;
  float gae_lambda = 0.7f;
  float vf_coef = 0.5f;
  float max_grad_norm = 0.1f;
  bool normalize_rewards = true;
  std::size_t batch = 128;
  std::size_t n_epochs = 4;
};

// Table 1 confuser overrides.
PpoConfig confuser_config();

struct Schedule {
  std::size_t generations = 20;
  std::size_t steps_per_gen = 2000;   // learner decisions per generation
  std::size_t opponent_steps = 2000;  // maxmin opponent phase length
  std::size_t rollout_steps = 512;    // decisions collected per PPO update
  bool reinit_opponent = false;
};

ArgPolicy make_arg_policy(std::size_t state_dim, std::size_t hidden, Rng& rng);

void fill_arg_obs(const ArgPolicy& policy, const PatientState& state,
                  int argued_action, const DebateNode& node, float* row);

enum class ActMode { Stochastic, Deterministic };

struct ActResult {
  std::size_t evidence = 0;
  double logprob = 0.0;
  double value = 0.0;
};

ActResult act(const ArgPolicy& policy, const PatientState& state,
              int argued_action, const DebateNode& node, ActMode mode,
              Rng& rng);

// Adapter for the debate module; role 0 argues a_first, role 1 a_second.
DebateStrategy policy_strategy(const ArgPolicy& policy, ActMode mode,
                               Rng* rng);

// GAE over one episode; terminal value is 0.
// Returns (advantages, returns = advantages + values).
std::pair<std::vector<double>, std::vector<double>> compute_gae(
    const std::vector<double>& rewards, const std::vector<double>& values,
    double gamma, double lambda);

struct RolloutBuffer {
  Matrix obs;  // n x obs_dim; rows carry the legality mask
  std::vector<std::size_t> evidence;
  std::vector<double> logprob;
  std::vector<double> value;
  std::vector<double> advantage;
  std::vector<double> ret;
  std::size_t size() const { return evidence.size(); }
};

struct PpoStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
};

struct PpoTrainer {
  ArgPolicy policy;
  PpoConfig config;
  AdamState adam;
  // Running second moment of raw episode rewards for normalization.
  double reward_sq_sum = 0.0;
  std::size_t reward_count = 0;

  double reward_scale() const;
};

PpoTrainer make_trainer(ArgPolicy policy, const PpoConfig& config);

PpoStats ppo_update(PpoTrainer& trainer, const RolloutBuffer& buffer,
                    Rng& rng);

// How a learner's episodes are generated.
enum class EpisodeKind {
  SelfplayDebate,    // learner side drawn per episode, opponent fixed policy
  MaxminMain,        // learner argues a_first
  MaxminOpponent,    // learner argues a_second
  IsolatedPrecommit, // L/2 solo proposals, reward = scorer(a_first, e)
  IsolatedAdaptive,  // L solo proposals, reward = scorer(a_first, e)
  ConfuserDebate,    // learner argues a_second vs frozen debate target
  ConfuserPrecommit, // target proposes L/2 first, learner the last L/2
};

// Collects exactly n_steps learner decisions (whole episodes; n_steps must
// be a multiple of the episode length). opponent may be null for isolated
// kinds. Returns the mean raw (unnormalized) episode reward.
double collect_rollouts(PpoTrainer& trainer, EpisodeKind kind,
                        const ArgPolicy* opponent,
                        const std::vector<DebateContext>& contexts,
                        const EvidenceScorer& scorer, const GameConfig& game,
                        std::size_t n_steps, RolloutBuffer& out, Rng& rng);

// Contexts z = (s, a_p, a_{1-p}) from one dataset split.
std::vector<DebateContext> contexts_from(const PreferenceDataset& dataset,
                                         Split split);

struct TrainCurves {
  std::vector<double> mean_reward;  // per generation, learner perspective
  std::vector<double> entropy;
  std::vector<double> value_loss;
  std::size_t total_steps = 0;  // learner decisions consumed
};

// out_dir, when non-empty, receives per-generation checkpoints and a
// curves.csv file.
ArgPolicy train_selfplay(const std::vector<DebateContext>& contexts,
                         const EvidenceScorer& scorer, const GameConfig& game,
                         const PpoConfig& config, const Schedule& schedule,
                         Rng& rng, TrainCurves* curves = nullptr,
                         const std::string& out_dir = "");

std::pair<ArgPolicy, ArgPolicy> train_maxmin(
    const std::vector<DebateContext>& contexts, const EvidenceScorer& scorer,
    const GameConfig& game, const PpoConfig& config, const Schedule& schedule,
    Rng& rng, TrainCurves* curves = nullptr, const std::string& out_dir = "");

enum class IsolatedMode { Precommit, Adaptive };

ArgPolicy train_isolated(const std::vector<DebateContext>& contexts,
                         const EvidenceScorer& scorer, const GameConfig& game,
                         IsolatedMode mode, const PpoConfig& config,
                         const Schedule& schedule, Rng& rng,
                         TrainCurves* curves = nullptr,
                         const std::string& out_dir = "");

enum class ConfuserTarget { Debate, Precommit };

ArgPolicy train_confuser(const ArgPolicy& target, ConfuserTarget target_kind,
                         const std::vector<DebateContext>& contexts,
                         const EvidenceScorer& scorer, const GameConfig& game,
                         const PpoConfig& config, const Schedule& schedule,
                         Rng& rng, TrainCurves* curves = nullptr,
                         const std::string& out_dir = "");

void save_arg_policy(const ArgPolicy& policy, const std::string& stem);
ArgPolicy load_arg_policy(const std::string& stem);

}  // namespace debaterl
