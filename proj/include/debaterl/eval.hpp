#pragma once

#include <functional>
#include <string>
#include <vector>

#include "debaterl/argagents.hpp"
#include "debaterl/judge.hpp"
#include "debaterl/taskpolicy.hpp"

namespace debaterl {

struct WisEstimate {
  double value = 0.0;
  double ess = 0.0;  // (sum w)^2 / sum w^2
  std::vector<double> weights;  // normalized per-trajectory weights
};

// Action distribution of the evaluation policy.
using PolicyDist = std::function<std::vector<double>(const PatientState&)>;

// Epsilon-greedy softening of the greedy policy.
PolicyDist greedy_dist(const QNet& net, double epsilon = 0.01);
// BC distribution with the same probability floor WIS applies to the
// denominator, so evaluating BC against itself gives ratios of exactly 1.
PolicyDist bc_dist(const BcPolicy& bc);

constexpr double kBcFloor = 1e-3;

// Undiscounted return with the terminal reward remapped to +-1.
double trajectory_return_pm1(const Trajectory& traj);

WisEstimate wis_evaluate(const PolicyDist& pi_e, const BcPolicy& bc,
                         const std::vector<Trajectory>& trajectories);

struct MetricsReport {
  std::string name;
  double estimate = 0.0;
  double se = 0.0;
  std::size_t n = 0;
  std::vector<std::uint64_t> seeds;

  double lo() const { return estimate - 2.0 * se; }
  double hi() const { return estimate + 2.0 * se; }
};

MetricsReport report_from_samples(const std::string& name,
                                  const std::vector<double>& samples);

enum class ProposerKind { Random, Isolated, Selfplay, Maxmin };

// Judge accuracy over n_games sampled tuples. Without a confuser the
// proposer supplies all L evidence for a_p; with one, target and confuser
// alternate L/2 each (precommit layout: target's L/2 first, then the
// confuser's).
MetricsReport preference_recovery(const JudgeModel& judge, ProposerKind kind,
                                  const ArgPolicy* proposer,
                                  const ArgPolicy* confuser,
                                  bool precommit_layout,
                                  const std::vector<const PreferenceTuple*>&
                                      tuples,
                                  std::size_t n_games, std::size_t L,
                                  Rng& rng);

struct PreferenceBreakdown {
  double jp = 0.0;  // justifiable policy's action preferred
  double bp = 0.0;  // baseline's action preferred
  double ep = 0.0;  // greedy actions coincide
};

PreferenceBreakdown preference_breakdown(
    const QNet& justifiable, const QNet& baseline, const JudgeModel& judge,
    const ArgPolicy& debater, const std::vector<const PreferenceTuple*>&
        tuples,
    const GameConfig& game, Rng& rng);

// Exact Shapley values of each feature's contribution to Q(state, action),
// absent features replaced by the baseline (cohort feature means). D <= 12.
std::vector<double> shapley_values(const QNet& net, const PatientState& state,
                                   int action, const PatientState& baseline);

// Top-L features by |Shapley value|, ties broken by lower index.
EvidenceSet shapley_evidence(const QNet& net, const PatientState& state,
                             int action, std::size_t L,
                             const PatientState& baseline);

PatientState feature_means(const std::vector<Trajectory>& trajectories);

}  // namespace debaterl
