#pragma once

#include <functional>
#include <string>
#include <vector>

#include "debaterl/judge.hpp"

namespace debaterl {

// z = (s_t, a_first, a_second); player 1 argues a_first.
struct DebateContext {
  PatientState state;
  int a_first = 0;
  int a_second = 1;
};

struct DebateNode {
  std::vector<std::size_t> proposed;  // ordered, no duplicates

  bool contains(std::size_t e) const {
    for (std::size_t p : proposed)
      if (p == e) return true;
    return false;
  }
};

enum class UtilityKind { Sign, Difference };
enum class FirstMover { Fixed, Randomized };

struct GameConfig {
  std::size_t L = 6;  // even
  UtilityKind utility = UtilityKind::Sign;
  double alpha = 5.0;
  FirstMover first_mover = FirstMover::Fixed;
};

// Scores (action, evidence) pairs; debates never see hidden features.
using EvidenceScorer = std::function<double(
    int action, const EvidenceSet& evidence, const PatientState& state)>;

EvidenceScorer judge_scorer(const JudgeModel& judge);

// role: 0 = player arguing a_first, 1 = opponent.
using DebateStrategy = std::function<std::size_t(
    const DebateContext& ctx, const DebateNode& node, int role)>;

std::vector<std::size_t> legal_evidence(const DebateNode& node, std::size_t d);

// Player-1 utility of a terminal evidence set.
double debate_utility(const EvidenceScorer& scorer, const DebateContext& ctx,
                      const EvidenceSet& evidence, UtilityKind kind);

struct DebateTranscript {
  DebateContext ctx;
  int tau = 0;                                      // first-mover flip
  std::vector<std::pair<std::size_t, int>> moves;   // (evidence, proposer role)
  DebateNode terminal;
  double u1 = 0.0;                                  // u2 = -u1
};

// Runs L alternating turns. Turn l is owned by player (l + tau) % 2;
// tau is drawn uniformly when first_mover is randomized.
DebateTranscript play_debate(const DebateContext& ctx,
                             const DebateStrategy& sigma1,
                             const DebateStrategy& sigma2,
                             const EvidenceScorer& scorer,
                             const GameConfig& config, Rng& rng);

struct DebateSolution {
  double value = 0.0;
  std::vector<std::size_t> principal_variation;  // one line of optimal play
};

// Exact backward induction, memoized on the evidence subset. Turn l is
// owned by player (l + tau) % 2, as in play_debate; ties break to the
// lowest index.
DebateSolution solve_exact(const DebateContext& ctx,
                           const EvidenceScorer& scorer, std::size_t d,
                           const GameConfig& config, int tau = 0);

// Value when player 1 follows sigma1 and player 2 best-responds (tau = 0).
double best_response_value(const DebateContext& ctx,
                           const DebateStrategy& sigma1,
                           const EvidenceScorer& scorer, std::size_t d,
                           const GameConfig& config);

double debate_reward_exact(const DebateContext& ctx,
                           const EvidenceScorer& scorer, std::size_t d,
                           const GameConfig& config);
double debate_reward_played(const DebateContext& ctx,
                            const DebateStrategy& sigma1,
                            const DebateStrategy& sigma2,
                            const EvidenceScorer& scorer,
                            const GameConfig& config, Rng& rng);

std::string format_transcript(const DebateTranscript& t);

}  // namespace debaterl
