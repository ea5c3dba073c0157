#include "debaterl/debate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <unordered_map>

namespace debaterl {

EvidenceScorer judge_scorer(const JudgeModel& judge) {
  return [&judge](int action, const EvidenceSet& evidence,
                  const PatientState& state) {
    return judge_score(judge, action, evidence, state);
  };
}

std::vector<std::size_t> legal_evidence(const DebateNode& node,
                                        std::size_t d) {
  std::vector<std::size_t> out;
  out.reserve(d - node.proposed.size());
  for (std::size_t e = 0; e < d; ++e)
    if (!node.contains(e)) out.push_back(e);
  return out;
}

double debate_utility(const EvidenceScorer& scorer, const DebateContext& ctx,
                      const EvidenceSet& evidence, UtilityKind kind) {
  double s1 = scorer(ctx.a_first, evidence, ctx.state);
  double s2 = scorer(ctx.a_second, evidence, ctx.state);
  if (kind == UtilityKind::Difference) return s1 - s2;
  if (s1 > s2) return 1.0;
  if (s1 == s2) return 0.0;  // exact-equality tie per the game definition
  return -1.0;
}

DebateTranscript play_debate(const DebateContext& ctx,
                             const DebateStrategy& sigma1,
                             const DebateStrategy& sigma2,
                             const EvidenceScorer& scorer,
                             const GameConfig& config, Rng& rng) {
  if (config.L % 2 != 0) throw std::invalid_argument("L must be even");
  DebateTranscript t;
  t.ctx = ctx;
  t.tau = config.first_mover == FirstMover::Randomized
              ? int(rng.uniform_int(0, 1))
              : 0;
  for (std::size_t l = 0; l < config.L; ++l) {
    int role = int((l + std::size_t(t.tau)) % 2);
    const DebateStrategy& sigma = role == 0 ? sigma1 : sigma2;
    std::size_t e = sigma(ctx, t.terminal, role);
    if (t.terminal.contains(e))
      throw std::runtime_error("strategy repeated evidence");
    t.terminal.proposed.push_back(e);
    t.moves.emplace_back(e, role);
  }
  t.u1 = debate_utility(scorer, ctx, t.terminal.proposed, config.utility);
  return t;
}

namespace {

struct Solver {
  const DebateContext& ctx;
  const EvidenceScorer& scorer;
  std::size_t d;
  const GameConfig& config;
  int tau;
  // The judge is set-valued, so states collapse to evidence subsets.
  std::unordered_map<std::uint64_t, std::pair<double, std::size_t>> memo;

  std::pair<double, std::size_t> solve(std::uint64_t mask, std::size_t turn) {
    if (turn == config.L) {
      EvidenceSet ev;
      for (std::size_t e = 0; e < d; ++e)
        if (mask & (1ULL << e)) ev.push_back(e);
      return {debate_utility(scorer, ctx, ev, config.utility), d};
    }
    auto it = memo.find(mask);
    if (it != memo.end()) return it->second;
    bool maximizing = (turn + std::size_t(tau)) % 2 == 0;
    double best = maximizing ? -1e300 : 1e300;
    std::size_t best_move = d;
    for (std::size_t e = 0; e < d; ++e) {
      if (mask & (1ULL << e)) continue;
      double v = solve(mask | (1ULL << e), turn + 1).first;
      if ((maximizing && v > best) || (!maximizing && v < best)) {
        best = v;
        best_move = e;
      }
    }
    auto res = std::make_pair(best, best_move);
    memo[mask] = res;
    return res;
  }
};

}  // namespace

DebateSolution solve_exact(const DebateContext& ctx,
                           const EvidenceScorer& scorer, std::size_t d,
                           const GameConfig& config, int tau) {
  if (config.L % 2 != 0) throw std::invalid_argument("L must be even");
  if (config.L > d) throw std::invalid_argument("L > D");
  if (d > 63) throw std::invalid_argument("D too large for bitmask solver");
  if (std::pow(double(d), double(config.L)) > 1e7)
    throw std::invalid_argument("solver node budget exceeded");

  Solver s{ctx, scorer, d, config, tau, {}};
  DebateSolution sol;
  sol.value = s.solve(0, 0).first;
  std::uint64_t mask = 0;
  for (std::size_t turn = 0; turn < config.L; ++turn) {
    std::size_t move = s.solve(mask, turn).second;
    sol.principal_variation.push_back(move);
    mask |= 1ULL << move;
  }
  return sol;
}

double best_response_value(const DebateContext& ctx,
                           const DebateStrategy& sigma1,
                           const EvidenceScorer& scorer, std::size_t d,
                           const GameConfig& config) {
  // Player 1's moves are dictated by sigma1, so nodes stay sequences and
  // only player 2 branches; no memoization.
  std::function<double(DebateNode&, std::size_t)> rec =
      [&](DebateNode& node, std::size_t turn) -> double {
    if (turn == config.L)
      return debate_utility(scorer, ctx, node.proposed, config.utility);
    if (turn % 2 == 0) {
      std::size_t e = sigma1(ctx, node, 0);
      if (node.contains(e))
        throw std::runtime_error("strategy repeated evidence");
      node.proposed.push_back(e);
      double v = rec(node, turn + 1);
      node.proposed.pop_back();
      return v;
    }
    double best = 1e300;
    for (std::size_t e = 0; e < d; ++e) {
      if (node.contains(e)) continue;
      node.proposed.push_back(e);
      best = std::min(best, rec(node, turn + 1));
      node.proposed.pop_back();
    }
    return best;
  };
  DebateNode root;
  return rec(root, 0);
}

double debate_reward_exact(const DebateContext& ctx,
                           const EvidenceScorer& scorer, std::size_t d,
                           const GameConfig& config) {
  return config.alpha * solve_exact(ctx, scorer, d, config).value;
}

double debate_reward_played(const DebateContext& ctx,
                            const DebateStrategy& sigma1,
                            const DebateStrategy& sigma2,
                            const EvidenceScorer& scorer,
                            const GameConfig& config, Rng& rng) {
  return config.alpha *
         play_debate(ctx, sigma1, sigma2, scorer, config, rng).u1;
}

std::string format_transcript(const DebateTranscript& t) {
  char buf[128];
  std::string out;
  std::snprintf(buf, sizeof(buf), "ctx a_first=%d a_second=%d tau=%d\n",
                t.ctx.a_first, t.ctx.a_second, t.tau);
  out += buf;
  for (const auto& [e, role] : t.moves) {
    std::snprintf(buf, sizeof(buf), "turn p%d e%zu\n", role + 1, e);
    out += buf;
  }
  std::snprintf(buf, sizeof(buf), "u1 %.9g\n", t.u1);
  out += buf;
  return out;
}

}  // namespace debaterl
