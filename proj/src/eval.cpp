#include "debaterl/eval.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "debaterl/debate.hpp"

namespace debaterl {

PolicyDist greedy_dist(const QNet& net, double epsilon) {
  return [&net, epsilon](const PatientState& s) {
    int greedy = greedy_action(net, s);
    std::vector<double> probs(kNumActions, epsilon / kNumActions);
    probs[static_cast<std::size_t>(greedy)] += 1.0 - epsilon;
    return probs;
  };
}

PolicyDist bc_dist(const BcPolicy& bc) {
  return [&bc](const PatientState& s) {
    std::vector<double> probs = bc_probs(bc, s);
    for (double& p : probs) p = std::max(p, kBcFloor);
    return probs;
  };
}

double trajectory_return_pm1(const Trajectory& traj) {
  if (traj.empty()) throw std::invalid_argument("empty trajectory");
  double g = 0.0;
  for (const auto& t : traj) {
    if (t.terminal)
      g += t.outcome == Outcome::Survival ? 1.0 : -1.0;
    else
      g += t.env_reward;
  }
  return g;
}

WisEstimate wis_evaluate(const PolicyDist& pi_e, const BcPolicy& bc,
                         const std::vector<Trajectory>& trajectories) {
  if (trajectories.empty()) throw std::invalid_argument("no trajectories");
  WisEstimate est;
  std::vector<double> returns;
  double w_sum = 0.0;
  for (const auto& traj : trajectories) {
    double log_w = 0.0;
    for (const auto& t : traj) {
      std::vector<double> pe = pi_e(t.state);
      std::vector<double> pb = bc_probs(bc, t.state);
      auto a = static_cast<std::size_t>(t.action);
      log_w += std::log(pe[a]) - std::log(std::max(pb[a], kBcFloor));
    }
    double w = std::exp(log_w);
    est.weights.push_back(w);
    returns.push_back(trajectory_return_pm1(traj));
    w_sum += w;
  }
  if (w_sum <= 0.0) throw std::runtime_error("degenerate WIS weights");
  double w2_sum = 0.0;
  for (std::size_t i = 0; i < est.weights.size(); ++i) {
    est.weights[i] /= w_sum;
    est.value += est.weights[i] * returns[i];
    w2_sum += est.weights[i] * est.weights[i];
  }
  est.ess = 1.0 / w2_sum;
  return est;
}

MetricsReport report_from_samples(const std::string& name,
                                  const std::vector<double>& samples) {
  if (samples.empty()) throw std::invalid_argument("no samples");
  MetricsReport r;
  r.name = name;
  r.n = samples.size();
  for (double s : samples) r.estimate += s;
  r.estimate /= static_cast<double>(r.n);
  double var = 0.0;
  for (double s : samples) var += (s - r.estimate) * (s - r.estimate);
  var /= static_cast<double>(r.n);
  r.se = std::sqrt(var / static_cast<double>(r.n));
  return r;
}

namespace {

// Build the evidence for one game, arguing the actions per the layout.
EvidenceSet recovery_evidence(ProposerKind kind, const ArgPolicy* proposer,
                              const ArgPolicy* confuser, bool precommit_layout,
                              const PreferenceTuple& t, std::size_t D,
                              std::size_t L, Rng& rng) {
  if (kind == ProposerKind::Random && confuser == nullptr)
    return sample_evidence(D, L, rng);
  DebateContext ctx{t.state, t.preferred(), t.alternative()};
  DebateNode node;
  auto take = [&](const ArgPolicy& pi, int role) {
    int argued = role == 0 ? ctx.a_first : ctx.a_second;
    ActResult res =
        act(pi, ctx.state, argued, node, ActMode::Deterministic, rng);
    node.proposed.push_back(res.evidence);
  };
  if (confuser == nullptr) {
    for (std::size_t l = 0; l < L; ++l) take(*proposer, 0);
  } else if (precommit_layout) {
    for (std::size_t l = 0; l < L / 2; ++l) {
      if (kind == ProposerKind::Random) {
        std::size_t e;
        do {
          e = static_cast<std::size_t>(
              rng.uniform_int(0, static_cast<int>(D) - 1));
        } while (node.contains(e));
        node.proposed.push_back(e);
      } else {
        take(*proposer, 0);
      }
    }
    for (std::size_t l = 0; l < L / 2; ++l) take(*confuser, 1);
  } else {
    for (std::size_t l = 0; l < L; ++l) {
      int role = static_cast<int>(l % 2);
      if (role == 0 && kind == ProposerKind::Random) {
        std::size_t e;
        do {
          e = static_cast<std::size_t>(
              rng.uniform_int(0, static_cast<int>(D) - 1));
        } while (node.contains(e));
        node.proposed.push_back(e);
      } else {
        take(role == 0 ? *proposer : *confuser, role);
      }
    }
  }
  return node.proposed;
}

}  // namespace

MetricsReport preference_recovery(const JudgeModel& judge, ProposerKind kind,
                                  const ArgPolicy* proposer,
                                  const ArgPolicy* confuser,
                                  bool precommit_layout,
                                  const std::vector<const PreferenceTuple*>&
                                      tuples,
                                  std::size_t n_games, std::size_t L,
                                  Rng& rng) {
  if (tuples.empty()) throw std::invalid_argument("no tuples");
  if (kind != ProposerKind::Random && proposer == nullptr)
    throw std::invalid_argument("proposer policy required");
  std::vector<double> credits;
  credits.reserve(n_games);
  for (std::size_t g = 0; g < n_games; ++g) {
    const PreferenceTuple& t = *tuples[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<int>(tuples.size()) - 1))];
    EvidenceSet ev = recovery_evidence(kind, proposer, confuser,
                                       precommit_layout, t, judge.state_dim,
                                       L, rng);
    auto [sp, sa] =
        judge_score_pair(judge, t.preferred(), t.alternative(), ev, t.state);
    credits.push_back(sp > sa ? 1.0 : (sp == sa ? 0.5 : 0.0));
  }
  return report_from_samples("preference_recovery", credits);
}

PreferenceBreakdown preference_breakdown(
    const QNet& justifiable, const QNet& baseline, const JudgeModel& judge,
    const ArgPolicy& debater, const std::vector<const PreferenceTuple*>&
        tuples,
    const GameConfig& game, Rng& rng) {
  if (tuples.empty()) throw std::invalid_argument("no tuples");
  EvidenceScorer scorer = judge_scorer(judge);
  DebateStrategy sigma =
      policy_strategy(debater, ActMode::Deterministic, nullptr);
  PreferenceBreakdown out;
  for (const PreferenceTuple* t : tuples) {
    int a_j = greedy_action(justifiable, t->state);
    int a_b = greedy_action(baseline, t->state);
    if (a_j == a_b) {
      out.ep += 1.0;
      continue;
    }
    DebateContext ctx{t->state, a_j, a_b};
    DebateTranscript tr = play_debate(ctx, sigma, sigma, scorer, game, rng);
    if (tr.u1 > 0.0)
      out.jp += 1.0;
    else if (tr.u1 < 0.0)
      out.bp += 1.0;
    else {
      out.jp += 0.5;
      out.bp += 0.5;
    }
  }
  auto n = static_cast<double>(tuples.size());
  out.jp /= n;
  out.bp /= n;
  out.ep /= n;
  return out;
}

std::vector<double> shapley_values(const QNet& net, const PatientState& state,
                                   int action, const PatientState& baseline) {
  std::size_t D = state.size();
  if (D > 12) throw std::invalid_argument("shapley_values: D > 12");
  if (baseline.size() != D)
    throw std::invalid_argument("baseline dimension mismatch");
  std::size_t n_masks = std::size_t{1} << D;
  // One batched forward over all 2^D masked states.
  Matrix inputs(n_masks, D);
  for (std::size_t m = 0; m < n_masks; ++m)
    for (std::size_t i = 0; i < D; ++i)
      inputs.at(m, i) = (m >> i) & 1 ? state[i] : baseline[i];
  Matrix q = q_values_batch(net, inputs);
  std::vector<double> f(n_masks);
  for (std::size_t m = 0; m < n_masks; ++m)
    f[m] = q.at(m, static_cast<std::size_t>(action));

  std::vector<double> fact(D + 1, 1.0);
  for (std::size_t k = 1; k <= D; ++k)
    fact[k] = fact[k - 1] * static_cast<double>(k);
  std::vector<double> phi(D, 0.0);
  for (std::size_t m = 0; m < n_masks; ++m) {
    auto sz = static_cast<std::size_t>(std::popcount(m));
    for (std::size_t i = 0; i < D; ++i) {
      if ((m >> i) & 1) continue;
      double w = fact[sz] * fact[D - sz - 1] / fact[D];
      phi[i] += w * (f[m | (std::size_t{1} << i)] - f[m]);
    }
  }
  return phi;
}

EvidenceSet shapley_evidence(const QNet& net, const PatientState& state,
                             int action, std::size_t L,
                             const PatientState& baseline) {
  std::vector<double> phi = shapley_values(net, state, action, baseline);
  std::vector<std::size_t> order(phi.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return std::abs(phi[a]) > std::abs(phi[b]);
                   });
  order.resize(std::min(L, order.size()));
  return order;
}

PatientState feature_means(const std::vector<Trajectory>& trajectories) {
  if (trajectories.empty()) throw std::invalid_argument("no trajectories");
  std::size_t D = trajectories.front().front().state.size();
  std::vector<double> sum(D, 0.0);
  std::size_t n = 0;
  for (const auto& traj : trajectories)
    for (const auto& t : traj) {
      for (std::size_t i = 0; i < D; ++i) sum[i] += t.state[i];
      ++n;
    }
  PatientState mean(D);
  for (std::size_t i = 0; i < D; ++i)
    mean[i] = static_cast<float>(sum[i] / static_cast<double>(n));
  return mean;
}

}  // namespace debaterl
