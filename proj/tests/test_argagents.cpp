#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <set>

#include "debaterl/argagents.hpp"

using namespace debaterl;

namespace {

// Judge that rewards a_first exactly when evidence index 2 is revealed.
EvidenceScorer feature2_scorer() {
  return [](int action, const EvidenceSet& ev, const PatientState&) {
    bool has2 = false;
    for (std::size_t e : ev) has2 |= e == 2;
    if (action != 0) return 0.5;
    return has2 ? 1.0 : 0.0;
  };
}

EvidenceScorer constant_scorer(double c) {
  return [c](int, const EvidenceSet&, const PatientState&) { return c; };
}

std::vector<DebateContext> toy_contexts(std::size_t n, std::size_t d,
                                        Rng& rng) {
  std::vector<DebateContext> out;
  for (std::size_t i = 0; i < n; ++i) {
    DebateContext ctx;
    ctx.state.resize(d);
    for (auto& v : ctx.state) v = float(rng.normal(0.0, 1.0));
    ctx.a_first = 0;
    ctx.a_second = 1;
    out.push_back(std::move(ctx));
  }
  return out;
}

// Trunk zeroed, policy-head bias spiked at one index: always proposes it
// while legal, near-uniform otherwise.
ArgPolicy scripted_policy(std::size_t d, std::size_t favorite, Rng& rng) {
  ArgPolicy p = make_arg_policy(d, 8, rng);
  for (auto& l : p.trunk.layers) {
    for (auto& v : l.weight.data) v = 0.0f;
    for (auto& v : l.bias.data) v = 0.0f;
  }
  for (auto& v : p.policy_head.layers[0].weight.data) v = 0.0f;
  for (auto& v : p.policy_head.layers[0].bias.data) v = 0.0f;
  p.policy_head.layers[0].bias.at(0, favorite) = 50.0f;
  return p;
}

bool same_weights(const ArgPolicy& a, const ArgPolicy& b) {
  auto pa = const_cast<ArgPolicy&>(a).trunk.parameters();
  auto pb = const_cast<ArgPolicy&>(b).trunk.parameters();
  for (std::size_t i = 0; i < pa.size(); ++i)
    if (pa[i]->data != pb[i]->data) return false;
  return const_cast<ArgPolicy&>(a).policy_head.layers[0].weight.data ==
             const_cast<ArgPolicy&>(b).policy_head.layers[0].weight.data &&
         const_cast<ArgPolicy&>(a).policy_head.layers[0].bias.data ==
             const_cast<ArgPolicy&>(b).policy_head.layers[0].bias.data;
}

}  // namespace

TEST_CASE("act respects the mask") {
  Rng rng(1);
  ArgPolicy p = make_arg_policy(6, 16, rng);
  PatientState s(6, 0.5f);

  SUBCASE("forced move, both modes") {
    DebateNode node{{0, 1, 2, 4, 5}};
    CHECK(act(p, s, 3, node, ActMode::Stochastic, rng).evidence == 3);
    CHECK(act(p, s, 3, node, ActMode::Deterministic, rng).evidence == 3);
  }
  SUBCASE("proposed indices receive zero sampling mass") {
    DebateNode node{{1, 4}};
    for (int i = 0; i < 10000; ++i) {
      std::size_t e = act(p, s, 0, node, ActMode::Stochastic, rng).evidence;
      REQUIRE(e != 1);
      REQUIRE(e != 4);
      REQUIRE(e < 6);
    }
  }
  SUBCASE("deterministic mode is rng-independent") {
    DebateNode node{{3}};
    Rng r1(100), r2(99999);
    CHECK(act(p, s, 2, node, ActMode::Deterministic, r1).evidence ==
          act(p, s, 2, node, ActMode::Deterministic, r2).evidence);
  }
  SUBCASE("full node throws") {
    DebateNode node{{0, 1, 2, 3, 4, 5}};
    CHECK_THROWS(act(p, s, 0, node, ActMode::Stochastic, rng));
  }
}

TEST_CASE("obs layout: state, argued one-hot, proposed mask") {
  Rng rng(2);
  ArgPolicy p = make_arg_policy(4, 8, rng);
  PatientState s = {1.0f, 2.0f, 3.0f, 4.0f};
  DebateNode node{{1, 3}};
  Matrix row(1, p.obs_dim());
  fill_arg_obs(p, s, 10, node, row.data.data());
  CHECK(row.at(0, 0) == 1.0f);
  CHECK(row.at(0, 3) == 4.0f);
  CHECK(row.at(0, 4 + 10) == 1.0f);
  CHECK(row.at(0, 4 + 25 + 1) == 1.0f);
  CHECK(row.at(0, 4 + 25 + 3) == 1.0f);
  CHECK(row.at(0, 4 + 25 + 0) == 0.0f);
  float sum = 0.0f;
  for (float v : row.data) sum += v;
  CHECK(sum == doctest::Approx(10.0f + 1.0f + 2.0f));
}

TEST_CASE("GAE: lambda=1, gamma=1 reduces to return minus value") {
  std::vector<double> rewards = {1.0, -2.0, 3.0};
  std::vector<double> values = {0.5, 0.25, -0.75};
  auto [adv, ret] = compute_gae(rewards, values, 1.0, 1.0);
  // Returns-to-go: 2, 1, 3.
  CHECK(adv[0] == doctest::Approx(2.0 - 0.5));
  CHECK(adv[1] == doctest::Approx(1.0 - 0.25));
  CHECK(adv[2] == doctest::Approx(3.0 + 0.75));
  CHECK(ret[0] == doctest::Approx(2.0));
  CHECK(ret[2] == doctest::Approx(3.0));
}

TEST_CASE("GAE hand example at gamma=0.9, lambda=0.7") {
  std::vector<double> rewards = {0.0, 0.0, 1.0};
  std::vector<double> values = {0.1, 0.2, 0.3};
  auto [adv, ret] = compute_gae(rewards, values, 0.9, 0.7);
  double d2 = 1.0 - 0.3;
  double d1 = 0.9 * 0.3 - 0.2;
  double d0 = 0.9 * 0.2 - 0.1;
  CHECK(adv[2] == doctest::Approx(d2));
  CHECK(adv[1] == doctest::Approx(d1 + 0.63 * d2));
  CHECK(adv[0] == doctest::Approx(d0 + 0.63 * (d1 + 0.63 * d2)));
  CHECK(ret[1] == doctest::Approx(adv[1] + 0.2));
}

TEST_CASE("rollout collection basics") {
  Rng rng(3);
  std::vector<DebateContext> ctxs = toy_contexts(10, 6, rng);
  GameConfig game;
  game.L = 4;
  game.first_mover = FirstMover::Randomized;
  PpoConfig cfg;
  cfg.hidden = 16;
  PpoTrainer trainer = make_trainer(make_arg_policy(6, 16, rng), cfg);
  ArgPolicy frozen = trainer.policy;

  SUBCASE("selfplay: L/2 decisions per episode, logprob bookkeeping") {
    RolloutBuffer buf;
    collect_rollouts(trainer, EpisodeKind::SelfplayDebate, &frozen, ctxs,
                     feature2_scorer(), game, 20, buf, rng);
    CHECK(buf.size() == 20);
    // Ratio at collection time is 1: recomputing each logprob from the
    // stored observation reproduces the stored value.
    for (std::size_t i = 0; i < buf.size(); ++i) {
      Matrix obs(1, trainer.policy.obs_dim());
      std::copy_n(&buf.obs.data[i * obs.cols], obs.cols, obs.data.data());
      Matrix t = forward(trainer.policy.trunk, obs, Mode::Eval);
      Matrix logits = forward(trainer.policy.policy_head, t, Mode::Eval);
      double mx = -1e300, z = 0.0;
      for (std::size_t j = 0; j < 6; ++j)
        if (obs.at(0, 6 + 25 + j) == 0.0f)
          mx = std::max(mx, double(logits.at(0, j)));
      for (std::size_t j = 0; j < 6; ++j)
        if (obs.at(0, 6 + 25 + j) == 0.0f)
          z += std::exp(double(logits.at(0, j)) - mx);
      double lp = double(logits.at(0, buf.evidence[i])) - std::log(z) - mx;
      REQUIRE(std::exp(lp - buf.logprob[i]) == doctest::Approx(1.0));
    }
  }
  SUBCASE("equal-score judge: every reward and return is 0") {
    RolloutBuffer buf;
    double mean = collect_rollouts(trainer, EpisodeKind::SelfplayDebate,
                                   &frozen, ctxs, constant_scorer(0.25), game,
                                   40, buf, rng);
    CHECK(mean == 0.0);
    for (std::size_t i = 0; i < buf.size(); ++i)
      CHECK(buf.ret[i] == doctest::Approx(buf.value[i] + buf.advantage[i]));
  }
  SUBCASE("side randomization zeroes the mean against a one-sided judge") {
    // u1 = +1 always; learner reward is +-1 with the sign of its side.
    RolloutBuffer buf;
    double mean = collect_rollouts(trainer, EpisodeKind::SelfplayDebate,
                                   &frozen, ctxs, feature2_scorer(), game,
                                   2000, buf, rng);
    (void)mean;
    Rng rng2(4);
    auto biased = [](int a, const EvidenceSet&, const PatientState&) {
      return a == 0 ? 1.0 : 0.0;
    };
    PpoTrainer t2 = make_trainer(make_arg_policy(6, 16, rng2), cfg);
    ArgPolicy f2 = t2.policy;
    double m2 = collect_rollouts(t2, EpisodeKind::SelfplayDebate, &f2, ctxs,
                                 biased, game, 2000, buf, rng2);
    CHECK(std::abs(m2) < 0.1);
  }
  SUBCASE("isolated episode lengths and raw reward") {
    RolloutBuffer buf;
    double mean = collect_rollouts(trainer, EpisodeKind::IsolatedPrecommit,
                                   nullptr, ctxs, constant_scorer(0.7), game,
                                   game.L / 2, buf, rng);
    CHECK(buf.size() == game.L / 2);  // one episode of L/2 proposals
    CHECK(mean == doctest::Approx(0.7));
    double mean2 = collect_rollouts(trainer, EpisodeKind::IsolatedAdaptive,
                                    nullptr, ctxs, constant_scorer(-0.3),
                                    game, game.L, buf, rng);
    CHECK(buf.size() == game.L);
    CHECK(mean2 == doctest::Approx(-0.3));
  }
  SUBCASE("step count must divide into whole episodes") {
    RolloutBuffer buf;
    CHECK_THROWS(collect_rollouts(trainer, EpisodeKind::SelfplayDebate,
                                  &frozen, ctxs, feature2_scorer(), game, 21,
                                  buf, rng));
    CHECK_THROWS(collect_rollouts(trainer, EpisodeKind::SelfplayDebate,
                                  nullptr, ctxs, feature2_scorer(), game, 20,
                                  buf, rng));
  }
}

TEST_CASE("ppo_update: zero advantages with zero coefficients is a no-op") {
  Rng rng(5);
  std::vector<DebateContext> ctxs = toy_contexts(5, 6, rng);
  GameConfig game;
  game.L = 4;
  PpoConfig cfg;
  cfg.hidden = 16;
  cfg.entropy_coef = 0.0f;
  cfg.vf_coef = 0.0f;
  PpoTrainer trainer = make_trainer(make_arg_policy(6, 16, rng), cfg);
  ArgPolicy frozen = trainer.policy;
  RolloutBuffer buf;
  collect_rollouts(trainer, EpisodeKind::SelfplayDebate, &frozen, ctxs,
                   constant_scorer(0.0), game, 40, buf, rng);
  for (auto& a : buf.advantage) a = 0.0;
  ArgPolicy before = trainer.policy;
  ppo_update(trainer, buf, rng);
  CHECK(same_weights(before, trainer.policy));

  // Turning the entropy bonus back on moves the policy head.
  trainer.config.entropy_coef = 1e-2f;
  ppo_update(trainer, buf, rng);
  CHECK(!same_weights(before, trainer.policy));
}

TEST_CASE("selfplay learns to reveal the deciding evidence") {
  Rng rng(6);
  std::vector<DebateContext> ctxs = toy_contexts(20, 6, rng);
  GameConfig game;
  game.L = 2;
  game.first_mover = FirstMover::Randomized;
  PpoConfig cfg;
  cfg.hidden = 32;
  cfg.lr = 2e-3f;
  Schedule sched;
  sched.generations = 8;
  sched.steps_per_gen = 400;
  sched.rollout_steps = 100;
  TrainCurves curves;
  ArgPolicy agent = train_selfplay(ctxs, feature2_scorer(), game, cfg, sched,
                                   rng, &curves);

  CHECK(curves.total_steps == sched.generations * sched.steps_per_gen);
  CHECK(curves.mean_reward.size() == sched.generations);

  // Proposing all L evidence for a_first, the trained agent reveals
  // feature 2; random evidence of size 2 from 6 contains it w.p. 1/3.
  int wins = 0;
  Rng erng(7);
  for (const auto& ctx : ctxs) {
    DebateNode node;
    for (std::size_t l = 0; l < game.L; ++l) {
      node.proposed.push_back(
          act(agent, ctx.state, ctx.a_first, node, ActMode::Deterministic,
              erng)
              .evidence);
    }
    bool has2 = node.contains(2);
    wins += has2 ? 1 : 0;
  }
  double agent_acc = double(wins) / double(ctxs.size());
  CHECK(agent_acc > 1.0 / 3.0 + 0.2);
}

TEST_CASE("selfplay is deterministic under a fixed seed") {
  GameConfig game;
  game.L = 2;
  PpoConfig cfg;
  cfg.hidden = 8;
  Schedule sched;
  sched.generations = 2;
  sched.steps_per_gen = 50;
  sched.rollout_steps = 50;
  Rng crng(8);
  std::vector<DebateContext> ctxs = toy_contexts(5, 6, crng);
  Rng r1(9), r2(9);
  ArgPolicy a = train_selfplay(ctxs, feature2_scorer(), game, cfg, sched, r1);
  ArgPolicy b = train_selfplay(ctxs, feature2_scorer(), game, cfg, sched, r2);
  CHECK(same_weights(a, b));
}

TEST_CASE("maxmin schedule accounting covers both phases") {
  Rng rng(10);
  std::vector<DebateContext> ctxs = toy_contexts(5, 6, rng);
  GameConfig game;
  game.L = 2;
  PpoConfig cfg;
  cfg.hidden = 8;
  Schedule sched;
  sched.generations = 3;
  sched.steps_per_gen = 20;
  sched.opponent_steps = 40;
  sched.rollout_steps = 20;
  TrainCurves curves;
  auto [main, opp] = train_maxmin(ctxs, feature2_scorer(), game, cfg, sched,
                                  rng, &curves);
  CHECK(curves.total_steps ==
        sched.generations * (sched.steps_per_gen + sched.opponent_steps));
  CHECK(!same_weights(main, opp));
}

TEST_CASE("confuser cannot beat a target that always reveals the decider") {
  Rng rng(11);
  std::vector<DebateContext> ctxs = toy_contexts(10, 6, rng);
  GameConfig game;
  game.L = 2;
  game.first_mover = FirstMover::Fixed;  // target opens
  ArgPolicy target = scripted_policy(6, 2, rng);
  PpoConfig cfg = confuser_config();
  cfg.hidden = 16;
  PpoTrainer conf = make_trainer(make_arg_policy(6, 16, rng), cfg);
  RolloutBuffer buf;
  double mean = collect_rollouts(conf, EpisodeKind::ConfuserDebate, &target,
                                 ctxs, feature2_scorer(), game, 200, buf,
                                 rng);
  CHECK(mean == doctest::Approx(-1.0));  // evidence 2 always revealed

  // Precommit layout: target first L/2, then the confuser.
  double mean2 = collect_rollouts(conf, EpisodeKind::ConfuserPrecommit,
                                  &target, ctxs, feature2_scorer(), game, 100,
                                  buf, rng);
  CHECK(mean2 == doctest::Approx(-1.0));
}

TEST_CASE("confuser overrides match the configured table") {
  PpoConfig c = confuser_config();
  CHECK(c.hidden == 256);
  CHECK(c.entropy_coef == doctest::Approx(3e-4f));
  CHECK(c.clip == doctest::Approx(0.4f));
  CHECK(c.vf_coef == doctest::Approx(0.65f));
  CHECK(c.max_grad_norm == doctest::Approx(2.0f));
}

TEST_CASE("policy strategy adapter plays legal debates") {
  Rng rng(12);
  ArgPolicy p = make_arg_policy(6, 8, rng);
  GameConfig game;
  game.L = 4;
  DebateContext ctx{PatientState(6, 0.1f), 3, 8};
  Rng prng(13);
  auto s = policy_strategy(p, ActMode::Stochastic, &prng);
  Rng grng(14);
  DebateTranscript t =
      play_debate(ctx, s, s, feature2_scorer(), game, grng);
  std::set<std::size_t> uniq(t.terminal.proposed.begin(),
                             t.terminal.proposed.end());
  CHECK(uniq.size() == game.L);
}

TEST_CASE("policy persistence round trip") {
  Rng rng(15);
  ArgPolicy p = make_arg_policy(6, 16, rng);
  save_arg_policy(p, "argpolicy_roundtrip");
  ArgPolicy back = load_arg_policy("argpolicy_roundtrip");
  for (const char* suffix : {".trunk.net", ".pi.net", ".v.net"})
    std::remove((std::string("argpolicy_roundtrip") + suffix).c_str());
  CHECK(back.state_dim == 6);
  CHECK(same_weights(p, back));
  PatientState s(6, 0.3f);
  DebateNode node{{1}};
  Rng r1(16), r2(16);
  CHECK(act(p, s, 4, node, ActMode::Deterministic, r1).value ==
        act(back, s, 4, node, ActMode::Deterministic, r2).value);
}
