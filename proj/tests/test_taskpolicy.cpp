#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <map>

#include "debaterl/taskpolicy.hpp"

using namespace debaterl;

namespace {

bool same_weights(const QNet& a, const QNet& b) {
  auto pa = const_cast<QNet&>(a).trunk.parameters();
  auto pb = const_cast<QNet&>(b).trunk.parameters();
  for (std::size_t i = 0; i < pa.size(); ++i)
    if (pa[i]->data != pb[i]->data) return false;
  return const_cast<QNet&>(a).a_stream.layers[0].weight.data ==
             const_cast<QNet&>(b).a_stream.layers[0].weight.data &&
         const_cast<QNet&>(a).v_stream.layers[0].bias.data ==
             const_cast<QNet&>(b).v_stream.layers[0].bias.data;
}

// QNet with a zeroed trunk: Q(s, a) = v_bias + a_bias[a] - mean(a_bias),
// independent of the state.
QNet flat_qnet(std::size_t d, float v_bias, std::vector<float> a_bias,
               Rng& rng) {
  QNet n = make_qnet(d, 8, rng);
  for (auto& l : n.trunk.layers) {
    for (auto& w : l.weight.data) w = 0.0f;
    for (auto& w : l.bias.data) w = 0.0f;
  }
  for (auto& w : n.v_stream.layers[0].weight.data) w = 0.0f;
  n.v_stream.layers[0].bias.at(0, 0) = v_bias;
  for (auto& w : n.a_stream.layers[0].weight.data) w = 0.0f;
  for (std::size_t j = 0; j < kNumActions; ++j)
    n.a_stream.layers[0].bias.at(0, j) = a_bias[j];
  return n;
}

}  // namespace

TEST_CASE("dueling aggregation invariants") {
  Rng rng(1);

  SUBCASE("zero advantages collapse to V") {
    QNet n = flat_qnet(4, 3.5f, std::vector<float>(kNumActions, 0.0f), rng);
    auto q = q_values(n, PatientState(4, 0.2f));
    for (double v : q) CHECK(v == doctest::Approx(3.5));
  }
  SUBCASE("constant advantage shift leaves Q unchanged") {
    std::vector<float> a(kNumActions);
    for (std::size_t j = 0; j < kNumActions; ++j) a[j] = float(j) * 0.1f;
    QNet n1 = flat_qnet(4, 1.0f, a, rng);
    for (auto& v : a) v += 7.0f;
    QNet n2 = flat_qnet(4, 1.0f, a, rng);
    auto q1 = q_values(n1, PatientState(4, 0.0f));
    auto q2 = q_values(n2, PatientState(4, 0.0f));
    for (std::size_t j = 0; j < kNumActions; ++j)
      CHECK(q1[j] == doctest::Approx(q2[j]).epsilon(1e-5));
  }
  SUBCASE("zero action-mean of Q - V on random nets") {
    QNet n = make_qnet(6, 32, rng);
    for (int rep = 0; rep < 20; ++rep) {
      PatientState s(6);
      for (auto& v : s) v = float(rng.normal(0.0, 1.0));
      Matrix sm(1, 6);
      std::copy(s.begin(), s.end(), sm.data.begin());
      Matrix t = forward(n.trunk, sm, Mode::Eval);
      double v = double(forward(n.v_stream, t, Mode::Eval).at(0, 0));
      auto q = q_values(n, s);
      double mean = 0.0;
      for (double x : q) mean += x - v;
      CHECK(std::abs(mean / double(kNumActions)) < 1e-5);
    }
  }
  SUBCASE("argmax invariant under positive advantage-weight rescaling") {
    QNet n = make_qnet(6, 32, rng);
    for (int rep = 0; rep < 10; ++rep) {
      PatientState s(6);
      for (auto& v : s) v = float(rng.normal(0.0, 1.0));
      int a1 = greedy_action(n, s);
      QNet scaled = n;
      for (auto& w : scaled.a_stream.layers[0].weight.data) w *= 3.0f;
      for (auto& w : scaled.a_stream.layers[0].bias.data) w *= 3.0f;
      CHECK(greedy_action(scaled, s) == a1);
    }
  }
}

TEST_CASE("mixed reward is the convex combination") {
  CHECK(mixed_reward(-0.125, 5.0, 0.0) == -0.125);
  CHECK(mixed_reward(-0.125, 5.0, 1.0) == 5.0);
  CHECK(mixed_reward(-0.125, 5.0, 0.5) == doctest::Approx(2.4375));
  // Affine in lambda.
  double a = mixed_reward(2.0, -3.0, 0.25);
  double b = mixed_reward(2.0, -3.0, 0.75);
  CHECK(mixed_reward(2.0, -3.0, 0.5) == doctest::Approx((a + b) / 2.0));
  CHECK_THROWS(mixed_reward(0.0, 0.0, 1.5));
}

TEST_CASE("n-step schedule follows the lambda table") {
  CHECK(n_step_for(0.0) == 6);
  CHECK(n_step_for(0.25) == 3);
  CHECK(n_step_for(0.5) == 3);
  CHECK(n_step_for(0.75) == 3);
  CHECK(n_step_for(1.0) == 1);
}

TEST_CASE("PER sampling follows priority^alpha within 2%") {
  PerBuffer buf;
  buf.state_dim = 2;
  std::vector<double> prio = {1.0, 2.0, 4.0, 8.0};
  for (double p : prio) {
    buf.add(PatientState(2, 0.0f), 0, 0.0, PatientState(2, 0.0f), true, 0.0);
    buf.priority.back() = p;
  }
  double alpha = 0.6, beta = 0.9;
  double total = 0.0;
  for (double p : prio) total += std::pow(p, alpha);

  Rng rng(2);
  std::map<std::size_t, std::size_t> counts;
  const std::size_t draws = 100000;
  double max_w = 0.0;
  for (std::size_t i = 0; i < draws / 100; ++i) {
    auto s = buf.sample(100, alpha, beta, rng);
    for (std::size_t k = 0; k < s.idx.size(); ++k) {
      counts[s.idx[k]]++;
      CHECK(s.is_weight[k] <= 1.0 + 1e-12);
      max_w = std::max(max_w, s.is_weight[k]);
    }
  }
  for (std::size_t i = 0; i < prio.size(); ++i) {
    double expect = std::pow(prio[i], alpha) / total;
    double got = double(counts[i]) / double(draws);
    CHECK(std::abs(got - expect) < 0.02);
  }
  CHECK(max_w == doctest::Approx(1.0));  // min-priority draws hit the cap

  // Priority updates steer future sampling.
  buf.update_priorities({0}, {100.0});
  CHECK(buf.priority[0] == doctest::Approx(100.0 + 1e-6));
  CHECK(buf.max_priority >= 100.0);
}

TEST_CASE("dqn_loss mechanics") {
  Rng rng(3);
  DqnConfig cfg;

  SUBCASE("terminal target is exactly r; no penalty inside the threshold") {
    QNet online = flat_qnet(2, 4.0f, std::vector<float>(kNumActions, 0.0f),
                            rng);
    QNet target = online;
    DqnBatch b;
    b.states = Matrix(1, 2);
    b.next_states = Matrix(1, 2);
    b.actions = {7};
    b.rewards = {-15.0};
    b.terminal = {1};
    b.gamma_n = {0.0};
    b.is_weight = {1.0};
    auto res = dqn_loss(b, online, target, cfg);
    CHECK(res.td_error[0] == doctest::Approx(-15.0 - 4.0));
    CHECK(res.loss == doctest::Approx(19.0 * 19.0));  // Q=4, no penalty
  }
  SUBCASE("threshold penalty: Q = 25 adds beta * 5") {
    QNet online = flat_qnet(2, 25.0f, std::vector<float>(kNumActions, 0.0f),
                            rng);
    QNet target = online;
    DqnBatch b;
    b.states = Matrix(1, 2);
    b.next_states = Matrix(1, 2);
    b.actions = {0};
    b.rewards = {25.0};
    b.terminal = {1};
    b.gamma_n = {0.0};
    b.is_weight = {1.0};
    auto res = dqn_loss(b, online, target, cfg);
    CHECK(res.loss == doctest::Approx(0.0 + 5.0 * 5.0));
  }
  SUBCASE("double-DQN: online argmax, target evaluation, clipped") {
    // Online prefers action 1; the target values action 1 at 2 but
    // action 0 (its own argmax) at 50.
    std::vector<float> a_on(kNumActions, 0.0f), a_tg(kNumActions, 0.0f);
    a_on[1] = 10.0f;
    a_tg[0] = 50.0f;
    a_tg[1] = 2.0f;
    QNet online = flat_qnet(2, 0.0f, a_on, rng);
    QNet target = flat_qnet(2, 0.0f, a_tg, rng);
    double mean_on = 10.0 / double(kNumActions);
    double mean_tg = 52.0 / double(kNumActions);
    DqnBatch b;
    b.states = Matrix(1, 2);
    b.next_states = Matrix(1, 2);
    b.actions = {1};
    b.rewards = {1.0};
    b.terminal = {0};
    b.gamma_n = {0.99};
    b.is_weight = {1.0};
    auto res = dqn_loss(b, online, target, cfg);
    double target_q1 = 2.0 - mean_tg;  // target net's value of action 1
    double y = 1.0 + 0.99 * target_q1;
    double q_online = 10.0 - mean_on;
    CHECK(res.td_error[0] == doctest::Approx(y - q_online).epsilon(1e-5));

    // With a huge target value the bootstrap is capped at q_thresh.
    a_tg[1] = 500.0f;
    QNet big = flat_qnet(2, 0.0f, a_tg, rng);
    auto res2 = dqn_loss(b, online, big, cfg);
    CHECK(res2.td_error[0] ==
          doctest::Approx(1.0 + 0.99 * 20.0 - q_online).epsilon(1e-5));
  }
  SUBCASE("empty batch throws") {
    QNet n = make_qnet(2, 8, rng);
    DqnBatch b;
    CHECK_THROWS(dqn_loss(b, n, n, cfg));
  }
}

TEST_CASE("polyak update") {
  Rng rng(4);
  QNet online = make_qnet(3, 8, rng);
  QNet target = make_qnet(3, 8, rng);

  QNet t1 = target;
  polyak_update(t1, online, 1.0);
  CHECK(same_weights(t1, online));

  QNet t0 = target;
  polyak_update(t0, online, 0.0);
  CHECK(same_weights(t0, target));

  QNet tz = flat_qnet(3, 0.0f, std::vector<float>(kNumActions, 0.0f), rng);
  QNet oz = flat_qnet(3, 1.0f, std::vector<float>(kNumActions, 0.0f), rng);
  // Make every online parameter 1 against a zero target.
  for (auto* p : const_cast<QNet&>(oz).trunk.parameters())
    for (auto& v : p->data) v = 1.0f;
  for (auto* p : const_cast<QNet&>(tz).trunk.parameters())
    for (auto& v : p->data) v = 0.0f;
  polyak_update(tz, oz, 1e-3);
  CHECK(tz.trunk.layers[0].weight.at(0, 0) == doctest::Approx(0.001));
}

TEST_CASE("replay loading folds n-step returns inside trajectories") {
  Cohort cohort;
  cohort.config.state_dim = 2;
  Trajectory traj;
  for (int t = 0; t < 3; ++t) {
    Transition tr;
    tr.state = {float(t), 0.0f};
    tr.next_state = {float(t + 1), 0.0f};
    tr.action = t;
    tr.env_reward = float(t + 1);  // 1, 2, 3
    tr.terminal = t == 2;
    traj.push_back(tr);
  }
  cohort.trajectories.push_back(traj);

  DqnConfig cfg;
  cfg.n_step = 3;
  PerBuffer buf = load_replay(cohort, 0.0, nullptr, nullptr, cfg);
  REQUIRE(buf.size() == 3);
  double g = 0.99;
  CHECK(buf.reward[0] == doctest::Approx(1.0 + g * 2.0 + g * g * 3.0));
  CHECK(buf.terminal[0] == 1);  // 3-step lookahead reaches the end
  CHECK(buf.reward[2] == doctest::Approx(3.0));
  CHECK(buf.terminal[2] == 1);

  cfg.n_step = 1;
  PerBuffer b1 = load_replay(cohort, 0.0, nullptr, nullptr, cfg);
  CHECK(b1.reward[0] == doctest::Approx(1.0));
  CHECK(b1.terminal[0] == 0);
  CHECK(b1.gamma_n[0] == doctest::Approx(0.99));
  CHECK(b1.next_state[0][0] == 1.0f);

  // lambda = 0 must never consult the debate source.
  auto bomb = [](const PatientState&, int, int) -> double {
    throw std::logic_error("must not be called");
  };
  CHECK_NOTHROW(load_replay(cohort, 0.0, bomb, nullptr, cfg));
  CHECK_THROWS(load_replay(cohort, 0.5, nullptr, nullptr, cfg));
}

TEST_CASE("lambda=0 training is bitwise identical with the source disabled") {
  EnvConfig env;
  env.state_dim = 4;
  env.n_patients = 30;
  env.seed = 11;
  Cohort cohort = generate_cohort(env);
  DqnConfig cfg;
  cfg.hidden = 16;
  cfg.iterations = 60;
  cfg.batch = 32;
  auto bomb = [](const PatientState&, int, int) -> double {
    throw std::logic_error("must not be called");
  };
  Rng r1(5), r2(5);
  QNet a = train_policy(cohort, 0.0, nullptr, nullptr, cfg, r1);
  QNet b = train_policy(cohort, 0.0, bomb, nullptr, cfg, r2);
  CHECK(same_weights(a, b));
}

TEST_CASE("lambda=0 DQN approaches the value-iteration optimum") {
  TabularMdp mdp = build_tabular();
  auto vi = value_iteration(mdp);
  double opt = optimal_return(mdp, vi);
  Cohort data = rollout_tabular(mdp, vi, 0.5, 400, 21);

  DqnConfig cfg;
  cfg.hidden = 64;
  cfg.iterations = 2000;
  cfg.batch = 128;
  Rng rng(6);
  QNet net = train_policy(data, 0.0, nullptr, nullptr, cfg, rng);

  std::vector<int> policy(mdp.n_states, 0);
  for (std::size_t s = 0; s < mdp.n_states; ++s)
    policy[s] = greedy_action(net, mdp.features(s));
  double ret = evaluate_policy_tabular(mdp, policy);
  INFO("dqn return " << ret << " vs optimal " << opt);
  CHECK(ret >= 0.85 * opt);
}

TEST_CASE("behavior cloning recovers a deterministic clinician") {
  EnvConfig env;
  env.state_dim = 6;
  env.n_patients = 150;
  env.seed = 7;
  Cohort full = generate_cohort_deterministic_clinician(env);
  Cohort train = full, held = full;
  train.trajectories.assign(full.trajectories.begin(),
                            full.trajectories.end() - 30);
  held.trajectories.assign(full.trajectories.end() - 30,
                           full.trajectories.end());

  BcConfig cfg;
  cfg.epochs = 120;
  Rng rng(9);
  BcPolicy bc = train_bc(train, cfg, rng);

  std::size_t hits = 0, n = 0;
  for (const auto& traj : train.trajectories)
    for (const auto& tr : traj) {
      auto p = bc_probs(bc, tr.state);
      double sum = 0.0;
      for (double v : p) sum += v;
      REQUIRE(sum == doctest::Approx(1.0).epsilon(1e-6));
      int top = int(std::max_element(p.begin(), p.end()) - p.begin());
      hits += top == tr.action;
      ++n;
    }
  CHECK(double(hits) / double(n) > 0.9);
  CHECK(bc_logloss(bc, held) < std::log(25.0));
}

TEST_CASE("persistence round trips") {
  Rng rng(10);
  QNet q = make_qnet(5, 16, rng);
  save_qnet(q, "qnet_roundtrip");
  QNet qb = load_qnet("qnet_roundtrip");
  for (const char* s : {".trunk.net", ".v.net", ".a.net"})
    std::remove((std::string("qnet_roundtrip") + s).c_str());
  CHECK(qb.state_dim == 5);
  PatientState st(5, 0.4f);
  CHECK(q_values(q, st) == q_values(qb, st));

  Cohort mini;
  mini.config.state_dim = 3;
  Transition tr;
  tr.state = {0.1f, 0.2f, 0.3f};
  tr.next_state = tr.state;
  tr.action = 4;
  mini.trajectories.push_back({tr, tr});
  BcConfig bcfg;
  bcfg.epochs = 1;
  BcPolicy bc = train_bc(mini, bcfg, rng);
  save_bc(bc, "bc_roundtrip.net");
  BcPolicy bcb = load_bc("bc_roundtrip.net");
  std::remove("bc_roundtrip.net");
  CHECK(bc_probs(bc, tr.state) == bc_probs(bcb, tr.state));
}
