#include "debaterl/argagents.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace debaterl {

namespace {

std::vector<Matrix*> all_params(ArgPolicy& p) {
  auto out = p.trunk.parameters();
  for (auto* m : p.policy_head.parameters()) out.push_back(m);
  for (auto* m : p.value_head.parameters()) out.push_back(m);
  return out;
}

// Masked softmax in double; illegal entries get probability 0.
struct MaskedDist {
  std::vector<double> prob;
  std::vector<double> logprob;  // -inf at illegal entries
  double entropy = 0.0;
};

MaskedDist masked_dist(const float* logits, const float* mask,
                       std::size_t d) {
  MaskedDist out;
  out.prob.assign(d, 0.0);
  out.logprob.assign(d, -1e300);
  double mx = -1e300;
  for (std::size_t i = 0; i < d; ++i)
    if (mask[i] == 0.0f) mx = std::max(mx, double(logits[i]));
  if (mx == -1e300) throw std::runtime_error("no legal evidence");
  double z = 0.0;
  for (std::size_t i = 0; i < d; ++i)
    if (mask[i] == 0.0f) z += std::exp(double(logits[i]) - mx);
  double logz = std::log(z) + mx;
  for (std::size_t i = 0; i < d; ++i) {
    if (mask[i] != 0.0f) continue;
    out.logprob[i] = double(logits[i]) - logz;
    out.prob[i] = std::exp(out.logprob[i]);
    out.entropy -= out.prob[i] * out.logprob[i];
  }
  return out;
}

std::size_t sample_dist(const MaskedDist& dist, Rng& rng) {
  double u = rng.uniform();
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < dist.prob.size(); ++i) {
    if (dist.prob[i] == 0.0) continue;
    acc += dist.prob[i];
    last = i;
    if (u < acc) return i;
  }
  return last;  // numeric slack
}

std::size_t argmax_dist(const MaskedDist& dist) {
  std::size_t best = 0;
  double bp = -1.0;
  for (std::size_t i = 0; i < dist.prob.size(); ++i)
    if (dist.prob[i] > bp) {
      bp = dist.prob[i];
      best = i;
    }
  return best;
}

std::size_t episode_length(EpisodeKind kind, const GameConfig& game) {
  switch (kind) {
    case EpisodeKind::IsolatedAdaptive:
      return game.L;
    default:
      return game.L / 2;
  }
}

}  // namespace

PpoConfig confuser_config() {
  PpoConfig c;
  c.hidden = 256;
  c.entropy_coef = 3e-4f;
  c.clip = 0.4f;
  c.vf_coef = 0.65f;
  c.max_grad_norm = 2.0f;
  return c;
}

ArgPolicy make_arg_policy(std::size_t state_dim, std::size_t hidden,
                          Rng& rng) {
  ArgPolicy p;
  p.state_dim = state_dim;
  std::size_t obs = 2 * state_dim + kNumActions;
  p.trunk = make_network({{obs, hidden, Activation::LeakyRelu},
                          {hidden, hidden, Activation::LeakyRelu}},
                         rng, {true, 1.0f, 1.0f});
  p.policy_head = make_network({{hidden, state_dim, Activation::Identity}},
                               rng, {true, 0.01f, 0.01f});
  p.value_head = make_network({{hidden, 1, Activation::Identity}}, rng,
                              {true, 1.0f, 1.0f});
  return p;
}

void fill_arg_obs(const ArgPolicy& policy, const PatientState& state,
                  int argued_action, const DebateNode& node, float* row) {
  std::size_t d = policy.state_dim;
  std::fill(row, row + policy.obs_dim(), 0.0f);
  for (std::size_t i = 0; i < d; ++i) row[i] = state[i];
  if (argued_action < 0 || argued_action >= int(kNumActions))
    throw std::out_of_range("action out of range");
  row[d + std::size_t(argued_action)] = 1.0f;
  for (std::size_t e : node.proposed) {
    if (e >= d) throw std::out_of_range("evidence out of range");
    row[d + kNumActions + e] = 1.0f;
  }
}

ActResult act(const ArgPolicy& policy, const PatientState& state,
              int argued_action, const DebateNode& node, ActMode mode,
              Rng& rng) {
  if (node.proposed.size() >= policy.state_dim)
    throw std::runtime_error("full node");
  Matrix obs(1, policy.obs_dim());
  fill_arg_obs(policy, state, argued_action, node, obs.data.data());
  auto& p = const_cast<ArgPolicy&>(policy);
  Matrix t = forward(p.trunk, obs, Mode::Eval);
  Matrix logits = forward(p.policy_head, t, Mode::Eval);
  Matrix value = forward(p.value_head, t, Mode::Eval);
  MaskedDist dist = masked_dist(&logits.at(0, 0),
                                &obs.at(0, policy.state_dim + kNumActions),
                                policy.state_dim);
  ActResult r;
  r.evidence = mode == ActMode::Stochastic ? sample_dist(dist, rng)
                                           : argmax_dist(dist);
  r.logprob = dist.logprob[r.evidence];
  r.value = double(value.at(0, 0));
  return r;
}

DebateStrategy policy_strategy(const ArgPolicy& policy, ActMode mode,
                               Rng* rng) {
  return [&policy, mode, rng](const DebateContext& ctx, const DebateNode& node,
                              int role) {
    int argued = role == 0 ? ctx.a_first : ctx.a_second;
    return act(policy, ctx.state, argued, node, mode, *rng).evidence;
  };
}

std::pair<std::vector<double>, std::vector<double>> compute_gae(
    const std::vector<double>& rewards, const std::vector<double>& values,
    double gamma, double lambda) {
  std::size_t n = rewards.size();
  std::vector<double> adv(n), ret(n);
  double gae = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    double next_v = i + 1 < n ? values[i + 1] : 0.0;
    double delta = rewards[i] + gamma * next_v - values[i];
    gae = delta + gamma * lambda * gae;
    adv[i] = gae;
    ret[i] = adv[i] + values[i];
  }
  return {adv, ret};
}

double PpoTrainer::reward_scale() const {
  if (reward_count == 0) return 1.0;
  double std = std::sqrt(reward_sq_sum / double(reward_count));
  return std::max(std, 1e-4);
}

PpoTrainer make_trainer(ArgPolicy policy, const PpoConfig& config) {
  PpoTrainer t;
  t.policy = std::move(policy);
  t.config = config;
  t.adam.lr = config.lr;
  for (Matrix* p : all_params(t.policy)) {
    t.adam.m.emplace_back(p->rows, p->cols);
    t.adam.v.emplace_back(p->rows, p->cols);
  }
  return t;
}

double collect_rollouts(PpoTrainer& trainer, EpisodeKind kind,
                        const ArgPolicy* opponent,
                        const std::vector<DebateContext>& contexts,
                        const EvidenceScorer& scorer, const GameConfig& game,
                        std::size_t n_steps, RolloutBuffer& out, Rng& rng) {
  if (contexts.empty()) throw std::invalid_argument("no contexts");
  std::size_t ep_len = episode_length(kind, game);
  if (n_steps % ep_len != 0)
    throw std::invalid_argument("n_steps must be a multiple of the episode "
                                "length");
  bool needs_opponent = kind == EpisodeKind::SelfplayDebate ||
                        kind == EpisodeKind::MaxminMain ||
                        kind == EpisodeKind::MaxminOpponent ||
                        kind == EpisodeKind::ConfuserDebate ||
                        kind == EpisodeKind::ConfuserPrecommit;
  if (needs_opponent && opponent == nullptr)
    throw std::invalid_argument("episode kind requires an opponent");

  const ArgPolicy& learner = trainer.policy;
  std::size_t n_eps = n_steps / ep_len;
  std::vector<float> rows;
  rows.reserve(n_steps * learner.obs_dim());
  out = RolloutBuffer{};
  double raw_sum = 0.0;

  for (std::size_t ep = 0; ep < n_eps; ++ep) {
    const DebateContext& ctx =
        contexts[std::size_t(rng.uniform_int(0, std::int64_t(contexts.size()) - 1))];
    DebateNode node;
    std::vector<double> values, logprobs;
    std::vector<std::size_t> chosen;

    auto learner_turn = [&](int argued) {
      Matrix obs(1, learner.obs_dim());
      fill_arg_obs(learner, ctx.state, argued, node, obs.data.data());
      ActResult r = act(learner, ctx.state, argued, node, ActMode::Stochastic,
                        rng);
      rows.insert(rows.end(), obs.data.begin(), obs.data.end());
      values.push_back(r.value);
      logprobs.push_back(r.logprob);
      chosen.push_back(r.evidence);
      node.proposed.push_back(r.evidence);
    };
    // Frozen confuser targets play greedily, matching the evaluation
    // protocol; live opponents stay stochastic.
    ActMode opp_mode = kind == EpisodeKind::ConfuserDebate ||
                               kind == EpisodeKind::ConfuserPrecommit
                           ? ActMode::Deterministic
                           : ActMode::Stochastic;
    auto opp_turn = [&](int argued) {
      ActResult r = act(*opponent, ctx.state, argued, node, opp_mode, rng);
      node.proposed.push_back(r.evidence);
    };

    double raw = 0.0;
    if (kind == EpisodeKind::IsolatedPrecommit ||
        kind == EpisodeKind::IsolatedAdaptive) {
      for (std::size_t l = 0; l < ep_len; ++l) learner_turn(ctx.a_first);
      raw = scorer(ctx.a_first, node.proposed, ctx.state);
    } else if (kind == EpisodeKind::ConfuserPrecommit) {
      for (std::size_t l = 0; l < game.L / 2; ++l) opp_turn(ctx.a_first);
      for (std::size_t l = 0; l < game.L / 2; ++l) learner_turn(ctx.a_second);
      raw = -debate_utility(scorer, ctx, node.proposed, game.utility);
    } else {
      int learner_role;
      switch (kind) {
        case EpisodeKind::SelfplayDebate:
          learner_role = int(rng.uniform_int(0, 1));
          break;
        case EpisodeKind::MaxminMain:
          learner_role = 0;
          break;
        default:  // MaxminOpponent, ConfuserDebate
          learner_role = 1;
          break;
      }
      int tau = game.first_mover == FirstMover::Randomized
                    ? int(rng.uniform_int(0, 1))
                    : 0;
      for (std::size_t l = 0; l < game.L; ++l) {
        int role = int((l + std::size_t(tau)) % 2);
        int argued = role == 0 ? ctx.a_first : ctx.a_second;
        if (role == learner_role)
          learner_turn(argued);
        else
          opp_turn(argued);
      }
      double u1 = debate_utility(scorer, ctx, node.proposed, game.utility);
      raw = learner_role == 0 ? u1 : -u1;
    }

    raw_sum += raw;
    trainer.reward_sq_sum += raw * raw;
    trainer.reward_count += 1;
    double r_final = trainer.config.normalize_rewards
                         ? raw / trainer.reward_scale()
                         : raw;
    std::vector<double> rewards(ep_len, 0.0);
    rewards.back() = r_final;
    auto [adv, ret] = compute_gae(rewards, values, trainer.config.gamma,
                                  trainer.config.gae_lambda);
    for (std::size_t i = 0; i < ep_len; ++i) {
      out.evidence.push_back(chosen[i]);
      out.logprob.push_back(logprobs[i]);
      out.value.push_back(values[i]);
      out.advantage.push_back(adv[i]);
      out.ret.push_back(ret[i]);
    }
  }

  out.obs = Matrix(n_steps, trainer.policy.obs_dim());
  out.obs.data = std::move(rows);
  return raw_sum / double(n_eps);
}

PpoStats ppo_update(PpoTrainer& trainer, const RolloutBuffer& buffer,
                    Rng& rng) {
  if (buffer.size() == 0) throw std::invalid_argument("empty rollouts");
  ArgPolicy& pol = trainer.policy;
  const PpoConfig& cfg = trainer.config;
  std::size_t d = pol.state_dim;
  std::size_t mask_off = d + kNumActions;

  std::vector<std::size_t> order(buffer.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  PpoStats stats;
  std::size_t n_batches = 0;
  auto params = all_params(pol);

  for (std::size_t epoch = 0; epoch < cfg.n_epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
      std::size_t b = std::min(cfg.batch, order.size() - start);
      Matrix obs(b, pol.obs_dim());
      for (std::size_t i = 0; i < b; ++i)
        std::copy_n(&buffer.obs.data[order[start + i] * pol.obs_dim()],
                    pol.obs_dim(), &obs.at(i, 0));

      // Per-batch advantage normalization.
      double amean = 0.0, asq = 0.0;
      for (std::size_t i = 0; i < b; ++i)
        amean += buffer.advantage[order[start + i]];
      amean /= double(b);
      for (std::size_t i = 0; i < b; ++i) {
        double x = buffer.advantage[order[start + i]] - amean;
        asq += x * x;
      }
      double astd = std::sqrt(asq / double(b));
      bool norm_adv = astd > 1e-8;

      ForwardCache ct, cp, cv;
      Matrix t = forward(pol.trunk, obs, Mode::Train, &ct);
      Matrix logits = forward(pol.policy_head, t, Mode::Train, &cp);
      Matrix value = forward(pol.value_head, t, Mode::Train, &cv);

      Matrix glogits(b, d);
      Matrix gvalue(b, 1);
      double pol_loss = 0.0, val_loss = 0.0, ent_sum = 0.0;
      std::size_t clipped = 0;
      for (std::size_t i = 0; i < b; ++i) {
        std::size_t idx = order[start + i];
        MaskedDist dist = masked_dist(&logits.at(i, 0), &obs.at(i, mask_off),
                                      d);
        std::size_t a = buffer.evidence[idx];
        double adv = buffer.advantage[idx];
        if (norm_adv) adv = (adv - amean) / astd;
        double lp_new = dist.logprob[a];
        double ratio = std::exp(lp_new - buffer.logprob[idx]);
        double surr1 = ratio * adv;
        double clip_r = std::clamp(ratio, 1.0 - double(cfg.clip),
                                   1.0 + double(cfg.clip));
        double surr2 = clip_r * adv;
        bool use_unclipped = surr1 <= surr2;
        pol_loss += -std::min(surr1, surr2);
        if (std::abs(ratio - 1.0) > double(cfg.clip)) ++clipped;
        ent_sum += dist.entropy;

        double dlp = use_unclipped ? -adv * ratio / double(b) : 0.0;
        for (std::size_t j = 0; j < d; ++j) {
          double p = dist.prob[j];
          double g = dlp * ((j == a ? 1.0 : 0.0) - p);
          if (p > 0.0) {
            // d(-ent_coef * H)/dlogit_j
            g += double(cfg.entropy_coef) * p *
                 (dist.logprob[j] + dist.entropy) / double(b);
          }
          glogits.at(i, j) = float(g);
        }
        double verr = double(value.at(i, 0)) - buffer.ret[idx];
        val_loss += 0.5 * verr * verr;
        gvalue.at(i, 0) = float(double(cfg.vf_coef) * verr / double(b));
      }
      pol_loss /= double(b);
      val_loss /= double(b);
      if (!std::isfinite(pol_loss) || !std::isfinite(val_loss))
        throw std::runtime_error("non-finite PPO loss");

      Gradients gp = backward(pol.policy_head, cp, glogits);
      Gradients gv = backward(pol.value_head, cv, gvalue);
      Matrix gt = gp.input_grad;
      for (std::size_t k = 0; k < gt.data.size(); ++k)
        gt.data[k] += gv.input_grad.data[k];
      Gradients gtr = backward(pol.trunk, ct, gt);

      std::vector<Matrix> grads;
      for (auto& m : gtr.grads) grads.push_back(std::move(m));
      for (auto& m : gp.grads) grads.push_back(std::move(m));
      for (auto& m : gv.grads) grads.push_back(std::move(m));
      clip_grad_norm(grads, double(cfg.max_grad_norm));
      adam_step(params, grads, trainer.adam);

      stats.policy_loss += pol_loss;
      stats.value_loss += val_loss;
      stats.entropy += ent_sum / double(b);
      stats.clip_fraction += double(clipped) / double(b);
      ++n_batches;
    }
  }
  stats.policy_loss /= double(n_batches);
  stats.value_loss /= double(n_batches);
  stats.entropy /= double(n_batches);
  stats.clip_fraction /= double(n_batches);
  return stats;
}

std::vector<DebateContext> contexts_from(const PreferenceDataset& dataset,
                                         Split split) {
  std::vector<DebateContext> out;
  for (const PreferenceTuple* t : dataset.split_view(split))
    out.push_back({t->state, t->preferred(), t->alternative()});
  return out;
}

namespace {

struct CurveWriter {
  std::string dir;
  std::ofstream csv;

  explicit CurveWriter(const std::string& out_dir) : dir(out_dir) {
    if (dir.empty()) return;
    csv.open(dir + "/curves.csv");
    csv << "generation,mean_reward,entropy,value_loss\n";
  }
  void row(std::size_t gen, double reward, const PpoStats& s) {
    if (dir.empty()) return;
    csv << gen << "," << reward << "," << s.entropy << "," << s.value_loss
        << "\n";
  }
  void checkpoint(const ArgPolicy& p, std::size_t gen,
                  const std::string& tag) {
    if (dir.empty()) return;
    save_arg_policy(p, dir + "/" + tag + "_gen" + std::to_string(gen));
  }
};

// Runs one training phase of n_steps learner decisions, chunked into PPO
// updates. Returns (mean raw reward, averaged stats).
std::pair<double, PpoStats> run_phase(PpoTrainer& trainer, EpisodeKind kind,
                                      const ArgPolicy* opponent,
                                      const std::vector<DebateContext>& ctxs,
                                      const EvidenceScorer& scorer,
                                      const GameConfig& game,
                                      std::size_t n_steps,
                                      std::size_t rollout_steps, Rng& rng,
                                      std::size_t* step_counter) {
  std::size_t ep_len = episode_length(kind, game);
  if (n_steps % ep_len != 0)
    throw std::invalid_argument("phase steps must be a multiple of the "
                                "episode length");
  double reward_sum = 0.0;
  std::size_t n_chunks = 0;
  PpoStats acc;
  std::size_t remaining = n_steps;
  while (remaining > 0) {
    std::size_t chunk = std::min(rollout_steps, remaining);
    chunk -= chunk % ep_len;
    if (chunk == 0) chunk = ep_len;
    RolloutBuffer buf;
    reward_sum +=
        collect_rollouts(trainer, kind, opponent, ctxs, scorer, game, chunk,
                         buf, rng);
    PpoStats s = ppo_update(trainer, buf, rng);
    acc.policy_loss += s.policy_loss;
    acc.value_loss += s.value_loss;
    acc.entropy += s.entropy;
    acc.clip_fraction += s.clip_fraction;
    ++n_chunks;
    remaining -= chunk;
    if (step_counter) *step_counter += chunk;
  }
  acc.policy_loss /= double(n_chunks);
  acc.value_loss /= double(n_chunks);
  acc.entropy /= double(n_chunks);
  acc.clip_fraction /= double(n_chunks);
  return {reward_sum / double(n_chunks), acc};
}

void push_curves(TrainCurves* curves, double reward, const PpoStats& s) {
  if (!curves) return;
  curves->mean_reward.push_back(reward);
  curves->entropy.push_back(s.entropy);
  curves->value_loss.push_back(s.value_loss);
}

std::size_t ctx_dim(const std::vector<DebateContext>& ctxs) {
  if (ctxs.empty()) throw std::invalid_argument("no contexts");
  return ctxs.front().state.size();
}

}  // namespace

ArgPolicy train_selfplay(const std::vector<DebateContext>& contexts,
                         const EvidenceScorer& scorer, const GameConfig& game,
                         const PpoConfig& config, const Schedule& schedule,
                         Rng& rng, TrainCurves* curves,
                         const std::string& out_dir) {
  PpoTrainer trainer =
      make_trainer(make_arg_policy(ctx_dim(contexts), config.hidden, rng),
                   config);
  CurveWriter writer(out_dir);
  for (std::size_t gen = 0; gen < schedule.generations; ++gen) {
    ArgPolicy frozen = trainer.policy;  // opponent snapshot
    auto [reward, stats] = run_phase(
        trainer, EpisodeKind::SelfplayDebate, &frozen, contexts, scorer, game,
        schedule.steps_per_gen, schedule.rollout_steps, rng,
        curves ? &curves->total_steps : nullptr);
    push_curves(curves, reward, stats);
    writer.row(gen, reward, stats);
    writer.checkpoint(trainer.policy, gen, "selfplay");
  }
  return std::move(trainer.policy);
}

std::pair<ArgPolicy, ArgPolicy> train_maxmin(
    const std::vector<DebateContext>& contexts, const EvidenceScorer& scorer,
    const GameConfig& game, const PpoConfig& config, const Schedule& schedule,
    Rng& rng, TrainCurves* curves, const std::string& out_dir) {
  std::size_t d = ctx_dim(contexts);
  PpoTrainer main =
      make_trainer(make_arg_policy(d, config.hidden, rng), config);
  PpoTrainer opp =
      make_trainer(make_arg_policy(d, config.hidden, rng), config);
  CurveWriter writer(out_dir);
  for (std::size_t gen = 0; gen < schedule.generations; ++gen) {
    if (schedule.reinit_opponent && gen > 0)
      opp = make_trainer(make_arg_policy(d, config.hidden, rng), config);
    auto [reward, stats] = run_phase(
        main, EpisodeKind::MaxminMain, &opp.policy, contexts, scorer, game,
        schedule.steps_per_gen, schedule.rollout_steps, rng,
        curves ? &curves->total_steps : nullptr);
    run_phase(opp, EpisodeKind::MaxminOpponent, &main.policy, contexts,
              scorer, game, schedule.opponent_steps, schedule.rollout_steps,
              rng, curves ? &curves->total_steps : nullptr);
    push_curves(curves, reward, stats);
    writer.row(gen, reward, stats);
    writer.checkpoint(main.policy, gen, "maxmin");
  }
  return {std::move(main.policy), std::move(opp.policy)};
}

ArgPolicy train_isolated(const std::vector<DebateContext>& contexts,
                         const EvidenceScorer& scorer, const GameConfig& game,
                         IsolatedMode mode, const PpoConfig& config,
                         const Schedule& schedule, Rng& rng,
                         TrainCurves* curves, const std::string& out_dir) {
  PpoTrainer trainer =
      make_trainer(make_arg_policy(ctx_dim(contexts), config.hidden, rng),
                   config);
  EpisodeKind kind = mode == IsolatedMode::Precommit
                         ? EpisodeKind::IsolatedPrecommit
                         : EpisodeKind::IsolatedAdaptive;
  CurveWriter writer(out_dir);
  for (std::size_t gen = 0; gen < schedule.generations; ++gen) {
    auto [reward, stats] = run_phase(
        trainer, kind, nullptr, contexts, scorer, game,
        schedule.steps_per_gen, schedule.rollout_steps, rng,
        curves ? &curves->total_steps : nullptr);
    push_curves(curves, reward, stats);
    writer.row(gen, reward, stats);
    writer.checkpoint(trainer.policy, gen, "isolated");
  }
  return std::move(trainer.policy);
}

ArgPolicy train_confuser(const ArgPolicy& target, ConfuserTarget target_kind,
                         const std::vector<DebateContext>& contexts,
                         const EvidenceScorer& scorer, const GameConfig& game,
                         const PpoConfig& config, const Schedule& schedule,
                         Rng& rng, TrainCurves* curves,
                         const std::string& out_dir) {
  PpoTrainer trainer =
      make_trainer(make_arg_policy(ctx_dim(contexts), config.hidden, rng),
                   config);
  EpisodeKind kind = target_kind == ConfuserTarget::Debate
                         ? EpisodeKind::ConfuserDebate
                         : EpisodeKind::ConfuserPrecommit;
  CurveWriter writer(out_dir);
  for (std::size_t gen = 0; gen < schedule.generations; ++gen) {
    auto [reward, stats] = run_phase(
        trainer, kind, &target, contexts, scorer, game,
        schedule.steps_per_gen, schedule.rollout_steps, rng,
        curves ? &curves->total_steps : nullptr);
    push_curves(curves, reward, stats);
    writer.row(gen, reward, stats);
    writer.checkpoint(trainer.policy, gen, "confuser");
  }
  return std::move(trainer.policy);
}

void save_arg_policy(const ArgPolicy& policy, const std::string& stem) {
  save_network(policy.trunk, stem + ".trunk.net",
               {"meta state_dim " + std::to_string(policy.state_dim)});
  save_network(policy.policy_head, stem + ".pi.net");
  save_network(policy.value_head, stem + ".v.net");
}

ArgPolicy load_arg_policy(const std::string& stem) {
  ArgPolicy p;
  std::vector<std::string> extra;
  p.trunk = load_network(stem + ".trunk.net", &extra);
  for (const auto& line : extra) {
    std::size_t sd;
    if (std::sscanf(line.c_str(), "meta state_dim %zu", &sd) == 1)
      p.state_dim = sd;
  }
  p.policy_head = load_network(stem + ".pi.net");
  p.value_head = load_network(stem + ".v.net");
  if (p.state_dim == 0) throw std::runtime_error("bad policy file");
  return p;
}

}  // namespace debaterl
