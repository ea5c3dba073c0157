#include "debaterl/taskpolicy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace debaterl {

namespace {

std::vector<Matrix*> all_params(QNet& n) {
  auto out = n.trunk.parameters();
  for (auto* m : n.v_stream.parameters()) out.push_back(m);
  for (auto* m : n.a_stream.parameters()) out.push_back(m);
  return out;
}

Matrix states_matrix(const std::vector<PatientState>& states,
                     const std::vector<std::size_t>& idx) {
  Matrix m(idx.size(), states[0].size());
  for (std::size_t i = 0; i < idx.size(); ++i)
    std::copy(states[idx[i]].begin(), states[idx[i]].end(), &m.at(i, 0));
  return m;
}

// Dueling aggregation from stream outputs.
Matrix aggregate(const Matrix& v, const Matrix& a) {
  Matrix q(a.rows, a.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    double mean = 0.0;
    for (std::size_t j = 0; j < a.cols; ++j) mean += double(a.at(i, j));
    mean /= double(a.cols);
    for (std::size_t j = 0; j < a.cols; ++j)
      q.at(i, j) = float(double(v.at(i, 0)) + double(a.at(i, j)) - mean);
  }
  return q;
}

}  // namespace

std::size_t n_step_for(double lambda) {
  if (lambda == 0.0) return 6;
  if (lambda >= 1.0) return 1;
  return 3;
}

QNet make_qnet(std::size_t state_dim, std::size_t hidden, Rng& rng) {
  QNet n;
  n.state_dim = state_dim;
  n.trunk = make_network({{state_dim, hidden, Activation::LeakyRelu},
                          {hidden, hidden, Activation::LeakyRelu}},
                         rng);
  n.v_stream = make_network({{hidden, 1, Activation::Identity}}, rng);
  n.a_stream = make_network({{hidden, kNumActions, Activation::Identity}},
                            rng);
  return n;
}

Matrix q_values_batch(const QNet& net, const Matrix& states) {
  auto& n = const_cast<QNet&>(net);
  Matrix t = forward(n.trunk, states, Mode::Eval);
  Matrix v = forward(n.v_stream, t, Mode::Eval);
  Matrix a = forward(n.a_stream, t, Mode::Eval);
  return aggregate(v, a);
}

std::vector<double> q_values(const QNet& net, const PatientState& state) {
  Matrix s(1, state.size());
  std::copy(state.begin(), state.end(), s.data.begin());
  Matrix q = q_values_batch(net, s);
  return std::vector<double>(q.data.begin(), q.data.end());
}

int greedy_action(const QNet& net, const PatientState& state) {
  auto q = q_values(net, state);
  return int(std::max_element(q.begin(), q.end()) - q.begin());
}

double mixed_reward(double r_env, double r_debate, double lambda) {
  if (lambda < 0.0 || lambda > 1.0)
    throw std::invalid_argument("lambda out of [0,1]");
  return (1.0 - lambda) * r_env + lambda * r_debate;
}

void PerBuffer::add(PatientState s, int a, double r, PatientState s2,
                    bool term, double gn) {
  state.push_back(std::move(s));
  action.push_back(a);
  reward.push_back(r);
  next_state.push_back(std::move(s2));
  terminal.push_back(term ? 1 : 0);
  gamma_n.push_back(gn);
  priority.push_back(max_priority);
}

PerBuffer::Sample PerBuffer::sample(std::size_t batch, double alpha,
                                    double beta, Rng& rng) const {
  if (size() == 0) throw std::runtime_error("empty replay buffer");
  std::vector<double> cum(size());
  double total = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    total += std::pow(priority[i], alpha);
    cum[i] = total;
  }
  double n = double(size());
  // max IS weight corresponds to the smallest sampling probability.
  double min_prob = 1e300;
  for (std::size_t i = 0; i < size(); ++i) {
    double p = std::pow(priority[i], alpha) / total;
    min_prob = std::min(min_prob, p);
  }
  double w_max = std::pow(n * min_prob, -beta);

  Sample out;
  out.idx.resize(batch);
  out.is_weight.resize(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    double u = rng.uniform() * total;
    std::size_t i = std::size_t(
        std::lower_bound(cum.begin(), cum.end(), u) - cum.begin());
    i = std::min(i, size() - 1);
    out.idx[b] = i;
    double p = std::pow(priority[i], alpha) / total;
    out.is_weight[b] = std::pow(n * p, -beta) / w_max;
  }
  return out;
}

void PerBuffer::update_priorities(const std::vector<std::size_t>& idx,
                                  const std::vector<double>& td_error) {
  for (std::size_t k = 0; k < idx.size(); ++k) {
    double p = std::abs(td_error[k]) + 1e-6;
    priority[idx[k]] = p;
    max_priority = std::max(max_priority, p);
  }
}

PerBuffer load_replay(const Cohort& cohort, double lambda,
                      const DebateRewardFn& rd, const QNet* baseline,
                      const DqnConfig& config) {
  if (lambda > 0.0 && !rd)
    throw std::invalid_argument("lambda > 0 requires a debate reward source");
  if (lambda > 0.0 && baseline == nullptr)
    throw std::invalid_argument("lambda > 0 requires a baseline policy");
  std::size_t n_step = config.n_step ? config.n_step : n_step_for(lambda);

  PerBuffer buf;
  buf.state_dim = cohort.config.state_dim;
  for (const Trajectory& traj : cohort.trajectories) {
    std::size_t len = traj.size();
    // Mixed per-step rewards, debate rewards computed once.
    std::vector<double> r(len);
    for (std::size_t t = 0; t < len; ++t) {
      double r_d = 0.0;
      if (lambda > 0.0) {
        int a_b = greedy_action(*baseline, traj[t].state);
        if (traj[t].action != a_b)
          r_d = rd(traj[t].state, traj[t].action, a_b);
      }
      r[t] = mixed_reward(double(traj[t].env_reward), r_d, lambda);
    }
    for (std::size_t t = 0; t < len; ++t) {
      std::size_t m = std::min(n_step, len - t);
      double g = 0.0, disc = 1.0;
      for (std::size_t k = 0; k < m; ++k) {
        g += disc * r[t + k];
        disc *= config.gamma;
      }
      bool term = t + m == len;
      buf.add(traj[t].state, traj[t].action, g,
              term ? traj[len - 1].next_state : traj[t + m].state, term,
              disc);
    }
  }
  return buf;
}

DqnBatch gather_batch(const PerBuffer& buffer,
                      const std::vector<std::size_t>& idx,
                      const std::vector<double>& is_weight) {
  DqnBatch b;
  b.states = states_matrix(buffer.state, idx);
  b.next_states = states_matrix(buffer.next_state, idx);
  for (std::size_t i : idx) {
    b.actions.push_back(buffer.action[i]);
    b.rewards.push_back(buffer.reward[i]);
    b.terminal.push_back(buffer.terminal[i]);
    b.gamma_n.push_back(buffer.gamma_n[i]);
  }
  b.is_weight = is_weight;
  return b;
}

namespace {

std::vector<double> dqn_targets(const DqnBatch& batch, const QNet& online,
                                const QNet& target, const DqnConfig& cfg) {
  std::size_t b = batch.actions.size();
  Matrix q_next_online = q_values_batch(online, batch.next_states);
  Matrix q_next_target = q_values_batch(target, batch.next_states);
  std::vector<double> y(b);
  for (std::size_t i = 0; i < b; ++i) {
    y[i] = batch.rewards[i];
    if (batch.terminal[i]) continue;
    std::size_t best = 0;
    for (std::size_t a = 1; a < kNumActions; ++a)
      if (q_next_online.at(i, a) > q_next_online.at(i, best)) best = a;
    double qt = std::clamp(double(q_next_target.at(i, best)), -cfg.q_thresh,
                           cfg.q_thresh);
    y[i] += batch.gamma_n[i] * qt;
  }
  return y;
}

}  // namespace

DqnLossResult dqn_loss(const DqnBatch& batch, const QNet& online,
                       const QNet& target, const DqnConfig& cfg) {
  std::size_t b = batch.actions.size();
  if (b == 0) throw std::invalid_argument("empty batch");
  std::vector<double> y = dqn_targets(batch, online, target, cfg);
  Matrix q = q_values_batch(online, batch.states);
  DqnLossResult out;
  out.td_error.resize(b);
  for (std::size_t i = 0; i < b; ++i) {
    double qa = double(q.at(i, std::size_t(batch.actions[i])));
    double td = y[i] - qa;
    out.td_error[i] = td;
    double penalty =
        cfg.penalty_beta * std::max(std::abs(qa) - cfg.q_thresh, 0.0);
    out.loss += batch.is_weight[i] * (td * td + penalty);
  }
  out.loss /= double(b);
  return out;
}

void polyak_update(QNet& target, const QNet& online, double tau) {
  auto tp = all_params(target);
  auto op = all_params(const_cast<QNet&>(online));
  for (std::size_t i = 0; i < tp.size(); ++i)
    for (std::size_t k = 0; k < tp[i]->data.size(); ++k)
      tp[i]->data[k] = float(tau * double(op[i]->data[k]) +
                             (1.0 - tau) * double(tp[i]->data[k]));
  // Batch-norm running stats would need the same treatment; QNets have none.
}

QNet train_policy_from_buffer(
    const PerBuffer& buffer0, const DqnConfig& cfg, Rng& rng,
    const EvalFn& eval_fn,
    std::vector<std::pair<std::size_t, double>>* eval_log,
    const std::string& csv_path) {
  PerBuffer buffer = buffer0;
  QNet online = make_qnet(buffer.state_dim, cfg.hidden, rng);
  QNet target = online;
  AdamState adam;
  adam.lr = cfg.lr;
  for (Matrix* p : all_params(online)) {
    adam.m.emplace_back(p->rows, p->cols);
    adam.v.emplace_back(p->rows, p->cols);
  }
  auto params = all_params(online);
  std::ofstream csv;
  if (!csv_path.empty()) {
    csv.open(csv_path);
    csv << "iteration,wis\n";
  }

  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    auto s = buffer.sample(cfg.batch, cfg.per_alpha, cfg.per_beta, rng);
    DqnBatch batch = gather_batch(buffer, s.idx, s.is_weight);
    std::vector<double> y = dqn_targets(batch, online, target, cfg);

    std::size_t b = batch.actions.size();
    ForwardCache ct, cv, ca;
    Matrix t = forward(online.trunk, batch.states, Mode::Train, &ct);
    Matrix v = forward(online.v_stream, t, Mode::Train, &cv);
    Matrix a = forward(online.a_stream, t, Mode::Train, &ca);
    Matrix q = aggregate(v, a);

    Matrix gv(b, 1), ga(b, kNumActions);
    std::vector<double> td(b);
    for (std::size_t i = 0; i < b; ++i) {
      std::size_t ai = std::size_t(batch.actions[i]);
      double qa = double(q.at(i, ai));
      td[i] = y[i] - qa;
      double g = batch.is_weight[i] * (-2.0 * td[i]) / double(b);
      if (std::abs(qa) > cfg.q_thresh)
        g += batch.is_weight[i] * cfg.penalty_beta * (qa > 0 ? 1.0 : -1.0) /
             double(b);
      gv.at(i, 0) = float(g);
      for (std::size_t j = 0; j < kNumActions; ++j)
        ga.at(i, j) =
            float(g * ((j == ai ? 1.0 : 0.0) - 1.0 / double(kNumActions)));
    }
    if (!std::isfinite(td[0])) throw std::runtime_error("non-finite TD");

    Gradients gvs = backward(online.v_stream, cv, gv);
    Gradients gas = backward(online.a_stream, ca, ga);
    Matrix gt = gvs.input_grad;
    for (std::size_t k = 0; k < gt.data.size(); ++k)
      gt.data[k] += gas.input_grad.data[k];
    Gradients gts = backward(online.trunk, ct, gt);

    std::vector<Matrix> grads;
    for (auto& m : gts.grads) grads.push_back(std::move(m));
    for (auto& m : gvs.grads) grads.push_back(std::move(m));
    for (auto& m : gas.grads) grads.push_back(std::move(m));
    adam_step(params, grads, adam);

    buffer.update_priorities(s.idx, td);
    polyak_update(target, online, cfg.polyak_tau);

    if (eval_fn && it % cfg.eval_every == 0) {
      double w = eval_fn(online);
      if (eval_log) eval_log->emplace_back(it, w);
      if (csv.is_open()) csv << it << "," << w << "\n";
    }
  }
  return online;
}

QNet train_policy(const Cohort& cohort, double lambda,
                  const DebateRewardFn& rd, const QNet* baseline,
                  const DqnConfig& cfg, Rng& rng, const EvalFn& eval_fn,
                  std::vector<std::pair<std::size_t, double>>* eval_log,
                  const std::string& csv_path) {
  DqnConfig c = cfg;
  c.lambda = lambda;
  PerBuffer buffer = load_replay(cohort, lambda, rd, baseline, c);
  return train_policy_from_buffer(buffer, c, rng, eval_fn, eval_log,
                                  csv_path);
}

std::vector<double> bc_probs(const BcPolicy& policy,
                             const PatientState& state) {
  Matrix s(1, state.size());
  std::copy(state.begin(), state.end(), s.data.begin());
  auto& net = const_cast<Network&>(policy.net);
  Matrix p = forward(net, s, Mode::Eval);
  return std::vector<double>(p.data.begin(), p.data.end());
}

BcPolicy train_bc(const Cohort& cohort, const BcConfig& cfg, Rng& rng) {
  std::size_t d = cohort.config.state_dim;
  BcPolicy policy;
  policy.state_dim = d;
  policy.net = make_network({{d, cfg.hidden, Activation::LeakyRelu},
                             {cfg.hidden, cfg.hidden, Activation::LeakyRelu},
                             {cfg.hidden, kNumActions, Activation::Softmax}},
                            rng);
  AdamState adam = make_adam(policy.net, cfg.lr, cfg.weight_decay);

  std::vector<const Transition*> data;
  for (const auto& traj : cohort.trajectories)
    for (const auto& tr : traj) data.push_back(&tr);
  if (data.empty()) throw std::invalid_argument("empty cohort");
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
      std::size_t b = std::min(cfg.batch, order.size() - start);
      Matrix in(b, d);
      for (std::size_t i = 0; i < b; ++i)
        std::copy(data[order[start + i]]->state.begin(),
                  data[order[start + i]]->state.end(), &in.at(i, 0));
      ForwardCache cache;
      Matrix out = forward(policy.net, in, Mode::Train, &cache);
      Matrix g(b, kNumActions);
      for (std::size_t i = 0; i < b; ++i) {
        std::size_t a = std::size_t(data[order[start + i]]->action);
        // d(-log p_a)/dp via the softmax Jacobian in backward().
        g.at(i, a) = float(-1.0 / std::max(double(out.at(i, a)), 1e-8) /
                           double(b));
      }
      Gradients grads = backward(policy.net, cache, g);
      adam_step(policy.net.parameters(), grads.grads, adam);
    }
  }
  return policy;
}

double bc_logloss(const BcPolicy& policy, const Cohort& cohort) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& traj : cohort.trajectories)
    for (const auto& tr : traj) {
      auto p = bc_probs(policy, tr.state);
      sum += -std::log(std::max(p[std::size_t(tr.action)], 1e-12));
      ++n;
    }
  return sum / double(n);
}

void save_qnet(const QNet& net, const std::string& stem) {
  save_network(net.trunk, stem + ".trunk.net",
               {"meta state_dim " + std::to_string(net.state_dim)});
  save_network(net.v_stream, stem + ".v.net");
  save_network(net.a_stream, stem + ".a.net");
}

QNet load_qnet(const std::string& stem) {
  QNet n;
  std::vector<std::string> extra;
  n.trunk = load_network(stem + ".trunk.net", &extra);
  for (const auto& line : extra) {
    std::size_t sd;
    if (std::sscanf(line.c_str(), "meta state_dim %zu", &sd) == 1)
      n.state_dim = sd;
  }
  n.v_stream = load_network(stem + ".v.net");
  n.a_stream = load_network(stem + ".a.net");
  if (n.state_dim == 0) throw std::runtime_error("bad qnet file");
  return n;
}

void save_bc(const BcPolicy& policy, const std::string& path) {
  save_network(policy.net, path,
               {"meta state_dim " + std::to_string(policy.state_dim)});
}

BcPolicy load_bc(const std::string& path) {
  BcPolicy p;
  std::vector<std::string> extra;
  p.net = load_network(path, &extra);
  for (const auto& line : extra) {
    std::size_t sd;
    if (std::sscanf(line.c_str(), "meta state_dim %zu", &sd) == 1)
      p.state_dim = sd;
  }
  if (p.state_dim == 0) throw std::runtime_error("bad bc file");
  return p;
}

}  // namespace debaterl
