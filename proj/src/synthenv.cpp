#include "debaterl/synthenv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace debaterl {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

int round_sofa(float v) { return int(std::lround(double(v))); }

// How close an action's doses are to the hidden targets, in [0, 1].
double dose_match(const HiddenScorer& scorer, const PatientState& s, int action) {
  int iv, vc;
  decode_action(action, &iv, &vc);
  const double d = std::abs(iv - scorer.target_iv(s)) +
                   std::abs(vc - scorer.target_vc(s));
  return std::max(0.0, 1.0 - d / 8.0);
}

void validate(const EnvConfig& c) {
  if (c.state_dim < 4 || c.state_dim > 44)
    throw std::invalid_argument("EnvConfig: state_dim out of range");
  if (c.sofa_index == c.lactate_index || c.sofa_index >= c.state_dim ||
      c.lactate_index >= c.state_dim)
    throw std::invalid_argument("EnvConfig: bad sofa/lactate indices");
  if (c.horizon < 2) throw std::invalid_argument("EnvConfig: horizon < 2");
  if (c.n_patients == 0) throw std::invalid_argument("EnvConfig: no patients");
}

HiddenScorer make_scorer(const EnvConfig& cfg, Rng& rng) {
  HiddenScorer sc;
  sc.w_iv.assign(cfg.state_dim, 0.0f);
  sc.w_vc.assign(cfg.state_dim, 0.0f);
  // Targets depend on the auxiliary features only: the first half of them
  // drives the IV target, the second half the VC target.
  std::vector<std::size_t> aux;
  for (std::size_t i = 0; i < cfg.state_dim; ++i)
    if (i != cfg.sofa_index && i != cfg.lactate_index) aux.push_back(i);
  const std::size_t half = aux.size() / 2;
  for (std::size_t k = 0; k < aux.size(); ++k) {
    const float w = float(rng.normal(0.0, 1.5));
    if (k < half)
      sc.w_iv[aux[k]] = w;
    else
      sc.w_vc[aux[k]] = w;
  }
  return sc;
}

Cohort generate_impl(const EnvConfig& cfg, bool deterministic_clinician) {
  validate(cfg);
  Rng rng(cfg.seed * 0x9e3779b97f4a7c15ULL + 0x1234567ULL);
  Cohort cohort;
  cohort.config = cfg;
  cohort.scorer = make_scorer(cfg, rng);
  const HiddenScorer& sc = cohort.scorer;

  for (std::size_t p = 0; p < cfg.n_patients; ++p) {
    Rng prng = rng.derive(p + 1);
    PatientState s(cfg.state_dim);
    for (std::size_t i = 0; i < cfg.state_dim; ++i)
      s[i] = float(prng.normal(0.0, 0.7));
    s[cfg.sofa_index] = float(prng.uniform() * 4.0 + 5.0);   // 5..9
    s[cfg.lactate_index] = float(prng.uniform() * 3.0 + 1.0);  // 1..4

    // Per-patient severity: for the sickest, SOFA keeps rising even under
    // well-matched treatment.
    const double drift = std::max(0.3, 1.0 + prng.normal(0.0, 0.45));

    Trajectory traj;
    for (std::size_t t = 0; t < cfg.horizon; ++t) {
      int action;
      if (deterministic_clinician) {
        action = 0;
        double best = sc.score(s, 0);
        for (int a = 1; a < kNumActions; ++a) {
          const double v = sc.score(s, a);
          if (v > best) {
            best = v;
            action = a;
          }
        }
      } else {
        const std::vector<double> probs = sc.clinician_probs(s);
        double u = prng.uniform();
        action = kNumActions - 1;
        for (int a = 0; a < kNumActions; ++a) {
          u -= probs[a];
          if (u <= 0.0) {
            action = a;
            break;
          }
        }
      }

      const double m = dose_match(sc, s, action);
      PatientState next(cfg.state_dim);
      for (std::size_t i = 0; i < cfg.state_dim; ++i)
        if (i != cfg.sofa_index && i != cfg.lactate_index)
          next[i] = float(0.9 * s[i] + prng.normal(0.0, 0.3));
      const double sofa =
          s[cfg.sofa_index] + drift - 1.8 * m + prng.normal(0.0, 0.35);
      next[cfg.sofa_index] = float(std::min(20.0, std::max(0.0, sofa)));
      const double lact =
          s[cfg.lactate_index] + 0.25 - 0.5 * m + prng.normal(0.0, 0.15);
      next[cfg.lactate_index] = float(std::max(0.0, lact));

      Transition tr;
      tr.state = s;
      tr.action = action;
      tr.next_state = next;

      // Terminal conditions apply from the second transition on, so every
      // trajectory has length >= 2.
      Outcome outcome = Outcome::None;
      if (t >= 1) {
        const int sofa_lvl = round_sofa(next[cfg.sofa_index]);
        if (sofa_lvl >= 13)
          outcome = Outcome::Death;
        else if (sofa_lvl <= 0)
          outcome = Outcome::Survival;
      }
      if (outcome == Outcome::None && t + 1 == cfg.horizon)
        outcome = Outcome::Survival;  // horizon truncation counts as discharge

      if (outcome != Outcome::None) {
        tr.terminal = true;
        tr.outcome = outcome;
        tr.env_reward = terminal_reward(outcome);
        traj.push_back(std::move(tr));
        break;
      }
      tr.env_reward = shaped_reward(s, next, cfg);
      traj.push_back(std::move(tr));
      s = next;
    }
    cohort.trajectories.push_back(std::move(traj));
  }
  return cohort;
}

}  // namespace

float HiddenScorer::target_iv(const PatientState& s) const {
  double z = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) z += double(w_iv[i]) * double(s[i]);
  return float(4.0 * sigmoid(z));
}

float HiddenScorer::target_vc(const PatientState& s) const {
  double z = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) z += double(w_vc[i]) * double(s[i]);
  return float(4.0 * sigmoid(z));
}

double HiddenScorer::score(const PatientState& s, int action) const {
  int iv, vc;
  decode_action(action, &iv, &vc);
  const double di = iv - target_iv(s);
  const double dv = vc - target_vc(s);
  return -0.5 * (di * di + dv * dv);
}

std::vector<double> HiddenScorer::clinician_probs(const PatientState& s,
                                                  double temperature) const {
  std::vector<double> logits(kNumActions);
  double mx = -1e300;
  for (int a = 0; a < kNumActions; ++a) {
    logits[a] = score(s, a) / temperature;
    mx = std::max(mx, logits[a]);
  }
  double sum = 0.0;
  for (auto& v : logits) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (auto& v : logits) v /= sum;
  return logits;
}

double Cohort::mortality() const {
  std::size_t deaths = 0;
  for (const auto& t : trajectories)
    if (!t.empty() && t.back().outcome == Outcome::Death) ++deaths;
  return trajectories.empty() ? 0.0 : double(deaths) / double(trajectories.size());
}

int encode_action(int iv, int vc) {
  if (iv < 0 || iv >= kNumIv || vc < 0 || vc >= kNumVc)
    throw std::invalid_argument("encode_action: dose out of range");
  return kNumVc * iv + vc;
}

void decode_action(int action, int* iv, int* vc) {
  if (action < 0 || action >= kNumActions)
    throw std::invalid_argument("decode_action: action out of range");
  *iv = action / kNumVc;
  *vc = action % kNumVc;
}

float shaped_reward(const PatientState& s, const PatientState& s_next,
                    const EnvConfig& cfg) {
  const int sofa_t = round_sofa(s[cfg.sofa_index]);
  const int sofa_n = round_sofa(s_next[cfg.sofa_index]);
  const double lact_t = s[cfg.lactate_index];
  const double lact_n = s_next[cfg.lactate_index];
  double r = 0.0;
  if (sofa_n == sofa_t && sofa_n > 0) r += kShapeC0;
  r += double(kShapeC1) * (sofa_n - sofa_t);
  r += double(kShapeC2) * std::tanh(lact_n - lact_t);
  return float(r);
}

float terminal_reward(Outcome outcome) {
  switch (outcome) {
    case Outcome::Survival: return kTerminalReward;
    case Outcome::Death: return -kTerminalReward;
    case Outcome::None: break;
  }
  throw std::invalid_argument("terminal_reward: outcome is none");
}

Cohort generate_cohort(const EnvConfig& config) {
  return generate_impl(config, false);
}

Cohort generate_cohort_deterministic_clinician(const EnvConfig& config) {
  return generate_impl(config, true);
}

namespace {

std::string fmt_f(float v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", double(v));
  return buf;
}

const char* outcome_name(Outcome o) {
  switch (o) {
    case Outcome::None: return "none";
    case Outcome::Survival: return "survival";
    case Outcome::Death: return "death";
  }
  return "none";
}

Outcome outcome_from(const std::string& s) {
  if (s == "none") return Outcome::None;
  if (s == "survival") return Outcome::Survival;
  if (s == "death") return Outcome::Death;
  throw std::runtime_error("bad outcome: " + s);
}

}  // namespace

void save_cohort(const Cohort& cohort, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for write: " + path);
  const EnvConfig& c = cohort.config;
  f << "debaterl-cohort v1\n";
  f << "config " << c.state_dim << " " << c.horizon << " " << c.sofa_index << " "
    << c.lactate_index << " " << c.n_patients << " " << c.seed << "\n";
  f << "scorer_iv";
  for (float v : cohort.scorer.w_iv) f << " " << fmt_f(v);
  f << "\nscorer_vc";
  for (float v : cohort.scorer.w_vc) f << " " << fmt_f(v);
  f << "\n";
  for (std::size_t ti = 0; ti < cohort.trajectories.size(); ++ti) {
    const auto& traj = cohort.trajectories[ti];
    for (std::size_t st = 0; st < traj.size(); ++st) {
      const Transition& tr = traj[st];
      f << ti << "," << st;
      for (float v : tr.state) f << "," << fmt_f(v);
      f << "," << tr.action << "," << fmt_f(tr.env_reward);
      f << "," << (tr.terminal ? 1 : 0) << "," << outcome_name(tr.outcome);
      for (float v : tr.next_state) f << "," << fmt_f(v);
      f << "\n";
    }
  }
}

Cohort load_cohort(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open for read: " + path);
  std::string line;
  std::getline(f, line);
  if (line != "debaterl-cohort v1")
    throw std::runtime_error("bad cohort file header");

  Cohort cohort;
  std::getline(f, line);
  {
    std::istringstream ss(line);
    std::string tok;
    EnvConfig& c = cohort.config;
    ss >> tok >> c.state_dim >> c.horizon >> c.sofa_index >> c.lactate_index >>
        c.n_patients >> c.seed;
    if (tok != "config") throw std::runtime_error("bad cohort config line");
  }
  auto read_weights = [&](const char* name, std::vector<float>& out) {
    std::getline(f, line);
    std::istringstream ss(line);
    std::string tok;
    ss >> tok;
    if (tok != name) throw std::runtime_error("bad cohort scorer line");
    float v;
    while (ss >> v) out.push_back(v);
    if (out.size() != cohort.config.state_dim)
      throw std::runtime_error("bad cohort scorer width");
  };
  read_weights("scorer_iv", cohort.scorer.w_iv);
  read_weights("scorer_vc", cohort.scorer.w_vc);

  const std::size_t d = cohort.config.state_dim;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string field;
    auto next_field = [&]() {
      if (!std::getline(ss, field, ','))
        throw std::runtime_error("truncated cohort record");
      return field;
    };
    const std::size_t traj_id = std::stoul(next_field());
    next_field();  // step index, implied by position
    Transition tr;
    tr.state.resize(d);
    for (auto& v : tr.state) v = std::stof(next_field());
    tr.action = std::stoi(next_field());
    tr.env_reward = std::stof(next_field());
    tr.terminal = std::stoi(next_field()) != 0;
    tr.outcome = outcome_from(next_field());
    tr.next_state.resize(d);
    for (auto& v : tr.next_state) v = std::stof(next_field());
    if (traj_id >= cohort.trajectories.size())
      cohort.trajectories.resize(traj_id + 1);
    cohort.trajectories[traj_id].push_back(std::move(tr));
  }
  return cohort;
}

// ---------------------------------------------------------------------------
// Tabular oracle MDP

namespace {

constexpr std::size_t kTabSofaLevels = 12;  // 0 = discharge, 11 = death
constexpr std::size_t kTabLactLevels = 4;

std::size_t tab_state(std::size_t sofa, std::size_t lact) {
  return sofa * kTabLactLevels + lact;
}

void tab_levels(std::size_t s, std::size_t* sofa, std::size_t* lact) {
  *sofa = s / kTabLactLevels;
  *lact = s % kTabLactLevels;
}

double tab_match(std::size_t sofa, std::size_t lact, int action) {
  int iv, vc;
  decode_action(action, &iv, &vc);
  const double t_iv = double(lact);                      // 0..3
  const double t_vc = std::min(4.0, double(sofa) / 3.0);  // 0..~3.7
  const double d = std::abs(iv - t_iv) + std::abs(vc - t_vc);
  return std::max(0.0, 1.0 - d / 8.0);
}

float tab_shaped(std::size_t sofa_t, std::size_t lact_t, std::size_t sofa_n,
                 std::size_t lact_n) {
  EnvConfig cfg;
  cfg.state_dim = 4;
  PatientState a(4, 0.0f), b(4, 0.0f);
  a[0] = float(sofa_t);
  a[1] = float(lact_t);
  b[0] = float(sofa_n);
  b[1] = float(lact_n);
  return shaped_reward(a, b, cfg);
}

}  // namespace

std::vector<float> TabularMdp::features(std::size_t s) const {
  std::size_t sofa, lact;
  tab_levels(s, &sofa, &lact);
  return {float((double(sofa) - 5.5) / 3.0), float((double(lact) - 1.5) / 1.0)};
}

TabularMdp build_tabular(double discount) {
  TabularMdp mdp;
  mdp.n_sofa = kTabSofaLevels;
  mdp.n_lact = kTabLactLevels;
  mdp.n_states = kTabSofaLevels * kTabLactLevels;
  mdp.discount = discount;
  const std::size_t S = mdp.n_states, A = mdp.n_actions;
  mdp.transition.assign(S * A * S, 0.0);
  mdp.reward.assign(S * A, 0.0);
  mdp.terminal.assign(S, false);
  mdp.initial.assign(S, 0.0);

  for (std::size_t lact = 0; lact < kTabLactLevels; ++lact) {
    mdp.terminal[tab_state(0, lact)] = true;
    mdp.terminal[tab_state(kTabSofaLevels - 1, lact)] = true;
  }
  // Start mid-range.
  for (std::size_t sofa = 4; sofa <= 8; ++sofa)
    for (std::size_t lact = 1; lact <= 2; ++lact)
      mdp.initial[tab_state(sofa, lact)] = 1.0 / (5.0 * 2.0);

  for (std::size_t s = 0; s < S; ++s) {
    std::size_t sofa, lact;
    tab_levels(s, &sofa, &lact);
    if (mdp.terminal[s]) {
      for (std::size_t a = 0; a < A; ++a)
        mdp.transition[s * A * S + a * S + s] = 1.0;  // absorbing, zero reward
      continue;
    }
    for (std::size_t a = 0; a < A; ++a) {
      const double m = tab_match(sofa, lact, int(a));
      const double p_down = 0.15 + 0.7 * m;
      const double p_ld = std::min(0.7, 0.25 + 0.4 * m);
      const double p_lu = 0.15;
      for (int ds : {-1, +1}) {
        const double ps = (ds < 0) ? p_down : 1.0 - p_down;
        const std::size_t sofa_n = std::size_t(std::int64_t(sofa) + ds);
        for (int dl : {-1, 0, +1}) {
          double pl = (dl < 0) ? p_ld : (dl > 0 ? p_lu : 1.0 - p_ld - p_lu);
          std::int64_t lact_n = std::int64_t(lact) + dl;
          if (lact_n < 0) lact_n = 0;
          if (lact_n >= std::int64_t(kTabLactLevels))
            lact_n = kTabLactLevels - 1;
          const std::size_t s2 = tab_state(sofa_n, std::size_t(lact_n));
          mdp.transition[s * A * S + a * S + s2] += ps * pl;
          double r;
          if (mdp.terminal[s2])
            r = (sofa_n == 0) ? kTerminalReward : -kTerminalReward;
          else
            r = tab_shaped(sofa, lact, sofa_n, std::size_t(lact_n));
          mdp.reward[s * A + a] += ps * pl * r;
        }
      }
    }
  }
  return mdp;
}

std::vector<double> value_iteration(const TabularMdp& mdp) {
  const std::size_t S = mdp.n_states, A = mdp.n_actions;
  std::vector<double> q(S * A, 0.0), v(S, 0.0);
  for (int iter = 0; iter < 200000; ++iter) {
    double residual = 0.0;
    for (std::size_t s = 0; s < S; ++s) {
      double best = -1e300;
      for (std::size_t a = 0; a < A; ++a) {
        double nq = mdp.reward[s * A + a];
        if (!mdp.terminal[s]) {
          const double* row = &mdp.transition[s * A * S + a * S];
          double acc = 0.0;
          for (std::size_t s2 = 0; s2 < S; ++s2) acc += row[s2] * v[s2];
          nq += mdp.discount * acc;
        } else {
          nq = 0.0;  // absorbing: no further reward
        }
        residual = std::max(residual, std::abs(nq - q[s * A + a]));
        q[s * A + a] = nq;
        best = std::max(best, nq);
      }
      v[s] = best;
    }
    if (residual < 1e-8) return q;
  }
  throw std::runtime_error("value_iteration: did not converge");
}

double evaluate_policy_tabular(const TabularMdp& mdp,
                               const std::vector<int>& policy) {
  const std::size_t S = mdp.n_states, A = mdp.n_actions;
  std::vector<double> v(S, 0.0);
  for (int iter = 0; iter < 400000; ++iter) {
    double residual = 0.0;
    for (std::size_t s = 0; s < S; ++s) {
      if (mdp.terminal[s]) {
        v[s] = 0.0;
        continue;
      }
      const std::size_t a = std::size_t(policy[s]);
      double nv = mdp.reward[s * A + a];
      const double* row = &mdp.transition[s * A * S + a * S];
      double acc = 0.0;
      for (std::size_t s2 = 0; s2 < S; ++s2) acc += row[s2] * v[s2];
      nv += mdp.discount * acc;
      residual = std::max(residual, std::abs(nv - v[s]));
      v[s] = nv;
    }
    if (residual < 1e-10) break;
  }
  double ret = 0.0;
  for (std::size_t s = 0; s < S; ++s) ret += mdp.initial[s] * v[s];
  return ret;
}

double optimal_return(const TabularMdp& mdp, const std::vector<double>& q) {
  const std::size_t S = mdp.n_states, A = mdp.n_actions;
  std::vector<int> policy(S, 0);
  for (std::size_t s = 0; s < S; ++s) {
    double best = -1e300;
    for (std::size_t a = 0; a < A; ++a)
      if (q[s * A + a] > best) {
        best = q[s * A + a];
        policy[s] = int(a);
      }
  }
  return evaluate_policy_tabular(mdp, policy);
}

Cohort rollout_tabular(const TabularMdp& mdp, const std::vector<double>& q,
                       double epsilon, std::size_t n_episodes,
                       std::uint64_t seed) {
  const std::size_t S = mdp.n_states, A = mdp.n_actions;
  Rng rng(seed ^ 0xabcdef123ULL);
  Cohort cohort;
  cohort.config.state_dim = 2;
  cohort.config.sofa_index = 0;
  cohort.config.lactate_index = 1;
  cohort.config.n_patients = n_episodes;
  cohort.config.seed = seed;
  cohort.scorer.w_iv.assign(2, 0.0f);
  cohort.scorer.w_vc.assign(2, 0.0f);

  auto sample = [&](const std::vector<double>& dist) {
    double u = rng.uniform();
    for (std::size_t i = 0; i < dist.size(); ++i) {
      u -= dist[i];
      if (u <= 0.0) return i;
    }
    return dist.size() - 1;
  };

  for (std::size_t ep = 0; ep < n_episodes; ++ep) {
    std::size_t s = sample(mdp.initial);
    Trajectory traj;
    for (int t = 0; t < 200; ++t) {
      std::size_t a;
      if (rng.uniform() < epsilon) {
        a = std::size_t(rng.uniform_int(0, std::int64_t(A) - 1));
      } else {
        a = 0;
        double best = q[s * A];
        for (std::size_t cand = 1; cand < A; ++cand)
          if (q[s * A + cand] > best) {
            best = q[s * A + cand];
            a = cand;
          }
      }
      std::vector<double> next_dist(S);
      for (std::size_t s2 = 0; s2 < S; ++s2) next_dist[s2] = mdp.p(s, a, s2);
      const std::size_t s2 = sample(next_dist);

      std::size_t sofa_t, lact_t, sofa_n, lact_n;
      tab_levels(s, &sofa_t, &lact_t);
      tab_levels(s2, &sofa_n, &lact_n);

      Transition tr;
      tr.state = mdp.features(s);
      tr.next_state = mdp.features(s2);
      tr.action = int(a);
      if (mdp.terminal[s2]) {
        tr.terminal = true;
        tr.outcome = (sofa_n == 0) ? Outcome::Survival : Outcome::Death;
        tr.env_reward = terminal_reward(tr.outcome);
      } else {
        tr.env_reward = tab_shaped(sofa_t, lact_t, sofa_n, lact_n);
      }
      const bool done = tr.terminal;
      traj.push_back(std::move(tr));
      if (done) break;
      s = s2;
    }
    cohort.trajectories.push_back(std::move(traj));
  }
  return cohort;
}

}  // namespace debaterl
