#include "debaterl/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace debaterl {

RunConfig::RunConfig() {
  env.state_dim = 8;
  env.n_patients = 500;
  judge.epochs = 20;
  game.L = 4;
  judge.evidence_size = game.L;
  schedule.generations = 20;
  schedule.steps_per_gen = 2000;
  schedule.opponent_steps = 2000;
  dqn.iterations = 3000;
}

void apply_scale(RunConfig& cfg, Scale scale) {
  if (scale == Scale::Desk) {
    cfg = RunConfig();
    return;
  }
  cfg.env.state_dim = 44;
  cfg.env.n_patients = 20000;
  cfg.judge.epochs = 100;
  cfg.game.L = 6;
  cfg.judge.evidence_size = cfg.game.L;
  cfg.schedule.generations = 100;
  cfg.schedule.steps_per_gen = 20000;
  cfg.schedule.opponent_steps = 20000;
  cfg.dqn.iterations = 25000;
}

Scale scale_from(const std::string& name) {
  if (name == "desk") return Scale::Desk;
  if (name == "paper") return Scale::Paper;
  throw std::invalid_argument("unknown scale: " + name);
}

namespace {

using Setter = std::function<void(RunConfig&, const std::string&)>;

template <typename T>
T parse_value(const std::string& raw) {
  std::istringstream in(raw);
  T v;
  if (!(in >> v) || !(in >> std::ws).eof())
    throw std::invalid_argument("malformed value: " + raw);
  return v;
}

template <typename T, typename F>
Setter num(F field) {
  return [field](RunConfig& c, const std::string& raw) {
    *field(c) = parse_value<T>(raw);
  };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"seed", num<std::uint64_t>([](RunConfig& c) { return &c.seed; })},
      {"env.state_dim",
       num<std::size_t>([](RunConfig& c) { return &c.env.state_dim; })},
      {"env.horizon",
       num<std::size_t>([](RunConfig& c) { return &c.env.horizon; })},
      {"env.n_patients",
       num<std::size_t>([](RunConfig& c) { return &c.env.n_patients; })},
      {"prefs.strategy",
       [](RunConfig& c, const std::string& raw) {
         c.strategy = strategy_from(raw);
       }},
      {"judge.hidden",
       num<std::size_t>([](RunConfig& c) { return &c.judge.hidden; })},
      {"judge.epochs",
       num<std::size_t>([](RunConfig& c) { return &c.judge.epochs; })},
      {"judge.batch",
       num<std::size_t>([](RunConfig& c) { return &c.judge.batch; })},
      {"judge.lr", num<float>([](RunConfig& c) { return &c.judge.lr; })},
      {"game.l",
       [](RunConfig& c, const std::string& raw) {
         c.game.L = parse_value<std::size_t>(raw);
         c.judge.evidence_size = c.game.L;
       }},
      {"game.utility",
       [](RunConfig& c, const std::string& raw) {
         if (raw == "sign")
           c.game.utility = UtilityKind::Sign;
         else if (raw == "difference")
           c.game.utility = UtilityKind::Difference;
         else
           throw std::invalid_argument("unknown utility: " + raw);
       }},
      {"game.alpha", num<double>([](RunConfig& c) { return &c.game.alpha; })},
      {"ppo.hidden",
       num<std::size_t>([](RunConfig& c) { return &c.ppo.hidden; })},
      {"ppo.lr", num<float>([](RunConfig& c) { return &c.ppo.lr; })},
      {"ppo.entropy_coef",
       num<float>([](RunConfig& c) { return &c.ppo.entropy_coef; })},
      {"ppo.clip", num<float>([](RunConfig& c) { return &c.ppo.clip; })},
      {"ppo.gamma", num<float>([](RunConfig& c) { return &c.ppo.gamma; })},
      {"ppo.gae_lambda",
       num<float>([](RunConfig& c) { return &c.ppo.gae_lambda; })},
      {"ppo.vf_coef", num<float>([](RunConfig& c) { return &c.ppo.vf_coef; })},
      {"ppo.max_grad_norm",
       num<float>([](RunConfig& c) { return &c.ppo.max_grad_norm; })},
      {"ppo.batch", num<std::size_t>([](RunConfig& c) { return &c.ppo.batch; })},
      {"ppo.n_epochs",
       num<std::size_t>([](RunConfig& c) { return &c.ppo.n_epochs; })},
      {"schedule.generations",
       num<std::size_t>([](RunConfig& c) { return &c.schedule.generations; })},
      {"schedule.steps_per_gen",
       num<std::size_t>(
           [](RunConfig& c) { return &c.schedule.steps_per_gen; })},
      {"schedule.opponent_steps",
       num<std::size_t>(
           [](RunConfig& c) { return &c.schedule.opponent_steps; })},
      {"schedule.rollout_steps",
       num<std::size_t>(
           [](RunConfig& c) { return &c.schedule.rollout_steps; })},
      {"dqn.hidden",
       num<std::size_t>([](RunConfig& c) { return &c.dqn.hidden; })},
      {"dqn.lr", num<float>([](RunConfig& c) { return &c.dqn.lr; })},
      {"dqn.batch", num<std::size_t>([](RunConfig& c) { return &c.dqn.batch; })},
      {"dqn.gamma", num<double>([](RunConfig& c) { return &c.dqn.gamma; })},
      {"dqn.lambda", num<double>([](RunConfig& c) { return &c.dqn.lambda; })},
      {"dqn.iterations",
       num<std::size_t>([](RunConfig& c) { return &c.dqn.iterations; })},
      {"dqn.eval_every",
       num<std::size_t>([](RunConfig& c) { return &c.dqn.eval_every; })},
      {"bc.hidden", num<std::size_t>([](RunConfig& c) { return &c.bc.hidden; })},
      {"bc.epochs", num<std::size_t>([](RunConfig& c) { return &c.bc.epochs; })},
      {"bc.lr", num<float>([](RunConfig& c) { return &c.bc.lr; })},
      {"bc.weight_decay",
       num<float>([](RunConfig& c) { return &c.bc.weight_decay; })},
      {"eval.games",
       num<std::size_t>([](RunConfig& c) { return &c.eval_games; })},
      {"eval.epsilon",
       num<double>([](RunConfig& c) { return &c.eval_epsilon; })},
  };
  return table;
}

}  // namespace

void apply_config_text(RunConfig& cfg, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto strip = [](std::string s) {
      auto a = s.find_first_not_of(" \t\r");
      if (a == std::string::npos) return std::string();
      auto b = s.find_last_not_of(" \t\r");
      return s.substr(a, b - a + 1);
    };
    line = strip(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("line " + std::to_string(lineno) +
                                  ": expected key=value");
    std::string key = strip(line.substr(0, eq));
    std::string value = strip(line.substr(eq + 1));
    auto it = setters().find(key);
    if (it == setters().end())
      throw std::invalid_argument("unknown config key: " + key);
    it->second(cfg, value);
  }
  cfg.env.seed = cfg.seed;
}

RunConfig load_config(const std::string& path, Scale scale,
                      std::uint64_t seed) {
  RunConfig cfg;
  apply_scale(cfg, scale);
  cfg.seed = seed;
  cfg.env.seed = seed;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    apply_config_text(cfg, buf.str());
  }
  return cfg;
}

std::string config_text(const RunConfig& cfg) {
  std::ostringstream out;
  out << "seed=" << cfg.seed << '\n'
      << "env.state_dim=" << cfg.env.state_dim << '\n'
      << "env.horizon=" << cfg.env.horizon << '\n'
      << "env.n_patients=" << cfg.env.n_patients << '\n'
      << "prefs.strategy=" << strategy_name(cfg.strategy) << '\n'
      << "judge.hidden=" << cfg.judge.hidden << '\n'
      << "judge.epochs=" << cfg.judge.epochs << '\n'
      << "judge.batch=" << cfg.judge.batch << '\n'
      << "judge.lr=" << cfg.judge.lr << '\n'
      << "game.l=" << cfg.game.L << '\n'
      << "game.utility="
      << (cfg.game.utility == UtilityKind::Sign ? "sign" : "difference")
      << '\n'
      << "game.alpha=" << cfg.game.alpha << '\n'
      << "ppo.hidden=" << cfg.ppo.hidden << '\n'
      << "ppo.lr=" << cfg.ppo.lr << '\n'
      << "ppo.entropy_coef=" << cfg.ppo.entropy_coef << '\n'
      << "ppo.clip=" << cfg.ppo.clip << '\n'
      << "ppo.gamma=" << cfg.ppo.gamma << '\n'
      << "ppo.gae_lambda=" << cfg.ppo.gae_lambda << '\n'
      << "ppo.vf_coef=" << cfg.ppo.vf_coef << '\n'
      << "ppo.max_grad_norm=" << cfg.ppo.max_grad_norm << '\n'
      << "ppo.batch=" << cfg.ppo.batch << '\n'
      << "ppo.n_epochs=" << cfg.ppo.n_epochs << '\n'
      << "schedule.generations=" << cfg.schedule.generations << '\n'
      << "schedule.steps_per_gen=" << cfg.schedule.steps_per_gen << '\n'
      << "schedule.opponent_steps=" << cfg.schedule.opponent_steps << '\n'
      << "schedule.rollout_steps=" << cfg.schedule.rollout_steps << '\n'
      << "dqn.hidden=" << cfg.dqn.hidden << '\n'
      << "dqn.lr=" << cfg.dqn.lr << '\n'
      << "dqn.batch=" << cfg.dqn.batch << '\n'
      << "dqn.gamma=" << cfg.dqn.gamma << '\n'
      << "dqn.lambda=" << cfg.dqn.lambda << '\n'
      << "dqn.iterations=" << cfg.dqn.iterations << '\n'
      << "dqn.eval_every=" << cfg.dqn.eval_every << '\n'
      << "bc.hidden=" << cfg.bc.hidden << '\n'
      << "bc.epochs=" << cfg.bc.epochs << '\n'
      << "bc.lr=" << cfg.bc.lr << '\n'
      << "bc.weight_decay=" << cfg.bc.weight_decay << '\n'
      << "eval.games=" << cfg.eval_games << '\n'
      << "eval.epsilon=" << cfg.eval_epsilon << '\n';
  return out.str();
}

}  // namespace debaterl
