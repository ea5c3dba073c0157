#include <CLI11.hpp>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "debaterl/config.hpp"
#include "debaterl/debate.hpp"
#include "debaterl/eval.hpp"

namespace fs = std::filesystem;
using namespace debaterl;

namespace {

struct ArtifactError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

std::string hash_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArtifactError("missing artifact: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return fnv1a(buf.str());
}

void require_file(const fs::path& path, const std::string& producer) {
  if (!fs::exists(path))
    throw ArtifactError("missing artifact " + path.string() + "; run `" +
                        producer + "` first");
}

// Stems expand to the three .net files of a saved network bundle.
std::vector<std::string> stem_files(const std::string& stem,
                                    bool policy_heads) {
  if (policy_heads)
    return {stem + ".trunk.net", stem + ".pi.net", stem + ".v.net"};
  return {stem + ".trunk.net", stem + ".v.net", stem + ".a.net"};
}

struct Manifest {
  std::string command;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::vector<std::pair<std::string, std::string>> inputs;   // path, hash
  std::vector<std::pair<std::string, std::string>> outputs;  // path, hash

  void add_input(const fs::path& p) { inputs.emplace_back(p.string(), hash_file(p)); }
  void add_output(const fs::path& p) { outputs.emplace_back(p.string(), hash_file(p)); }

  void write(const fs::path& path) const {
    std::ofstream out(path);
    out << "command " << command << '\n';
    out << "seed " << seed << '\n';
    out << "config " << config_hash << '\n';
    for (const auto& [p, h] : inputs) out << "input " << p << ' ' << h << '\n';
    for (const auto& [p, h] : outputs)
      out << "output " << p << ' ' << h << '\n';
  }
};

struct Cli {
  std::string config_path;
  std::string out_dir = "out";
  std::string scale_name = "desk";
  std::uint64_t seed = 0;
  RunConfig cfg;

  fs::path out(const std::string& name) const {
    return fs::path(out_dir) / name;
  }
  Manifest manifest(const std::string& command) const {
    Manifest m;
    m.command = command;
    m.seed = cfg.seed;
    m.config_hash = fnv1a(config_text(cfg));
    return m;
  }
  void finish(Manifest& m) const {
    m.write(out(m.command + ".manifest"));
    std::cout << m.command << ": " << m.outputs.size()
              << " artifact(s) in " << out_dir << '\n';
  }

  Cohort cohort() const {
    require_file(out("cohort.csv"), "gen-cohort");
    return load_cohort(out("cohort.csv").string());
  }
  PreferenceDataset prefs() const {
    require_file(out("prefs.csv"), "gen-prefs");
    return load_preferences(out("prefs.csv").string());
  }
  JudgeModel judge() const {
    require_file(out("judge.net"), "train-judge");
    return load_judge(out("judge.net").string());
  }
};

std::string lam_tag(double lambda) {
  std::ostringstream out;
  out << lambda;
  return out.str();
}

void cmd_gen_cohort(const Cli& cli) {
  Manifest m = cli.manifest("gen-cohort");
  Cohort cohort = generate_cohort(cli.cfg.env);
  save_cohort(cohort, cli.out("cohort.csv").string());
  m.add_output(cli.out("cohort.csv"));
  cli.finish(m);
  std::cout << "  trajectories=" << cohort.trajectories.size()
            << " transitions=" << cohort.n_transitions()
            << " mortality=" << cohort.mortality() << '\n';
}

void cmd_gen_prefs(const Cli& cli) {
  Manifest m = cli.manifest("gen-prefs");
  m.add_input(cli.out("cohort.csv"));
  Cohort cohort = cli.cohort();
  PreferenceDataset ds =
      build_preferences(cohort, cli.cfg.strategy, cli.cfg.seed);
  split_dataset(ds, cohort.trajectories.size(), cli.cfg.seed);
  save_preferences(ds, cli.out("prefs.csv").string());
  m.add_output(cli.out("prefs.csv"));
  cli.finish(m);
  std::cout << "  tuples=" << ds.tuples.size() << '\n';
}

void cmd_train_judge(const Cli& cli) {
  Manifest m = cli.manifest("train-judge");
  m.add_input(cli.out("prefs.csv"));
  PreferenceDataset ds = cli.prefs();
  JudgeTrainConfig jc = cli.cfg.judge;
  jc.evidence_size = cli.cfg.game.L;
  Rng rng = Rng(cli.cfg.seed).derive(1);
  JudgeTrainResult res = train_judge(ds, jc, rng);
  save_judge(res.judge, cli.out("judge.net").string());
  m.add_output(cli.out("judge.net"));
  cli.finish(m);
  auto val = ds.split_view(Split::Validation);
  Rng arng = Rng(cli.cfg.seed).derive(2);
  auto sampler = [&](const PreferenceTuple&, Rng& r) {
    return sample_evidence(res.judge.state_dim, jc.evidence_size, r);
  };
  AccuracyReport rep = judge_accuracy(res.judge, val, sampler, arng);
  std::cout << "  final_loss=" << res.epoch_loss.back()
            << " val_acc_random_evidence=" << rep.accuracy << '\n';
}

void cmd_train_debaters(const Cli& cli, const std::string& mode) {
  Manifest m = cli.manifest("train-debaters");
  m.add_input(cli.out("prefs.csv"));
  m.add_input(cli.out("judge.net"));
  PreferenceDataset ds = cli.prefs();
  JudgeModel judge = cli.judge();
  auto contexts = contexts_from(ds, Split::Train);
  EvidenceScorer scorer = judge_scorer(judge);
  Rng rng = Rng(cli.cfg.seed).derive(3);
  TrainCurves curves;
  fs::path curve_dir = cli.out("debater_" + mode + "_curves");
  fs::create_directories(curve_dir);
  std::vector<std::string> stems;
  if (mode == "selfplay") {
    ArgPolicy pi =
        train_selfplay(contexts, scorer, cli.cfg.game, cli.cfg.ppo,
                       cli.cfg.schedule, rng, &curves, curve_dir.string());
    save_arg_policy(pi, cli.out("debater_selfplay").string());
    stems.push_back("debater_selfplay");
  } else if (mode == "maxmin") {
    auto [main_pi, opp] =
        train_maxmin(contexts, scorer, cli.cfg.game, cli.cfg.ppo,
                     cli.cfg.schedule, rng, &curves, curve_dir.string());
    save_arg_policy(main_pi, cli.out("debater_maxmin").string());
    save_arg_policy(opp, cli.out("debater_maxmin_opp").string());
    stems.push_back("debater_maxmin");
    stems.push_back("debater_maxmin_opp");
  } else if (mode == "isolated-precommit" || mode == "isolated-adaptive") {
    IsolatedMode im = mode == "isolated-precommit" ? IsolatedMode::Precommit
                                                   : IsolatedMode::Adaptive;
    ArgPolicy pi =
        train_isolated(contexts, scorer, cli.cfg.game, im, cli.cfg.ppo,
                       cli.cfg.schedule, rng, &curves, curve_dir.string());
    std::string stem = "debater_isolated_" +
                       (im == IsolatedMode::Precommit
                            ? std::string("precommit")
                            : std::string("adaptive"));
    save_arg_policy(pi, cli.out(stem).string());
    stems.push_back(stem);
  } else {
    throw std::invalid_argument("unknown debater mode: " + mode);
  }
  for (const auto& stem : stems)
    for (const auto& f : stem_files(cli.out(stem).string(), true))
      m.add_output(f);
  m.command = "train-debaters-" + mode;
  cli.finish(m);
  std::cout << "  steps=" << curves.total_steps
            << " final_mean_reward=" << curves.mean_reward.back() << '\n';
}

void cmd_train_confuser(const Cli& cli, const std::string& target) {
  std::string target_stem =
      target == "isolated-precommit" ? "debater_isolated_precommit"
      : target == "isolated-adaptive" ? "debater_isolated_adaptive"
      : "debater_" + target;
  Manifest m = cli.manifest("train-confuser");
  require_file(cli.out(target_stem + ".trunk.net"),
               "train-debaters --mode " + target);
  for (const auto& f : stem_files(cli.out(target_stem).string(), true))
    m.add_input(f);
  m.add_input(cli.out("prefs.csv"));
  m.add_input(cli.out("judge.net"));
  PreferenceDataset ds = cli.prefs();
  JudgeModel judge = cli.judge();
  ArgPolicy target_pi = load_arg_policy(cli.out(target_stem).string());
  auto contexts = contexts_from(ds, Split::Train);
  EvidenceScorer scorer = judge_scorer(judge);
  ConfuserTarget kind = target == "isolated-precommit"
                            ? ConfuserTarget::Precommit
                            : ConfuserTarget::Debate;
  Rng rng = Rng(cli.cfg.seed).derive(4);
  TrainCurves curves;
  ArgPolicy conf =
      train_confuser(target_pi, kind, contexts, scorer, cli.cfg.game,
                     confuser_config(), cli.cfg.schedule, rng, &curves);
  std::string stem = "confuser_" + target;
  save_arg_policy(conf, cli.out(stem).string());
  for (const auto& f : stem_files(cli.out(stem).string(), true))
    m.add_output(f);
  m.command = "train-confuser-" + target;
  cli.finish(m);
  std::cout << "  steps=" << curves.total_steps
            << " final_mean_reward=" << curves.mean_reward.back() << '\n';
}

void cmd_train_bc(const Cli& cli) {
  Manifest m = cli.manifest("train-bc");
  m.add_input(cli.out("cohort.csv"));
  Cohort cohort = cli.cohort();
  Rng rng = Rng(cli.cfg.seed).derive(5);
  BcPolicy bc = train_bc(cohort, cli.cfg.bc, rng);
  save_bc(bc, cli.out("bc.net").string());
  m.add_output(cli.out("bc.net"));
  cli.finish(m);
  std::cout << "  train_logloss=" << bc_logloss(bc, cohort) << '\n';
}

void cmd_train_policy(const Cli& cli, double lambda) {
  Manifest m = cli.manifest("train-policy");
  m.add_input(cli.out("cohort.csv"));
  Cohort cohort = cli.cohort();
  DqnConfig dc = cli.cfg.dqn;
  dc.lambda = lambda;
  Rng rng = Rng(cli.cfg.seed).derive(6 + std::uint64_t(lambda * 1000));
  std::string stem = "policy_lambda" + lam_tag(lambda);
  QNet net(0, Network{}, Network{}, Network{});
  if (lambda == 0.0) {
    net = train_policy(cohort, 0.0, nullptr, nullptr, dc, rng);
  } else {
    m.add_input(cli.out("judge.net"));
    require_file(cli.out("policy_lambda0.trunk.net"),
                 "train-policy --lambda 0");
    for (const auto& f :
         stem_files(cli.out("policy_lambda0").string(), false))
      m.add_input(f);
    JudgeModel judge = cli.judge();
    QNet baseline = load_qnet(cli.out("policy_lambda0").string());
    EvidenceScorer scorer = judge_scorer(judge);
    std::size_t d = cli.cfg.env.state_dim;
    GameConfig game = cli.cfg.game;
    DebateRewardFn rd = [scorer, d, game](const PatientState& s, int a,
                                          int a_b) {
      return debate_reward_exact(DebateContext{s, a, a_b}, scorer, d, game);
    };
    net = train_policy(cohort, lambda, rd, &baseline, dc, rng);
  }
  save_qnet(net, cli.out(stem).string());
  for (const auto& f : stem_files(cli.out(stem).string(), false))
    m.add_output(f);
  m.command = "train-policy-lambda" + lam_tag(lambda);
  cli.finish(m);
}

void cmd_solve_debate(const Cli& cli, std::size_t index) {
  PreferenceDataset ds = cli.prefs();
  JudgeModel judge = cli.judge();
  if (index >= ds.tuples.size())
    throw std::invalid_argument("tuple index out of range");
  const PreferenceTuple& t = ds.tuples[index];
  DebateContext ctx{t.state, t.preferred(), t.alternative()};
  DebateSolution sol = solve_exact(ctx, judge_scorer(judge),
                                   cli.cfg.env.state_dim, cli.cfg.game);
  std::cout << "context: a_first=" << ctx.a_first
            << " a_second=" << ctx.a_second << '\n';
  std::cout << "value " << sol.value << '\n';
  std::cout << "pv";
  for (std::size_t e : sol.principal_variation) std::cout << ' ' << e;
  std::cout << '\n';
}

struct MetricRow {
  std::string name;
  double estimate;
  double se;
  std::size_t n;
};

void cmd_evaluate(const Cli& cli) {
  Manifest m = cli.manifest("evaluate");
  m.add_input(cli.out("cohort.csv"));
  m.add_input(cli.out("prefs.csv"));
  m.add_input(cli.out("judge.net"));
  m.add_input(cli.out("bc.net"));
  Cohort cohort = cli.cohort();
  PreferenceDataset ds = cli.prefs();
  JudgeModel judge = cli.judge();
  BcPolicy bc = load_bc(cli.out("bc.net").string());
  auto test_tuples = ds.split_view(Split::Test);
  std::size_t L = cli.cfg.game.L;
  std::size_t n_games = cli.cfg.eval_games;
  std::vector<MetricRow> rows;
  auto push = [&](const MetricsReport& r, const std::string& name) {
    rows.push_back({name, r.estimate, r.se, r.n});
  };

  // Held-out trajectories: last 15% of the cohort.
  std::size_t n_test = std::max<std::size_t>(
      1, cohort.trajectories.size() * 15 / 100);
  std::vector<Trajectory> held(cohort.trajectories.end() - long(n_test),
                               cohort.trajectories.end());

  WisEstimate wis_bc = wis_evaluate(bc_dist(bc), bc, held);
  rows.push_back({"wis_bc", wis_bc.value, 0.0, held.size()});
  rows.push_back({"ess_bc", wis_bc.ess, 0.0, held.size()});

  Rng base(cli.cfg.seed);
  Rng rec_rng = base.derive(10);
  push(preference_recovery(judge, ProposerKind::Random, nullptr, nullptr,
                           false, test_tuples, n_games, L, rec_rng),
       "recovery_random");

  auto has_stem = [&](const std::string& stem) {
    return fs::exists(cli.out(stem + ".trunk.net"));
  };
  auto try_recovery = [&](const std::string& stem, ProposerKind kind,
                          const std::string& metric, std::uint64_t salt) {
    if (!has_stem(stem)) return;
    for (const auto& f : stem_files(cli.out(stem).string(), true))
      m.add_input(f);
    ArgPolicy pi = load_arg_policy(cli.out(stem).string());
    Rng r = base.derive(salt);
    push(preference_recovery(judge, kind, &pi, nullptr, false, test_tuples,
                             n_games, L, r),
         metric);
    std::string conf_stem =
        "confuser_" + stem.substr(std::string("debater_").size());
    // isolated stems use '_' where the CLI mode uses '-'
    std::string conf_mode = conf_stem;
    for (auto& c : conf_mode) c = c == '_' ? '-' : c;
    conf_mode = conf_mode.substr(std::string("confuser-").size());
    std::string conf_file = "confuser_" + conf_mode;
    if (!fs::exists(cli.out(conf_file + ".trunk.net"))) return;
    for (const auto& f : stem_files(cli.out(conf_file).string(), true))
      m.add_input(f);
    ArgPolicy conf = load_arg_policy(cli.out(conf_file).string());
    bool precommit = kind == ProposerKind::Isolated;
    Rng r2 = base.derive(salt + 1);
    push(preference_recovery(judge, kind, &pi, &conf, precommit, test_tuples,
                             n_games, L, r2),
         metric + "_confuser");
  };
  try_recovery("debater_selfplay", ProposerKind::Selfplay,
               "recovery_selfplay", 20);
  try_recovery("debater_maxmin", ProposerKind::Maxmin, "recovery_maxmin", 22);
  try_recovery("debater_isolated_precommit", ProposerKind::Isolated,
               "recovery_isolated", 24);

  // WIS + Shapley + breakdown for available policies.
  PatientState means = feature_means(
      {cohort.trajectories.begin(),
       cohort.trajectories.begin() + long(cohort.trajectories.size() * 7 / 10)});
  bool have_baseline = has_stem("policy_lambda0");
  QNet baseline(0, Network{}, Network{}, Network{});
  if (have_baseline)
    baseline = load_qnet(cli.out("policy_lambda0").string());
  for (const auto& entry : fs::directory_iterator(cli.out_dir)) {
    std::string name = entry.path().filename().string();
    const std::string prefix = "policy_lambda";
    const std::string suffix = ".trunk.net";
    if (name.rfind(prefix, 0) != 0 || name.size() <= suffix.size() ||
        name.substr(name.size() - suffix.size()) != suffix)
      continue;
    std::string tag =
        name.substr(prefix.size(), name.size() - prefix.size() - suffix.size());
    std::string stem = prefix + tag;
    for (const auto& f : stem_files(cli.out(stem).string(), false))
      m.add_input(f);
    QNet pol = load_qnet(cli.out(stem).string());
    WisEstimate w =
        wis_evaluate(greedy_dist(pol, cli.cfg.eval_epsilon), bc, held);
    rows.push_back({"wis_lambda" + tag, w.value, 0.0, held.size()});
    rows.push_back({"ess_lambda" + tag, w.ess, 0.0, held.size()});
    if (have_baseline && tag != "0" && has_stem("debater_selfplay")) {
      ArgPolicy deb = load_arg_policy(cli.out("debater_selfplay").string());
      Rng r = base.derive(30);
      PreferenceBreakdown b = preference_breakdown(pol, baseline, judge, deb,
                                                   test_tuples, cli.cfg.game,
                                                   r);
      rows.push_back({"jp_lambda" + tag, b.jp, 0.0, test_tuples.size()});
      rows.push_back({"bp_lambda" + tag, b.bp, 0.0, test_tuples.size()});
      rows.push_back({"ep_lambda" + tag, b.ep, 0.0, test_tuples.size()});
    }
  }
  // Shapley-evidence recovery from the baseline policy's Q function.
  if (have_baseline && cli.cfg.env.state_dim <= 12) {
    Rng r = base.derive(40);
    std::vector<double> credits;
    for (std::size_t g = 0; g < n_games; ++g) {
      const PreferenceTuple& t = *test_tuples[std::size_t(
          r.uniform_int(0, std::int64_t(test_tuples.size()) - 1))];
      EvidenceSet ev =
          shapley_evidence(baseline, t.state, t.preferred(), L, means);
      auto [sp, sa] = judge_score_pair(judge, t.preferred(), t.alternative(),
                                       ev, t.state);
      credits.push_back(sp > sa ? 1.0 : (sp == sa ? 0.5 : 0.0));
    }
    push(report_from_samples("recovery_shapley", credits),
         "recovery_shapley");
  }

  std::ostringstream csv;
  csv << "metric,estimate,se,n,seed\n";
  csv << std::setprecision(12);
  for (const auto& r : rows)
    csv << r.name << ',' << r.estimate << ',' << r.se << ',' << r.n << ','
        << cli.cfg.seed << '\n';
  {
    std::ofstream out(cli.out("metrics.csv"));
    out << csv.str();
  }
  // Softening choice recorded alongside the metrics.
  {
    std::ofstream meta(cli.out("metrics.meta"));
    meta << "wis_softening=epsilon_greedy\n"
         << "wis_epsilon=" << cli.cfg.eval_epsilon << '\n'
         << "bc_floor=" << kBcFloor << '\n'
         << "interval=estimate +- 2*se\n";
  }
  m.add_output(cli.out("metrics.csv"));
  m.add_output(cli.out("metrics.meta"));
  cli.finish(m);
  for (const auto& r : rows)
    std::cout << "  " << r.name << " = " << r.estimate << " +- "
              << 2.0 * r.se << " (n=" << r.n << ")\n";
}

void cmd_report(const Cli& cli) {
  fs::path manifest_path = cli.out("evaluate.manifest");
  require_file(manifest_path, "evaluate");
  std::ifstream in(manifest_path);
  std::string kind, path, hash;
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    lines.push_back(line);
    std::istringstream ls(line);
    ls >> kind;
    if (kind != "input" && kind != "output") continue;
    ls >> path >> hash;
    std::string now = hash_file(path);
    if (now != hash)
      throw ArtifactError("artifact changed since evaluate: " + path);
  }
  require_file(cli.out("metrics.csv"), "evaluate");
  std::ifstream metrics(cli.out("metrics.csv"));
  std::ofstream out(cli.out("report.txt"));
  out << "verified artifacts: OK\n\nmetrics (estimate +- 2*se):\n";
  std::getline(metrics, line);  // header
  while (std::getline(metrics, line)) {
    std::istringstream ls(line);
    std::string name, est, se, n, seed;
    std::getline(ls, name, ',');
    std::getline(ls, est, ',');
    std::getline(ls, se, ',');
    std::getline(ls, n, ',');
    std::getline(ls, seed, ',');
    out << "  " << name << " = " << est << " +- " << 2.0 * std::stod(se)
        << " (n=" << n << ", seed=" << seed << ")\n";
  }
  std::cout << "report: verified " << lines.size()
            << " manifest line(s); wrote " << cli.out("report.txt").string()
            << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"debate-based reward design pipeline"};
  app.require_subcommand(1);
  Cli cli;
  app.add_option("--config", cli.config_path, "key=value config file");
  app.add_option("--seed", cli.seed, "master seed");
  app.add_option("--out", cli.out_dir, "artifact directory");
  app.add_option("--scale", cli.scale_name, "desk|paper");

  std::string debater_mode = "selfplay";
  std::string confuser_target = "selfplay";
  double lambda = -1.0;
  std::size_t solve_index = 0;

  auto* gen_cohort = app.add_subcommand("gen-cohort", "synthetic cohort");
  auto* gen_prefs = app.add_subcommand("gen-prefs", "preference tuples");
  auto* train_judge_cmd = app.add_subcommand("train-judge", "judge model");
  auto* train_debaters =
      app.add_subcommand("train-debaters", "argumentative agents");
  train_debaters->add_option(
      "--mode", debater_mode,
      "selfplay|maxmin|isolated-precommit|isolated-adaptive");
  auto* train_confuser_cmd =
      app.add_subcommand("train-confuser", "adversarial confuser");
  train_confuser_cmd->add_option("--target", confuser_target,
                                 "debater mode to attack");
  auto* train_bc_cmd = app.add_subcommand("train-bc", "behavior cloning");
  auto* train_policy_cmd =
      app.add_subcommand("train-policy", "offline DQN with mixed rewards");
  train_policy_cmd->add_option("--lambda", lambda,
                               "debate mixing coefficient (default: config)");
  auto* solve = app.add_subcommand("solve-debate", "exact debate solution");
  solve->add_option("--index", solve_index, "preference tuple index");
  auto* evaluate = app.add_subcommand("evaluate", "metrics CSV");
  auto* report = app.add_subcommand("report", "verify manifests, summarize");

  CLI11_PARSE(app, argc, argv);

  try {
    cli.cfg = load_config(cli.config_path, scale_from(cli.scale_name),
                          cli.seed);
    fs::create_directories(cli.out_dir);
    if (gen_cohort->parsed()) cmd_gen_cohort(cli);
    if (gen_prefs->parsed()) cmd_gen_prefs(cli);
    if (train_judge_cmd->parsed()) cmd_train_judge(cli);
    if (train_debaters->parsed()) cmd_train_debaters(cli, debater_mode);
    if (train_confuser_cmd->parsed()) cmd_train_confuser(cli, confuser_target);
    if (train_bc_cmd->parsed()) cmd_train_bc(cli);
    if (train_policy_cmd->parsed())
      cmd_train_policy(cli, lambda < 0.0 ? cli.cfg.dqn.lambda : lambda);
    if (solve->parsed()) cmd_solve_debate(cli, solve_index);
    if (evaluate->parsed()) cmd_evaluate(cli);
    if (report->parsed()) cmd_report(cli);
  } catch (const ArtifactError& e) {
    std::cerr << "error(artifact): " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error(config): " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error(runtime): " << e.what() << '\n';
    return 1;
  }
  return 0;
}
