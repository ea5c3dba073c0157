#pragma once

#include <cstdint>
#include <string>

#include "debaterl/argagents.hpp"
#include "debaterl/judge.hpp"
#include "debaterl/prefdata.hpp"
#include "debaterl/taskpolicy.hpp"

namespace debaterl {

enum class Scale { Desk, Paper };

// Flat key=value run configuration with section prefixes (env.*, prefs.*,
// judge.*, game.*, ppo.*, schedule.*, dqn.*, bc.*, eval.*). Defaults are the
// paper hyperparameters at desk scale sizes; unknown keys are rejected.
struct RunConfig {
  EnvConfig env;
  DatasetStrategy strategy = DatasetStrategy::Random;
  JudgeTrainConfig judge;
  GameConfig game;
  PpoConfig ppo;
  Schedule schedule;
  DqnConfig dqn;
  BcConfig bc;
  std::size_t eval_games = 1000;
  double eval_epsilon = 0.01;
  std::uint64_t seed = 0;

  RunConfig();  // desk-scale defaults
};

void apply_scale(RunConfig& cfg, Scale scale);
Scale scale_from(const std::string& name);

// Applies key=value lines ('#' comments, blank lines ignored) on top of cfg.
// Throws std::invalid_argument naming any unknown key or malformed value.
void apply_config_text(RunConfig& cfg, const std::string& text);
RunConfig load_config(const std::string& path, Scale scale,
                      std::uint64_t seed);

std::string config_text(const RunConfig& cfg);  // full key=value dump

}  // namespace debaterl
