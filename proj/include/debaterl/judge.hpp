#pragma once

#include <functional>
#include <string>
#include <vector>

#include "debaterl/network.hpp"
#include "debaterl/prefdata.hpp"

namespace debaterl {

// Evidence = indices of revealed state features.
using EvidenceSet = std::vector<std::size_t>;

struct JudgeModel {
  Network net;               // input [masked values | mask | action one-hot]
  std::size_t state_dim = 0;
  std::size_t evidence_size = 6;  // L the judge was trained for

  std::size_t input_dim() const { return 2 * state_dim + kNumActions; }
};

struct JudgeTrainConfig {
  std::size_t hidden = 256;
  std::size_t epochs = 100;
  std::size_t batch = 64;
  float lr = 5e-4f;
  std::size_t evidence_size = 6;  // L; the precommit judge uses L/2
};

JudgeModel make_judge(std::size_t state_dim, std::size_t evidence_size,
                      std::size_t hidden, Rng& rng);

// Row layout [masked values | mask | action one-hot]; values outside the
// evidence are zeroed, so the score cannot depend on them.
void fill_judge_input(const JudgeModel& judge, const PatientState& state,
                      const EvidenceSet& evidence, int action, float* row);

double judge_score(const JudgeModel& judge, int action,
                   const EvidenceSet& evidence, const PatientState& state);

// Both actions scored on the same evidence with one eval-mode forward.
std::pair<double, double> judge_score_pair(const JudgeModel& judge, int a0,
                                           int a1, const EvidenceSet& evidence,
                                           const PatientState& state);

// Bradley-Terry P(a0 > a1 | evidence).
double pref_prob(const JudgeModel& judge, int a0, int a1,
                 const EvidenceSet& evidence, const PatientState& state);

// Uniform evidence of a given size, without replacement.
EvidenceSet sample_evidence(std::size_t state_dim, std::size_t size, Rng& rng);

struct JudgeTrainResult {
  JudgeModel judge;
  std::vector<double> epoch_loss;     // mean train cross-entropy per epoch
  double initial_loss = 0.0;          // before the first update
};

JudgeTrainResult train_judge(const PreferenceDataset& dataset,
                             const JudgeTrainConfig& config, Rng& rng);

// Supplies the evidence used to compare the two actions of a tuple.
using EvidenceSampler =
    std::function<EvidenceSet(const PreferenceTuple&, Rng&)>;

struct AccuracyReport {
  double accuracy = 0.0;
  double se = 0.0;  // standard error of the mean
  std::size_t n = 0;
};

// Fraction of tuples where the preferred action scores strictly higher;
// exact score ties count 0.5.
AccuracyReport judge_accuracy(const JudgeModel& judge,
                              const std::vector<const PreferenceTuple*>& tuples,
                              const EvidenceSampler& sampler, Rng& rng);

void save_judge(const JudgeModel& judge, const std::string& path);
JudgeModel load_judge(const std::string& path);

}  // namespace debaterl
