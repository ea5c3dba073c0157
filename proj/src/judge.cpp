#include "debaterl/judge.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace debaterl {

namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

JudgeModel make_judge(std::size_t state_dim, std::size_t evidence_size,
                      std::size_t hidden, Rng& rng) {
  JudgeModel judge;
  judge.state_dim = state_dim;
  judge.evidence_size = evidence_size;
  std::size_t in = 2 * state_dim + kNumActions;
  std::vector<LayerSpec> specs = {
      {in, hidden, Activation::PRelu, 1e-2f, true},
      {hidden, hidden, Activation::PRelu, 1e-2f, true},
      {hidden, 1, Activation::Identity, 1e-2f, false},
  };
  judge.net = make_network(specs, rng);
  return judge;
}

void fill_judge_input(const JudgeModel& judge, const PatientState& state,
                      const EvidenceSet& evidence, int action, float* row) {
  std::size_t d = judge.state_dim;
  std::fill(row, row + judge.input_dim(), 0.0f);
  for (std::size_t idx : evidence) {
    if (idx >= d) throw std::out_of_range("evidence index out of range");
    row[idx] = state[idx];
    row[d + idx] = 1.0f;
  }
  if (action < 0 || action >= int(kNumActions))
    throw std::out_of_range("action out of range");
  row[2 * d + std::size_t(action)] = 1.0f;
}

double judge_score(const JudgeModel& judge, int action,
                   const EvidenceSet& evidence, const PatientState& state) {
  Matrix in(1, judge.input_dim());
  fill_judge_input(judge, state, evidence, action, in.data.data());
  auto& net = const_cast<Network&>(judge.net);
  return double(forward(net, in, Mode::Eval).at(0, 0));
}

std::pair<double, double> judge_score_pair(const JudgeModel& judge, int a0,
                                           int a1, const EvidenceSet& evidence,
                                           const PatientState& state) {
  Matrix in(2, judge.input_dim());
  fill_judge_input(judge, state, evidence, a0, &in.at(0, 0));
  fill_judge_input(judge, state, evidence, a1, &in.at(1, 0));
  auto& net = const_cast<Network&>(judge.net);
  Matrix out = forward(net, in, Mode::Eval);
  return {double(out.at(0, 0)), double(out.at(1, 0))};
}

double pref_prob(const JudgeModel& judge, int a0, int a1,
                 const EvidenceSet& evidence, const PatientState& state) {
  auto [s0, s1] = judge_score_pair(judge, a0, a1, evidence, state);
  return sigmoid(s0 - s1);
}

EvidenceSet sample_evidence(std::size_t state_dim, std::size_t size,
                            Rng& rng) {
  if (size > state_dim) throw std::invalid_argument("evidence size > D");
  std::vector<std::size_t> idx(state_dim);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < size; ++i) {
    std::size_t j = std::size_t(rng.uniform_int(std::int64_t(i),
                                                std::int64_t(state_dim - 1)));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(size);
  return idx;
}

JudgeTrainResult train_judge(const PreferenceDataset& dataset,
                             const JudgeTrainConfig& config, Rng& rng) {
  auto train = dataset.split_view(Split::Train);
  if (train.empty()) throw std::invalid_argument("empty training split");

  JudgeTrainResult result;
  result.judge = make_judge(dataset.state_dim, config.evidence_size,
                            config.hidden, rng);
  JudgeModel& judge = result.judge;
  AdamState adam = make_adam(judge.net, config.lr);

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  bool first_batch = true;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t n_seen = 0;
    for (std::size_t start = 0; start < order.size();
         start += config.batch) {
      std::size_t b = std::min(config.batch, order.size() - start);
      // Rows [0,b) hold a0, rows [b,2b) hold a1, sharing batch-norm stats.
      Matrix in(2 * b, judge.input_dim());
      std::vector<double> target(b);
      for (std::size_t i = 0; i < b; ++i) {
        const PreferenceTuple& t = *train[order[start + i]];
        EvidenceSet ev =
            sample_evidence(dataset.state_dim, config.evidence_size, rng);
        fill_judge_input(judge, t.state, ev, t.a0, &in.at(i, 0));
        fill_judge_input(judge, t.state, ev, t.a1, &in.at(b + i, 0));
        target[i] = t.p == 0 ? 1.0 : 0.0;  // target for P(a0 > a1)
      }
      ForwardCache cache;
      Matrix out = forward(judge.net, in, Mode::Train, &cache);
      Matrix gout(2 * b, 1);
      double batch_loss = 0.0;
      for (std::size_t i = 0; i < b; ++i) {
        double diff = double(out.at(i, 0)) - double(out.at(b + i, 0));
        double prob = sigmoid(diff);  // P(a0 > a1)
        double p = target[i];
        batch_loss += -(p * std::log(std::max(prob, 1e-12)) +
                        (1.0 - p) * std::log(std::max(1.0 - prob, 1e-12)));
        float g = float((prob - p) / double(b));
        gout.at(i, 0) = g;
        gout.at(b + i, 0) = -g;
      }
      if (first_batch) {
        result.initial_loss = batch_loss / double(b);
        first_batch = false;
      }
      loss_sum += batch_loss;
      n_seen += b;
      Gradients grads = backward(judge.net, cache, gout);
      adam_step(judge.net.parameters(), grads.grads, adam);
    }
    result.epoch_loss.push_back(loss_sum / double(n_seen));
  }
  return result;
}

AccuracyReport judge_accuracy(const JudgeModel& judge,
                              const std::vector<const PreferenceTuple*>& tuples,
                              const EvidenceSampler& sampler, Rng& rng) {
  AccuracyReport report;
  report.n = tuples.size();
  if (tuples.empty()) return report;
  double sum = 0.0, sq = 0.0;
  for (const PreferenceTuple* t : tuples) {
    EvidenceSet ev = sampler(*t, rng);
    auto [sp, sa] =
        judge_score_pair(judge, t->preferred(), t->alternative(), ev, t->state);
    double credit = sp > sa ? 1.0 : (sp == sa ? 0.5 : 0.0);
    sum += credit;
    sq += credit * credit;
  }
  double n = double(report.n);
  report.accuracy = sum / n;
  double var = std::max(0.0, sq / n - report.accuracy * report.accuracy);
  report.se = std::sqrt(var / n);
  return report;
}

void save_judge(const JudgeModel& judge, const std::string& path) {
  save_network(judge.net, path,
               {"meta state_dim " + std::to_string(judge.state_dim),
                "meta evidence_size " + std::to_string(judge.evidence_size)});
}

JudgeModel load_judge(const std::string& path) {
  JudgeModel judge;
  std::vector<std::string> extra;
  judge.net = load_network(path, &extra);
  for (const auto& line : extra) {
    std::size_t sd, es;
    if (std::sscanf(line.c_str(), "meta state_dim %zu", &sd) == 1)
      judge.state_dim = sd;
    else if (std::sscanf(line.c_str(), "meta evidence_size %zu", &es) == 1)
      judge.evidence_size = es;
  }
  if (judge.state_dim == 0) throw std::runtime_error("bad judge file");
  return judge;
}

}  // namespace debaterl
