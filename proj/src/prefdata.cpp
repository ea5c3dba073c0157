#include "debaterl/prefdata.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace debaterl {

namespace {

int sample_offset_alternative(int clinician, Rng& rng) {
  int iv, vc;
  decode_action(clinician, &iv, &vc);
  // Resample until the offset lands in range and differs from the
  // clinician action. At least 3 of the 9 offset pairs are always valid.
  for (;;) {
    const int di = int(rng.uniform_int(-1, 1));
    const int dv = int(rng.uniform_int(-1, 1));
    const int niv = iv + di, nvc = vc + dv;
    if (niv < 0 || niv >= kNumIv || nvc < 0 || nvc >= kNumVc) continue;
    if (di == 0 && dv == 0) continue;
    return encode_action(niv, nvc);
  }
}

PreferenceTuple make_tuple(const Transition& tr, std::size_t traj_id,
                           std::size_t step, int alternative, Rng& rng) {
  PreferenceTuple t;
  t.state = tr.state;
  t.trajectory_id = traj_id;
  t.step = step;
  if (rng.uniform() < 0.5) {
    t.a0 = tr.action;
    t.a1 = alternative;
    t.p = 0;
  } else {
    t.a0 = alternative;
    t.a1 = tr.action;
    t.p = 1;
  }
  return t;
}

}  // namespace

PreferenceDataset build_preferences(const Cohort& cohort,
                                    DatasetStrategy strategy,
                                    std::uint64_t seed) {
  if (cohort.trajectories.empty())
    throw std::invalid_argument("build_preferences: empty cohort");
  Rng root(seed ^ 0x5eedfeedULL);
  PreferenceDataset ds;
  ds.state_dim = cohort.config.state_dim;

  for (std::size_t ti = 0; ti < cohort.trajectories.size(); ++ti) {
    Rng rng = root.derive(ti + 1);
    const Trajectory& traj = cohort.trajectories[ti];
    for (std::size_t st = 0; st < traj.size(); ++st) {
      const Transition& tr = traj[st];
      switch (strategy) {
        case DatasetStrategy::Random: {
          int alt = int(rng.uniform_int(0, kNumActions - 2));
          if (alt >= tr.action) ++alt;  // uniform over actions \ {a_t}
          ds.tuples.push_back(make_tuple(tr, ti, st, alt, rng));
          break;
        }
        case DatasetStrategy::Exhaustive:
          for (int alt = 0; alt < kNumActions; ++alt)
            if (alt != tr.action)
              ds.tuples.push_back(make_tuple(tr, ti, st, alt, rng));
          break;
        case DatasetStrategy::Offset:
          ds.tuples.push_back(make_tuple(
              tr, ti, st, sample_offset_alternative(tr.action, rng), rng));
          break;
      }
    }
  }
  split_dataset(ds, cohort.trajectories.size(), seed);
  return ds;
}

void split_dataset(PreferenceDataset& dataset, std::size_t n_trajectories,
                   std::uint64_t seed) {
  if (n_trajectories < 10)
    throw std::invalid_argument("split_dataset: need at least 10 trajectories");
  std::vector<std::size_t> order(n_trajectories);
  for (std::size_t i = 0; i < n_trajectories; ++i) order[i] = i;
  Rng rng(seed ^ 0x517517ULL);
  rng.shuffle(order);
  const std::size_t n_train = (n_trajectories * 70 + 50) / 100;
  const std::size_t n_val = (n_trajectories * 15 + 50) / 100;
  std::vector<Split> tag(n_trajectories, Split::Test);
  for (std::size_t i = 0; i < n_train; ++i) tag[order[i]] = Split::Train;
  for (std::size_t i = n_train; i < n_train + n_val && i < n_trajectories; ++i)
    tag[order[i]] = Split::Validation;
  for (auto& t : dataset.tuples) t.split = tag[t.trajectory_id];
}

namespace {

const char* split_name(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Validation: return "validation";
    case Split::Test: return "test";
  }
  return "train";
}

Split split_from(const std::string& s) {
  if (s == "train") return Split::Train;
  if (s == "validation") return Split::Validation;
  if (s == "test") return Split::Test;
  throw std::runtime_error("bad split tag: " + s);
}

}  // namespace

DatasetStrategy strategy_from(const std::string& name) {
  if (name == "random") return DatasetStrategy::Random;
  if (name == "exhaustive") return DatasetStrategy::Exhaustive;
  if (name == "offset") return DatasetStrategy::Offset;
  throw std::runtime_error("unknown dataset strategy: " + name);
}

const char* strategy_name(DatasetStrategy s) {
  switch (s) {
    case DatasetStrategy::Random: return "random";
    case DatasetStrategy::Exhaustive: return "exhaustive";
    case DatasetStrategy::Offset: return "offset";
  }
  return "random";
}

void save_preferences(const PreferenceDataset& ds, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for write: " + path);
  f << "debaterl-prefs v1\n";
  f << "state_dim " << ds.state_dim << "\n";
  char buf[32];
  for (const auto& t : ds.tuples) {
    f << t.trajectory_id << "," << t.step;
    for (float v : t.state) {
      std::snprintf(buf, sizeof(buf), "%.9g", double(v));
      f << "," << buf;
    }
    f << "," << t.a0 << "," << t.a1 << "," << t.p << "," << split_name(t.split)
      << "\n";
  }
}

PreferenceDataset load_preferences(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open for read: " + path);
  std::string line;
  std::getline(f, line);
  if (line != "debaterl-prefs v1")
    throw std::runtime_error("bad preference file header");
  PreferenceDataset ds;
  std::getline(f, line);
  {
    std::istringstream ss(line);
    std::string tok;
    ss >> tok >> ds.state_dim;
    if (tok != "state_dim") throw std::runtime_error("bad preference header");
  }
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string field;
    auto next_field = [&]() {
      if (!std::getline(ss, field, ','))
        throw std::runtime_error("truncated preference record");
      return field;
    };
    PreferenceTuple t;
    t.trajectory_id = std::stoul(next_field());
    t.step = std::stoul(next_field());
    t.state.resize(ds.state_dim);
    for (auto& v : t.state) v = std::stof(next_field());
    t.a0 = std::stoi(next_field());
    t.a1 = std::stoi(next_field());
    t.p = std::stoi(next_field());
    t.split = split_from(next_field());
    ds.tuples.push_back(std::move(t));
  }
  return ds;
}

}  // namespace debaterl
