#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "debaterl/synthenv.hpp"

namespace debaterl {

enum class DatasetStrategy { Random, Exhaustive, Offset };
enum class Split { Train, Validation, Test };

struct PreferenceTuple {
  PatientState state;
  int a0 = 0;
  int a1 = 0;
  int p = 0;  // 0 -> a0 preferred, 1 -> a1 preferred
  std::size_t trajectory_id = 0;
  std::size_t step = 0;
  Split split = Split::Train;

  int preferred() const { return p == 0 ? a0 : a1; }
  int alternative() const { return p == 0 ? a1 : a0; }
};

struct PreferenceDataset {
  std::vector<PreferenceTuple> tuples;
  std::size_t state_dim = 0;

  std::vector<const PreferenceTuple*> split_view(Split s) const {
    std::vector<const PreferenceTuple*> out;
    for (const auto& t : tuples)
      if (t.split == s) out.push_back(&t);
    return out;
  }
};

// Pair every cohort transition's clinician action with alternatives per the
// chosen strategy; the (a0, a1) order is randomized per tuple and p set to
// the clinician action's slot.
PreferenceDataset build_preferences(const Cohort& cohort,
                                    DatasetStrategy strategy,
                                    std::uint64_t seed);

// 70/15/15 split by trajectory; tuples inherit their trajectory's tag.
void split_dataset(PreferenceDataset& dataset, std::size_t n_trajectories,
                   std::uint64_t seed);

void save_preferences(const PreferenceDataset& ds, const std::string& path);
PreferenceDataset load_preferences(const std::string& path);

DatasetStrategy strategy_from(const std::string& name);
const char* strategy_name(DatasetStrategy s);

}  // namespace debaterl
