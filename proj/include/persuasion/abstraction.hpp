#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "persuasion/types.hpp"

namespace persuasion {

enum class FeatureSource { state_answers, user_characteristics };

/// An ordered subset of binary features plus the mean thresholds that
/// binarize them. The first selected feature is the leftmost bit of the
/// state's binary string, so with k=3 the string "011" is state index 3.
struct FeatureSet {
    FeatureSource source = FeatureSource::state_answers;
    std::vector<std::string> selected;
    std::vector<double> thresholds;

    int k() const { return static_cast<int>(selected.size()); }
    int n_states() const { return 1 << selected.size(); }
};

/// Binary-string label of a state index under a k-bit feature set ("000".."111").
std::string state_label(int index, int k);

/// Question name "q1".."q8" -> answer slot, or -1.
int question_index(const std::string& name);

/// Names of all eight questionnaire features.
std::vector<std::string> question_names();

/// Arithmetic mean per named question over the given session records.
/// Throws DataError on an empty record set or unknown name.
std::vector<double> compute_thresholds(std::span<const SessionRecord> records,
                                       std::span<const std::string> feature_names);

/// Means of named characteristics over the profiles carrying them.
std::vector<double> compute_characteristic_thresholds(
    std::span<const UserProfile> profiles,
    std::span<const std::string> characteristic_names);

/// Bit-packs raw values against the feature set's thresholds (bit = 1 when
/// the value is at or above the threshold).
int project_values(std::span<const double> raw_values, const FeatureSet& fs);

int project(const SessionRecord& record, const FeatureSet& fs);

/// Throws DataError naming the characteristic if the profile lacks one.
int project(const UserProfile& profile, const FeatureSet& fs);

struct SelectionOptions {
    /// Score candidates within contexts of already-selected features; when
    /// false each candidate is scored on its own two-state abstraction.
    bool conditional = true;
    /// Take the max absolute Q-difference over actions within a context
    /// instead of the support-weighted mean over (context, action) cells.
    bool aggregate_max = false;
    double vi_tolerance = 1e-9;
    int vi_max_iters = 10000;
};

/// Greedy selection of k questionnaire features: each round refits an MDP
/// per candidate and keeps the one whose two binary values give the most
/// different Q-values, support-weighted. Ties break to the lexicographically
/// smaller name.
FeatureSet select_state_features(const Dataset& dataset, int k, double gamma,
                                 std::span<const std::string> candidates,
                                 const SelectionOptions& options = {});

enum class CharacteristicMode { pre_only, all };

/// Greedy selection of k binarized user characteristics by the absolute
/// difference in mean transition reward between the two characteristic
/// values. Transitions of users missing a candidate are dropped for that
/// candidate's score.
FeatureSet select_characteristic_features(const Dataset& dataset,
                                          std::span<const TransitionSample> transitions,
                                          int k, CharacteristicMode mode);

void write_feature_set(std::ostream& out, const FeatureSet& fs);
FeatureSet read_feature_set(std::istream& in);

}  // namespace persuasion
