#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "persuasion/abstraction.hpp"
#include "persuasion/dataset.hpp"
#include "persuasion/similarity.hpp"
#include "persuasion/types.hpp"

namespace persuasion {

enum class PredictorKind {
    overall_mean,
    per_action,
    per_action_state,
    per_action_charstate,
    similarity_weighted,
};

enum class NextStateApproach { uniform, stay, transition_fn };

enum class CiMethod { student_t, bootstrap };

const char* predictor_name(PredictorKind kind);
const char* next_state_approach_name(NextStateApproach approach);

struct EvalOptions {
    CiMethod ci_method = CiMethod::student_t;
    /// Build intervals over per-user mean errors instead of pooled samples.
    bool per_user = false;
    int bootstrap_resamples = 10000;
    std::uint64_t bootstrap_seed = 7;
};

struct EvalGroup {
    std::string key;
    double mean = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    long n = 0;
};

struct SamplePrediction {
    std::string user_id;
    int state = 0;
    int action = 0;
    double predicted = 0.0;
    double actual = 0.0;
};

struct EvalReport {
    std::string id;
    /// One group per state index of the grouping space; n values sum to the
    /// number of evaluated samples.
    std::vector<EvalGroup> per_state;
    EvalGroup overall;
    /// Held-out predictions in global pair order, for audits and plots.
    std::vector<SamplePrediction> predictions;
};

/// Leave-one-person-out reward prediction. Thresholds, the mean effort, and
/// all fitted tables are recomputed per fold from the training users only;
/// the selected feature names stay fixed. Unseen cells fall back along
/// action+state -> action -> overall mean. char_fs is required for
/// per_action_charstate (it also becomes the grouping space); sim_config is
/// required for similarity_weighted.
EvalReport loocv_reward(const Dataset& dataset, PredictorKind kind,
                        const FeatureSet& state_fs, const FeatureSet* char_fs = nullptr,
                        const SimilarityConfig* sim_config = nullptr,
                        const EvalOptions& options = {});

/// Leave-one-person-out likelihood of the realized next state, grouped by
/// the sample's current state.
EvalReport loocv_next_state(const Dataset& dataset, NextStateApproach approach,
                            const FeatureSet& state_fs, const EvalOptions& options = {});

enum class IntervalComparison { a_credibly_lower, b_credibly_lower, overlapping };

IntervalComparison compare_intervals(const EvalGroup& a, const EvalGroup& b);

struct ConfigSearchResult {
    SimilarityConfig config;
    EvalGroup overall;
};

/// Full LOOCV per grid entry, ranked by overall mean L1 error ascending;
/// ties keep the grid's declaration order.
std::vector<ConfigSearchResult> config_search(const Dataset& dataset,
                                              std::span<const SimilarityConfig> grid,
                                              const FeatureSet& state_fs,
                                              const EvalOptions& options = {});

}  // namespace persuasion
