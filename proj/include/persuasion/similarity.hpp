#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "persuasion/types.hpp"

namespace persuasion {

enum class Kernel { linear, exponential };

/// How to turn characteristic distance into a sample weight: distances are
/// per-characteristic range-normalized absolute differences averaged over
/// the chosen subset, then pushed through (1-d)^sharpness (linear) or
/// exp(-sharpness*d) (exponential).
struct SimilarityConfig {
    std::vector<std::string> characteristics;
    Kernel kernel = Kernel::linear;
    double sharpness = 1.0;

    /// Canonical one-line form, also the grid-file syntax.
    std::string id() const;
};

/// Per-characteristic [min, max] over a profile pool, used to normalize
/// differences to [0, 1].
using CharacteristicRanges = std::map<std::string, std::pair<double, double>>;

CharacteristicRanges compute_characteristic_ranges(std::span<const UserProfile> profiles,
                                                   std::span<const std::string> names);

/// Weight in [0, 1]; nullopt when either profile lacks a config
/// characteristic (the exclusion signal, not an error).
std::optional<double> similarity_weight(const UserProfile& target, const UserProfile& other,
                                        const SimilarityConfig& config,
                                        const CharacteristicRanges& ranges);

struct SampleWithProfile {
    const TransitionSample* sample = nullptr;
    const UserProfile* profile = nullptr;
};

/// Similarity-weighted mean reward of the pool's (state, action) matches;
/// nullopt signals the caller to fall back to the unweighted predictor
/// (target missing characteristics, no matches, or zero total weight).
std::optional<double> weighted_reward_predict(const UserProfile& target,
                                              std::span<const SampleWithProfile> pool,
                                              int state, int action,
                                              const SimilarityConfig& config,
                                              const CharacteristicRanges& ranges);

/// One grid entry per line: "chars=<a+b+c> kernel=<linear|exponential>
/// sharpness=<x>"; '#' starts a comment.
std::vector<SimilarityConfig> parse_config_grid(std::istream& in);

/// The built-in search grid: involvement alone, the two selected
/// characteristic triples, and the full characteristic set, crossed with
/// both kernels and sharpness 0.5/1/2/4, plus flattened and peaked edge
/// configs on the single- and full-set entries.
std::vector<SimilarityConfig> default_config_grid(
    const std::vector<std::string>& pre_triple, const std::vector<std::string>& all_triple,
    const std::vector<std::string>& all_characteristics);

}  // namespace persuasion
