#include "persuasion/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <sstream>
#include <stdexcept>

namespace persuasion {

std::string SimilarityConfig::id() const {
    std::string out = "chars=";
    for (std::size_t i = 0; i < characteristics.size(); ++i) {
        if (i > 0) out += "+";
        out += characteristics[i];
    }
    out += " kernel=";
    out += kernel == Kernel::linear ? "linear" : "exponential";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", sharpness);
    out += " sharpness=";
    out += buf;
    return out;
}

CharacteristicRanges compute_characteristic_ranges(std::span<const UserProfile> profiles,
                                                   std::span<const std::string> names) {
    CharacteristicRanges ranges;
    for (const auto& name : names) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (const auto& p : profiles) {
            if (const auto v = p.characteristic(name)) {
                lo = std::min(lo, *v);
                hi = std::max(hi, *v);
            }
        }
        if (lo <= hi) ranges[name] = {lo, hi};
    }
    return ranges;
}

std::optional<double> similarity_weight(const UserProfile& target, const UserProfile& other,
                                        const SimilarityConfig& config,
                                        const CharacteristicRanges& ranges) {
    if (config.characteristics.empty())
        throw std::invalid_argument("similarity_weight: empty characteristic set");
    if (config.sharpness <= 0.0)
        throw std::invalid_argument("similarity_weight: sharpness must be positive");
    double total = 0.0;
    for (const auto& name : config.characteristics) {
        const auto tv = target.characteristic(name);
        const auto ov = other.characteristic(name);
        if (!tv || !ov) return std::nullopt;
        double diff = std::fabs(*tv - *ov);
        auto it = ranges.find(name);
        if (it != ranges.end() && it->second.second > it->second.first) {
            diff /= it->second.second - it->second.first;
        } else {
            diff = 0.0;  // degenerate range: all observed values identical
        }
        total += std::clamp(diff, 0.0, 1.0);
    }
    const double d = total / static_cast<double>(config.characteristics.size());
    if (config.kernel == Kernel::linear) return std::pow(1.0 - d, config.sharpness);
    return std::exp(-config.sharpness * d);
}

std::optional<double> weighted_reward_predict(const UserProfile& target,
                                              std::span<const SampleWithProfile> pool,
                                              int state, int action,
                                              const SimilarityConfig& config,
                                              const CharacteristicRanges& ranges) {
    double weight_sum = 0.0;
    double weighted_reward = 0.0;
    for (const auto& entry : pool) {
        if (entry.sample->state != state || entry.sample->action != action) continue;
        const auto w = similarity_weight(target, *entry.profile, config, ranges);
        if (!w) continue;
        weight_sum += *w;
        weighted_reward += *w * entry.sample->reward;
    }
    if (weight_sum <= 0.0) return std::nullopt;
    return weighted_reward / weight_sum;
}

std::vector<SimilarityConfig> parse_config_grid(std::istream& in) {
    std::vector<SimilarityConfig> grid;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream fields(line);
        std::string field;
        SimilarityConfig config;
        bool any = false;
        while (fields >> field) {
            any = true;
            const auto eq = field.find('=');
            if (eq == std::string::npos)
                throw DataError("similarity grid line " + std::to_string(line_no) +
                                ": expected key=value, got '" + field + "'");
            const std::string key = field.substr(0, eq);
            const std::string value = field.substr(eq + 1);
            if (key == "chars") {
                std::istringstream names(value);
                std::string name;
                while (std::getline(names, name, '+')) {
                    if (!name.empty()) config.characteristics.push_back(name);
                }
            } else if (key == "kernel") {
                if (value == "linear") {
                    config.kernel = Kernel::linear;
                } else if (value == "exponential") {
                    config.kernel = Kernel::exponential;
                } else {
                    throw DataError("similarity grid line " + std::to_string(line_no) +
                                    ": unknown kernel '" + value + "'");
                }
            } else if (key == "sharpness") {
                try {
                    config.sharpness = std::stod(value);
                } catch (const std::exception&) {
                    throw DataError("similarity grid line " + std::to_string(line_no) +
                                    ": bad sharpness '" + value + "'");
                }
            } else {
                throw DataError("similarity grid line " + std::to_string(line_no) +
                                ": unknown key '" + key + "'");
            }
        }
        if (!any) continue;
        if (config.characteristics.empty())
            throw DataError("similarity grid line " + std::to_string(line_no) +
                            ": missing chars=");
        if (config.sharpness <= 0.0)
            throw DataError("similarity grid line " + std::to_string(line_no) +
                            ": sharpness must be positive");
        grid.push_back(std::move(config));
    }
    return grid;
}

std::vector<SimilarityConfig> default_config_grid(
    const std::vector<std::string>& pre_triple, const std::vector<std::string>& all_triple,
    const std::vector<std::string>& all_characteristics) {
    const std::vector<std::string> involvement_only = {"involvement"};
    const std::vector<const std::vector<std::string>*> sets = {
        &involvement_only, &pre_triple, &all_triple, &all_characteristics};

    std::vector<SimilarityConfig> grid;
    for (const auto* set : sets) {
        if (set->empty()) continue;
        for (Kernel kernel : {Kernel::linear, Kernel::exponential}) {
            for (double sharpness : {0.5, 1.0, 2.0, 4.0}) {
                grid.push_back({*set, kernel, sharpness});
            }
        }
    }
    // Edge configs: near-flat and strongly peaked weighting on the smallest
    // and largest characteristic sets.
    for (const auto* set : {&involvement_only, &all_characteristics}) {
        if (set->empty()) continue;
        for (Kernel kernel : {Kernel::linear, Kernel::exponential}) {
            for (double sharpness : {0.125, 8.0}) {
                grid.push_back({*set, kernel, sharpness});
            }
        }
    }
    // The two selected triples can coincide; keep the first of each id.
    std::vector<SimilarityConfig> unique;
    for (auto& config : grid) {
        const auto id = config.id();
        if (std::none_of(unique.begin(), unique.end(),
                         [&](const SimilarityConfig& seen) { return seen.id() == id; })) {
            unique.push_back(std::move(config));
        }
    }
    return unique;
}

}  // namespace persuasion
