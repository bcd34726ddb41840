#include "persuasion/abstraction.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <unordered_map>

#include "persuasion/dataset.hpp"
#include "persuasion/mdp.hpp"

namespace persuasion {

std::string state_label(int index, int k) {
    std::string label(static_cast<std::size_t>(k), '0');
    for (int j = 0; j < k; ++j) {
        if (index & (1 << (k - 1 - j))) label[static_cast<std::size_t>(j)] = '1';
    }
    return label;
}

int question_index(const std::string& name) {
    if (name.size() == 2 && name[0] == 'q' && name[1] >= '1' && name[1] <= '8') {
        return name[1] - '1';
    }
    return -1;
}

std::vector<std::string> question_names() {
    std::vector<std::string> names;
    for (int q = 1; q <= kNumQuestions; ++q) names.push_back("q" + std::to_string(q));
    return names;
}

std::vector<double> compute_thresholds(std::span<const SessionRecord> records,
                                       std::span<const std::string> feature_names) {
    if (records.empty()) throw DataError("compute_thresholds: no records");
    std::vector<double> thresholds;
    thresholds.reserve(feature_names.size());
    for (const auto& name : feature_names) {
        const int q = question_index(name);
        if (q < 0) throw DataError("compute_thresholds: unknown feature '" + name + "'");
        double sum = 0.0;
        for (const auto& rec : records) sum += rec.answers[static_cast<std::size_t>(q)];
        thresholds.push_back(sum / static_cast<double>(records.size()));
    }
    return thresholds;
}

std::vector<double> compute_characteristic_thresholds(
    std::span<const UserProfile> profiles,
    std::span<const std::string> characteristic_names) {
    std::vector<double> thresholds;
    thresholds.reserve(characteristic_names.size());
    for (const auto& name : characteristic_names) {
        double sum = 0.0;
        long count = 0;
        for (const auto& p : profiles) {
            if (const auto v = p.characteristic(name)) {
                sum += *v;
                ++count;
            }
        }
        if (count == 0) throw DataError("compute_characteristic_thresholds: no values for '" +
                                        name + "'");
        thresholds.push_back(sum / static_cast<double>(count));
    }
    return thresholds;
}

int project_values(std::span<const double> raw_values, const FeatureSet& fs) {
    const int k = fs.k();
    if (static_cast<int>(raw_values.size()) != k)
        throw DataError("project_values: value count does not match feature set");
    int index = 0;
    for (int j = 0; j < k; ++j) {
        if (raw_values[static_cast<std::size_t>(j)] >= fs.thresholds[static_cast<std::size_t>(j)])
            index |= 1 << (k - 1 - j);
    }
    return index;
}

int project(const SessionRecord& record, const FeatureSet& fs) {
    if (fs.source != FeatureSource::state_answers)
        throw DataError("project: feature set is not over session answers");
    std::vector<double> values;
    values.reserve(fs.selected.size());
    for (const auto& name : fs.selected) {
        const int q = question_index(name);
        if (q < 0) throw DataError("project: missing feature '" + name + "'");
        values.push_back(record.answers[static_cast<std::size_t>(q)]);
    }
    return project_values(values, fs);
}

int project(const UserProfile& profile, const FeatureSet& fs) {
    if (fs.source != FeatureSource::user_characteristics)
        throw DataError("project: feature set is not over user characteristics");
    std::vector<double> values;
    values.reserve(fs.selected.size());
    for (const auto& name : fs.selected) {
        const auto v = profile.characteristic(name);
        if (!v) throw DataError("project: missing characteristic '" + name + "' for user " +
                                profile.user_id);
        values.push_back(*v);
    }
    return project_values(values, fs);
}

namespace {

// Score one candidate on a trial abstraction where the candidate occupies the
// last (least significant) bit: contexts are the assignments of the already
// selected features, so states pair up as (2b, 2b+1).
double q_difference_score(const MdpModel& model, const Eigen::MatrixXd& Q,
                          const SelectionOptions& options) {
    const int n_contexts = model.n_states / 2;
    double weighted_sum = 0.0;
    double weight_total = 0.0;
    for (int b = 0; b < n_contexts; ++b) {
        const int s0 = 2 * b;
        const int s1 = 2 * b + 1;
        if (options.aggregate_max) {
            double best = -1.0;
            double context_weight = 0.0;
            for (int a = 0; a < model.n_actions; ++a) {
                if (model.support(s0, a) == 0 || model.support(s1, a) == 0) continue;
                best = std::max(best, std::fabs(Q(s0, a) - Q(s1, a)));
                context_weight += static_cast<double>(model.support(s0, a) + model.support(s1, a));
            }
            if (best >= 0.0) {
                weighted_sum += context_weight * best;
                weight_total += context_weight;
            }
        } else {
            for (int a = 0; a < model.n_actions; ++a) {
                if (model.support(s0, a) == 0 || model.support(s1, a) == 0) continue;
                const double w = static_cast<double>(model.support(s0, a) + model.support(s1, a));
                weighted_sum += w * std::fabs(Q(s0, a) - Q(s1, a));
                weight_total += w;
            }
        }
    }
    return weight_total > 0.0 ? weighted_sum / weight_total : 0.0;
}

}  // namespace

FeatureSet select_state_features(const Dataset& dataset, int k, double gamma,
                                 std::span<const std::string> candidates,
                                 const SelectionOptions& options) {
    if (k <= 0 || k > static_cast<int>(candidates.size()))
        throw DataError("select_state_features: k outside 1..|candidates|");

    std::vector<std::string> sorted_candidates(candidates.begin(), candidates.end());
    std::sort(sorted_candidates.begin(), sorted_candidates.end());

    const auto thresholds = compute_thresholds(dataset.sessions, sorted_candidates);
    std::unordered_map<std::string, double> threshold_of;
    for (std::size_t i = 0; i < sorted_candidates.size(); ++i)
        threshold_of[sorted_candidates[i]] = thresholds[i];

    const double ebar = mean_effort(dataset.sessions);
    const auto pairs = pair_structure(dataset);
    if (pairs.empty()) throw DataError("select_state_features: no transition pairs");

    FeatureSet chosen;
    chosen.source = FeatureSource::state_answers;
    std::vector<std::string> remaining = sorted_candidates;

    for (int round = 0; round < k; ++round) {
        std::string best_name;
        double best_score = -1.0;
        for (const auto& candidate : remaining) {
            FeatureSet trial;
            trial.source = FeatureSource::state_answers;
            if (options.conditional) {
                trial.selected = chosen.selected;
                trial.thresholds = chosen.thresholds;
            }
            trial.selected.push_back(candidate);
            trial.thresholds.push_back(threshold_of[candidate]);

            std::vector<TransitionSample> transitions;
            transitions.reserve(pairs.size());
            for (const auto& pair : pairs) {
                TransitionSample t;
                t.user_id = dataset.sessions[pair.from_index].user_id;
                t.state = project(dataset.sessions[pair.from_index], trial);
                t.action = pair.action;
                t.reward = effort_to_reward(pair.effort, ebar);
                t.next_state = project(dataset.sessions[pair.to_index], trial);
                transitions.push_back(std::move(t));
            }
            const auto model = estimate_model(transitions, trial.n_states(), kNumActions, gamma);
            const auto vf = value_iteration(model, Objective::optimal, options.vi_tolerance,
                                            options.vi_max_iters);
            const double score = q_difference_score(model, vf.Q, options);
            if (score > best_score) {  // lexicographic tie-break via sorted iteration
                best_score = score;
                best_name = candidate;
            }
        }
        chosen.selected.push_back(best_name);
        chosen.thresholds.push_back(threshold_of[best_name]);
        remaining.erase(std::find(remaining.begin(), remaining.end(), best_name));
    }
    return chosen;
}

FeatureSet select_characteristic_features(const Dataset& dataset,
                                          std::span<const TransitionSample> transitions,
                                          int k, CharacteristicMode mode) {
    std::vector<std::string> candidates = dataset.characteristic_names;
    if (mode == CharacteristicMode::all) candidates.push_back("involvement");
    std::sort(candidates.begin(), candidates.end());
    if (k <= 0 || k > static_cast<int>(candidates.size()))
        throw DataError("select_characteristic_features: k outside 1..|candidates|");
    if (transitions.empty()) throw DataError("select_characteristic_features: no transitions");

    const auto thresholds = compute_characteristic_thresholds(dataset.profiles, candidates);
    std::unordered_map<std::string, double> threshold_of;
    for (std::size_t i = 0; i < candidates.size(); ++i) threshold_of[candidates[i]] = thresholds[i];

    std::unordered_map<std::string, const UserProfile*> profile_of;
    for (const auto& p : dataset.profiles) profile_of[p.user_id] = &p;

    auto score_of = [&](const std::string& name) {
        const double threshold = threshold_of[name];
        double sum_hi = 0.0, sum_lo = 0.0;
        long n_hi = 0, n_lo = 0;
        for (const auto& t : transitions) {
            auto it = profile_of.find(t.user_id);
            if (it == profile_of.end()) continue;
            const auto value = it->second->characteristic(name);
            if (!value) continue;  // user missing this candidate
            if (*value >= threshold) {
                sum_hi += t.reward;
                ++n_hi;
            } else {
                sum_lo += t.reward;
                ++n_lo;
            }
        }
        if (n_hi == 0 || n_lo == 0) return 0.0;  // one-sided split carries no signal
        return std::fabs(sum_hi / static_cast<double>(n_hi) - sum_lo / static_cast<double>(n_lo));
    };

    FeatureSet chosen;
    chosen.source = FeatureSource::user_characteristics;
    std::vector<std::string> remaining = candidates;
    for (int round = 0; round < k; ++round) {
        std::string best_name;
        double best_score = -1.0;
        for (const auto& candidate : remaining) {
            const double score = score_of(candidate);
            if (score > best_score) {
                best_score = score;
                best_name = candidate;
            }
        }
        chosen.selected.push_back(best_name);
        chosen.thresholds.push_back(threshold_of[best_name]);
        remaining.erase(std::find(remaining.begin(), remaining.end(), best_name));
    }
    return chosen;
}

void write_feature_set(std::ostream& out, const FeatureSet& fs) {
    out << "feature_set v1\n";
    out << "source "
        << (fs.source == FeatureSource::state_answers ? "state_answers" : "user_characteristics")
        << "\n";
    out << "k " << fs.k() << "\n";
    char buf[40];
    for (int j = 0; j < fs.k(); ++j) {
        std::snprintf(buf, sizeof(buf), "%.17g", fs.thresholds[static_cast<std::size_t>(j)]);
        out << "feature " << fs.selected[static_cast<std::size_t>(j)] << " " << buf << "\n";
    }
}

FeatureSet read_feature_set(std::istream& in) {
    std::string magic, version;
    in >> magic >> version;
    if (magic != "feature_set" || version != "v1") throw DataError("feature set file: bad header");
    FeatureSet fs;
    std::string token;
    in >> token;
    if (token != "source") throw DataError("feature set file: expected source");
    in >> token;
    if (token == "state_answers") {
        fs.source = FeatureSource::state_answers;
    } else if (token == "user_characteristics") {
        fs.source = FeatureSource::user_characteristics;
    } else {
        throw DataError("feature set file: unknown source '" + token + "'");
    }
    in >> token;
    if (token != "k") throw DataError("feature set file: expected k");
    int k = 0;
    in >> k;
    if (!in || k <= 0) throw DataError("feature set file: bad k");
    for (int j = 0; j < k; ++j) {
        in >> token;
        if (token != "feature") throw DataError("feature set file: expected feature row");
        std::string name;
        double threshold = 0.0;
        in >> name >> threshold;
        fs.selected.push_back(name);
        fs.thresholds.push_back(threshold);
    }
    if (!in) throw DataError("feature set file: truncated");
    return fs;
}

}  // namespace persuasion
