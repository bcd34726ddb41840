#include "persuasion/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <unordered_map>

#include "persuasion/mdp.hpp"
#include "persuasion/report.hpp"
#include "persuasion/stats.hpp"

namespace persuasion {

const char* predictor_name(PredictorKind kind) {
    switch (kind) {
        case PredictorKind::overall_mean: return "overall_mean";
        case PredictorKind::per_action: return "per_action";
        case PredictorKind::per_action_state: return "per_action_state";
        case PredictorKind::per_action_charstate: return "per_action_charstate";
        case PredictorKind::similarity_weighted: return "similarity_weighted";
    }
    return "unknown";
}

const char* next_state_approach_name(NextStateApproach approach) {
    switch (approach) {
        case NextStateApproach::uniform: return "uniform";
        case NextStateApproach::stay: return "stay";
        case NextStateApproach::transition_fn: return "transition_fn";
    }
    return "unknown";
}

IntervalComparison compare_intervals(const EvalGroup& a, const EvalGroup& b) {
    if (a.ci_high < b.ci_low) return IntervalComparison::a_credibly_lower;
    if (b.ci_high < a.ci_low) return IntervalComparison::b_credibly_lower;
    return IntervalComparison::overlapping;
}

namespace {

// Everything a fold needs that must exclude the held-out user.
struct FoldStats {
    std::vector<double> state_thresholds;
    double mean_effort = 0.0;
};

std::vector<std::string> fold_users(const Dataset& dataset,
                                    const std::vector<SessionPair>& pairs) {
    std::set<std::string> users;
    for (const auto& p : pairs) users.insert(dataset.sessions[p.from_index].user_id);
    return {users.begin(), users.end()};
}

FoldStats fold_stats(const Dataset& dataset, const FeatureSet& state_fs,
                     const std::string& held_out) {
    FoldStats stats;
    const int k = state_fs.k();
    std::vector<int> q_index(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) {
        q_index[static_cast<std::size_t>(j)] = question_index(state_fs.selected[static_cast<std::size_t>(j)]);
        if (q_index[static_cast<std::size_t>(j)] < 0)
            throw DataError("loocv: feature set names a non-question feature");
    }
    std::vector<double> sums(static_cast<std::size_t>(k), 0.0);
    long n_records = 0;
    double effort_sum = 0.0;
    long effort_count = 0;
    for (const auto& rec : dataset.sessions) {
        if (rec.user_id == held_out) continue;
        ++n_records;
        for (int j = 0; j < k; ++j)
            sums[static_cast<std::size_t>(j)] +=
                rec.answers[static_cast<std::size_t>(q_index[static_cast<std::size_t>(j)])];
        if (rec.effort) {
            effort_sum += *rec.effort;
            ++effort_count;
        }
    }
    if (n_records == 0) throw DataError("loocv: empty training fold");
    if (effort_count == 0) throw DataError("loocv: no effort reports in training fold");
    stats.state_thresholds.resize(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j)
        stats.state_thresholds[static_cast<std::size_t>(j)] =
            sums[static_cast<std::size_t>(j)] / static_cast<double>(n_records);
    stats.mean_effort = effort_sum / static_cast<double>(effort_count);
    return stats;
}

std::vector<double> fold_char_thresholds(const Dataset& dataset, const FeatureSet& char_fs,
                                         const std::string& held_out) {
    std::vector<double> thresholds;
    thresholds.reserve(char_fs.selected.size());
    for (const auto& name : char_fs.selected) {
        double sum = 0.0;
        long count = 0;
        for (const auto& p : dataset.profiles) {
            if (p.user_id == held_out) continue;
            if (const auto v = p.characteristic(name)) {
                sum += *v;
                ++count;
            }
        }
        if (count == 0)
            throw DataError("loocv: training fold has no values for characteristic '" + name + "'");
        thresholds.push_back(sum / static_cast<double>(count));
    }
    return thresholds;
}

// Mean-reward tables with the fallback chain action+state -> action -> overall.
struct RewardTables {
    int n_states = 0;
    int n_actions = kNumActions;
    std::vector<double> cell_sum, cell_count;
    std::vector<double> action_sum, action_count;
    double total_sum = 0.0, total_count = 0.0;

    explicit RewardTables(int states)
        : n_states(states),
          cell_sum(static_cast<std::size_t>(states) * kNumActions, 0.0),
          cell_count(static_cast<std::size_t>(states) * kNumActions, 0.0),
          action_sum(kNumActions, 0.0),
          action_count(kNumActions, 0.0) {}

    void add(int state, int action, double reward) {
        const auto cell = static_cast<std::size_t>(state) * static_cast<std::size_t>(n_actions) +
                          static_cast<std::size_t>(action);
        cell_sum[cell] += reward;
        cell_count[cell] += 1.0;
        action_sum[static_cast<std::size_t>(action)] += reward;
        action_count[static_cast<std::size_t>(action)] += 1.0;
        total_sum += reward;
        total_count += 1.0;
    }

    double overall() const { return total_count > 0.0 ? total_sum / total_count : 0.0; }

    double action_mean(int action) const {
        return action_count[static_cast<std::size_t>(action)] > 0.0
                   ? action_sum[static_cast<std::size_t>(action)] /
                         action_count[static_cast<std::size_t>(action)]
                   : overall();
    }

    double cell_mean(int state, int action) const {
        const auto cell = static_cast<std::size_t>(state) * static_cast<std::size_t>(n_actions) +
                          static_cast<std::size_t>(action);
        return cell_count[cell] > 0.0 ? cell_sum[cell] / cell_count[cell] : action_mean(action);
    }
};

EvalGroup aggregate_group(const std::string& key, const std::string& report_id,
                          const std::vector<double>& values,
                          const std::vector<const std::string*>& value_users,
                          const EvalOptions& options) {
    EvalGroup group;
    group.key = key;
    group.n = static_cast<long>(values.size());
    if (values.empty()) {
        group.mean = group.ci_low = group.ci_high = std::numeric_limits<double>::quiet_NaN();
        return group;
    }

    std::vector<double> ci_values;
    if (options.per_user) {
        // One value per user: the mean of their samples in this group.
        // Pairs arrive sorted by user, so runs of equal users are contiguous.
        double run_sum = 0.0;
        long run_n = 0;
        const std::string* run_user = nullptr;
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (run_user && *value_users[i] != *run_user) {
                ci_values.push_back(run_sum / static_cast<double>(run_n));
                run_sum = 0.0;
                run_n = 0;
            }
            run_user = value_users[i];
            run_sum += values[i];
            ++run_n;
        }
        ci_values.push_back(run_sum / static_cast<double>(run_n));
    } else {
        ci_values = values;
    }

    group.mean = mean(values);
    if (ci_values.size() < 2) {
        const double m = mean(ci_values);
        group.ci_low = group.ci_high = m;
        if (ci_values.size() == 1) group.mean = m;
        return group;
    }
    Interval interval;
    if (options.ci_method == CiMethod::student_t) {
        interval = bayesian_mean_ci(ci_values, 0.95);
    } else {
        interval = bootstrap_mean_ci(ci_values, 0.95, options.bootstrap_resamples,
                                     options.bootstrap_seed ^ fnv1a64(report_id + "/" + key));
    }
    group.mean = interval.mean;
    group.ci_low = interval.lo;
    group.ci_high = interval.hi;
    return group;
}

EvalReport finalize_report(std::string id, int n_group_states,
                           const std::vector<int>& group_keys,
                           const std::vector<double>& values,
                           const std::vector<const std::string*>& value_users,
                           std::vector<SamplePrediction> predictions,
                           const EvalOptions& options) {
    EvalReport report;
    report.id = std::move(id);
    report.predictions = std::move(predictions);

    const int k_bits = n_group_states > 1 ? static_cast<int>(std::lround(std::log2(n_group_states)))
                                          : 1;
    for (int s = 0; s < n_group_states; ++s) {
        std::vector<double> group_values;
        std::vector<const std::string*> group_users;
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (group_keys[i] == s) {
                group_values.push_back(values[i]);
                group_users.push_back(value_users[i]);
            }
        }
        report.per_state.push_back(aggregate_group(state_label(s, k_bits), report.id,
                                                   group_values, group_users, options));
    }
    report.overall = aggregate_group("overall", report.id, values, value_users, options);
    return report;
}

}  // namespace

EvalReport loocv_reward(const Dataset& dataset, PredictorKind kind,
                        const FeatureSet& state_fs, const FeatureSet* char_fs,
                        const SimilarityConfig* sim_config, const EvalOptions& options) {
    if (kind == PredictorKind::per_action_charstate && char_fs == nullptr)
        throw DataError("loocv_reward: per_action_charstate needs a characteristic feature set");
    if (kind == PredictorKind::similarity_weighted && sim_config == nullptr)
        throw DataError("loocv_reward: similarity_weighted needs a similarity config");

    const auto pairs = pair_structure(dataset);
    const auto users = fold_users(dataset, pairs);
    if (users.size() < 2) throw DataError("loocv_reward: need at least two users with transitions");

    std::unordered_map<std::string, const UserProfile*> profile_of;
    for (const auto& p : dataset.profiles) profile_of[p.user_id] = &p;

    const bool char_grouping = kind == PredictorKind::per_action_charstate;
    const int n_group_states = char_grouping ? char_fs->n_states() : state_fs.n_states();

    // Eligibility of a user's samples for this analysis.
    auto user_eligible = [&](const std::string& user) {
        if (!char_grouping) return true;
        auto it = profile_of.find(user);
        if (it == profile_of.end()) return false;
        for (const auto& name : char_fs->selected) {
            if (!it->second->characteristic(name)) return false;
        }
        return true;
    };
    auto sim_eligible = [&](const std::string& user) {
        auto it = profile_of.find(user);
        if (it == profile_of.end()) return false;
        for (const auto& name : sim_config->characteristics) {
            if (!it->second->characteristic(name)) return false;
        }
        return true;
    };

    // Similarity normalization constants are a property of the corpus, not a
    // fitted statistic: computing them once keeps weight(u, v) symmetric and
    // identical across folds.
    CharacteristicRanges ranges;
    if (kind == PredictorKind::similarity_weighted) {
        ranges = compute_characteristic_ranges(dataset.profiles, sim_config->characteristics);
    }

    // Integer user handles keep the per-fold loops off string hashing.
    std::unordered_map<std::string, int> index_of_user;
    for (std::size_t i = 0; i < users.size(); ++i) index_of_user[users[i]] = static_cast<int>(i);
    std::vector<int> pair_user(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        pair_user[i] = index_of_user.at(dataset.sessions[pairs[i].from_index].user_id);
    }

    std::vector<int> group_keys;
    std::vector<double> errors;
    std::vector<const std::string*> error_users;
    std::vector<SamplePrediction> predictions;

    for (std::size_t fold = 0; fold < users.size(); ++fold) {
        const auto& held_out = users[fold];
        const int held_out_index = static_cast<int>(fold);
        if (!user_eligible(held_out)) continue;

        const auto stats = fold_stats(dataset, state_fs, held_out);
        FeatureSet fold_fs = state_fs;
        fold_fs.thresholds = stats.state_thresholds;

        FeatureSet fold_char_fs;
        std::vector<int> char_state_of(users.size(), -1);
        if (char_grouping) {
            fold_char_fs = *char_fs;
            fold_char_fs.thresholds = fold_char_thresholds(dataset, *char_fs, held_out);
        }
        auto char_state = [&](int user) -> int {
            if (char_state_of[static_cast<std::size_t>(user)] < 0) {
                char_state_of[static_cast<std::size_t>(user)] =
                    project(*profile_of.at(users[static_cast<std::size_t>(user)]), fold_char_fs);
            }
            return char_state_of[static_cast<std::size_t>(user)];
        };

        // Project every pair with this fold's thresholds and mean effort.
        std::vector<TransitionSample> samples;
        samples.reserve(pairs.size());
        for (const auto& pair : pairs) {
            const auto& from = dataset.sessions[pair.from_index];
            const auto& to = dataset.sessions[pair.to_index];
            TransitionSample t;
            t.user_id = from.user_id;
            t.state = project(from, fold_fs);
            t.action = pair.action;
            t.reward = effort_to_reward(pair.effort, stats.mean_effort);
            t.next_state = project(to, fold_fs);
            samples.push_back(std::move(t));
        }

        RewardTables tables(n_group_states);
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const auto& t = samples[i];
            if (pair_user[i] == held_out_index) continue;
            if (char_grouping) {
                if (!user_eligible(t.user_id)) continue;
                tables.add(char_state(pair_user[i]), t.action, t.reward);
            } else {
                tables.add(t.state, t.action, t.reward);
            }
        }

        // Per-target sample weights over the training users, plus a
        // (state, action) index of training samples for the weighted means.
        std::vector<double> weight_of_user;
        std::vector<std::vector<int>> cell_samples;
        bool target_sim_ok = false;
        if (kind == PredictorKind::similarity_weighted) {
            target_sim_ok = sim_eligible(held_out);
            if (target_sim_ok) {
                weight_of_user.assign(users.size(), -1.0);
                for (const auto& p : dataset.profiles) {
                    auto it = index_of_user.find(p.user_id);
                    if (it == index_of_user.end() || it->second == held_out_index) continue;
                    const auto w = similarity_weight(*profile_of.at(held_out), p, *sim_config,
                                                     ranges);
                    if (w) weight_of_user[static_cast<std::size_t>(it->second)] = *w;
                }
                cell_samples.assign(
                    static_cast<std::size_t>(n_group_states) * kNumActions, {});
                for (std::size_t i = 0; i < samples.size(); ++i) {
                    if (pair_user[i] == held_out_index) continue;
                    cell_samples[static_cast<std::size_t>(samples[i].state) * kNumActions +
                                 static_cast<std::size_t>(samples[i].action)]
                        .push_back(static_cast<int>(i));
                }
            }
        }

        auto predict = [&](const TransitionSample& t, int user) -> double {
            switch (kind) {
                case PredictorKind::overall_mean:
                    return tables.overall();
                case PredictorKind::per_action:
                    return tables.action_mean(t.action);
                case PredictorKind::per_action_state:
                    return tables.cell_mean(t.state, t.action);
                case PredictorKind::per_action_charstate:
                    return tables.cell_mean(char_state(user), t.action);
                case PredictorKind::similarity_weighted: {
                    if (target_sim_ok) {
                        double weight_sum = 0.0;
                        double weighted = 0.0;
                        const auto& cell =
                            cell_samples[static_cast<std::size_t>(t.state) * kNumActions +
                                         static_cast<std::size_t>(t.action)];
                        for (int i : cell) {
                            const double w =
                                weight_of_user[static_cast<std::size_t>(pair_user[static_cast<std::size_t>(i)])];
                            if (w < 0.0) continue;
                            weight_sum += w;
                            weighted += w * samples[static_cast<std::size_t>(i)].reward;
                        }
                        if (weight_sum > 0.0) return weighted / weight_sum;
                    }
                    return tables.cell_mean(t.state, t.action);
                }
            }
            return tables.overall();
        };

        for (std::size_t i = 0; i < samples.size(); ++i) {
            const auto& t = samples[i];
            if (pair_user[i] != held_out_index) continue;
            const double predicted = predict(t, pair_user[i]);
            const int key = char_grouping ? char_state(pair_user[i]) : t.state;
            group_keys.push_back(key);
            errors.push_back(std::fabs(predicted - t.reward));
            error_users.push_back(&held_out);
            predictions.push_back({t.user_id, key, t.action, predicted, t.reward});
        }
    }

    std::string id = predictor_name(kind);
    if (kind == PredictorKind::similarity_weighted) id += " " + sim_config->id();
    return finalize_report(std::move(id), n_group_states, group_keys, errors, error_users,
                           std::move(predictions), options);
}

EvalReport loocv_next_state(const Dataset& dataset, NextStateApproach approach,
                            const FeatureSet& state_fs, const EvalOptions& options) {
    const auto pairs = pair_structure(dataset);
    const auto users = fold_users(dataset, pairs);
    if (users.size() < 2)
        throw DataError("loocv_next_state: need at least two users with transitions");

    const int n_states = state_fs.n_states();
    std::vector<int> group_keys;
    std::vector<double> likelihoods;
    std::vector<const std::string*> value_users;
    std::vector<SamplePrediction> predictions;

    for (const auto& held_out : users) {
        const auto stats = fold_stats(dataset, state_fs, held_out);
        FeatureSet fold_fs = state_fs;
        fold_fs.thresholds = stats.state_thresholds;

        std::vector<TransitionSample> samples;
        samples.reserve(pairs.size());
        for (const auto& pair : pairs) {
            const auto& from = dataset.sessions[pair.from_index];
            const auto& to = dataset.sessions[pair.to_index];
            TransitionSample t;
            t.user_id = from.user_id;
            t.state = project(from, fold_fs);
            t.action = pair.action;
            t.reward = effort_to_reward(pair.effort, stats.mean_effort);
            t.next_state = project(to, fold_fs);
            samples.push_back(std::move(t));
        }

        // Transition counts over the training fold only.
        std::vector<double> counts, totals;
        if (approach == NextStateApproach::transition_fn) {
            counts.assign(static_cast<std::size_t>(n_states) * kNumActions * n_states, 0.0);
            totals.assign(static_cast<std::size_t>(n_states) * kNumActions, 0.0);
            for (const auto& t : samples) {
                if (t.user_id == held_out) continue;
                const auto row = (static_cast<std::size_t>(t.state) * kNumActions +
                                  static_cast<std::size_t>(t.action));
                counts[row * static_cast<std::size_t>(n_states) +
                       static_cast<std::size_t>(t.next_state)] += 1.0;
                totals[row] += 1.0;
            }
        }

        auto likelihood = [&](const TransitionSample& t) -> double {
            switch (approach) {
                case NextStateApproach::uniform:
                    return 1.0 / static_cast<double>(n_states);
                case NextStateApproach::stay:
                    return t.next_state == t.state ? 1.0 : 0.0;
                case NextStateApproach::transition_fn: {
                    const auto row = (static_cast<std::size_t>(t.state) * kNumActions +
                                      static_cast<std::size_t>(t.action));
                    if (totals[row] == 0.0) return 1.0 / static_cast<double>(n_states);
                    return counts[row * static_cast<std::size_t>(n_states) +
                                  static_cast<std::size_t>(t.next_state)] /
                           totals[row];
                }
            }
            return 0.0;
        };

        for (const auto& t : samples) {
            if (t.user_id != held_out) continue;
            const double value = likelihood(t);
            group_keys.push_back(t.state);
            likelihoods.push_back(value);
            value_users.push_back(&held_out);
            predictions.push_back({t.user_id, t.state, t.action, value,
                                   static_cast<double>(t.next_state)});
        }
    }

    return finalize_report(next_state_approach_name(approach), n_states, group_keys, likelihoods,
                           value_users, std::move(predictions), options);
}

std::vector<ConfigSearchResult> config_search(const Dataset& dataset,
                                              std::span<const SimilarityConfig> grid,
                                              const FeatureSet& state_fs,
                                              const EvalOptions& options) {
    if (grid.empty()) throw DataError("config_search: empty grid");
    std::vector<ConfigSearchResult> results;
    results.reserve(grid.size());
    for (const auto& config : grid) {
        const auto report = loocv_reward(dataset, PredictorKind::similarity_weighted, state_fs,
                                         nullptr, &config, options);
        results.push_back({config, report.overall});
    }
    std::stable_sort(results.begin(), results.end(),
                     [](const ConfigSearchResult& a, const ConfigSearchResult& b) {
                         return a.overall.mean < b.overall.mean;
                     });
    return results;
}

}  // namespace persuasion
