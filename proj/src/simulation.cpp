#include "persuasion/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include "persuasion/rng.hpp"

namespace persuasion {

const char* population_name(Population population) {
    switch (population) {
        case Population::uniform: return "uniform";
        case Population::session1_all: return "session1_all";
        case Population::session1_low_reward: return "session1_low_reward";
    }
    return "unknown";
}

const char* edge_class_name(EdgeClass cls) {
    switch (cls) {
        case EdgeClass::better: return "better";
        case EdgeClass::worse: return "worse";
        case EdgeClass::same: return "same";
    }
    return "unknown";
}

namespace {

void check_distribution(const Eigen::VectorXd& d) {
    if ((d.array() < 0.0).any())
        throw std::invalid_argument("distribution has a negative entry");
    if (std::fabs(d.sum() - 1.0) > 1e-9)
        throw std::invalid_argument("distribution does not sum to 1");
}

Eigen::VectorXd first_session_histogram(const Dataset& dataset, const FeatureSet& fs) {
    // earliest session per user, users in lexicographic order
    std::map<std::string, const SessionRecord*> earliest;
    for (const auto& rec : dataset.sessions) {
        auto [it, inserted] = earliest.try_emplace(rec.user_id, &rec);
        if (!inserted && rec.session_index < it->second->session_index) it->second = &rec;
    }
    Eigen::VectorXd histogram = Eigen::VectorXd::Zero(fs.n_states());
    for (const auto& [user, rec] : earliest) histogram[project(*rec, fs)] += 1.0;
    return histogram;
}

}  // namespace

Eigen::VectorXd initial_distribution(const Dataset& dataset, Population population,
                                     const FeatureSet& feature_set) {
    const int n = feature_set.n_states();
    if (population == Population::uniform) {
        return Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
    }
    if (population == Population::session1_all) {
        Eigen::VectorXd histogram = first_session_histogram(dataset, feature_set);
        const double total = histogram.sum();
        if (total == 0.0) throw DataError("initial_distribution: no session records");
        return histogram / total;
    }

    // Lowest quartile of first transition rewards; transitions arrive in
    // (user, session) order, so the first occurrence is the first sample.
    std::vector<std::pair<std::string, const TransitionSample*>> first_of;
    std::set<std::string> seen;
    for (const auto& t : dataset.transitions) {
        if (seen.insert(t.user_id).second) first_of.emplace_back(t.user_id, &t);
    }
    if (first_of.empty())
        throw DataError("initial_distribution: dataset has no derived transitions");

    std::vector<double> first_rewards;
    first_rewards.reserve(first_of.size());
    for (const auto& [user, t] : first_of) first_rewards.push_back(t->reward);
    std::sort(first_rewards.begin(), first_rewards.end());
    const auto rank = static_cast<std::size_t>(
        std::ceil(0.25 * static_cast<double>(first_rewards.size())));
    const double cut = first_rewards[std::max<std::size_t>(rank, 1) - 1];

    Eigen::VectorXd histogram = Eigen::VectorXd::Zero(n);
    for (const auto& [user, t] : first_of) {
        if (t->reward <= cut) histogram[t->state] += 1.0;
    }
    const double total = histogram.sum();
    if (total == 0.0) throw DataError("initial_distribution: empty low-reward population");
    return histogram / total;
}

Eigen::MatrixXd policy_transition_matrix(const MdpModel& model, const Policy& policy) {
    const int n = model.n_states;
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
    for (int s = 0; s < n; ++s) {
        for (int a = 0; a < model.n_actions; ++a) {
            const double p = policy.prob(s, a);
            if (p > 0.0) P.row(s) += p * model.T[static_cast<std::size_t>(a)].row(s);
        }
    }
    return P;
}

TrajectoryReport evolve(const Eigen::VectorXd& d0, const Policy& policy, const MdpModel& model,
                        int horizon) {
    if (horizon < 1) throw std::invalid_argument("evolve: horizon must be at least 1");
    if (d0.size() != model.n_states) throw std::invalid_argument("evolve: dimension mismatch");
    check_distribution(d0);

    const Eigen::MatrixXd P = policy_transition_matrix(model, policy);
    TrajectoryReport report;
    report.horizon = horizon;
    report.distributions.reserve(static_cast<std::size_t>(horizon));
    Eigen::VectorXd d = d0;
    for (int t = 0; t < horizon; ++t) {
        d = P.transpose() * d;
        d /= d.sum();  // scrub float drift so long horizons stay normalized
        report.distributions.push_back(d);
    }
    return report;
}

TrajectoryReport reward_trajectory(const Eigen::VectorXd& d0, const Policy& policy,
                                   const MdpModel& model, int horizon) {
    if (horizon < 1) throw std::invalid_argument("reward_trajectory: horizon must be at least 1");
    if (d0.size() != model.n_states)
        throw std::invalid_argument("reward_trajectory: dimension mismatch");
    check_distribution(d0);

    Eigen::VectorXd policy_reward = Eigen::VectorXd::Zero(model.n_states);
    for (int s = 0; s < model.n_states; ++s) {
        for (int a = 0; a < model.n_actions; ++a) {
            policy_reward[s] += policy.prob(s, a) * model.R(s, a);
        }
    }

    const Eigen::MatrixXd P = policy_transition_matrix(model, policy);
    TrajectoryReport report;
    report.horizon = horizon;
    Eigen::VectorXd d = d0;
    for (int t = 0; t < horizon; ++t) {
        report.mean_rewards.push_back(d.dot(policy_reward));  // reward of step t+1 from d_t
        d = P.transpose() * d;
        d /= d.sum();
        report.distributions.push_back(d);
    }
    return report;
}

std::vector<GraphEdge> transition_graph(const Policy& policy, const MdpModel& model,
                                        const ValueFunctions& vf, double threshold) {
    if (policy.kind != Policy::Kind::deterministic)
        throw std::invalid_argument("transition_graph: needs a deterministic policy");
    const double v_max = vf.V.maxCoeff();
    const double v_min = vf.V.minCoeff();
    std::vector<GraphEdge> edges;
    for (int s = 0; s < model.n_states; ++s) {
        const auto& row = model.T[static_cast<std::size_t>(policy.actions[s])].row(s);
        for (int s2 = 0; s2 < model.n_states; ++s2) {
            const double p = row[s2];
            if (p < threshold) continue;
            EdgeClass cls = EdgeClass::same;
            if (s2 == s) {
                if (vf.V[s] == v_max) {
                    cls = EdgeClass::better;
                } else if (vf.V[s] == v_min) {
                    cls = EdgeClass::worse;
                }
            } else if (vf.V[s2] > vf.V[s]) {
                cls = EdgeClass::better;
            } else if (vf.V[s2] < vf.V[s]) {
                cls = EdgeClass::worse;
            }
            edges.push_back({s, s2, p, cls});
        }
    }
    return edges;
}

TrajectoryReport monte_carlo_evolve(const Eigen::VectorXd& d0, const Policy& policy,
                                    const MdpModel& model, int horizon, long n_agents,
                                    std::uint64_t seed) {
    if (horizon < 1) throw std::invalid_argument("monte_carlo_evolve: horizon must be at least 1");
    if (n_agents < 1) throw std::invalid_argument("monte_carlo_evolve: need at least one agent");
    if (d0.size() != model.n_states)
        throw std::invalid_argument("monte_carlo_evolve: dimension mismatch");
    check_distribution(d0);

    Rng rng(seed);
    const int n = model.n_states;
    auto sample_from = [&](const Eigen::VectorXd& probs) {
        const double u = rng.uniform();
        double cum = 0.0;
        for (int i = 0; i < n; ++i) {
            cum += probs[i];
            if (u < cum) return i;
        }
        return n - 1;
    };

    std::vector<int> states(static_cast<std::size_t>(n_agents));
    for (auto& s : states) s = sample_from(d0);

    TrajectoryReport report;
    report.horizon = horizon;
    for (int t = 0; t < horizon; ++t) {
        double reward_sum = 0.0;
        Eigen::VectorXd histogram = Eigen::VectorXd::Zero(n);
        for (auto& s : states) {
            const int a = policy.kind == Policy::Kind::deterministic
                              ? policy.actions[s]
                              : rng.uniform_int(model.n_actions);
            reward_sum += model.R(s, a);
            s = sample_from(model.T[static_cast<std::size_t>(a)].row(s).transpose());
            histogram[s] += 1.0;
        }
        report.mean_rewards.push_back(reward_sum / static_cast<double>(n_agents));
        report.distributions.push_back(histogram / static_cast<double>(n_agents));
    }
    return report;
}

}  // namespace persuasion
