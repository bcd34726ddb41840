#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "persuasion/abstraction.hpp"
#include "persuasion/mdp.hpp"
#include "persuasion/types.hpp"

namespace persuasion {

enum class Population { uniform, session1_all, session1_low_reward };

const char* population_name(Population population);

/// Starting state distribution: uniform mass, the empirical distribution of
/// each user's earliest session, or that distribution restricted to users
/// whose first transition reward sits in the lowest quartile (nearest-rank
/// percentile, ties included). The empirical modes project session answers
/// through the feature set; the low-reward mode reads dataset.transitions.
Eigen::VectorXd initial_distribution(const Dataset& dataset, Population population,
                                     const FeatureSet& feature_set);

struct TrajectoryReport {
    std::string policy_id;
    std::string population_id;
    int horizon = 0;
    /// Distribution after each step, d_1..d_horizon.
    std::vector<Eigen::VectorXd> distributions;
    /// Mean reward of the transition taken at each step (from d_0..d_{h-1}).
    std::vector<double> mean_rewards;
};

/// The chain induced on states by a policy: row s mixes T[a] rows by pi(a|s).
Eigen::MatrixXd policy_transition_matrix(const MdpModel& model, const Policy& policy);

/// Exact expectation propagation of the population distribution.
TrajectoryReport evolve(const Eigen::VectorXd& d0, const Policy& policy, const MdpModel& model,
                        int horizon);

/// evolve plus the mean immediate reward collected at each step.
TrajectoryReport reward_trajectory(const Eigen::VectorXd& d0, const Policy& policy,
                                   const MdpModel& model, int horizon);

enum class EdgeClass { better, worse, same };

const char* edge_class_name(EdgeClass cls);

struct GraphEdge {
    int from = 0;
    int to = 0;
    double prob = 0.0;
    EdgeClass cls = EdgeClass::same;
};

/// Edges of the chain under a deterministic policy with probability at or
/// above the threshold. A move to a higher-value state is better, to a
/// lower-value one worse; self-loops are better at the argmax-V state and
/// worse at the argmin-V state.
std::vector<GraphEdge> transition_graph(const Policy& policy, const MdpModel& model,
                                        const ValueFunctions& vf, double threshold);

/// Agent-sampling cross-check of evolve; matches exact propagation within
/// O(1/sqrt(n_agents)) per state.
TrajectoryReport monte_carlo_evolve(const Eigen::VectorXd& d0, const Policy& policy,
                                    const MdpModel& model, int horizon, long n_agents,
                                    std::uint64_t seed);

}  // namespace persuasion
