#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <span>
#include <vector>

#include "persuasion/types.hpp"

namespace persuasion {

/// Tabular MDP estimated from transition samples: per-action transition
/// matrices, an expected-reward table, and the sample counts behind each
/// (state, action) cell.
struct MdpModel {
    int n_states = 0;
    int n_actions = 0;
    double gamma = 0.85;
    /// T[a](s, s') = probability of moving from s to s' under action a.
    std::vector<Eigen::MatrixXd> T;
    /// R(s, a) = expected immediate reward, in [-1, 1].
    Eigen::MatrixXd R;
    /// support(s, a) = number of samples behind the (s, a) estimates.
    Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> support;

    /// Throws std::logic_error if a row fails to be a distribution (sum
    /// 1 +- 1e-9, entries >= 0), R leaves [-1, 1], or gamma leaves [0, 1).
    void check_invariants() const;
};

enum class Objective { optimal, worst };

struct ValueFunctions {
    Eigen::VectorXd V;
    Eigen::MatrixXd Q;  // (state, action)
    double residual = 0.0;
    int iterations = 0;
    /// Sup-norm change after each sweep; residual_history.back() == residual.
    std::vector<double> residual_history;
};

/// Stochastic or deterministic per-state action assignment.
struct Policy {
    enum class Kind { deterministic, uniform };
    Kind kind = Kind::uniform;
    Eigen::VectorXi actions;  // deterministic only
    int n_actions = 0;

    static Policy deterministic(Eigen::VectorXi per_state_actions, int n_actions);
    static Policy uniform(int n_actions);

    double prob(int state, int action) const {
        if (kind == Kind::uniform) return 1.0 / static_cast<double>(n_actions);
        return actions[state] == action ? 1.0 : 0.0;
    }
};

/// Maps a 0..10 effort report to a reward in [-1, 1], centered so the mean
/// effort earns 0 and the spacing is uniform on each side of the mean.
/// Throws std::invalid_argument for effort outside [0, 10] or a degenerate
/// mean (<= 0 or >= 10).
double effort_to_reward(double effort, double mean_effort);

/// Maximum-likelihood estimation of T and R from samples. Unobserved
/// (state, action) pairs receive a uniform transition row; their reward
/// falls back to the action's mean over all states, then the overall mean.
MdpModel estimate_model(std::span<const TransitionSample> transitions,
                        int n_states, int n_actions, double gamma);

/// Value iteration to sup-norm tolerance. Objective::worst minimizes over
/// actions instead of maximizing. Throws ConvergenceError when max_iters
/// sweeps leave the residual above tolerance.
ValueFunctions value_iteration(const MdpModel& model, Objective objective,
                               double tolerance = 1e-9, int max_iters = 10000);

/// Greedy policy from Q; argmax for optimal, argmin for worst, ties broken
/// toward the lowest action id.
Policy extract_policy(const ValueFunctions& vf, Objective objective);

Policy uniform_policy(int n_actions);

/// Fixed-policy value function by iterated Bellman backups.
Eigen::VectorXd evaluate_policy(const MdpModel& model, const Policy& policy,
                                double tolerance = 1e-12, int max_iters = 100000);

/// Full-precision text serialization; reload reproduces the model exactly.
void write_model(std::ostream& out, const MdpModel& model);
MdpModel read_model(std::istream& in);

}  // namespace persuasion
