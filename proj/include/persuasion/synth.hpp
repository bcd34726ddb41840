#pragma once

#include <cstdint>
#include <vector>

#include "persuasion/mdp.hpp"
#include "persuasion/types.hpp"

namespace persuasion {

/// Declarative shape of a generated ground-truth MDP and corpus.
struct SynthSpec {
    int n_state_bits = 3;
    int n_actions = kNumActions;
    /// Reward shift of bit=1 over bit=0, one entry per state bit, each in
    /// [-2, 2]. Zero marks an uninformative bit.
    std::vector<double> bit_reward_gaps = {0.4, 0.3, 0.2};
    /// Per-action base rewards are drawn uniformly within +-spread/2.
    double action_base_spread = 0.4;
    /// Resample until every state's best action leads the runner-up by at
    /// least this much in Q-value (0 disables the check).
    double min_q_gap = 0.0;
    /// Transition rows are Dirichlet(alpha) draws mixed toward uniform.
    double dirichlet_alpha = 0.6;
    double uniform_mix = 0.2;
    /// Optional mass concentrated on one target state per row; targets form
    /// a random permutation per action, which keeps state visitation
    /// balanced while making rows sharply estimable.
    double spike_mass = 0.0;
    double reward_noise_sd = 0.15;
    /// Which questionnaire slots carry the state bits; the rest are noise.
    std::vector<int> informative_questions = {1, 4, 6};
    int n_characteristics = 5;
    /// Index of the characteristic that modulates rewards (-1 for none) and
    /// the reward shift between its two binarized values.
    int responsive_characteristic = -1;
    double characteristic_response = 0.0;
};

struct GroundTruth {
    MdpModel model;
    SynthSpec spec;
    std::uint64_t seed = 0;
    std::vector<int> informative_questions;
    Policy optimal;  // of the true model
};

/// Builds a random MDP with the declared structure; identical output per seed.
/// Throws std::invalid_argument for gaps outside [-2, 2] or a reward
/// construction that cannot stay inside [-1, 1].
GroundTruth generate_mdp(const SynthSpec& spec, std::uint64_t seed);

/// I.i.d. transitions with uniform (state, action) visitation; rewards are
/// the true expected reward plus truncated Gaussian noise.
std::vector<TransitionSample> sample_transitions(const GroundTruth& gt, long n,
                                                 std::uint64_t seed);

/// Full session-file realism: per-user trajectories under uniform-random
/// actions, Likert answers consistent with the state bits, rewards pushed
/// through the inverse effort mapping onto the integer 0..10 grid.
Dataset sample_dataset(const GroundTruth& gt, int n_users, int sessions_per_user,
                       std::uint64_t seed);

}  // namespace persuasion
