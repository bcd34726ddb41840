#include "persuasion/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>

#include "persuasion/rng.hpp"

namespace persuasion {

namespace {

int state_bit(int state, int bit, int n_bits) { return (state >> (n_bits - 1 - bit)) & 1; }

Eigen::VectorXd random_row(Rng& rng, int n, double alpha, double uniform_mix) {
    Eigen::VectorXd row(n);
    for (int i = 0; i < n; ++i) row[i] = rng.gamma(alpha);
    row /= row.sum();
    row = (1.0 - uniform_mix) * row + (uniform_mix / n) * Eigen::VectorXd::Ones(n);
    return row;
}

int sample_categorical(Rng& rng, const Eigen::VectorXd& probs) {
    const double u = rng.uniform();
    double cum = 0.0;
    for (int i = 0; i < probs.size(); ++i) {
        cum += probs[i];
        if (u < cum) return static_cast<int>(i);
    }
    return static_cast<int>(probs.size()) - 1;
}

void validate_spec(const SynthSpec& spec) {
    if (spec.n_state_bits < 1 || spec.n_state_bits > 6)
        throw std::invalid_argument("synth: n_state_bits outside 1..6");
    if (spec.n_actions < 1) throw std::invalid_argument("synth: n_actions must be positive");
    if (static_cast<int>(spec.bit_reward_gaps.size()) != spec.n_state_bits)
        throw std::invalid_argument("synth: bit_reward_gaps size must equal n_state_bits");
    double gap_budget = 0.0;
    for (double gap : spec.bit_reward_gaps) {
        if (gap < -2.0 || gap > 2.0) throw std::invalid_argument("synth: gap outside [-2,2]");
        gap_budget += std::fabs(gap) / 2.0;
    }
    if (spec.action_base_spread < 0.0 || spec.action_base_spread + gap_budget > 1.0)
        throw std::invalid_argument("synth: base spread plus half gaps must stay within [-1,1]");
    if (static_cast<int>(spec.informative_questions.size()) != spec.n_state_bits)
        throw std::invalid_argument("synth: informative_questions size must equal n_state_bits");
    for (int q : spec.informative_questions) {
        if (q < 0 || q >= kNumQuestions)
            throw std::invalid_argument("synth: informative question index outside 0..7");
    }
    if (spec.dirichlet_alpha <= 0.0) throw std::invalid_argument("synth: alpha must be positive");
    if (spec.uniform_mix < 0.0 || spec.uniform_mix > 1.0)
        throw std::invalid_argument("synth: uniform_mix outside [0,1]");
    if (spec.spike_mass < 0.0 || spec.spike_mass >= 1.0)
        throw std::invalid_argument("synth: spike_mass outside [0,1)");
    if (spec.responsive_characteristic >= spec.n_characteristics)
        throw std::invalid_argument("synth: responsive characteristic index out of range");
}

}  // namespace

GroundTruth generate_mdp(const SynthSpec& spec, std::uint64_t seed) {
    validate_spec(spec);
    const int n_states = 1 << spec.n_state_bits;

    Rng rng(seed);
    constexpr int kMaxAttempts = 1000;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        MdpModel model;
        model.n_states = n_states;
        model.n_actions = spec.n_actions;
        model.gamma = 0.85;
        model.T.assign(static_cast<std::size_t>(spec.n_actions),
                       Eigen::MatrixXd::Zero(n_states, n_states));
        model.R = Eigen::MatrixXd::Zero(n_states, spec.n_actions);
        model.support.setZero(n_states, spec.n_actions);

        for (int a = 0; a < spec.n_actions; ++a) {
            // Fisher-Yates permutation of spike targets for this action.
            std::vector<int> targets(static_cast<std::size_t>(n_states));
            for (int s = 0; s < n_states; ++s) targets[static_cast<std::size_t>(s)] = s;
            for (int s = n_states - 1; s > 0; --s)
                std::swap(targets[static_cast<std::size_t>(s)],
                          targets[static_cast<std::size_t>(rng.uniform_int(s + 1))]);
            for (int s = 0; s < n_states; ++s) {
                Eigen::VectorXd row =
                    random_row(rng, n_states, spec.dirichlet_alpha, spec.uniform_mix);
                if (spec.spike_mass > 0.0) {
                    row *= 1.0 - spec.spike_mass;
                    row[targets[static_cast<std::size_t>(s)]] += spec.spike_mass;
                }
                model.T[static_cast<std::size_t>(a)].row(s) = row.transpose();
            }
        }
        // Base reward per action plus the declared shift for each set bit;
        // centering keeps sampled efforts near the generator's target mean.
        Eigen::VectorXd base(spec.n_actions);
        for (int a = 0; a < spec.n_actions; ++a)
            base[a] = rng.uniform(-0.5 * spec.action_base_spread, 0.5 * spec.action_base_spread);
        base.array() -= base.mean();
        for (int s = 0; s < n_states; ++s) {
            double shift = 0.0;
            for (int j = 0; j < spec.n_state_bits; ++j) {
                shift += spec.bit_reward_gaps[static_cast<std::size_t>(j)] *
                         (state_bit(s, j, spec.n_state_bits) - 0.5);
            }
            for (int a = 0; a < spec.n_actions; ++a) model.R(s, a) = base[a] + shift;
        }
        model.check_invariants();

        GroundTruth gt;
        gt.model = std::move(model);
        gt.spec = spec;
        gt.seed = seed;
        gt.informative_questions = spec.informative_questions;

        const auto vf = value_iteration(gt.model, Objective::optimal);
        gt.optimal = extract_policy(vf, Objective::optimal);
        if (spec.min_q_gap > 0.0 && spec.n_actions > 1) {
            double min_gap = std::numeric_limits<double>::infinity();
            for (int s = 0; s < n_states; ++s) {
                const int best = gt.optimal.actions[s];
                double runner_up = -std::numeric_limits<double>::infinity();
                for (int a = 0; a < spec.n_actions; ++a) {
                    if (a != best) runner_up = std::max(runner_up, vf.Q(s, a));
                }
                min_gap = std::min(min_gap, vf.Q(s, best) - runner_up);
            }
            if (min_gap < spec.min_q_gap) continue;  // resample deterministically
        }
        return gt;
    }
    throw std::runtime_error("generate_mdp: could not satisfy min_q_gap after " +
                             std::to_string(kMaxAttempts) + " attempts");
}

std::vector<TransitionSample> sample_transitions(const GroundTruth& gt, long n,
                                                 std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample_transitions: n must be positive");
    Rng rng(seed);
    std::vector<TransitionSample> samples;
    samples.reserve(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) {
        TransitionSample t;
        t.user_id = "sim";
        t.state = rng.uniform_int(gt.model.n_states);
        t.action = rng.uniform_int(gt.model.n_actions);
        t.next_state = sample_categorical(
            rng, gt.model.T[static_cast<std::size_t>(t.action)].row(t.state).transpose());
        t.reward = std::clamp(
            gt.model.R(t.state, t.action) + gt.spec.reward_noise_sd * rng.normal(), -1.0, 1.0);
        samples.push_back(std::move(t));
    }
    return samples;
}

Dataset sample_dataset(const GroundTruth& gt, int n_users, int sessions_per_user,
                       std::uint64_t seed) {
    if (n_users < 1) throw std::invalid_argument("sample_dataset: need at least one user");
    if (sessions_per_user < 1 || sessions_per_user > kMaxSessionIndex)
        throw std::invalid_argument("sample_dataset: sessions_per_user outside 1..5");

    const auto& spec = gt.spec;
    const int n_bits = spec.n_state_bits;
    Rng rng(seed);

    Dataset ds;
    for (int c = 0; c < spec.n_characteristics; ++c) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "char_%02d", c + 1);
        ds.characteristic_names.emplace_back(buf);
    }

    std::vector<bool> is_informative(kNumQuestions, false);
    std::vector<int> bit_of_question(kNumQuestions, -1);
    for (int j = 0; j < n_bits; ++j) {
        const int q = gt.informative_questions[static_cast<std::size_t>(j)];
        is_informative[static_cast<std::size_t>(q)] = true;
        bit_of_question[static_cast<std::size_t>(q)] = j;
    }

    for (int u = 0; u < n_users; ++u) {
        char id_buf[16];
        std::snprintf(id_buf, sizeof(id_buf), "u%05d", u + 1);
        const std::string user_id = id_buf;

        UserProfile profile;
        profile.user_id = user_id;
        double responsive_value = 0.5;
        for (int c = 0; c < spec.n_characteristics; ++c) {
            const double v = rng.uniform();
            profile.pre_characteristics[ds.characteristic_names[static_cast<std::size_t>(c)]] = v;
            if (c == spec.responsive_characteristic) responsive_value = v;
        }
        profile.involvement = rng.uniform();
        ds.profiles.push_back(std::move(profile));

        const double user_shift =
            spec.responsive_characteristic >= 0
                ? spec.characteristic_response * (responsive_value >= 0.5 ? 0.5 : -0.5)
                : 0.0;

        int state = rng.uniform_int(gt.model.n_states);
        int prev_state = 0;
        int prev_action = 0;
        for (int session = 1; session <= sessions_per_user; ++session) {
            SessionRecord rec;
            rec.user_id = user_id;
            rec.session_index = session;
            for (int q = 0; q < kNumQuestions; ++q) {
                if (is_informative[static_cast<std::size_t>(q)]) {
                    const int bit =
                        state_bit(state, bit_of_question[static_cast<std::size_t>(q)], n_bits);
                    // 1..2 below the mean, 4..5 above it, so the empirical
                    // mean threshold recovers the bit exactly.
                    rec.answers[static_cast<std::size_t>(q)] =
                        bit ? 4 + rng.uniform_int(2) : 1 + rng.uniform_int(2);
                } else {
                    rec.answers[static_cast<std::size_t>(q)] = 1 + rng.uniform_int(5);
                }
            }
            if (session > 1) {
                const double r = std::clamp(gt.model.R(prev_state, prev_action) + user_shift +
                                                spec.reward_noise_sd * rng.normal(),
                                            -1.0, 1.0);
                // Approximate inverse of the reward mapping at the
                // generator's target mean effort of 5.
                rec.effort =
                    std::clamp(static_cast<int>(std::lround(5.0 + 5.0 * r)), 0, kMaxEffort);
            }
            if (session < sessions_per_user) {
                const int action = rng.uniform_int(gt.model.n_actions);
                rec.action = action;
                ds.sessions.push_back(std::move(rec));
                prev_state = state;
                prev_action = action;
                state = sample_categorical(
                    rng, gt.model.T[static_cast<std::size_t>(action)].row(state).transpose());
            } else {
                ds.sessions.push_back(std::move(rec));
            }
        }
    }
    return ds;
}

}  // namespace persuasion
