#include "persuasion/mdp.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace persuasion {

const char* action_name(int action_id) {
    switch (action_id) {
        case 0: return "commitment";
        case 1: return "consensus";
        case 2: return "authority";
        case 3: return "action_planning";
        case 4: return "no_persuasion";
        default: return "unknown";
    }
}

void MdpModel::check_invariants() const {
    if (n_states <= 0 || n_actions <= 0) throw std::logic_error("MdpModel: empty dimensions");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw std::logic_error("MdpModel: gamma outside [0,1)");
    if (static_cast<int>(T.size()) != n_actions) throw std::logic_error("MdpModel: T size mismatch");
    if (R.rows() != n_states || R.cols() != n_actions) throw std::logic_error("MdpModel: R shape mismatch");
    if (support.rows() != n_states || support.cols() != n_actions)
        throw std::logic_error("MdpModel: support shape mismatch");
    for (int a = 0; a < n_actions; ++a) {
        if (T[a].rows() != n_states || T[a].cols() != n_states)
            throw std::logic_error("MdpModel: T[a] shape mismatch");
        for (int s = 0; s < n_states; ++s) {
            if ((T[a].row(s).array() < 0.0).any())
                throw std::logic_error("MdpModel: negative transition probability");
            if (std::fabs(T[a].row(s).sum() - 1.0) > 1e-9)
                throw std::logic_error("MdpModel: transition row does not sum to 1");
        }
    }
    if ((R.array() < -1.0).any() || (R.array() > 1.0).any())
        throw std::logic_error("MdpModel: reward outside [-1,1]");
}

Policy Policy::deterministic(Eigen::VectorXi per_state_actions, int n_actions) {
    Policy p;
    p.kind = Kind::deterministic;
    p.actions = std::move(per_state_actions);
    p.n_actions = n_actions;
    return p;
}

Policy Policy::uniform(int n_actions) {
    Policy p;
    p.kind = Kind::uniform;
    p.n_actions = n_actions;
    return p;
}

Policy uniform_policy(int n_actions) { return Policy::uniform(n_actions); }

double effort_to_reward(double effort, double mean_effort) {
    if (!(effort >= 0.0 && effort <= 10.0))
        throw std::invalid_argument("effort_to_reward: effort outside [0,10]");
    if (!(mean_effort > 0.0 && mean_effort < 10.0))
        throw std::invalid_argument("effort_to_reward: degenerate mean effort");
    if (effort < mean_effort) return -1.0 + effort / mean_effort;
    if (effort > mean_effort) return 1.0 - (10.0 - effort) / (10.0 - mean_effort);
    return 0.0;
}

MdpModel estimate_model(std::span<const TransitionSample> transitions,
                        int n_states, int n_actions, double gamma) {
    if (transitions.empty()) throw std::invalid_argument("estimate_model: no transitions");
    if (n_states <= 0 || n_actions <= 0)
        throw std::invalid_argument("estimate_model: empty state or action space");

    MdpModel model;
    model.n_states = n_states;
    model.n_actions = n_actions;
    model.gamma = gamma;
    model.T.assign(static_cast<std::size_t>(n_actions),
                   Eigen::MatrixXd::Zero(n_states, n_states));
    model.R = Eigen::MatrixXd::Zero(n_states, n_actions);
    model.support.setZero(n_states, n_actions);

    Eigen::MatrixXd reward_sum = Eigen::MatrixXd::Zero(n_states, n_actions);
    Eigen::VectorXd action_reward_sum = Eigen::VectorXd::Zero(n_actions);
    Eigen::VectorXd action_count = Eigen::VectorXd::Zero(n_actions);
    double total_reward = 0.0;

    for (const auto& t : transitions) {
        if (t.state < 0 || t.state >= n_states || t.next_state < 0 || t.next_state >= n_states)
            throw std::invalid_argument("estimate_model: state index out of range");
        if (t.action < 0 || t.action >= n_actions)
            throw std::invalid_argument("estimate_model: action index out of range");
        model.T[static_cast<std::size_t>(t.action)](t.state, t.next_state) += 1.0;
        model.support(t.state, t.action) += 1;
        reward_sum(t.state, t.action) += t.reward;
        action_reward_sum[t.action] += t.reward;
        action_count[t.action] += 1.0;
        total_reward += t.reward;
    }
    const double overall_mean = total_reward / static_cast<double>(transitions.size());

    const double uniform_p = 1.0 / static_cast<double>(n_states);
    for (int a = 0; a < n_actions; ++a) {
        for (int s = 0; s < n_states; ++s) {
            const auto count = model.support(s, a);
            if (count > 0) {
                model.T[static_cast<std::size_t>(a)].row(s) /= static_cast<double>(count);
                model.R(s, a) = reward_sum(s, a) / static_cast<double>(count);
            } else {
                model.T[static_cast<std::size_t>(a)].row(s).setConstant(uniform_p);
                model.R(s, a) = action_count[a] > 0.0
                                    ? action_reward_sum[a] / action_count[a]
                                    : overall_mean;
            }
        }
    }
    return model;
}

ValueFunctions value_iteration(const MdpModel& model, Objective objective,
                               double tolerance, int max_iters) {
    const int n = model.n_states;
    ValueFunctions vf;
    vf.V = Eigen::VectorXd::Zero(n);
    vf.Q = Eigen::MatrixXd::Zero(n, model.n_actions);
    vf.residual_history.reserve(64);

    for (int iter = 1; iter <= max_iters; ++iter) {
        for (int a = 0; a < model.n_actions; ++a) {
            vf.Q.col(a) = model.R.col(a) +
                          model.gamma * (model.T[static_cast<std::size_t>(a)] * vf.V);
        }
        Eigen::VectorXd v_next;
        if (objective == Objective::optimal) {
            v_next = vf.Q.rowwise().maxCoeff();
        } else {
            v_next = vf.Q.rowwise().minCoeff();
        }
        const double delta = (v_next - vf.V).cwiseAbs().maxCoeff();
        vf.V = v_next;
        vf.residual = delta;
        vf.iterations = iter;
        vf.residual_history.push_back(delta);
        if (delta < tolerance) return vf;
    }
    throw ConvergenceError("value_iteration: no convergence after " +
                               std::to_string(max_iters) + " sweeps",
                           vf.residual);
}

Policy extract_policy(const ValueFunctions& vf, Objective objective) {
    const auto n = vf.Q.rows();
    Eigen::VectorXi actions(n);
    for (Eigen::Index s = 0; s < n; ++s) {
        int best = 0;
        for (int a = 1; a < vf.Q.cols(); ++a) {
            const bool better = objective == Objective::optimal
                                    ? vf.Q(s, a) > vf.Q(s, best)
                                    : vf.Q(s, a) < vf.Q(s, best);
            if (better) best = a;
        }
        actions[s] = best;
    }
    return Policy::deterministic(std::move(actions), static_cast<int>(vf.Q.cols()));
}

Eigen::VectorXd evaluate_policy(const MdpModel& model, const Policy& policy,
                                double tolerance, int max_iters) {
    const int n = model.n_states;
    // Collapse the policy into its induced chain and expected rewards.
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd r = Eigen::VectorXd::Zero(n);
    for (int s = 0; s < n; ++s) {
        for (int a = 0; a < model.n_actions; ++a) {
            const double p = policy.prob(s, a);
            if (p == 0.0) continue;
            P.row(s) += p * model.T[static_cast<std::size_t>(a)].row(s);
            r[s] += p * model.R(s, a);
        }
    }
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    for (int iter = 1; iter <= max_iters; ++iter) {
        Eigen::VectorXd v_next = r + model.gamma * (P * v);
        const double delta = (v_next - v).cwiseAbs().maxCoeff();
        v = std::move(v_next);
        if (delta < tolerance) return v;
    }
    throw ConvergenceError("evaluate_policy: no convergence", 0.0);
}

namespace {

std::string fmt_full(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void expect_token(std::istream& in, const std::string& want) {
    std::string got;
    in >> got;
    if (got != want) throw DataError("model file: expected '" + want + "', got '" + got + "'");
}

}  // namespace

void write_model(std::ostream& out, const MdpModel& model) {
    out << "mdp_model v1\n";
    out << "n_states " << model.n_states << "\n";
    out << "n_actions " << model.n_actions << "\n";
    out << "gamma " << fmt_full(model.gamma) << "\n";
    for (int a = 0; a < model.n_actions; ++a) {
        for (int s = 0; s < model.n_states; ++s) {
            out << "T " << a << " " << s;
            for (int s2 = 0; s2 < model.n_states; ++s2) {
                out << " " << fmt_full(model.T[static_cast<std::size_t>(a)](s, s2));
            }
            out << "\n";
        }
    }
    for (int s = 0; s < model.n_states; ++s) {
        out << "R " << s;
        for (int a = 0; a < model.n_actions; ++a) out << " " << fmt_full(model.R(s, a));
        out << "\n";
    }
    for (int s = 0; s < model.n_states; ++s) {
        out << "support " << s;
        for (int a = 0; a < model.n_actions; ++a) out << " " << model.support(s, a);
        out << "\n";
    }
}

MdpModel read_model(std::istream& in) {
    std::string magic, version;
    in >> magic >> version;
    if (magic != "mdp_model" || version != "v1") throw DataError("model file: bad header");
    MdpModel model;
    expect_token(in, "n_states");
    in >> model.n_states;
    expect_token(in, "n_actions");
    in >> model.n_actions;
    expect_token(in, "gamma");
    in >> model.gamma;
    if (!in || model.n_states <= 0 || model.n_actions <= 0)
        throw DataError("model file: bad dimensions");
    model.T.assign(static_cast<std::size_t>(model.n_actions),
                   Eigen::MatrixXd::Zero(model.n_states, model.n_states));
    model.R = Eigen::MatrixXd::Zero(model.n_states, model.n_actions);
    model.support.setZero(model.n_states, model.n_actions);
    for (int a = 0; a < model.n_actions; ++a) {
        for (int s = 0; s < model.n_states; ++s) {
            expect_token(in, "T");
            int ra = 0, rs = 0;
            in >> ra >> rs;
            if (ra != a || rs != s) throw DataError("model file: T rows out of order");
            for (int s2 = 0; s2 < model.n_states; ++s2)
                in >> model.T[static_cast<std::size_t>(a)](s, s2);
        }
    }
    for (int s = 0; s < model.n_states; ++s) {
        expect_token(in, "R");
        int rs = 0;
        in >> rs;
        if (rs != s) throw DataError("model file: R rows out of order");
        for (int a = 0; a < model.n_actions; ++a) in >> model.R(s, a);
    }
    for (int s = 0; s < model.n_states; ++s) {
        expect_token(in, "support");
        int rs = 0;
        in >> rs;
        if (rs != s) throw DataError("model file: support rows out of order");
        for (int a = 0; a < model.n_actions; ++a) in >> model.support(s, a);
    }
    if (!in) throw DataError("model file: truncated");
    return model;
}

}  // namespace persuasion
