#pragma once

#include <array>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace persuasion {

// Fixed shapes of the session log format: eight Likert questionnaire items
// and five coaching actions (0=commitment, 1=consensus, 2=authority,
// 3=action planning, 4=no persuasion).
inline constexpr int kNumQuestions = 8;
inline constexpr int kNumActions = 5;
inline constexpr int kMaxSessionIndex = 5;
inline constexpr int kMaxEffort = 10;

const char* action_name(int action_id);

/// One person's answers for one session. Action is absent in a user's final
/// session; effort is absent in the first (it reports on the previous
/// session's activity).
struct SessionRecord {
    std::string user_id;
    int session_index = 0;  // 1..5
    std::array<int, kNumQuestions> answers{};  // Likert 1..5
    std::optional<int> action;  // 0..4
    std::optional<int> effort;  // 0..10
};

/// Per-user traits measured once: named pre-characteristics plus an optional
/// post-study involvement score (missing for dropouts).
struct UserProfile {
    std::string user_id;
    std::map<std::string, double> pre_characteristics;
    std::optional<double> involvement;

    /// Unified lookup; "involvement" resolves to the involvement field.
    std::optional<double> characteristic(const std::string& name) const {
        if (name == "involvement") return involvement;
        auto it = pre_characteristics.find(name);
        if (it == pre_characteristics.end()) return std::nullopt;
        return it->second;
    }
};

/// One abstract-state transition derived from two consecutive sessions.
struct TransitionSample {
    std::string user_id;
    int state = 0;
    int action = 0;
    double reward = 0.0;  // in [-1, 1]
    int next_state = 0;
};

struct Dataset {
    std::vector<SessionRecord> sessions;
    std::vector<UserProfile> profiles;
    /// Ordered characteristic column names from the profiles file.
    std::vector<std::string> characteristic_names;
    /// Derived transitions; populated once an abstraction is chosen.
    std::vector<TransitionSample> transitions;

    const UserProfile* find_profile(const std::string& user_id) const {
        for (const auto& p : profiles) {
            if (p.user_id == user_id) return &p;
        }
        return nullptr;
    }
};

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConvergenceError : std::runtime_error {
    ConvergenceError(const std::string& msg, double last_residual)
        : std::runtime_error(msg), residual(last_residual) {}
    double residual;
};

}  // namespace persuasion
