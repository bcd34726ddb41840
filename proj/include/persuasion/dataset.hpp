#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "persuasion/abstraction.hpp"
#include "persuasion/types.hpp"

namespace persuasion {

/// Column names expected in the sessions file header.
struct ColumnSchema {
    std::string user_col = "user_id";
    std::string session_col = "session_index";
    std::string action_col = "action";
    std::string effort_col = "effort";
    std::array<std::string, kNumQuestions> answer_cols = {"q1", "q2", "q3", "q4",
                                                          "q5", "q6", "q7", "q8"};
};

struct RejectedRow {
    long line = 0;            // 1-based, header is line 1
    std::string column;       // offending column, empty when row-level
    std::string reason;
};

struct ParseReport {
    long rows_seen = 0;
    long rows_accepted = 0;
    std::vector<RejectedRow> rejected;

    bool clean() const { return rejected.empty(); }
};

/// Parses the sessions file. Bad rows are excluded from the dataset and
/// listed in the report with their line numbers; nothing is dropped
/// silently. Throws DataError when the file is unreadable or the header
/// does not carry the schema's columns.
ParseReport parse_sessions(std::istream& in, const ColumnSchema& schema, Dataset& dataset);
ParseReport parse_sessions_file(const std::string& path, const ColumnSchema& schema,
                                Dataset& dataset);

/// Parses the profiles file: user_id plus one column per characteristic,
/// with an optional "involvement" column. Empty cells mean absent.
ParseReport parse_profiles(std::istream& in, Dataset& dataset);
ParseReport parse_profiles_file(const std::string& path, Dataset& dataset);

/// A consecutive-session pair eligible to become a transition: the earlier
/// session carries the action, the later one reports the effort spent.
/// Session-index gaps never pair.
struct SessionPair {
    std::size_t from_index = 0;  // into dataset.sessions
    std::size_t to_index = 0;
    int action = 0;
    int effort = 0;
};

/// All valid pairs, ordered by (user_id, session index) so downstream
/// output is independent of input row order.
std::vector<SessionPair> pair_structure(const Dataset& dataset);

/// Consecutive pairs lost to a session-index gap (reported by validate).
long count_session_gaps(const Dataset& dataset);

using RewardFn = std::function<double(int effort)>;

/// Projects every valid session pair into a TransitionSample: state from the
/// earlier session's answers, next state from the later one's, reward from
/// the later session's effort report.
std::vector<TransitionSample> pair_transitions(const Dataset& dataset,
                                               const FeatureSet& feature_set,
                                               const RewardFn& reward_fn);

/// Mean over all effort reports present in the records.
double mean_effort(std::span<const SessionRecord> sessions);

struct ValidationReport {
    long users = 0;
    long sessions = 0;
    long profiles = 0;
    long pairable_transitions = 0;
    long session_gaps = 0;
    long missing_involvement = 0;
    long users_without_profile = 0;
    long effort_reports = 0;
    double effort_mean = 0.0;
    std::array<double, kNumQuestions> answer_means{};

    /// Key-value text with a stable key order.
    void write(std::ostream& out) const;
};

ValidationReport validate(const Dataset& dataset);

/// Round-trip writers for the same formats the parsers consume.
void write_sessions_csv(std::ostream& out, const Dataset& dataset,
                        const ColumnSchema& schema = {});
void write_profiles_csv(std::ostream& out, const Dataset& dataset);

}  // namespace persuasion
