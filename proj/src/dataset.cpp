#include "persuasion/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

namespace persuasion {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string current;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(current);
            current.clear();
        } else if (ch != '\r') {
            current += ch;
        }
    }
    fields.push_back(current);
    return fields;
}

bool parse_int(std::string_view text, int& out) {
    const char* begin = text.data();
    const char* end = begin + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc{} && ptr == end;
}

bool parse_double(std::string_view text, double& out) {
    double parsed = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, parsed, std::chars_format::general);
    if (ec != std::errc{} || ptr != end || !std::isfinite(parsed)) return false;
    out = parsed;
    return true;
}

int find_column(const std::vector<std::string>& header, const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
}

std::string fmt_full(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::string fmt_fixed(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6f", x);
    return buf;
}

}  // namespace

ParseReport parse_sessions(std::istream& in, const ColumnSchema& schema, Dataset& dataset) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("sessions file: empty");
    const auto header = split_csv_line(line);

    const int user_col = find_column(header, schema.user_col);
    const int session_col = find_column(header, schema.session_col);
    const int action_col = find_column(header, schema.action_col);
    const int effort_col = find_column(header, schema.effort_col);
    std::array<int, kNumQuestions> answer_cols{};
    for (int q = 0; q < kNumQuestions; ++q) {
        answer_cols[static_cast<std::size_t>(q)] =
            find_column(header, schema.answer_cols[static_cast<std::size_t>(q)]);
    }
    if (user_col < 0 || session_col < 0 || action_col < 0 || effort_col < 0 ||
        std::any_of(answer_cols.begin(), answer_cols.end(), [](int c) { return c < 0; })) {
        throw DataError("sessions file: header does not match the expected schema");
    }

    ParseReport report;
    std::set<std::pair<std::string, int>> seen;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        ++report.rows_seen;
        const auto fields = split_csv_line(line);
        auto field = [&](int col) -> std::string_view {
            return col < static_cast<int>(fields.size()) ? std::string_view(fields[static_cast<std::size_t>(col)])
                                                         : std::string_view{};
        };
        auto reject = [&](const std::string& column, const std::string& reason) {
            report.rejected.push_back({line_no, column, reason});
        };

        SessionRecord rec;
        rec.user_id = std::string(field(user_col));
        if (rec.user_id.empty()) {
            reject(schema.user_col, "empty user id");
            continue;
        }
        if (!parse_int(field(session_col), rec.session_index) || rec.session_index < 1 ||
            rec.session_index > kMaxSessionIndex) {
            reject(schema.session_col, "session index must be an integer in 1.." +
                                           std::to_string(kMaxSessionIndex));
            continue;
        }
        if (seen.count({rec.user_id, rec.session_index})) {
            reject(schema.session_col, "duplicate (user, session) pair");
            continue;
        }

        bool ok = true;
        for (int q = 0; q < kNumQuestions && ok; ++q) {
            const auto text = field(answer_cols[static_cast<std::size_t>(q)]);
            int value = 0;
            if (text.empty() || !parse_int(text, value) || value < 1 || value > 5) {
                reject(schema.answer_cols[static_cast<std::size_t>(q)],
                       "Likert answer must be an integer in 1..5");
                ok = false;
                break;
            }
            rec.answers[static_cast<std::size_t>(q)] = value;
        }
        if (!ok) continue;

        if (const auto text = field(action_col); !text.empty()) {
            int value = 0;
            if (!parse_int(text, value) || value < 0 || value >= kNumActions) {
                reject(schema.action_col, "unknown action id");
                continue;
            }
            rec.action = value;
        }
        if (const auto text = field(effort_col); !text.empty()) {
            int value = 0;
            if (!parse_int(text, value) || value < 0 || value > kMaxEffort) {
                reject(schema.effort_col, "effort must be an integer in 0.." +
                                              std::to_string(kMaxEffort));
                continue;
            }
            rec.effort = value;
        }

        seen.insert({rec.user_id, rec.session_index});
        dataset.sessions.push_back(std::move(rec));
        ++report.rows_accepted;
    }
    return report;
}

ParseReport parse_sessions_file(const std::string& path, const ColumnSchema& schema,
                                Dataset& dataset) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open sessions file: " + path);
    return parse_sessions(in, schema, dataset);
}

ParseReport parse_profiles(std::istream& in, Dataset& dataset) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("profiles file: empty");
    const auto header = split_csv_line(line);
    const int user_col = find_column(header, "user_id");
    if (user_col < 0) throw DataError("profiles file: missing user_id column");
    const int involvement_col = find_column(header, "involvement");

    dataset.characteristic_names.clear();
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (static_cast<int>(i) == user_col || static_cast<int>(i) == involvement_col) continue;
        if (header[i].empty()) throw DataError("profiles file: empty column name in header");
        dataset.characteristic_names.push_back(header[i]);
    }

    ParseReport report;
    std::unordered_set<std::string> seen;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        ++report.rows_seen;
        const auto fields = split_csv_line(line);
        auto field = [&](int col) -> std::string_view {
            return col < static_cast<int>(fields.size()) ? std::string_view(fields[static_cast<std::size_t>(col)])
                                                         : std::string_view{};
        };

        UserProfile profile;
        profile.user_id = std::string(field(user_col));
        if (profile.user_id.empty()) {
            report.rejected.push_back({line_no, "user_id", "empty user id"});
            continue;
        }
        if (seen.count(profile.user_id)) {
            report.rejected.push_back({line_no, "user_id", "duplicate user id"});
            continue;
        }

        bool ok = true;
        std::size_t name_idx = 0;
        for (std::size_t i = 0; i < header.size() && ok; ++i) {
            if (static_cast<int>(i) == user_col) continue;
            const auto text = field(static_cast<int>(i));
            const bool is_involvement = static_cast<int>(i) == involvement_col;
            const std::string& name = is_involvement ? header[i]
                                                     : dataset.characteristic_names[name_idx++];
            if (text.empty()) continue;  // absent value
            double value = 0.0;
            if (!parse_double(text, value)) {
                report.rejected.push_back({line_no, name, "not a number"});
                ok = false;
                break;
            }
            if (is_involvement) {
                profile.involvement = value;
            } else {
                profile.pre_characteristics[name] = value;
            }
        }
        if (!ok) continue;

        seen.insert(profile.user_id);
        dataset.profiles.push_back(std::move(profile));
        ++report.rows_accepted;
    }
    return report;
}

ParseReport parse_profiles_file(const std::string& path, Dataset& dataset) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open profiles file: " + path);
    return parse_profiles(in, dataset);
}

namespace {

// user -> sessions ordered by session index; users ordered lexicographically
std::map<std::string, std::vector<std::size_t>> sessions_by_user(const Dataset& dataset) {
    std::map<std::string, std::vector<std::size_t>> by_user;
    for (std::size_t i = 0; i < dataset.sessions.size(); ++i) {
        by_user[dataset.sessions[i].user_id].push_back(i);
    }
    for (auto& [user, indices] : by_user) {
        std::sort(indices.begin(), indices.end(), [&](std::size_t a, std::size_t b) {
            return dataset.sessions[a].session_index < dataset.sessions[b].session_index;
        });
    }
    return by_user;
}

}  // namespace

std::vector<SessionPair> pair_structure(const Dataset& dataset) {
    std::vector<SessionPair> pairs;
    for (const auto& [user, indices] : sessions_by_user(dataset)) {
        for (std::size_t i = 0; i + 1 < indices.size(); ++i) {
            const auto& from = dataset.sessions[indices[i]];
            const auto& to = dataset.sessions[indices[i + 1]];
            if (to.session_index != from.session_index + 1) continue;  // gap
            if (!from.action || !to.effort) continue;
            pairs.push_back({indices[i], indices[i + 1], *from.action, *to.effort});
        }
    }
    return pairs;
}

long count_session_gaps(const Dataset& dataset) {
    long gaps = 0;
    for (const auto& [user, indices] : sessions_by_user(dataset)) {
        for (std::size_t i = 0; i + 1 < indices.size(); ++i) {
            if (dataset.sessions[indices[i + 1]].session_index !=
                dataset.sessions[indices[i]].session_index + 1) {
                ++gaps;
            }
        }
    }
    return gaps;
}

std::vector<TransitionSample> pair_transitions(const Dataset& dataset,
                                               const FeatureSet& feature_set,
                                               const RewardFn& reward_fn) {
    std::vector<TransitionSample> transitions;
    for (const auto& pair : pair_structure(dataset)) {
        const auto& from = dataset.sessions[pair.from_index];
        const auto& to = dataset.sessions[pair.to_index];
        TransitionSample t;
        t.user_id = from.user_id;
        t.state = project(from, feature_set);
        t.action = pair.action;
        t.reward = reward_fn(pair.effort);
        t.next_state = project(to, feature_set);
        transitions.push_back(std::move(t));
    }
    return transitions;
}

double mean_effort(std::span<const SessionRecord> sessions) {
    double sum = 0.0;
    long count = 0;
    for (const auto& s : sessions) {
        if (s.effort) {
            sum += *s.effort;
            ++count;
        }
    }
    if (count == 0) throw DataError("mean_effort: no effort reports");
    return sum / static_cast<double>(count);
}

ValidationReport validate(const Dataset& dataset) {
    ValidationReport report;
    std::unordered_set<std::string> users;
    std::array<double, kNumQuestions> sums{};
    double effort_sum = 0.0;
    for (const auto& s : dataset.sessions) {
        users.insert(s.user_id);
        for (int q = 0; q < kNumQuestions; ++q)
            sums[static_cast<std::size_t>(q)] += s.answers[static_cast<std::size_t>(q)];
        if (s.effort) {
            effort_sum += *s.effort;
            ++report.effort_reports;
        }
    }
    report.users = static_cast<long>(users.size());
    report.sessions = static_cast<long>(dataset.sessions.size());
    report.profiles = static_cast<long>(dataset.profiles.size());
    report.pairable_transitions = static_cast<long>(pair_structure(dataset).size());
    report.session_gaps = count_session_gaps(dataset);
    for (const auto& p : dataset.profiles) {
        if (!p.involvement) ++report.missing_involvement;
    }
    std::unordered_set<std::string> with_profile;
    for (const auto& p : dataset.profiles) with_profile.insert(p.user_id);
    for (const auto& user : users) {
        if (!with_profile.count(user)) ++report.users_without_profile;
    }
    if (report.effort_reports > 0) report.effort_mean = effort_sum / report.effort_reports;
    for (int q = 0; q < kNumQuestions; ++q) {
        report.answer_means[static_cast<std::size_t>(q)] =
            report.sessions > 0 ? sums[static_cast<std::size_t>(q)] / report.sessions : 0.0;
    }
    return report;
}

void ValidationReport::write(std::ostream& out) const {
    out << "users " << users << "\n";
    out << "sessions " << sessions << "\n";
    out << "profiles " << profiles << "\n";
    out << "pairable_transitions " << pairable_transitions << "\n";
    out << "session_gaps " << session_gaps << "\n";
    out << "missing_involvement " << missing_involvement << "\n";
    out << "users_without_profile " << users_without_profile << "\n";
    out << "effort_reports " << effort_reports << "\n";
    out << "effort_mean " << fmt_fixed(effort_mean) << "\n";
    for (int q = 0; q < kNumQuestions; ++q) {
        out << "q" << (q + 1) << "_mean " << fmt_fixed(answer_means[static_cast<std::size_t>(q)])
            << "\n";
    }
}

void write_sessions_csv(std::ostream& out, const Dataset& dataset, const ColumnSchema& schema) {
    out << schema.user_col << "," << schema.session_col << "," << schema.action_col << ","
        << schema.effort_col;
    for (const auto& name : schema.answer_cols) out << "," << name;
    out << "\n";
    for (const auto& s : dataset.sessions) {
        out << s.user_id << "," << s.session_index << ",";
        if (s.action) out << *s.action;
        out << ",";
        if (s.effort) out << *s.effort;
        for (int q = 0; q < kNumQuestions; ++q) out << "," << s.answers[static_cast<std::size_t>(q)];
        out << "\n";
    }
}

void write_profiles_csv(std::ostream& out, const Dataset& dataset) {
    out << "user_id";
    for (const auto& name : dataset.characteristic_names) out << "," << name;
    out << ",involvement\n";
    for (const auto& p : dataset.profiles) {
        out << p.user_id;
        for (const auto& name : dataset.characteristic_names) {
            out << ",";
            auto it = p.pre_characteristics.find(name);
            if (it != p.pre_characteristics.end()) out << fmt_full(it->second);
        }
        out << ",";
        if (p.involvement) out << fmt_full(*p.involvement);
        out << "\n";
    }
}

}  // namespace persuasion
