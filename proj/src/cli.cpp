#include "persuasion/cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "persuasion/abstraction.hpp"
#include "persuasion/dataset.hpp"
#include "persuasion/evaluation.hpp"
#include "persuasion/mdp.hpp"
#include "persuasion/report.hpp"
#include "persuasion/similarity.hpp"
#include "persuasion/simulation.hpp"
#include "persuasion/synth.hpp"

namespace persuasion {

namespace {

namespace fs = std::filesystem;

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> items;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (!item.empty()) items.push_back(item);
    }
    return items;
}

std::string resolve_out_dir(const std::string& flag_value) {
    if (const char* env = std::getenv("PERSUASION_OUT_DIR")) {
        if (*env != '\0') return env;
    }
    return flag_value;
}

std::ofstream open_out(const fs::path& dir, const std::string& name) {
    fs::create_directories(dir);
    std::ofstream out(dir / name);
    if (!out) throw DataError("cannot write " + (dir / name).string());
    return out;
}

void print_rejections(const ParseReport& report, const std::string& which) {
    for (const auto& row : report.rejected) {
        std::cout << "rejected file=" << which << " line=" << row.line
                  << " column=" << row.column << " reason=" << row.reason << "\n";
    }
}

struct LoadedData {
    Dataset dataset;
    ParseReport sessions_report;
    ParseReport profiles_report;
    std::vector<std::pair<std::string, std::string>> input_digests;

    bool clean() const { return sessions_report.clean() && profiles_report.clean(); }
};

LoadedData load_data(const std::string& sessions_path, const std::string& profiles_path) {
    LoadedData data;
    data.sessions_report = parse_sessions_file(sessions_path, ColumnSchema{}, data.dataset);
    data.input_digests.emplace_back("sessions", file_digest(sessions_path));
    if (!profiles_path.empty()) {
        data.profiles_report = parse_profiles_file(profiles_path, data.dataset);
        data.input_digests.emplace_back("profiles", file_digest(profiles_path));
    }
    return data;
}

void require_clean(const LoadedData& data, bool lenient) {
    print_rejections(data.sessions_report, "sessions");
    print_rejections(data.profiles_report, "profiles");
    if (!data.clean() && !lenient) {
        throw DataError("input contains rejected rows (use --lenient to continue)");
    }
}

std::string group_row(const std::string& approach, const EvalGroup& group) {
    std::ostringstream row;
    row << approach << "\t" << group.key << "\t";
    if (group.n == 0) {
        row << "nan\tnan\tnan";
    } else {
        row << fmt(group.mean) << "\t" << fmt(group.ci_low) << "\t" << fmt(group.ci_high);
    }
    row << "\t" << group.n << "\n";
    return row.str();
}

void write_eval_report(std::ostream& out, const std::string& approach, const EvalReport& report) {
    for (const auto& group : report.per_state) out << group_row(approach, group);
    out << group_row(approach, report.overall);
}

// ---- subcommand configs ----

struct ValidateConfig {
    std::string sessions, profiles;
    bool lenient = false;
};

struct FitConfig {
    std::string sessions, profiles, out_dir;
    int k = 3;
    double gamma = 0.85;
    double tolerance = 1e-9;
    int max_iters = 10000;
    bool marginal = false;
    bool max_aggregation = false;
    std::string candidates;  // comma list, default all questions
    bool lenient = false;
};

struct EvaluateConfig {
    std::string sessions, profiles, out_dir;
    std::string analyses = "reward,next_state";
    std::string predictors = "overall_mean,per_action,per_action_state";
    std::string feature_set_file;
    std::string similarity_grid_file;
    int k = 3;
    int char_k = 3;
    double gamma = 0.85;
    std::string ci_method = "student_t";
    bool per_user = false;
    int bootstrap_resamples = 10000;
    bool lenient = false;
};

struct SimulateConfig {
    std::string artifacts, sessions, profiles, out_dir;
    int horizon = 20;
    std::string policies = "optimal,worst,uniform";
    std::string populations = "uniform";
    double graph_threshold = -1.0;  // -1 -> 1/|S|
    long mc_agents = 0;
    std::uint64_t seed = 1;
    bool lenient = false;
};

struct SynthConfig {
    std::string out_dir;
    int users = 671;
    int sessions_per_user = 5;
    std::uint64_t seed = 42;
    int state_bits = 3;
    int actions = kNumActions;
    std::string gaps = "0.4,0.3,0.2";
    double base_spread = 0.4;
    double min_q_gap = 0.0;
    double alpha = 0.6;
    double uniform_mix = 0.2;
    double spike_mass = 0.0;
    double noise_sd = 0.15;
    std::string informative = "1,4,6";
    int characteristics = 5;
    int responsive_char = -1;
    double response = 0.0;
};

int cmd_validate(const ValidateConfig& config) {
    const auto data = load_data(config.sessions, config.profiles);
    print_rejections(data.sessions_report, "sessions");
    print_rejections(data.profiles_report, "profiles");
    validate(data.dataset).write(std::cout);
    if (!data.clean() && !config.lenient) return 1;
    return 0;
}

int cmd_fit(const FitConfig& config) {
    auto data = load_data(config.sessions, config.profiles);
    require_clean(data, config.lenient);
    auto& ds = data.dataset;

    const auto candidates =
        config.candidates.empty() ? question_names() : split_list(config.candidates);
    SelectionOptions options;
    options.conditional = !config.marginal;
    options.aggregate_max = config.max_aggregation;
    options.vi_tolerance = config.tolerance;
    options.vi_max_iters = config.max_iters;
    const auto feature_set =
        select_state_features(ds, config.k, config.gamma, candidates, options);

    const double ebar = mean_effort(ds.sessions);
    ds.transitions = pair_transitions(
        ds, feature_set, [&](int effort) { return effort_to_reward(effort, ebar); });
    const auto model = estimate_model(ds.transitions, feature_set.n_states(), kNumActions,
                                      config.gamma);
    const auto vf_optimal =
        value_iteration(model, Objective::optimal, config.tolerance, config.max_iters);
    const auto vf_worst =
        value_iteration(model, Objective::worst, config.tolerance, config.max_iters);
    const auto pi_optimal = extract_policy(vf_optimal, Objective::optimal);
    const auto pi_worst = extract_policy(vf_worst, Objective::worst);

    const fs::path out_dir = resolve_out_dir(config.out_dir);
    {
        auto out = open_out(out_dir, "feature_set.txt");
        write_feature_set(out, feature_set);
    }
    {
        auto out = open_out(out_dir, "model.txt");
        write_model(out, model);
    }
    {
        auto out = open_out(out_dir, "policy.tsv");
        out << "state\tpi_optimal\tpi_worst\tV_optimal\tV_worst";
        for (int a = 0; a < kNumActions; ++a) out << "\tQ_optimal_" << a;
        out << "\n";
        for (int s = 0; s < model.n_states; ++s) {
            out << state_label(s, feature_set.k()) << "\t" << action_name(pi_optimal.actions[s])
                << "\t" << action_name(pi_worst.actions[s]) << "\t" << fmt(vf_optimal.V[s])
                << "\t" << fmt(vf_worst.V[s]);
            for (int a = 0; a < kNumActions; ++a) out << "\t" << fmt(vf_optimal.Q(s, a));
            out << "\n";
        }
    }
    {
        auto out = open_out(out_dir, "run_manifest.txt");
        std::vector<std::pair<std::string, std::string>> echo = {
            {"k", std::to_string(config.k)},
            {"gamma", fmt(config.gamma)},
            {"tolerance", fmt(config.tolerance, 12)},
            {"max_iters", std::to_string(config.max_iters)},
            {"scoring", config.marginal ? "marginal" : "conditional"},
            {"aggregation", config.max_aggregation ? "max" : "mean"},
            {"selected_features", [&] {
                 std::string names;
                 for (const auto& name : feature_set.selected) {
                     if (!names.empty()) names += "+";
                     names += name;
                 }
                 return names;
             }()},
            {"mean_effort", fmt(ebar)},
            {"transitions", std::to_string(ds.transitions.size())},
        };
        write_manifest(out, "fit", std::move(echo), data.input_digests);
    }
    std::cout << "fit: " << ds.transitions.size() << " transitions, features";
    for (const auto& name : feature_set.selected) std::cout << " " << name;
    std::cout << ", artifacts in " << out_dir.string() << "\n";
    return 0;
}

int cmd_evaluate(const EvaluateConfig& config) {
    auto data = load_data(config.sessions, config.profiles);
    require_clean(data, config.lenient);
    auto& ds = data.dataset;

    EvalOptions options;
    if (config.ci_method == "student_t") {
        options.ci_method = CiMethod::student_t;
    } else if (config.ci_method == "bootstrap") {
        options.ci_method = CiMethod::bootstrap;
    } else {
        throw CLI::ValidationError("--ci must be student_t or bootstrap");
    }
    options.per_user = config.per_user;
    options.bootstrap_resamples = config.bootstrap_resamples;

    FeatureSet feature_set;
    if (!config.feature_set_file.empty()) {
        std::ifstream in(config.feature_set_file);
        if (!in) throw DataError("cannot open feature set file: " + config.feature_set_file);
        feature_set = read_feature_set(in);
    } else {
        feature_set = select_state_features(ds, config.k, config.gamma, question_names());
    }

    const double ebar = mean_effort(ds.sessions);
    ds.transitions = pair_transitions(
        ds, feature_set, [&](int effort) { return effort_to_reward(effort, ebar); });

    const fs::path out_dir = resolve_out_dir(config.out_dir);
    const auto analyses = split_list(config.analyses);
    auto requested = [&](const std::string& name) {
        return std::find(analyses.begin(), analyses.end(), name) != analyses.end();
    };

    if (requested("reward")) {
        auto out = open_out(out_dir, "reward_eval.tsv");
        out << "approach\tstate\tmean_l1\tci_low\tci_high\tn\n";
        for (const auto& name : split_list(config.predictors)) {
            PredictorKind kind;
            if (name == "overall_mean") {
                kind = PredictorKind::overall_mean;
            } else if (name == "per_action") {
                kind = PredictorKind::per_action;
            } else if (name == "per_action_state") {
                kind = PredictorKind::per_action_state;
            } else {
                throw CLI::ValidationError("unknown predictor kind: " + name);
            }
            write_eval_report(out, name, loocv_reward(ds, kind, feature_set, nullptr, nullptr,
                                                      options));
        }
    }

    if (requested("next_state")) {
        auto out = open_out(out_dir, "next_state_eval.tsv");
        out << "approach\tstate\tmean_likelihood\tci_low\tci_high\tn\n";
        for (auto approach : {NextStateApproach::uniform, NextStateApproach::stay,
                              NextStateApproach::transition_fn}) {
            write_eval_report(out, next_state_approach_name(approach),
                              loocv_next_state(ds, approach, feature_set, options));
        }
    }

    std::vector<std::string> charstate_echo;
    if (requested("charstate")) {
        if (ds.profiles.empty()) throw DataError("charstate analysis needs --profiles");
        auto out = open_out(out_dir, "charstate_eval.tsv");
        out << "approach\tstate\tmean_l1\tci_low\tci_high\tn\n";
        for (auto mode : {CharacteristicMode::pre_only, CharacteristicMode::all}) {
            const auto char_fs =
                select_characteristic_features(ds, ds.transitions, config.char_k, mode);
            const std::string approach =
                mode == CharacteristicMode::pre_only ? "charstate_pre" : "charstate_all";
            std::string names;
            for (const auto& name : char_fs.selected) {
                if (!names.empty()) names += "+";
                names += name;
            }
            charstate_echo.push_back(approach + "=" + names);
            write_eval_report(out, approach,
                              loocv_reward(ds, PredictorKind::per_action_charstate, feature_set,
                                           &char_fs, nullptr, options));
        }
    }

    if (requested("similarity")) {
        if (ds.profiles.empty()) throw DataError("similarity analysis needs --profiles");
        std::vector<SimilarityConfig> grid;
        if (!config.similarity_grid_file.empty()) {
            std::ifstream in(config.similarity_grid_file);
            if (!in) throw DataError("cannot open similarity grid: " + config.similarity_grid_file);
            grid = parse_config_grid(in);
        } else {
            const auto pre =
                select_characteristic_features(ds, ds.transitions, config.char_k,
                                               CharacteristicMode::pre_only);
            const auto all = select_characteristic_features(ds, ds.transitions, config.char_k,
                                                            CharacteristicMode::all);
            auto all_names = ds.characteristic_names;
            all_names.push_back("involvement");
            grid = default_config_grid(pre.selected, all.selected, all_names);
        }
        const auto ranking = config_search(ds, grid, feature_set, options);
        auto out = open_out(out_dir, "similarity_rank.tsv");
        out << "rank\tconfig\tmean_l1\tci_low\tci_high\tn\n";
        for (std::size_t i = 0; i < ranking.size(); ++i) {
            const auto& result = ranking[i];
            out << (i + 1) << "\t" << result.config.id() << "\t" << fmt(result.overall.mean)
                << "\t" << fmt(result.overall.ci_low) << "\t" << fmt(result.overall.ci_high)
                << "\t" << result.overall.n << "\n";
        }
    }

    {
        auto out = open_out(out_dir, "run_manifest.txt");
        std::vector<std::pair<std::string, std::string>> echo = {
            {"analyses", config.analyses},
            {"predictors", config.predictors},
            {"k", std::to_string(config.k)},
            {"char_k", std::to_string(config.char_k)},
            {"gamma", fmt(config.gamma)},
            {"ci", config.ci_method},
            {"per_user", config.per_user ? "true" : "false"},
            {"mean_effort", fmt(ebar)},
        };
        for (const auto& entry : charstate_echo) echo.emplace_back("charstate_features", entry);
        write_manifest(out, "evaluate", std::move(echo), data.input_digests);
    }
    return 0;
}

int cmd_simulate(const SimulateConfig& config) {
    const fs::path artifact_dir = config.artifacts;
    const auto feature_set_path = artifact_dir / "feature_set.txt";
    const auto model_path = artifact_dir / "model.txt";
    std::ifstream fs_in(feature_set_path);
    if (!fs_in) throw DataError("missing artifact: " + feature_set_path.string());
    const auto feature_set = read_feature_set(fs_in);
    std::ifstream model_in(model_path);
    if (!model_in) throw DataError("missing artifact: " + model_path.string());
    const auto model = read_model(model_in);
    model.check_invariants();

    const auto vf_optimal = value_iteration(model, Objective::optimal);
    const auto vf_worst = value_iteration(model, Objective::worst);
    const auto pi_optimal = extract_policy(vf_optimal, Objective::optimal);
    const auto pi_worst = extract_policy(vf_worst, Objective::worst);

    std::vector<std::pair<std::string, Policy>> policies;
    for (const auto& name : split_list(config.policies)) {
        if (name == "optimal") {
            policies.emplace_back(name, pi_optimal);
        } else if (name == "worst") {
            policies.emplace_back(name, pi_worst);
        } else if (name == "uniform") {
            policies.emplace_back(name, uniform_policy(kNumActions));
        } else {
            throw CLI::ValidationError("unknown policy: " + name);
        }
    }

    const auto population_list = split_list(config.populations);
    LoadedData data;
    const bool needs_data = std::any_of(population_list.begin(), population_list.end(),
                                        [](const std::string& p) { return p != "uniform"; });
    if (needs_data) {
        if (config.sessions.empty())
            throw DataError("session-based populations need --sessions");
        data = load_data(config.sessions, config.profiles);
        require_clean(data, config.lenient);
        const double ebar = mean_effort(data.dataset.sessions);
        data.dataset.transitions = pair_transitions(
            data.dataset, feature_set,
            [&](int effort) { return effort_to_reward(effort, ebar); });
    }

    std::vector<std::pair<std::string, Eigen::VectorXd>> populations;
    for (const auto& name : population_list) {
        Population population;
        if (name == "uniform") {
            population = Population::uniform;
        } else if (name == "session1_all") {
            population = Population::session1_all;
        } else if (name == "session1_low_reward") {
            population = Population::session1_low_reward;
        } else {
            throw CLI::ValidationError("unknown population: " + name);
        }
        populations.emplace_back(name,
                                 initial_distribution(data.dataset, population, feature_set));
    }

    const fs::path out_dir = resolve_out_dir(config.out_dir);
    const int k = feature_set.k();
    {
        const double threshold = config.graph_threshold >= 0.0
                                     ? config.graph_threshold
                                     : 1.0 / static_cast<double>(model.n_states);
        auto out = open_out(out_dir, "transition_graph.tsv");
        out << "from\tto\tprob\tclass\n";
        for (const auto& edge : transition_graph(pi_optimal, model, vf_optimal, threshold)) {
            out << state_label(edge.from, k) << "\t" << state_label(edge.to, k) << "\t"
                << fmt(edge.prob) << "\t" << edge_class_name(edge.cls) << "\n";
        }
    }
    {
        auto dist_out = open_out(out_dir, "distribution_trajectory.tsv");
        auto reward_out = open_out(out_dir, "reward_trajectory.tsv");
        dist_out << "policy\tpopulation\tt\tstate\tmass\n";
        reward_out << "policy\tpopulation\tt\tmean_reward\n";
        for (const auto& [policy_name, policy] : policies) {
            for (const auto& [population_name, d0] : populations) {
                const auto trajectory = reward_trajectory(d0, policy, model, config.horizon);
                for (int s = 0; s < model.n_states; ++s) {
                    dist_out << policy_name << "\t" << population_name << "\t0\t"
                             << state_label(s, k) << "\t" << fmt(d0[s]) << "\n";
                }
                for (int t = 1; t <= config.horizon; ++t) {
                    const auto& d = trajectory.distributions[static_cast<std::size_t>(t - 1)];
                    for (int s = 0; s < model.n_states; ++s) {
                        dist_out << policy_name << "\t" << population_name << "\t" << t << "\t"
                                 << state_label(s, k) << "\t" << fmt(d[s]) << "\n";
                    }
                    reward_out << policy_name << "\t" << population_name << "\t" << t << "\t"
                               << fmt(trajectory.mean_rewards[static_cast<std::size_t>(t - 1)])
                               << "\n";
                }
            }
        }
    }
    if (config.mc_agents > 0) {
        auto out = open_out(out_dir, "mc_trajectory.tsv");
        out << "policy\tpopulation\tt\tstate\tmass\n";
        for (const auto& [policy_name, policy] : policies) {
            for (const auto& [population_name, d0] : populations) {
                const auto trajectory =
                    monte_carlo_evolve(d0, policy, model, config.horizon, config.mc_agents,
                                       config.seed);
                for (int t = 1; t <= config.horizon; ++t) {
                    const auto& d = trajectory.distributions[static_cast<std::size_t>(t - 1)];
                    for (int s = 0; s < model.n_states; ++s) {
                        out << policy_name << "\t" << population_name << "\t" << t << "\t"
                            << state_label(s, k) << "\t" << fmt(d[s]) << "\n";
                    }
                }
            }
        }
    }
    {
        auto out = open_out(out_dir, "run_manifest.txt");
        std::vector<std::pair<std::string, std::string>> echo = {
            {"horizon", std::to_string(config.horizon)},
            {"policies", config.policies},
            {"populations", config.populations},
            {"graph_threshold", fmt(config.graph_threshold)},
            {"mc_agents", std::to_string(config.mc_agents)},
            {"seed", std::to_string(config.seed)},
        };
        std::vector<std::pair<std::string, std::string>> inputs = {
            {"feature_set", file_digest(feature_set_path.string())},
            {"model", file_digest(model_path.string())},
        };
        for (const auto& input : data.input_digests) inputs.push_back(input);
        write_manifest(out, "simulate", std::move(echo), inputs);
    }
    return 0;
}

int cmd_synth(const SynthConfig& config) {
    SynthSpec spec;
    spec.n_state_bits = config.state_bits;
    spec.n_actions = config.actions;
    spec.bit_reward_gaps.clear();
    for (const auto& gap : split_list(config.gaps)) spec.bit_reward_gaps.push_back(std::stod(gap));
    spec.action_base_spread = config.base_spread;
    spec.min_q_gap = config.min_q_gap;
    spec.dirichlet_alpha = config.alpha;
    spec.uniform_mix = config.uniform_mix;
    spec.spike_mass = config.spike_mass;
    spec.reward_noise_sd = config.noise_sd;
    spec.informative_questions.clear();
    for (const auto& q : split_list(config.informative))
        spec.informative_questions.push_back(std::stoi(q));
    spec.n_characteristics = config.characteristics;
    spec.responsive_characteristic = config.responsive_char;
    spec.characteristic_response = config.response;

    const auto gt = generate_mdp(spec, config.seed);
    const auto dataset = sample_dataset(gt, config.users, config.sessions_per_user,
                                        config.seed + 1);

    const fs::path out_dir = resolve_out_dir(config.out_dir);
    {
        auto out = open_out(out_dir, "sessions.csv");
        write_sessions_csv(out, dataset);
    }
    {
        auto out = open_out(out_dir, "profiles.csv");
        write_profiles_csv(out, dataset);
    }
    {
        auto out = open_out(out_dir, "true_model.txt");
        write_model(out, gt.model);
    }
    {
        auto out = open_out(out_dir, "run_manifest.txt");
        std::vector<std::pair<std::string, std::string>> echo = {
            {"users", std::to_string(config.users)},
            {"sessions_per_user", std::to_string(config.sessions_per_user)},
            {"seed", std::to_string(config.seed)},
            {"state_bits", std::to_string(config.state_bits)},
            {"actions", std::to_string(config.actions)},
            {"gaps", config.gaps},
            {"base_spread", fmt(config.base_spread)},
            {"min_q_gap", fmt(config.min_q_gap)},
            {"alpha", fmt(config.alpha)},
            {"uniform_mix", fmt(config.uniform_mix)},
            {"spike_mass", fmt(config.spike_mass)},
            {"noise_sd", fmt(config.noise_sd)},
            {"informative", config.informative},
            {"characteristics", std::to_string(config.characteristics)},
            {"responsive_char", std::to_string(config.responsive_char)},
            {"response", fmt(config.response)},
        };
        write_manifest(out, "synth", std::move(echo), {});
    }
    std::cout << "synth: wrote " << dataset.sessions.size() << " sessions for "
              << dataset.profiles.size() << " users to " << out_dir.string() << "\n";
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"Session-log persuasion modeling: state abstraction, tabular MDP fitting, "
                 "cross-validated prediction, and population simulation"};
    app.require_subcommand(1);

    ValidateConfig validate_config;
    auto* validate_cmd = app.add_subcommand("validate", "Parse and summarize a corpus");
    validate_cmd->add_option("--sessions", validate_config.sessions, "Sessions CSV")->required();
    validate_cmd->add_option("--profiles", validate_config.profiles, "Profiles CSV");
    validate_cmd->add_flag("--lenient", validate_config.lenient,
                           "Exit 0 even when rows were rejected");

    FitConfig fit_config;
    auto* fit_cmd = app.add_subcommand("fit", "Select features, estimate the MDP, solve policies");
    fit_cmd->add_option("--sessions", fit_config.sessions, "Sessions CSV")->required();
    fit_cmd->add_option("--profiles", fit_config.profiles, "Profiles CSV");
    fit_cmd->add_option("--out", fit_config.out_dir, "Output directory")->required();
    fit_cmd->add_option("--k", fit_config.k, "State features to select")
        ->check(CLI::Range(1, kNumQuestions));
    fit_cmd->add_option("--gamma", fit_config.gamma, "Discount factor")
        ->check(CLI::Range(0.0, 0.999999));
    fit_cmd->add_option("--tolerance", fit_config.tolerance, "Value-iteration tolerance")
        ->check(CLI::PositiveNumber);
    fit_cmd->add_option("--max-iters", fit_config.max_iters, "Value-iteration sweep cap")
        ->check(CLI::PositiveNumber);
    fit_cmd->add_flag("--marginal-scoring", fit_config.marginal,
                      "Score candidates on two-state abstractions instead of conditioning on "
                      "already-selected features");
    fit_cmd->add_flag("--max-aggregation", fit_config.max_aggregation,
                      "Aggregate Q-differences by max over actions instead of weighted mean");
    fit_cmd->add_option("--candidates", fit_config.candidates,
                        "Comma list of candidate questions (default all)");
    fit_cmd->add_flag("--lenient", fit_config.lenient, "Continue despite rejected rows");

    EvaluateConfig evaluate_config;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "Leave-one-person-out analyses");
    evaluate_cmd->add_option("--sessions", evaluate_config.sessions, "Sessions CSV")->required();
    evaluate_cmd->add_option("--profiles", evaluate_config.profiles, "Profiles CSV");
    evaluate_cmd->add_option("--out", evaluate_config.out_dir, "Output directory")->required();
    evaluate_cmd->add_option("--analyses", evaluate_config.analyses,
                             "Comma list: reward,next_state,charstate,similarity");
    evaluate_cmd->add_option("--predictors", evaluate_config.predictors,
                             "Reward predictors: overall_mean,per_action,per_action_state");
    evaluate_cmd->add_option("--feature-set", evaluate_config.feature_set_file,
                             "Reuse a fitted feature_set.txt instead of selecting");
    evaluate_cmd->add_option("--similarity-grid", evaluate_config.similarity_grid_file,
                             "Similarity config grid file (default: built-in grid)");
    evaluate_cmd->add_option("--k", evaluate_config.k, "State features to select")
        ->check(CLI::Range(1, kNumQuestions));
    evaluate_cmd->add_option("--char-k", evaluate_config.char_k, "Characteristics to select")
        ->check(CLI::PositiveNumber);
    evaluate_cmd->add_option("--gamma", evaluate_config.gamma, "Discount factor")
        ->check(CLI::Range(0.0, 0.999999));
    evaluate_cmd->add_option("--ci", evaluate_config.ci_method, "student_t or bootstrap");
    evaluate_cmd->add_flag("--per-user", evaluate_config.per_user,
                           "Intervals over per-user mean errors");
    evaluate_cmd->add_option("--bootstrap-resamples", evaluate_config.bootstrap_resamples,
                             "Bootstrap resample count")
        ->check(CLI::PositiveNumber);
    evaluate_cmd->add_flag("--lenient", evaluate_config.lenient,
                           "Continue despite rejected rows");

    SimulateConfig simulate_config;
    auto* simulate_cmd =
        app.add_subcommand("simulate", "Evolve populations under fitted dynamics");
    simulate_cmd->add_option("--artifacts", simulate_config.artifacts,
                             "Directory holding feature_set.txt and model.txt from fit")
        ->required();
    simulate_cmd->add_option("--sessions", simulate_config.sessions,
                             "Sessions CSV (for empirical populations)");
    simulate_cmd->add_option("--profiles", simulate_config.profiles, "Profiles CSV");
    simulate_cmd->add_option("--out", simulate_config.out_dir, "Output directory")->required();
    simulate_cmd->add_option("--horizon", simulate_config.horizon, "Time steps")
        ->check(CLI::PositiveNumber);
    simulate_cmd->add_option("--policies", simulate_config.policies,
                             "Comma list: optimal,worst,uniform");
    simulate_cmd->add_option("--populations", simulate_config.populations,
                             "Comma list: uniform,session1_all,session1_low_reward");
    simulate_cmd->add_option("--graph-threshold", simulate_config.graph_threshold,
                             "Edge probability cutoff (default 1/|S|)");
    simulate_cmd->add_option("--mc-agents", simulate_config.mc_agents,
                             "Also run a Monte Carlo cross-check with this many agents");
    simulate_cmd->add_option("--seed", simulate_config.seed, "Monte Carlo seed");
    simulate_cmd->add_flag("--lenient", simulate_config.lenient,
                           "Continue despite rejected rows");

    SynthConfig synth_config;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a ground-truth corpus");
    synth_cmd->add_option("--out", synth_config.out_dir, "Output directory")->required();
    synth_cmd->add_option("--users", synth_config.users, "Users")->check(CLI::PositiveNumber);
    synth_cmd->add_option("--sessions-per-user", synth_config.sessions_per_user, "Sessions each")
        ->check(CLI::Range(1, kMaxSessionIndex));
    synth_cmd->add_option("--seed", synth_config.seed, "Generator seed");
    synth_cmd->add_option("--state-bits", synth_config.state_bits, "True state bits")
        ->check(CLI::Range(1, 6));
    synth_cmd->add_option("--actions", synth_config.actions, "Actions")
        ->check(CLI::Range(1, kNumActions));
    synth_cmd->add_option("--gaps", synth_config.gaps, "Per-bit reward gaps, comma list");
    synth_cmd->add_option("--base-spread", synth_config.base_spread, "Action base reward spread");
    synth_cmd->add_option("--min-q-gap", synth_config.min_q_gap, "Minimum per-state Q gap");
    synth_cmd->add_option("--alpha", synth_config.alpha, "Dirichlet concentration");
    synth_cmd->add_option("--uniform-mix", synth_config.uniform_mix, "Row mix toward uniform");
    synth_cmd->add_option("--spike-mass", synth_config.spike_mass,
                          "Mass concentrated on permutation targets per action");
    synth_cmd->add_option("--noise-sd", synth_config.noise_sd, "Reward noise sd");
    synth_cmd->add_option("--informative", synth_config.informative,
                          "Question slots carrying the state bits, comma list");
    synth_cmd->add_option("--chars", synth_config.characteristics, "Characteristic count");
    synth_cmd->add_option("--responsive-char", synth_config.responsive_char,
                          "Index of the reward-modulating characteristic (-1 none)");
    synth_cmd->add_option("--response", synth_config.response,
                          "Reward shift of the responsive characteristic");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (validate_cmd->parsed()) return cmd_validate(validate_config);
        if (fit_cmd->parsed()) return cmd_fit(fit_config);
        if (evaluate_cmd->parsed()) return cmd_evaluate(evaluate_config);
        if (simulate_cmd->parsed()) return cmd_simulate(simulate_config);
        if (synth_cmd->parsed()) return cmd_synth(synth_config);
    } catch (const ConvergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const CLI::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace persuasion
