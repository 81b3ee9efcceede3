#include "colearn/runner.hpp"

#include "colearn/error.hpp"
#include "colearn/loaders.hpp"
#include "colearn/rng.hpp"
#include "colearn/synth.hpp"
#include "colearn/util.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

namespace colearn {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const std::string t = trim(item);
        if (!t.empty()) out.push_back(t);
    }
    return out;
}

std::vector<std::string> default_train_subjects(const std::string& dataset) {
    if (dataset == "pamap2")
        return {"subject102", "subject103", "subject104", "subject105",
                "subject106", "subject107", "subject108", "subject109"};
    // HARTH stems for the 16 training subjects, numbering the files in
    // ascending name order.
    return {"S006", "S008", "S010", "S012", "S013", "S014", "S015", "S016",
            "S017", "S018", "S019", "S020", "S021", "S022", "S024", "S027"};
}

std::vector<std::string> default_test_subjects(const std::string& dataset) {
    if (dataset == "pamap2") return {"subject101"};
    return {"S023", "S025"};
}

// Parses the synthetic class profile:
//   uniform      every agent gets every class
//   rotate<k>    agent a gets the k classes starting at a (mod classes)
//   explicit     semicolon-separated per-agent rows of comma counts
std::vector<std::vector<int>> parse_profile(const RunConfig& config) {
    const int A = config.agents;
    const int C = config.classes;
    const int n = config.synth_windows_per_class;
    std::vector<std::vector<int>> profile(static_cast<std::size_t>(A),
                                          std::vector<int>(static_cast<std::size_t>(C), 0));
    if (config.synth_profile == "uniform") {
        for (auto& row : profile)
            for (auto& v : row) v = n;
        return profile;
    }
    if (config.synth_profile.starts_with("rotate")) {
        bool ok = false;
        const long long k = parse_int(config.synth_profile.substr(6), &ok);
        if (!ok || k < 1 || k > C)
            throw config_error("synth_profile '" + config.synth_profile +
                               "': expected rotate<k> with 1 <= k <= classes");
        for (int a = 0; a < A; ++a)
            for (int i = 0; i < k; ++i)
                profile[static_cast<std::size_t>(a)][static_cast<std::size_t>((a + i) % C)] = n;
        return profile;
    }
    // explicit matrix
    std::vector<std::string> row_strs;
    {
        std::stringstream ss(config.synth_profile);
        std::string item;
        while (std::getline(ss, item, ';')) row_strs.push_back(item);
    }
    if (static_cast<int>(row_strs.size()) != A)
        throw config_error("synth_profile matrix has " + std::to_string(row_strs.size()) +
                           " rows, expected one per agent (" + std::to_string(A) + ")");
    for (int a = 0; a < A; ++a) {
        const auto cells = split_list(row_strs[static_cast<std::size_t>(a)]);
        if (static_cast<int>(cells.size()) != C)
            throw config_error("synth_profile row " + std::to_string(a) + " has " +
                               std::to_string(cells.size()) + " cells, expected " +
                               std::to_string(C));
        for (int c = 0; c < C; ++c) {
            bool ok = false;
            const long long v = parse_int(cells[static_cast<std::size_t>(c)], &ok);
            if (!ok || v < 0)
                throw config_error("synth_profile row " + std::to_string(a) + ": bad count '" +
                                   cells[static_cast<std::size_t>(c)] + "'");
            profile[static_cast<std::size_t>(a)][static_cast<std::size_t>(c)] = static_cast<int>(v);
        }
    }
    return profile;
}

ModelArchitecture arch_for(const RunConfig& config, int input_channels, int num_classes) {
    ModelArchitecture arch;
    arch.input_channels = input_channels;
    arch.window_length = config.window_length;
    arch.conv_out_channels = config.conv_out_channels;
    arch.conv_kernel = config.conv_kernel;
    arch.pool_kernel = config.pool_kernel;
    arch.num_classes = num_classes;
    arch.validate();
    return arch;
}

PreparedData build_synthetic(const RunConfig& config) {
    SynthSpec spec;
    spec.num_agents = config.agents;
    spec.num_classes = config.classes;
    spec.channels = config.channels;
    spec.window_length = config.window_length;
    spec.profile = parse_profile(config);
    spec.noise_level = config.noise_level;
    spec.train_ratio = config.split_ratio;

    PreparedData data;
    data.arch = arch_for(config, config.channels, config.classes);
    data.agents = synthesize_network_data(spec, config.seed);
    for (int a = 0; a < config.agents; ++a)
        data.agent_subjects.push_back("synthetic-agent" + std::to_string(a));
    data.global_eval = synthesize_eval_windows(config.classes, config.channels,
                                               config.window_length, config.synth_eval_per_class,
                                               config.noise_level, config.seed);
    data.test_subjects = {"synthetic-eval"};
    return data;
}

PreparedData build_from_files(const RunConfig& config) {
    const std::string root = config.resolved_data_dir();
    if (root.empty())
        throw data_error("dataset '" + config.dataset +
                         "' needs a data directory: set data_dir in the config or the "
                         "COLEARN_DATA_ROOT environment variable");
    if (!fs::exists(root))
        throw data_error("data directory does not exist: " + root);

    const bool is_pamap2 = config.dataset == "pamap2";
    auto train_subjects = split_list(config.train_subjects);
    if (train_subjects.empty()) train_subjects = default_train_subjects(config.dataset);
    auto test_subjects = split_list(config.test_subjects);
    if (test_subjects.empty()) test_subjects = default_test_subjects(config.dataset);

    const auto whitelist = is_pamap2 ? pamap2::default_activities() : harth::default_activities();
    const auto class_map = build_class_map(whitelist);
    const auto columns = pamap2::default_columns();

    auto load_one = [&](const std::string& stem) {
        std::vector<SubjectSeries> loaded =
            is_pamap2 ? load_pamap2(root, {stem}, columns, whitelist)
                      : load_harth(root, {stem}, whitelist);
        return clean(loaded.front());
    };

    PreparedData data;
    const int channels = is_pamap2 ? static_cast<int>(columns.size()) : 6;
    data.arch = arch_for(config, channels, static_cast<int>(class_map.size()));

    for (std::size_t i = 0; i < train_subjects.size(); ++i) {
        const auto series = load_one(train_subjects[i]);
        auto windows = make_windows(series, config.window_length, config.stride, class_map);
        AgentDataset ds;
        ds.class_map = class_map;
        if (!windows.empty()) {
            auto [train, test] = split_train_test(std::move(windows), config.split_ratio,
                                                  derive_seed(config.seed, "split", i));
            ds.train = std::move(train);
            ds.test = std::move(test);
        }
        ds.size_weight = ds.train.size();
        data.agents.push_back(std::move(ds));
        data.agent_subjects.push_back(train_subjects[i]);
    }

    for (const auto& stem : test_subjects) {
        const auto series = load_one(stem);
        auto windows = make_windows(series, config.window_length, config.stride, class_map);
        data.global_eval.insert(data.global_eval.end(), windows.begin(), windows.end());
        data.test_subjects.push_back(stem);
    }
    return data;
}

PreparedData build_data(const RunConfig& config) {
    return config.dataset == "synthetic" ? build_synthetic(config) : build_from_files(config);
}

WindowCache to_cache(const RunConfig& config, const PreparedData& data) {
    WindowCache cache;
    cache.dataset = config.dataset;
    cache.data_fingerprint = config.data_fingerprint();
    cache.channels = data.arch.input_channels;
    cache.window_length = data.arch.window_length;
    cache.class_map = data.agents.empty() ? std::map<int, int>{} : data.agents.front().class_map;
    cache.agent_subjects = data.agent_subjects;
    cache.agents = data.agents;
    cache.eval_subjects = data.test_subjects;
    cache.eval_groups.resize(data.test_subjects.size());
    std::map<std::string, std::size_t> group_of;
    for (std::size_t i = 0; i < data.test_subjects.size(); ++i) group_of[data.test_subjects[i]] = i;
    for (const auto& w : data.global_eval) {
        const auto it = group_of.find(w.subject_id);
        cache.eval_groups[it == group_of.end() ? 0 : it->second].push_back(w);
    }
    return cache;
}

PreparedData from_cache(const RunConfig& config, WindowCache cache) {
    PreparedData data;
    data.arch = arch_for(config, cache.channels, static_cast<int>(cache.class_map.size()));
    data.agents = std::move(cache.agents);
    data.agent_subjects = std::move(cache.agent_subjects);
    data.test_subjects = std::move(cache.eval_subjects);
    for (auto& group : cache.eval_groups)
        data.global_eval.insert(data.global_eval.end(), group.begin(), group.end());
    return data;
}

ExperimentSetup make_setup(const RunConfig& config, PreparedData data) {
    ExperimentSetup setup;
    setup.dataset = config.dataset;
    setup.arch = data.arch;
    setup.agent_data = std::move(data.agents);
    setup.global_eval = std::move(data.global_eval);
    setup.test_subjects = std::move(data.test_subjects);
    setup.topology_kind = config.topology;
    setup.include_self = config.include_self;
    setup.standardize_inputs = config.standardize;
    setup.batch_size = config.batch_size;
    setup.epochs = config.epochs;
    setup.workers = config.workers;
    setup.master_seed = config.seed;
    setup.adam.alpha = config.adam_alpha;
    setup.adam.beta1 = config.adam_beta1;
    setup.adam.beta2 = config.adam_beta2;
    setup.adam.epsilon = config.adam_epsilon;
    return setup;
}

RunHistory dispatch(const RunConfig& config, ExperimentSetup setup) {
    const EvalScope scope = config.scope == "global" ? EvalScope::global : EvalScope::local;
    if (config.mode == "centralized") return run_centralized_baseline(setup, scope);
    const RunMode mode = config.mode == "collab" ? RunMode::collab : RunMode::isolated;
    return scope == EvalScope::global ? run_global_generalization(setup, mode)
                                      : run_local_generalization(setup, mode);
}

}  // namespace

PreparedData materialize_data(const RunConfig& config, bool* used_cache) {
    if (used_cache) *used_cache = false;
    const std::string cache_dir = config.resolved_cache_dir();
    if (window_cache_exists(cache_dir)) {
        try {
            auto cache = load_window_cache(cache_dir, config.data_fingerprint());
            if (used_cache) *used_cache = true;
            return from_cache(config, std::move(cache));
        } catch (const data_error& e) {
            std::cerr << "window cache ignored: " << e.what() << "\n";
        }
    }
    return build_data(config);
}

std::string cmd_prepare(const RunConfig& config) {
    config.validate();
    const std::string cache_dir = config.resolved_cache_dir();
    if (window_cache_exists(cache_dir)) {
        try {
            (void)load_window_cache(cache_dir, config.data_fingerprint());
            std::cout << "window cache up to date: " << cache_dir << "\n";
            return cache_dir;
        } catch (const data_error& e) {
            std::cout << "rebuilding window cache: " << e.what() << "\n";
        }
    }
    const auto data = build_data(config);
    save_window_cache(cache_dir, to_cache(config, data));
    std::size_t train_total = 0;
    for (const auto& a : data.agents) train_total += a.train.size();
    std::cout << "window cache written: " << cache_dir << " (" << data.agents.size()
              << " agents, " << train_total << " training windows, " << data.global_eval.size()
              << " held-out windows)\n";
    return cache_dir;
}

std::string cmd_run(const RunConfig& config) {
    config.validate();
    const std::string id = config.experiment_id();
    const fs::path run_dir = fs::path(config.out_dir) / id;
    const fs::path status_path = run_dir / "status.txt";

    if (fs::exists(status_path)) {
        std::ifstream st(status_path);
        std::string status;
        std::getline(st, status);
        if (status == "running")
            std::cerr << "warning: " << run_dir.string()
                      << " holds a stale partial run; overwriting\n";
    }
    fs::create_directories(run_dir);
    {
        std::ofstream st(status_path);
        st << "running\n";
    }

    auto setup = make_setup(config, materialize_data(config));
    const auto history = dispatch(config, std::move(setup));

    const std::string hex = to_hex(config.hash());
    {
        std::ofstream out(run_dir / ("results_" + hex + ".csv"));
        write_results_csv(out, id, history);
    }
    {
        std::ofstream out(run_dir / ("summary_" + hex + ".csv"));
        write_summary_csv(out, id, history);
    }
    {
        std::ofstream out(run_dir / ("roundlog_" + hex + ".csv"));
        write_round_log_csv(out, history.round_log);
    }
    {
        std::ofstream out(run_dir / ("config_" + hex + ".txt"));
        out << config.canonical_text();
    }
    const fs::path ck_dir = run_dir / "checkpoints";
    fs::create_directories(ck_dir);
    for (std::size_t i = 0; i < history.final_checkpoints.size(); ++i)
        save_checkpoint((ck_dir / ("agent" + std::to_string(i) + ".ckpt")).string(),
                        history.final_checkpoints[i]);

    const auto rows = summarize(history);
    std::cout << "experiment " << id << ": " << history.rounds << " rounds, "
              << history.total_batches << " total batches\n";
    if (!rows.empty()) {
        const auto& last = rows.back();
        std::cout << "final epoch " << last.epoch << ": avg macro-F1 "
                  << format_double(last.avg_macro_f1) << " over " << last.num_agents
                  << " agents\n";
    }
    {
        std::ofstream st(status_path, std::ios::trunc);
        st << "complete\n";
    }
    return run_dir.string();
}

// ---------------------------------------------------------------- compare

namespace {

struct LoadedRun {
    std::string dir;
    std::string experiment_id;
    std::string dataset;
    std::string mode;
    std::string scope;
    std::vector<std::string> result_lines;               // raw data rows
    std::map<long, std::pair<double, double>> summary;   // epoch -> (f1, loss)
};

std::string find_single(const fs::path& dir, const std::string& prefix) {
    std::string found;
    if (!fs::is_directory(dir)) throw config_error("not a run directory: " + dir.string());
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (name.starts_with(prefix) && name.ends_with(".csv")) {
            if (!found.empty())
                throw config_error("multiple " + prefix + "*.csv files in " + dir.string());
            found = entry.path().string();
        }
    }
    if (found.empty())
        throw config_error("no " + prefix + "*.csv in " + dir.string() +
                           " (is this a run directory?)");
    return found;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

LoadedRun load_run(const std::string& dir) {
    LoadedRun run;
    run.dir = dir;

    std::ifstream results(find_single(dir, "results_"));
    std::string line;
    std::getline(results, line);  // header
    while (std::getline(results, line)) {
        if (trim(line).empty()) continue;
        const auto f = split_fields(line);
        if (f.size() != 8) throw data_error("malformed results row in " + dir + ": " + line);
        if (run.experiment_id.empty()) {
            run.experiment_id = f[0];
            run.dataset = f[1];
            run.mode = f[2];
            run.scope = f[3];
        }
        run.result_lines.push_back(line);
    }

    std::ifstream summary(find_single(dir, "summary_"));
    std::getline(summary, line);
    while (std::getline(summary, line)) {
        if (trim(line).empty()) continue;
        const auto f = split_fields(line);
        if (f.size() != 8) throw data_error("malformed summary row in " + dir + ": " + line);
        bool ok = false;
        const long epoch = static_cast<long>(parse_int(f[4], &ok));
        const double f1 = parse_double(f[5], &ok);
        const double loss = parse_double(f[6], &ok);
        if (run.experiment_id.empty()) {
            run.experiment_id = f[0];
            run.dataset = f[1];
            run.mode = f[2];
            run.scope = f[3];
        }
        run.summary[epoch] = {f1, loss};
    }
    if (run.mode.empty()) throw data_error("run in " + dir + " has no records");
    return run;
}

}  // namespace

std::string cmd_compare(const std::vector<std::string>& run_dirs, const std::string& out_dir) {
    if (run_dirs.empty()) throw config_error("compare: no run directories given");

    std::vector<LoadedRun> runs;
    for (const auto& dir : run_dirs) runs.push_back(load_run(dir));

    for (const auto& run : runs) {
        if (run.dataset != runs.front().dataset)
            throw config_error("compare: runs mix datasets '" + runs.front().dataset + "' and '" +
                               run.dataset + "'");
        if (run.scope != runs.front().scope)
            throw config_error("compare: runs mix scopes '" + runs.front().scope + "' and '" +
                               run.scope + "'");
    }

    fs::create_directories(out_dir);

    // Plot-ready long format: all per-agent rows of all runs.
    const fs::path combined_path = fs::path(out_dir) / "combined.csv";
    {
        std::ofstream out(combined_path);
        out << "experiment_id,dataset,mode,scope,agent_id,epoch,macro_f1,mean_loss\n";
        for (const auto& run : runs)
            for (const auto& l : run.result_lines) out << l << "\n";
    }

    // Wide per-epoch table, one avg column per mode, plus the relative
    // improvement of collab over isolated where both exist.
    std::set<long> epochs;
    std::map<std::string, const LoadedRun*> by_mode;
    for (const auto& run : runs) {
        by_mode[run.mode] = &run;
        for (const auto& [e, v] : run.summary) epochs.insert(e);
    }

    const fs::path comparison_path = fs::path(out_dir) / "comparison.csv";
    {
        std::ofstream out(comparison_path);
        out << "dataset,scope,epoch";
        for (const auto& [mode, run] : by_mode) out << ",avg_macro_f1_" << mode;
        const bool have_pair = by_mode.contains("collab") && by_mode.contains("isolated");
        if (have_pair) out << ",rel_improvement";
        out << "\n";
        for (long e : epochs) {
            out << runs.front().dataset << "," << runs.front().scope << "," << e;
            for (const auto& [mode, run] : by_mode) {
                const auto it = run->summary.find(e);
                out << ",";
                if (it != run->summary.end()) out << format_double(it->second.first);
            }
            if (have_pair) {
                const auto ci = by_mode.at("collab")->summary.find(e);
                const auto ii = by_mode.at("isolated")->summary.find(e);
                out << ",";
                if (ci != by_mode.at("collab")->summary.end() &&
                    ii != by_mode.at("isolated")->summary.end() && ii->second.first != 0.0)
                    out << format_double((ci->second.first - ii->second.first) /
                                         ii->second.first);
            }
            out << "\n";
        }
    }

    // Final-epoch digest on stdout.
    for (const auto& [mode, run] : by_mode) {
        if (run->summary.empty()) continue;
        const auto& [epoch, v] = *run->summary.rbegin();
        std::cout << mode << ": final epoch " << epoch << " avg macro-F1 "
                  << format_double(v.first) << "\n";
    }
    if (by_mode.contains("collab") && by_mode.contains("isolated")) {
        const auto& c = *by_mode.at("collab")->summary.rbegin();
        const auto& i = *by_mode.at("isolated")->summary.rbegin();
        if (i.second.first != 0.0)
            std::cout << "relative improvement (collab vs isolated): "
                      << format_double((c.second.first - i.second.first) / i.second.first) << "\n";
    }
    return comparison_path.string();
}

}  // namespace colearn
