#include "colearn/runner.hpp"

#include "colearn/error.hpp"
#include "colearn/util.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

using namespace colearn;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("colearn_runner_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

RunConfig quick_config(const fs::path& out, int agents = 2, int epochs = 3) {
    RunConfig config;
    config.out_dir = out.string();
    config.agents = agents;
    config.classes = 2;
    config.channels = 1;
    config.window_length = 16;
    config.conv_out_channels = 4;
    config.synth_windows_per_class = 12;
    config.synth_eval_per_class = 5;
    config.epochs = epochs;
    config.batch_size = 8;
    config.noise_level = 0.2;
    config.seed = 77;
    return config;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path find_file(const fs::path& dir, const std::string& prefix) {
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.path().filename().string().starts_with(prefix)) return entry.path();
    FAIL("no file with prefix ", prefix, " in ", dir.string());
    return {};
}

// results rows without the experiment_id and mode columns
std::vector<std::string> metric_rows(const fs::path& results_csv) {
    std::ifstream in(results_csv);
    std::string line;
    std::getline(in, line);  // header
    std::vector<std::string> rows;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        // experiment_id,dataset,mode,scope,agent_id,epoch,macro_f1,mean_loss
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        REQUIRE(f.size() == 8);
        rows.push_back(f[1] + "," + f[3] + "," + f[4] + "," + f[5] + "," + f[6] + "," + f[7]);
    }
    return rows;
}

}  // namespace

TEST_CASE("the synthetic quickstart completes and writes results") {
    const auto out = temp_dir("smoke");
    const auto config = quick_config(out);
    const auto run_dir = cmd_run(config);

    CHECK(fs::exists(find_file(run_dir, "results_")));
    CHECK(fs::exists(find_file(run_dir, "summary_")));
    CHECK(fs::exists(find_file(run_dir, "roundlog_")));
    CHECK(fs::exists(find_file(run_dir, "config_")));
    CHECK(slurp(fs::path(run_dir) / "status.txt") == "complete\n");

    const auto rows = metric_rows(find_file(run_dir, "results_"));
    CHECK(rows.size() == 2 * 3);  // agents x epochs
    fs::remove_all(out);
}

TEST_CASE("re-running the same config reproduces byte-identical CSVs") {
    const auto out = temp_dir("rerun");
    auto config = quick_config(out);

    const auto dir1 = cmd_run(config);
    const auto results1 = slurp(find_file(dir1, "results_"));
    const auto summary1 = slurp(find_file(dir1, "summary_"));
    const auto roundlog1 = slurp(find_file(dir1, "roundlog_"));

    const auto dir2 = cmd_run(config);
    CHECK(dir1 == dir2);
    CHECK(slurp(find_file(dir2, "results_")) == results1);
    CHECK(slurp(find_file(dir2, "summary_")) == summary1);
    CHECK(slurp(find_file(dir2, "roundlog_")) == roundlog1);

    // a different worker count may not change a single byte
    config.workers = 4;
    const auto dir3 = cmd_run(config);
    CHECK(dir3 == dir1);
    CHECK(slurp(find_file(dir3, "results_")) == results1);
    CHECK(slurp(find_file(dir3, "roundlog_")) == roundlog1);
    fs::remove_all(out);
}

TEST_CASE("paired collab/isolated runs start from identical parameters") {
    const auto out = temp_dir("paired");
    auto config = quick_config(out);
    const auto collab_dir = cmd_run(config);
    config.mode = "isolated";
    const auto isolated_dir = cmd_run(config);

    auto round0 = [](const fs::path& dir) {
        std::ifstream in(find_file(dir, "roundlog_"));
        std::string line;
        std::getline(in, line);
        std::map<std::string, std::string> pre;  // agent -> pre checksum
        while (std::getline(in, line)) {
            std::vector<std::string> f;
            std::stringstream ss(line);
            std::string cell;
            while (std::getline(ss, cell, ',')) f.push_back(cell);
            if (f.size() == 5 && f[0] == "0") pre[f[1]] = f[2];
        }
        return pre;
    };
    const auto a = round0(collab_dir);
    const auto b = round0(isolated_dir);
    REQUIRE(a.size() == 2);
    CHECK(a == b);
    fs::remove_all(out);
}

TEST_CASE("collab and centralized runs differ only in mode and metrics") {
    const auto out = temp_dir("modes");
    auto config = quick_config(out);
    // 10 windows/class -> 16 train windows/agent -> 2 batches per epoch,
    // merged 32 -> 4: the centralized epoch grid lines up exactly
    config.synth_windows_per_class = 10;
    const auto collab_dir = cmd_run(config);
    config.mode = "centralized";
    const auto central_dir = cmd_run(config);

    auto skeleton = [](const fs::path& dir) {
        // dataset, scope, agent, epoch columns only
        std::vector<std::string> rows;
        for (const auto& r : metric_rows(find_file(dir, "results_"))) {
            std::stringstream ss(r);
            std::string dataset, scope, agent, epoch;
            std::getline(ss, dataset, ',');
            std::getline(ss, scope, ',');
            std::getline(ss, agent, ',');
            std::getline(ss, epoch, ',');
            rows.push_back(dataset + "," + scope + "," + agent + "," + epoch);
        }
        return rows;
    };
    // both agents hold 2x12 windows -> merged batch count doubles, so the
    // centralized run covers the same epoch grid; the single centralized
    // series evaluates as one agent-0 row stream
    const auto collab_rows = skeleton(collab_dir);
    const auto central_rows = skeleton(central_dir);
    CHECK(!central_rows.empty());
    for (const auto& row : central_rows)
        CHECK(row.find("synthetic,global,0,") == 0);
    CHECK(collab_rows.size() == 2 * central_rows.size());
    fs::remove_all(out);
}

TEST_CASE("a 1-agent collaborative run matches the centralized baseline") {
    const auto out = temp_dir("degenerate");
    auto config = quick_config(out, /*agents=*/1, /*epochs=*/4);
    const auto collab_dir = cmd_run(config);
    config.mode = "centralized";
    const auto central_dir = cmd_run(config);

    const auto a = metric_rows(find_file(collab_dir, "results_"));
    const auto b = metric_rows(find_file(central_dir, "results_"));
    REQUIRE(a.size() == 4);
    CHECK(a == b);
    fs::remove_all(out);
}

TEST_CASE("prepare builds a cache that later runs load") {
    const auto out = temp_dir("prepare");
    auto config = quick_config(out);
    config.cache_dir = (out / "cache").string();

    const auto cache_dir = cmd_prepare(config);
    CHECK(window_cache_exists(cache_dir));
    const auto manifest1 = slurp(fs::path(cache_dir) / "manifest.txt");

    // second prepare is a no-op
    cmd_prepare(config);
    CHECK(slurp(fs::path(cache_dir) / "manifest.txt") == manifest1);

    bool used_cache = false;
    const auto data = materialize_data(config, &used_cache);
    CHECK(used_cache);
    CHECK(data.agents.size() == 2);
    CHECK(!data.global_eval.empty());

    // cached and freshly built runs must agree byte for byte
    const auto dir1 = cmd_run(config);
    const auto results_cached = slurp(find_file(dir1, "results_"));
    fs::remove_all(cache_dir);
    const auto dir2 = cmd_run(config);
    CHECK(slurp(find_file(dir2, "results_")) == results_cached);
    fs::remove_all(out);
}

TEST_CASE("a config change invalidates the cache and triggers a rebuild") {
    const auto out = temp_dir("invalidate");
    auto config = quick_config(out);
    config.cache_dir = (out / "cache").string();
    cmd_prepare(config);

    auto changed = config;
    changed.window_length = 8;  // different data fingerprint, same cache_dir
    bool used_cache = true;
    const auto data = materialize_data(changed, &used_cache);
    CHECK_FALSE(used_cache);
    CHECK(data.arch.window_length == 8);

    // prepare rewrites the cache for the new fingerprint
    cmd_prepare(changed);
    const auto reloaded = load_window_cache(changed.resolved_cache_dir(), changed.data_fingerprint());
    CHECK(reloaded.window_length == 8);
    fs::remove_all(out);
}

TEST_CASE("the manifest's per-agent counts are the aggregation weights") {
    const auto out = temp_dir("weights");
    auto config = quick_config(out);
    config.cache_dir = (out / "cache").string();
    cmd_prepare(config);

    const auto cache = load_window_cache(config.cache_dir, config.data_fingerprint());
    const auto data = materialize_data(config);
    REQUIRE(cache.agents.size() == data.agents.size());
    for (std::size_t i = 0; i < cache.agents.size(); ++i) {
        CHECK(cache.agents[i].train.size() == data.agents[i].size_weight);
        CHECK(cache.agents[i].size_weight == data.agents[i].size_weight);
    }
    fs::remove_all(out);
}

TEST_CASE("compare joins paired runs and reports the relative improvement") {
    const auto out = temp_dir("compare");
    auto config = quick_config(out, 2, 2);
    const auto collab_dir = cmd_run(config);
    config.mode = "isolated";
    const auto isolated_dir = cmd_run(config);

    const auto cmp_dir = out / "cmp";
    const auto comparison = cmd_compare({collab_dir, isolated_dir}, cmp_dir.string());
    const auto text = slurp(comparison);
    CHECK(text.find("avg_macro_f1_collab") != std::string::npos);
    CHECK(text.find("avg_macro_f1_isolated") != std::string::npos);
    CHECK(text.find("rel_improvement") != std::string::npos);
    CHECK(fs::exists(cmp_dir / "combined.csv"));

    // single run: passthrough table without the improvement column
    const auto single = cmd_compare({collab_dir}, (out / "cmp1").string());
    CHECK(slurp(single).find("rel_improvement") == std::string::npos);
    fs::remove_all(out);
}

TEST_CASE("compare rejects runs from different datasets or scopes") {
    const auto out = temp_dir("compare_bad");
    auto config = quick_config(out);
    const auto g = cmd_run(config);
    config.scope = "local";
    const auto l = cmd_run(config);
    CHECK_THROWS_AS(cmd_compare({g, l}, (out / "cmp").string()), config_error);
    CHECK_THROWS_AS(cmd_compare({}, (out / "cmp").string()), config_error);
    fs::remove_all(out);
}

TEST_CASE("local scope scores every agent on its own partition") {
    const auto out = temp_dir("local");
    auto config = quick_config(out, 3, 2);
    config.scope = "local";
    const auto dir = cmd_run(config);
    const auto rows = metric_rows(find_file(dir, "results_"));
    CHECK(rows.size() == 3 * 2);
    for (const auto& r : rows) CHECK(r.find("synthetic,local,") == 0);
    fs::remove_all(out);
}

TEST_CASE("missing dataset directories are actionable data errors") {
    RunConfig config;
    config.dataset = "pamap2";
    config.data_dir = "";
    unsetenv("COLEARN_DATA_ROOT");
    CHECK_THROWS_AS(materialize_data(config), data_error);

    config.data_dir = "/definitely/not/here";
    CHECK_THROWS_AS(materialize_data(config), data_error);
}

TEST_CASE("the CLI maps error classes to exit codes") {
    const char* cli = std::getenv("COLEARN_CLI");
    if (cli == nullptr) return;  // driven by ctest; skip under manual runs
    const auto out = temp_dir("cli");
    const std::string base = std::string(cli);
    const std::string null_sink = " >/dev/null 2>&1";

    auto exit_code = [](int status) { return WEXITSTATUS(status); };

    CHECK(exit_code(std::system((base + " run --set epochs=0" + null_sink).c_str())) == 1);
    CHECK(exit_code(std::system((base + " run --set bogus=1" + null_sink).c_str())) == 1);
    CHECK(exit_code(std::system((base + " run --set dataset=pamap2 --set data_dir=/nope --out-dir " +
                                 (out / "r").string() + null_sink)
                                    .c_str())) == 2);
    CHECK(exit_code(std::system((base +
                                 " run --set agents=2 --set classes=2 --set channels=1"
                                 " --set window_length=16 --set conv_out_channels=4"
                                 " --set synth_windows_per_class=12 --set epochs=1 --out-dir " +
                                 (out / "ok").string() + null_sink)
                                    .c_str())) == 0);
    fs::remove_all(out);
}
