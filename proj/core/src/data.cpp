#include "colearn/data.hpp"

#include "colearn/error.hpp"
#include "colearn/rng.hpp"
#include "colearn/util.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

namespace colearn {

SubjectSeries clean(const SubjectSeries& series, double max_gap_seconds) {
    const std::size_t T = series.length();
    const int C = series.num_channels;
    std::vector<char> drop(T, 0);
    SubjectSeries out = series;

    for (int c = 0; c < C; ++c) {
        std::size_t t = 0;
        bool any_value = false;
        while (t < T) {
            if (!std::isnan(series.at(c, t))) {
                any_value = true;
                ++t;
                continue;
            }
            std::size_t run_end = t;  // [t, run_end] all missing
            while (run_end + 1 < T && std::isnan(series.at(c, run_end + 1))) ++run_end;

            const bool has_left = t > 0;
            const bool has_right = run_end + 1 < T;
            const double gap_seconds =
                series.sample_rate_hz > 0.0
                    ? static_cast<double>(run_end - t + 1) / series.sample_rate_hz
                    : (has_left && has_right
                           ? series.timestamps[run_end + 1] - series.timestamps[t - 1]
                           : max_gap_seconds * 2.0);

            if (has_left && has_right && gap_seconds <= max_gap_seconds + 1e-12) {
                const double t0 = series.timestamps[t - 1];
                const double t1 = series.timestamps[run_end + 1];
                const double v0 = series.at(c, t - 1);
                const double v1 = series.at(c, run_end + 1);
                for (std::size_t u = t; u <= run_end; ++u) {
                    const double frac = t1 > t0 ? (series.timestamps[u] - t0) / (t1 - t0)
                                                : 0.5;
                    out.at(c, u) = v0 + (v1 - v0) * frac;
                }
            } else {
                for (std::size_t u = t; u <= run_end; ++u) drop[u] = 1;
            }
            t = run_end + 1;
        }
        if (!any_value && T > 0)
            throw data_error("subject " + series.subject_id + ": channel " + std::to_string(c) +
                             " is entirely missing");
    }

    const std::size_t kept = T - static_cast<std::size_t>(std::count(drop.begin(), drop.end(), 1));
    if (kept == T) return out;

    SubjectSeries compact;
    compact.subject_id = series.subject_id;
    compact.sample_rate_hz = series.sample_rate_hz;
    compact.num_channels = C;
    compact.timestamps.reserve(kept);
    compact.labels.reserve(kept);
    compact.channels.resize(static_cast<std::size_t>(C) * kept);
    std::size_t w = 0;
    for (std::size_t t = 0; t < T; ++t) {
        if (drop[t]) continue;
        compact.timestamps.push_back(out.timestamps[t]);
        compact.labels.push_back(out.labels[t]);
        for (int c = 0; c < C; ++c)
            compact.channels[static_cast<std::size_t>(c) * kept + w] = out.at(c, t);
        ++w;
    }
    return compact;
}

std::vector<SensorWindow> make_windows(const SubjectSeries& series, int window_length, int stride,
                                       const std::map<int, int>& class_map) {
    if (window_length < 1) throw usage_error("window_length must be >= 1");
    if (stride <= 0) stride = window_length;

    std::vector<SensorWindow> windows;
    const std::size_t T = series.length();
    const int C = series.num_channels;

    std::size_t run_start = 0;
    while (run_start < T) {
        std::size_t run_end = run_start;
        while (run_end + 1 < T && series.labels[run_end + 1] == series.labels[run_start]) ++run_end;

        const auto it = class_map.find(series.labels[run_start]);
        if (it != class_map.end()) {
            const std::size_t run_len = run_end - run_start + 1;
            for (std::size_t off = 0;
                 off + static_cast<std::size_t>(window_length) <= run_len;
                 off += static_cast<std::size_t>(stride)) {
                SensorWindow w;
                w.channels = C;
                w.length = window_length;
                w.label = it->second;
                w.subject_id = series.subject_id;
                w.values.resize(static_cast<std::size_t>(C) * window_length);
                for (int c = 0; c < C; ++c)
                    for (int t = 0; t < window_length; ++t)
                        w.at(c, t) = series.at(c, run_start + off + static_cast<std::size_t>(t));
                windows.push_back(std::move(w));
            }
        }
        run_start = run_end + 1;
    }
    return windows;
}

std::pair<std::vector<SensorWindow>, std::vector<SensorWindow>> split_train_test(
    std::vector<SensorWindow> windows, double ratio, std::uint64_t seed) {
    if (!(ratio > 0.0 && ratio < 1.0)) throw usage_error("split ratio must be in (0, 1)");

    Rng rng(seed);
    shuffle(windows, rng);
    const std::size_t n_train = static_cast<std::size_t>(
        std::ceil(ratio * static_cast<double>(windows.size())));

    std::vector<SensorWindow> train(windows.begin(),
                                    windows.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::vector<SensorWindow> test(windows.begin() + static_cast<std::ptrdiff_t>(n_train),
                                   windows.end());
    return {std::move(train), std::move(test)};
}

ChannelStats compute_channel_stats(const std::vector<SensorWindow>& windows) {
    if (windows.empty()) throw usage_error("compute_channel_stats: no windows");
    const int C = windows.front().channels;
    const int L = windows.front().length;
    const double n = static_cast<double>(windows.size()) * L;

    ChannelStats stats;
    stats.mean.assign(static_cast<std::size_t>(C), 0.0);
    stats.stdev.assign(static_cast<std::size_t>(C), 0.0);
    for (const auto& w : windows)
        for (int c = 0; c < C; ++c)
            for (int t = 0; t < L; ++t) stats.mean[static_cast<std::size_t>(c)] += w.at(c, t);
    for (int c = 0; c < C; ++c) stats.mean[static_cast<std::size_t>(c)] /= n;
    for (const auto& w : windows)
        for (int c = 0; c < C; ++c)
            for (int t = 0; t < L; ++t) {
                const double d = w.at(c, t) - stats.mean[static_cast<std::size_t>(c)];
                stats.stdev[static_cast<std::size_t>(c)] += d * d;
            }
    for (int c = 0; c < C; ++c)
        stats.stdev[static_cast<std::size_t>(c)] =
            std::sqrt(stats.stdev[static_cast<std::size_t>(c)] / n);
    return stats;
}

void standardize(std::vector<SensorWindow>& windows, const ChannelStats& stats) {
    for (auto& w : windows) {
        for (int c = 0; c < w.channels; ++c) {
            const double m = stats.mean[static_cast<std::size_t>(c)];
            const double s = stats.stdev[static_cast<std::size_t>(c)];
            if (s < 1e-12) {
                for (int t = 0; t < w.length; ++t) w.at(c, t) -= m;
            } else {
                for (int t = 0; t < w.length; ++t) w.at(c, t) = (w.at(c, t) - m) / s;
            }
        }
    }
}

std::map<int, int> build_class_map(const std::vector<int>& activity_ids) {
    std::vector<int> sorted = activity_ids;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    std::map<int, int> m;
    for (std::size_t i = 0; i < sorted.size(); ++i) m[sorted[i]] = static_cast<int>(i);
    return m;
}

// ------------------------------------------------------------------ cache

namespace {

constexpr const char* kManifestName = "manifest.txt";
constexpr const char* kArrayName = "windows.bin";

void write_window_row(std::ofstream& out, const SensorWindow& w) {
    auto put = [&out](double d) {
        const auto v = std::bit_cast<std::uint64_t>(d);
        unsigned char b[8];
        for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
        out.write(reinterpret_cast<const char*>(b), 8);
    };
    put(static_cast<double>(w.label));
    for (double d : w.values) put(d);
}

SensorWindow read_window_row(std::ifstream& in, int channels, int length,
                             const std::string& subject) {
    auto get = [&in]() {
        unsigned char b[8];
        in.read(reinterpret_cast<char*>(b), 8);
        if (!in) throw data_error("window cache: truncated array file");
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
        return std::bit_cast<double>(v);
    };
    SensorWindow w;
    w.channels = channels;
    w.length = length;
    w.subject_id = subject;
    w.label = static_cast<int>(get());
    w.values.resize(static_cast<std::size_t>(channels) * length);
    for (auto& d : w.values) d = get();
    return w;
}

}  // namespace

void save_window_cache(const std::string& dir, const WindowCache& cache) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);

    std::ofstream mf(fs::path(dir) / kManifestName);
    if (!mf) throw data_error("cannot write cache manifest in " + dir);
    mf << "format_version=1\n";
    mf << "dataset=" << cache.dataset << "\n";
    mf << "data_fingerprint=" << to_hex(cache.data_fingerprint) << "\n";
    mf << "channels=" << cache.channels << "\n";
    mf << "window_length=" << cache.window_length << "\n";
    mf << "num_agents=" << cache.agents.size() << "\n";
    mf << "class_map=";
    bool first = true;
    for (const auto& [raw, idx] : cache.class_map) {
        if (!first) mf << ",";
        mf << raw << ":" << idx;
        first = false;
    }
    mf << "\n";
    for (std::size_t i = 0; i < cache.agents.size(); ++i) {
        mf << "agent" << i << ".subject=" << cache.agent_subjects[i] << "\n";
        mf << "agent" << i << ".train_count=" << cache.agents[i].train.size() << "\n";
        mf << "agent" << i << ".test_count=" << cache.agents[i].test.size() << "\n";
    }
    mf << "num_eval_groups=" << cache.eval_groups.size() << "\n";
    for (std::size_t i = 0; i < cache.eval_groups.size(); ++i) {
        mf << "eval" << i << ".subject=" << cache.eval_subjects[i] << "\n";
        mf << "eval" << i << ".count=" << cache.eval_groups[i].size() << "\n";
    }
    if (!mf) throw data_error("failed writing cache manifest in " + dir);

    std::ofstream bf(fs::path(dir) / kArrayName, std::ios::binary);
    if (!bf) throw data_error("cannot write cache array in " + dir);
    for (const auto& agent : cache.agents) {
        for (const auto& w : agent.train) write_window_row(bf, w);
        for (const auto& w : agent.test) write_window_row(bf, w);
    }
    for (const auto& group : cache.eval_groups)
        for (const auto& w : group) write_window_row(bf, w);
    if (!bf) throw data_error("failed writing cache array in " + dir);
}

bool window_cache_exists(const std::string& dir) {
    namespace fs = std::filesystem;
    return fs::exists(fs::path(dir) / kManifestName) && fs::exists(fs::path(dir) / kArrayName);
}

WindowCache load_window_cache(const std::string& dir, std::uint64_t expected_fingerprint) {
    namespace fs = std::filesystem;
    std::ifstream mf(fs::path(dir) / kManifestName);
    if (!mf) throw data_error("window cache manifest not found in " + dir);

    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(mf, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    auto need = [&kv, &dir](const std::string& key) {
        const auto it = kv.find(key);
        if (it == kv.end()) throw data_error("window cache manifest in " + dir + " lacks key " + key);
        return it->second;
    };

    WindowCache cache;
    cache.dataset = need("dataset");
    {
        const std::string fp = need("data_fingerprint");
        cache.data_fingerprint = std::stoull(fp, nullptr, 16);
    }
    if (cache.data_fingerprint != expected_fingerprint)
        throw data_error("window cache in " + dir +
                         " was built from a different configuration (fingerprint " +
                         to_hex(cache.data_fingerprint) + ", expected " +
                         to_hex(expected_fingerprint) + "); re-run prepare");

    bool ok = false;
    cache.channels = static_cast<int>(parse_int(need("channels"), &ok));
    cache.window_length = static_cast<int>(parse_int(need("window_length"), &ok));
    const auto num_agents = static_cast<std::size_t>(parse_int(need("num_agents"), &ok));

    {
        std::stringstream ss(need("class_map"));
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (item.empty()) continue;
            const auto colon = item.find(':');
            cache.class_map[static_cast<int>(parse_int(item.substr(0, colon), &ok))] =
                static_cast<int>(parse_int(item.substr(colon + 1), &ok));
        }
    }

    std::ifstream bf(fs::path(dir) / kArrayName, std::ios::binary);
    if (!bf) throw data_error("window cache array not found in " + dir);

    for (std::size_t i = 0; i < num_agents; ++i) {
        const std::string prefix = "agent" + std::to_string(i);
        const std::string subject = need(prefix + ".subject");
        const auto n_train = static_cast<std::size_t>(parse_int(need(prefix + ".train_count"), &ok));
        const auto n_test = static_cast<std::size_t>(parse_int(need(prefix + ".test_count"), &ok));
        AgentDataset agent;
        agent.class_map = cache.class_map;
        agent.train.reserve(n_train);
        agent.test.reserve(n_test);
        for (std::size_t k = 0; k < n_train; ++k)
            agent.train.push_back(read_window_row(bf, cache.channels, cache.window_length, subject));
        for (std::size_t k = 0; k < n_test; ++k)
            agent.test.push_back(read_window_row(bf, cache.channels, cache.window_length, subject));
        agent.size_weight = agent.train.size();
        cache.agent_subjects.push_back(subject);
        cache.agents.push_back(std::move(agent));
    }

    const auto num_eval = static_cast<std::size_t>(parse_int(need("num_eval_groups"), &ok));
    for (std::size_t i = 0; i < num_eval; ++i) {
        const std::string prefix = "eval" + std::to_string(i);
        const std::string subject = need(prefix + ".subject");
        const auto count = static_cast<std::size_t>(parse_int(need(prefix + ".count"), &ok));
        std::vector<SensorWindow> group;
        group.reserve(count);
        for (std::size_t k = 0; k < count; ++k)
            group.push_back(read_window_row(bf, cache.channels, cache.window_length, subject));
        cache.eval_subjects.push_back(subject);
        cache.eval_groups.push_back(std::move(group));
    }
    return cache;
}

}  // namespace colearn
