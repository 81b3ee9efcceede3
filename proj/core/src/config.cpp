#include "colearn/config.hpp"

#include "colearn/error.hpp"
#include "colearn/util.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace colearn {

namespace {

struct Field {
    std::function<std::string(const RunConfig&)> get;
    std::function<bool(RunConfig&, const std::string&)> set;  // false: type error
    bool hashed = true;
};

std::string bool_str(bool b) { return b ? "true" : "false"; }

bool parse_bool(const std::string& s, bool* out) {
    if (s == "true" || s == "1" || s == "yes") {
        *out = true;
        return true;
    }
    if (s == "false" || s == "0" || s == "no") {
        *out = false;
        return true;
    }
    return false;
}

const std::map<std::string, Field>& field_table() {
    static const std::map<std::string, Field> table = [] {
        std::map<std::string, Field> t;
        auto str = [&t](const std::string& key, std::string RunConfig::* member, bool hashed = true) {
            t[key] = {[member](const RunConfig& c) { return c.*member; },
                      [member](RunConfig& c, const std::string& v) {
                          c.*member = v;
                          return true;
                      },
                      hashed};
        };
        auto intf = [&t](const std::string& key, int RunConfig::* member) {
            t[key] = {[member](const RunConfig& c) { return std::to_string(c.*member); },
                      [member](RunConfig& c, const std::string& v) {
                          bool ok = false;
                          const long long x = parse_int(v, &ok);
                          if (ok) c.*member = static_cast<int>(x);
                          return ok;
                      }};
        };
        auto longf = [&t](const std::string& key, long RunConfig::* member) {
            t[key] = {[member](const RunConfig& c) { return std::to_string(c.*member); },
                      [member](RunConfig& c, const std::string& v) {
                          bool ok = false;
                          const long long x = parse_int(v, &ok);
                          if (ok) c.*member = static_cast<long>(x);
                          return ok;
                      }};
        };
        auto dbl = [&t](const std::string& key, double RunConfig::* member) {
            t[key] = {[member](const RunConfig& c) { return format_double(c.*member); },
                      [member](RunConfig& c, const std::string& v) {
                          bool ok = false;
                          const double x = parse_double(v, &ok);
                          if (ok) c.*member = x;
                          return ok;
                      }};
        };
        auto boolf = [&t](const std::string& key, bool RunConfig::* member) {
            t[key] = {[member](const RunConfig& c) { return bool_str(c.*member); },
                      [member](RunConfig& c, const std::string& v) {
                          bool b = false;
                          if (!parse_bool(v, &b)) return false;
                          c.*member = b;
                          return true;
                      }};
        };

        str("dataset", &RunConfig::dataset);
        str("scope", &RunConfig::scope);
        str("mode", &RunConfig::mode);
        str("data_dir", &RunConfig::data_dir);
        str("out_dir", &RunConfig::out_dir, /*hashed=*/false);
        str("cache_dir", &RunConfig::cache_dir, /*hashed=*/false);
        str("train_subjects", &RunConfig::train_subjects);
        str("test_subjects", &RunConfig::test_subjects);
        intf("window_length", &RunConfig::window_length);
        intf("stride", &RunConfig::stride);
        intf("batch_size", &RunConfig::batch_size);
        longf("epochs", &RunConfig::epochs);
        dbl("split_ratio", &RunConfig::split_ratio);
        boolf("standardize", &RunConfig::standardize);
        intf("conv_out_channels", &RunConfig::conv_out_channels);
        intf("conv_kernel", &RunConfig::conv_kernel);
        intf("pool_kernel", &RunConfig::pool_kernel);
        dbl("adam_alpha", &RunConfig::adam_alpha);
        dbl("adam_beta1", &RunConfig::adam_beta1);
        dbl("adam_beta2", &RunConfig::adam_beta2);
        dbl("adam_epsilon", &RunConfig::adam_epsilon);
        str("topology", &RunConfig::topology);
        boolf("include_self", &RunConfig::include_self);
        t["seed"] = {[](const RunConfig& c) { return std::to_string(c.seed); },
                     [](RunConfig& c, const std::string& v) {
                         bool ok = false;
                         const long long x = parse_int(v, &ok);
                         if (ok && x >= 0) c.seed = static_cast<std::uint64_t>(x);
                         return ok && x >= 0;
                     }};
        t["workers"] = {[](const RunConfig& c) { return std::to_string(c.workers); },
                        [](RunConfig& c, const std::string& v) {
                            bool ok = false;
                            const long long x = parse_int(v, &ok);
                            if (ok) c.workers = static_cast<int>(x);
                            return ok;
                        },
                        /*hashed=*/false};
        intf("agents", &RunConfig::agents);
        intf("classes", &RunConfig::classes);
        intf("channels", &RunConfig::channels);
        intf("synth_windows_per_class", &RunConfig::synth_windows_per_class);
        intf("synth_eval_per_class", &RunConfig::synth_eval_per_class);
        dbl("noise_level", &RunConfig::noise_level);
        str("synth_profile", &RunConfig::synth_profile);
        return t;
    }();
    return table;
}

void set_or_throw(RunConfig& config, const std::string& key, const std::string& value,
                  const std::string& where) {
    const auto& table = field_table();
    const auto it = table.find(key);
    if (it == table.end()) throw config_error(where + ": unknown key '" + key + "'");
    if (!it->second.set(config, value))
        throw config_error(where + ": bad value '" + value + "' for key '" + key + "'");
}

}  // namespace

std::string RunConfig::resolved_data_dir() const {
    if (!data_dir.empty()) return data_dir;
    if (const char* env = std::getenv("COLEARN_DATA_ROOT")) return env;
    return "";
}

std::string RunConfig::canonical_text() const {
    std::string text;
    for (const auto& [key, field] : field_table()) {
        if (!field.hashed) continue;
        if (key == "data_dir")
            text += key + "=" + resolved_data_dir() + "\n";
        else
            text += key + "=" + field.get(*this) + "\n";
    }
    return text;
}

std::uint64_t RunConfig::hash() const { return fnv1a(canonical_text()); }

std::string RunConfig::experiment_id() const {
    return dataset + "-" + scope + "-" + mode + "-" + to_hex(hash());
}

std::uint64_t RunConfig::data_fingerprint() const {
    // Only what shapes the windows; training hyperparameters do not
    // invalidate a cache.
    static const std::set<std::string> keys = {
        "dataset", "data_dir", "train_subjects", "test_subjects", "window_length", "stride",
        "split_ratio", "seed", "agents", "classes", "channels", "synth_windows_per_class",
        "synth_eval_per_class", "noise_level", "synth_profile"};
    std::string text;
    for (const auto& [key, field] : field_table()) {
        if (!keys.contains(key)) continue;
        if (key == "data_dir")
            text += key + "=" + resolved_data_dir() + "\n";
        else
            text += key + "=" + field.get(*this) + "\n";
    }
    return fnv1a(text);
}

std::string RunConfig::resolved_cache_dir() const {
    if (!cache_dir.empty()) return cache_dir;
    return (std::filesystem::path(out_dir) / "cache" / to_hex(data_fingerprint())).string();
}

void RunConfig::validate() const {
    auto require = [](bool cond, const std::string& msg) {
        if (!cond) throw config_error(msg);
    };
    require(dataset == "synthetic" || dataset == "pamap2" || dataset == "harth",
            "dataset must be synthetic, pamap2 or harth (got '" + dataset + "')");
    require(scope == "global" || scope == "local", "scope must be global or local");
    require(mode == "collab" || mode == "isolated" || mode == "centralized",
            "mode must be collab, isolated or centralized");
    require(window_length >= 1, "window_length must be >= 1");
    require(stride >= 0, "stride must be >= 0");
    require(batch_size >= 1, "batch_size must be >= 1");
    require(epochs >= 1, "epochs must be >= 1");
    require(split_ratio > 0.0 && split_ratio < 1.0, "split_ratio must be in (0, 1)");
    require(conv_out_channels >= 1, "conv_out_channels must be >= 1");
    require(conv_kernel >= 1 && conv_kernel <= window_length,
            "conv_kernel must be in [1, window_length]");
    require(pool_kernel >= 1, "pool_kernel must be >= 1");
    require(adam_alpha > 0.0, "adam_alpha must be > 0");
    require(adam_beta1 >= 0.0 && adam_beta1 < 1.0, "adam_beta1 must be in [0, 1)");
    require(adam_beta2 >= 0.0 && adam_beta2 < 1.0, "adam_beta2 must be in [0, 1)");
    require(adam_epsilon > 0.0, "adam_epsilon must be > 0");
    require(workers >= 1, "workers must be >= 1");
    if (dataset == "synthetic") {
        require(agents >= 1, "agents must be >= 1");
        require(classes >= 2, "classes must be >= 2");
        require(channels >= 1, "channels must be >= 1");
        require(synth_windows_per_class >= 0, "synth_windows_per_class must be >= 0");
        require(synth_eval_per_class >= 1, "synth_eval_per_class must be >= 1");
        require(noise_level >= 0.0, "noise_level must be >= 0");
    }
}

RunConfig parse_config(std::istream& in, const std::string& origin) {
    RunConfig config;
    std::string line;
    std::size_t line_no = 0;
    std::set<std::string> seen;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash_pos = line.find('#');
        if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        const std::string where = origin + ":" + std::to_string(line_no);
        if (eq == std::string::npos)
            throw config_error(where + ": expected 'key = value', got '" + stripped + "'");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (!seen.insert(key).second) throw config_error(where + ": duplicate key '" + key + "'");
        set_or_throw(config, key, value, where);
    }
    config.validate();
    return config;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    return parse_config(in, path);
}

void apply_override(RunConfig& config, const std::string& key, const std::string& value,
                    const std::string& origin) {
    set_or_throw(config, key, value, origin);
}

}  // namespace colearn
