#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace colearn {

// A complete run description. Every field has a default; an empty config
// file is a valid synthetic quickstart. Parsed from plain-text `key = value`
// lines ('#' starts a comment), unknown keys rejected.
struct RunConfig {
    std::string dataset = "synthetic";  // synthetic | pamap2 | harth
    std::string scope = "global";       // global | local
    std::string mode = "collab";        // collab | isolated | centralized

    std::string data_dir;  // dataset root; falls back to $COLEARN_DATA_ROOT
    std::string out_dir = "runs";
    std::string cache_dir;  // empty: <out_dir>/cache/<data fingerprint>

    std::string train_subjects;  // comma-separated file stems; empty: dataset default
    std::string test_subjects;

    int window_length = 100;
    int stride = 0;  // 0: non-overlapping (= window_length)
    int batch_size = 64;
    long epochs = 10;
    double split_ratio = 0.8;
    bool standardize = true;

    int conv_out_channels = 64;
    int conv_kernel = 3;
    int pool_kernel = 2;

    double adam_alpha = 0.001;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;

    std::string topology = "full";  // full | ring | random<k>
    bool include_self = true;

    std::uint64_t seed = 1;
    int workers = 1;  // execution detail, not part of the config hash

    // synthetic generator
    int agents = 4;
    int classes = 3;
    int channels = 3;
    int synth_windows_per_class = 40;
    int synth_eval_per_class = 25;
    double noise_level = 0.1;
    // uniform | rotate<k> | explicit per-agent rows "40,0;0,40"
    std::string synth_profile = "uniform";

    // Sorted key=value lines over everything that affects results
    // (workers, out_dir and cache_dir excluded). data_dir appears in its
    // resolved form, so the environment fallback is part of the hash.
    std::string canonical_text() const;
    std::uint64_t hash() const;

    // "<dataset>-<scope>-<mode>-<hash hex>"
    std::string experiment_id() const;

    // data_dir or $COLEARN_DATA_ROOT
    std::string resolved_data_dir() const;

    // Hash over only the data-shaping subset; names the window cache.
    std::uint64_t data_fingerprint() const;

    std::string resolved_cache_dir() const;

    // Throws config_error on out-of-range or inconsistent values.
    void validate() const;
};

// Reads `key = value` lines. Unknown keys and type mismatches raise
// config_error naming the key and line. Defaults fill everything absent;
// the result is validated.
RunConfig parse_config(std::istream& in, const std::string& origin = "<config>");
RunConfig parse_config_file(const std::string& path);

// Applies one `key=value` override (CLI flags). Same checks as the parser.
void apply_override(RunConfig& config, const std::string& key, const std::string& value,
                    const std::string& origin = "<override>");

}  // namespace colearn
