#pragma once

#include "colearn/nn.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace colearn {

// One subject's raw recording after column/activity selection. Missing
// values are stored as NaN until clean() resolves them. Channel data is
// row-major [channel][t].
struct SubjectSeries {
    std::string subject_id;
    double sample_rate_hz = 0.0;
    std::vector<double> timestamps;  // seconds, non-decreasing
    int num_channels = 0;
    std::vector<double> channels;
    std::vector<int> labels;  // raw activity ids

    std::size_t length() const { return timestamps.size(); }
    double at(int c, std::size_t t) const { return channels[static_cast<std::size_t>(c) * length() + t]; }
    double& at(int c, std::size_t t) { return channels[static_cast<std::size_t>(c) * length() + t]; }
};

// Per-channel mean/std over an agent's *training* windows only.
struct ChannelStats {
    std::vector<double> mean;
    std::vector<double> stdev;
};

// One agent's private data. size_weight is what the agent advertises to
// its peers during aggregation.
struct AgentDataset {
    std::vector<SensorWindow> train;
    std::vector<SensorWindow> test;
    std::map<int, int> class_map;  // raw activity id -> contiguous class index
    std::size_t size_weight = 0;
};

// Resolve missing values: linear interpolation over gaps no longer than
// max_gap_seconds (default 1 s); rows inside longer gaps, and rows in
// leading/trailing gaps that have no anchor to interpolate from, are
// dropped. Throws data_error when a channel has no values at all.
SubjectSeries clean(const SubjectSeries& series, double max_gap_seconds = 1.0);

// Cut label-homogeneous runs into fixed-length windows. Windows never
// straddle an activity change; trailing partial windows are discarded.
// Activity ids missing from class_map are skipped. stride <= 0 means
// stride = window_length (non-overlapping).
std::vector<SensorWindow> make_windows(const SubjectSeries& series, int window_length, int stride,
                                       const std::map<int, int>& class_map);

// Seeded uniform permutation; first ceil(ratio*N) windows go to train.
std::pair<std::vector<SensorWindow>, std::vector<SensorWindow>> split_train_test(
    std::vector<SensorWindow> windows, double ratio, std::uint64_t seed);

ChannelStats compute_channel_stats(const std::vector<SensorWindow>& windows);

// (x - mean) / std per channel; channels with std below 1e-12 are only
// centered.
void standardize(std::vector<SensorWindow>& windows, const ChannelStats& stats);

// Contiguous class indices in ascending raw-activity order.
std::map<int, int> build_class_map(const std::vector<int>& activity_ids);

// ------------------------------------------------------------------ cache
//
// Windowed datasets persist as a plain-text manifest plus one binary array
// file (little-endian f64, row-major). Each row is one window:
//   [label, ch0 t0..t{L-1}, ch1 t0.., ...]   (1 + channels*length values)
// Rows are grouped agent by agent (train windows then test windows), in
// manifest order, followed by one group per held-out evaluation subject.
struct WindowCache {
    std::string dataset;
    std::uint64_t data_fingerprint = 0;  // hash of the data-shaping config
    int channels = 0;
    int window_length = 0;
    std::map<int, int> class_map;
    std::vector<std::string> agent_subjects;  // per agent, for provenance
    std::vector<AgentDataset> agents;
    std::vector<std::string> eval_subjects;
    std::vector<std::vector<SensorWindow>> eval_groups;  // parallel to eval_subjects
};

void save_window_cache(const std::string& dir, const WindowCache& cache);

// Throws data_error if the cache is missing or malformed; if
// expected_fingerprint differs from the stored one, throws data_error with
// an explanation (callers treat that as "rebuild").
WindowCache load_window_cache(const std::string& dir, std::uint64_t expected_fingerprint);

bool window_cache_exists(const std::string& dir);

}  // namespace colearn
