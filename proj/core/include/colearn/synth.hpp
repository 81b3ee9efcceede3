#pragma once

#include "colearn/data.hpp"

#include <cstdint>
#include <vector>

namespace colearn {

// Desk-scale synthetic stand-in for a multi-subject sensor network. Each
// class is a fixed multichannel sinusoid (class-indexed frequency and
// amplitude, channel-indexed phase); windows of one class differ only by
// seeded noise. Class mixes per agent come from `profile`, which is what
// makes the network non-IID.
struct SynthSpec {
    int num_agents = 0;
    int num_classes = 0;
    int channels = 1;
    int window_length = 50;
    std::vector<std::vector<int>> profile;  // [agent][class] -> window count
    double noise_level = 0.1;
    double train_ratio = 0.8;
};

// Generates per-agent datasets (train/test split per agent, seeded).
// Throws usage_error when every agent's profile row is all zeros.
std::vector<AgentDataset> synthesize_network_data(const SynthSpec& spec, std::uint64_t seed);

// Balanced held-out pool covering every class; used as the synthetic
// "unseen subject" for global generalization runs.
std::vector<SensorWindow> synthesize_eval_windows(int num_classes, int channels, int window_length,
                                                  int windows_per_class, double noise_level,
                                                  std::uint64_t seed);

// The noiseless class template, exposed for tests.
SensorWindow synth_base_window(int cls, int num_classes, int channels, int window_length);

}  // namespace colearn
