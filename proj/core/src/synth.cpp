#include "colearn/synth.hpp"

#include "colearn/error.hpp"
#include "colearn/rng.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace colearn {

SensorWindow synth_base_window(int cls, int num_classes, int channels, int window_length) {
    SensorWindow w;
    w.channels = channels;
    w.length = window_length;
    w.label = cls;
    w.values.resize(static_cast<std::size_t>(channels) * window_length);

    const double freq = 2.0 + 1.5 * cls;       // cycles per window
    const double amp = 1.0 + 0.35 * cls;
    for (int c = 0; c < channels; ++c) {
        const double phase = 2.0 * std::numbers::pi * c / std::max(1, channels) +
                             0.5 * cls;
        for (int t = 0; t < window_length; ++t)
            w.at(c, t) = amp * std::sin(2.0 * std::numbers::pi * freq * t / window_length + phase);
    }
    (void)num_classes;
    return w;
}

namespace {

SensorWindow noisy_window(const SensorWindow& base, double noise_level, Rng& rng) {
    SensorWindow w = base;
    if (noise_level != 0.0)
        for (auto& v : w.values) v += noise_level * rng.normal();
    return w;
}

}  // namespace

std::vector<AgentDataset> synthesize_network_data(const SynthSpec& spec, std::uint64_t seed) {
    if (spec.num_agents < 1 || spec.num_classes < 1)
        throw usage_error("synthesize_network_data: need at least one agent and one class");
    if (static_cast<int>(spec.profile.size()) != spec.num_agents)
        throw usage_error("synthesize_network_data: profile rows != num_agents");

    bool any = false;
    for (const auto& row : spec.profile) {
        if (static_cast<int>(row.size()) != spec.num_classes)
            throw usage_error("synthesize_network_data: profile row width != num_classes");
        for (int n : row) any = any || n > 0;
    }
    if (!any) throw usage_error("synthesize_network_data: every agent profile is all zeros");

    std::vector<SensorWindow> bases;
    for (int c = 0; c < spec.num_classes; ++c)
        bases.push_back(synth_base_window(c, spec.num_classes, spec.channels, spec.window_length));

    std::vector<AgentDataset> agents;
    for (int a = 0; a < spec.num_agents; ++a) {
        Rng rng(derive_seed(seed, "synth-agent", static_cast<std::uint64_t>(a)));
        const std::string subject = "synthetic-agent" + std::to_string(a);

        std::vector<SensorWindow> windows;
        for (int c = 0; c < spec.num_classes; ++c) {
            for (int k = 0; k < spec.profile[static_cast<std::size_t>(a)][static_cast<std::size_t>(c)]; ++k) {
                auto w = noisy_window(bases[static_cast<std::size_t>(c)], spec.noise_level, rng);
                w.subject_id = subject;
                windows.push_back(std::move(w));
            }
        }

        AgentDataset ds;
        for (int c = 0; c < spec.num_classes; ++c) ds.class_map[c] = c;
        if (windows.empty()) {
            ds.size_weight = 0;
        } else {
            auto [train, test] = split_train_test(std::move(windows), spec.train_ratio,
                                                  derive_seed(seed, "synth-split", static_cast<std::uint64_t>(a)));
            ds.train = std::move(train);
            ds.test = std::move(test);
            ds.size_weight = ds.train.size();
        }
        agents.push_back(std::move(ds));
    }
    return agents;
}

std::vector<SensorWindow> synthesize_eval_windows(int num_classes, int channels, int window_length,
                                                  int windows_per_class, double noise_level,
                                                  std::uint64_t seed) {
    Rng rng(derive_seed(seed, "synth-eval", 0));
    std::vector<SensorWindow> windows;
    for (int c = 0; c < num_classes; ++c) {
        const auto base = synth_base_window(c, num_classes, channels, window_length);
        for (int k = 0; k < windows_per_class; ++k) {
            auto w = noisy_window(base, noise_level, rng);
            w.subject_id = "synthetic-eval";
            windows.push_back(std::move(w));
        }
    }
    return windows;
}

}  // namespace colearn
