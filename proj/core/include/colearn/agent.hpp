#pragma once

#include "colearn/data.hpp"
#include "colearn/metrics.hpp"
#include "colearn/nn.hpp"
#include "colearn/serialize.hpp"

#include <cstdint>
#include <optional>
#include <span>

namespace colearn {

// Runtime state of one agent: its model, optimizer, private dataset and
// position inside the current epoch's shuffled batch order. Owned by one
// worker at a time; parameter snapshots returned by get_params are
// independent copies.
struct AgentState {
    int agent_id = 0;
    ModelArchitecture arch;
    ParamVector params;
    AdamState adam;
    AgentDataset data;

    std::vector<std::uint32_t> order;  // shuffled indices into data.train
    std::size_t batch_cursor = 0;      // batch position within the epoch
    long epoch = 0;                    // completed local epochs
    long trained_batches = 0;          // lifetime batch counter
    std::uint64_t rng_seed = 0;
    bool passive = false;  // empty training set: aggregates, never trains
};

// Builds an agent with freshly initialized parameters. An empty training
// set marks the agent passive instead of failing.
AgentState make_agent(int agent_id, const ModelArchitecture& arch, AgentDataset data,
                      std::uint64_t init_seed, std::uint64_t rng_seed,
                      const AdamState& adam_template = {});

long batches_per_epoch(std::size_t train_size, int batch_size);

// One optimizer step on the next batch of the shuffled epoch order. The
// last batch of an epoch may be short; completing a pass reshuffles with a
// seed derived from (rng_seed, epoch). Returns the batch loss, or nullopt
// for passive agents (which this call never mutates).
std::optional<double> train_one_batch(AgentState& agent, int batch_size);

// Confusion counts, per-class F1, macro-F1 and mean loss over `windows`.
// Pure; throws usage_error on an empty list.
MetricsRecord evaluate(const AgentState& agent, std::span<const SensorWindow> windows);

// Snapshot of the parameters; later training does not affect it.
ParamVector get_params(const AgentState& agent);

// Replaces the parameters, leaving Adam moments and epoch bookkeeping
// intact. Throws architecture_error on length mismatch.
void set_params(AgentState& agent, const ParamVector& params);

AgentCheckpoint make_checkpoint(const AgentState& agent);
void restore_checkpoint(AgentState& agent, const AgentCheckpoint& ck);

}  // namespace colearn
