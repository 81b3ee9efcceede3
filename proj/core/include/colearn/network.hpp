#pragma once

#include "colearn/agent.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace colearn {

// Directed interaction graph. Edges are ordered (sender, receiver) pairs;
// self-edges are never stored.
struct Topology {
    int num_agents = 0;
    std::vector<std::pair<int, int>> edges;

    // Per-receiver sender lists, ascending.
    std::vector<std::vector<int>> in_lists() const;
    std::vector<std::vector<int>> out_lists() const;
};

// kind: "full" (every ordered pair), "ring" (bidirectional cycle), or
// "random<k>" (k random bidirectional partners per agent, seeded).
// Throws config_error on an unknown kind.
Topology build_topology(int num_agents, const std::string& kind, std::uint64_t seed = 0);

// The weight a receiver assigns to a contribution is the sender's
// training-set size, identically for every receiver. Passive senders
// (size 0) end up with weight 0.
struct InteractionWeights {
    bool include_self = true;
    std::vector<double> sender_weight;  // indexed by sender id
    // w_i for receiver i: sender_weight[j] for each in-neighbor j,
    // plus sender_weight[i] when include_self.
    std::vector<std::vector<std::pair<int, double>>> per_receiver;
};

InteractionWeights derive_weights(const Topology& topology, std::span<const std::size_t> dataset_sizes,
                                  bool include_self);

// One column of the contribution matrix with its weight entry.
struct NeighborContribution {
    int sender_id = 0;
    std::span<const double> params;
    double weight = 0.0;
};

// Weighted average of the contributions: sum of weight*params in ascending
// sender order, divided by the total weight, each coordinate clamped into
// the contributions' componentwise hull (floating-point rounding must not
// push an average outside it). Returns nullopt when the total weight is
// zero (callers keep their current parameters). Throws usage_error when
// empty, architecture_error on length mismatch.
std::optional<ParamVector> aggregate(std::span<const NeighborContribution> contributions);

// Audit trail of one training run: parameter checksums around aggregation
// plus the training loss, per agent per round.
struct RoundLogEntry {
    long round = 0;
    int agent_id = 0;
    std::uint64_t pre_checksum = 0;
    std::uint64_t post_checksum = 0;
    double loss = 0.0;  // NaN for rounds where the agent did not train
};
using RoundLog = std::vector<RoundLogEntry>;

void write_round_log_csv(std::ostream& out, const RoundLog& log);

struct TrainOptions {
    int batch_size = 64;
    long epochs = 1;
    bool collaborate = true;
    bool include_self = true;
    int workers = 1;
    // When >= 0, run exactly this many rounds and train every non-passive
    // agent each round (batch budget mode, used by the centralized
    // baseline). Otherwise agents train until each has completed `epochs`
    // local epochs and rounds stop at the slowest agent's quota.
    long round_budget = -1;
};

// Called when an agent completes a local epoch (and, in budget mode, once
// at the end for a trailing partial epoch). `epoch_ordinal` counts from 1.
// May be invoked concurrently for different agents.
using EpochHook = std::function<void(const AgentState&, long epoch_ordinal)>;

// One synchronous round: collect's what neighbors published at the end of
// the previous round, aggregates (skipped in round 0 and for isolated
// runs), trains one batch per agent still under quota, then publishes the
// new parameter snapshots. Aggregation never sees same-round post-training
// parameters.
//
// The full loop. Returns the number of rounds executed.
long run_training(std::vector<AgentState>& agents, const Topology& topology,
                  const InteractionWeights& weights, const TrainOptions& options,
                  const EpochHook& hook, RoundLog* log = nullptr);

}  // namespace colearn
