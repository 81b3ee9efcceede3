#pragma once

#include "colearn/agent.hpp"
#include "colearn/network.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace colearn {

enum class RunMode { collab, isolated, centralized };
enum class EvalScope { global, local };

std::string to_string(RunMode mode);
std::string to_string(EvalScope scope);

// One materialized experiment: per-agent datasets plus the evaluation
// target. The same setup drives collaborative, isolated and centralized
// runs, which is what makes those runs comparable (identical seeds and
// initial parameters).
struct ExperimentSetup {
    std::string dataset;
    ModelArchitecture arch;
    std::vector<AgentDataset> agent_data;
    std::vector<SensorWindow> global_eval;   // union of held-out subjects' windows
    std::vector<std::string> test_subjects;  // provenance of global_eval
    std::string topology_kind = "full";
    bool include_self = true;
    bool standardize_inputs = true;
    int batch_size = 64;
    long epochs = 1;
    int workers = 1;
    std::uint64_t master_seed = 1;
    AdamState adam;  // hyperparameters only; moments are per agent
};

struct EpochMetric {
    int agent_id = 0;
    long epoch = 0;
    double macro_f1 = 0.0;
    double mean_loss = 0.0;
};

struct RunHistory {
    std::string dataset;
    RunMode mode = RunMode::collab;
    EvalScope scope = EvalScope::global;
    std::vector<EpochMetric> records;  // sorted by (agent_id, epoch)
    RoundLog round_log;
    long rounds = 0;
    long total_batches = 0;
    std::vector<AgentCheckpoint> final_checkpoints;
};

// Agents train (collaboratively or in isolation per `mode`); at every local
// epoch boundary each agent is scored on the held-out subjects' windows,
// standardized with that agent's own training statistics. Validates that
// no agent trains on a held-out subject and that the evaluation pool
// covers every class.
RunHistory run_global_generalization(const ExperimentSetup& setup, RunMode mode);

// Same training loop, but each agent is scored on its own test partition.
// Agents with an empty test partition produce no records.
RunHistory run_local_generalization(const ExperimentSetup& setup, RunMode mode);

// One agent holding the union of all training partitions, trained for
// exactly as many batches as the whole decentralized network would use,
// scored on the same evaluation target as `scope`.
RunHistory run_centralized_baseline(const ExperimentSetup& setup, EvalScope scope);

// Network-average curve: unweighted mean of per-agent macro-F1 (and loss)
// at each epoch. Throws usage_error on an empty history.
struct SummaryRow {
    long epoch = 0;
    double avg_macro_f1 = 0.0;
    double avg_mean_loss = 0.0;
    int num_agents = 0;
};
std::vector<SummaryRow> summarize(const RunHistory& history);

// results CSV: experiment_id,dataset,mode,scope,agent_id,epoch,macro_f1,mean_loss
void write_results_csv(std::ostream& out, const std::string& experiment_id, const RunHistory& history);
// summary CSV: experiment_id,dataset,mode,scope,epoch,avg_macro_f1,avg_mean_loss,num_agents
void write_summary_csv(std::ostream& out, const std::string& experiment_id, const RunHistory& history);

}  // namespace colearn
