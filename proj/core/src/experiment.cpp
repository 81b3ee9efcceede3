#include "colearn/experiment.hpp"

#include "colearn/error.hpp"
#include "colearn/rng.hpp"
#include "colearn/util.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <set>

namespace colearn {

std::string to_string(RunMode mode) {
    switch (mode) {
        case RunMode::collab: return "collab";
        case RunMode::isolated: return "isolated";
        case RunMode::centralized: return "centralized";
    }
    return "?";
}

std::string to_string(EvalScope scope) {
    return scope == EvalScope::global ? "global" : "local";
}

namespace {

// Build the network's agents with seeds derived from the master seed; the
// derivation depends only on (master, agent index), never on the run mode,
// so paired collab/isolated/centralized runs start from identical
// parameters.
std::vector<AgentState> build_agents(const ExperimentSetup& setup) {
    std::vector<AgentState> agents;
    agents.reserve(setup.agent_data.size());
    for (std::size_t i = 0; i < setup.agent_data.size(); ++i) {
        agents.push_back(make_agent(static_cast<int>(i), setup.arch, setup.agent_data[i],
                                    derive_seed(setup.master_seed, "init", i),
                                    derive_seed(setup.master_seed, "agent-rng", i), setup.adam));
    }
    return agents;
}

ChannelStats identity_stats(int channels) {
    ChannelStats s;
    s.mean.assign(static_cast<std::size_t>(channels), 0.0);
    s.stdev.assign(static_cast<std::size_t>(channels), 1.0);
    return s;
}

// Per-agent pipeline statistics. Standardization is local: each agent only
// ever sees its own training distribution.
std::vector<ChannelStats> agent_stats(const ExperimentSetup& setup) {
    std::vector<ChannelStats> stats;
    stats.reserve(setup.agent_data.size());
    for (const auto& ds : setup.agent_data) {
        if (!setup.standardize_inputs || ds.train.empty())
            stats.push_back(identity_stats(setup.arch.input_channels));
        else
            stats.push_back(compute_channel_stats(ds.train));
    }
    return stats;
}

std::vector<SensorWindow> standardized_copy(const std::vector<SensorWindow>& windows,
                                            const ChannelStats& stats) {
    std::vector<SensorWindow> out = windows;
    standardize(out, stats);
    return out;
}

void validate_global_plan(const ExperimentSetup& setup) {
    if (setup.global_eval.empty())
        throw data_error("global generalization needs a non-empty held-out evaluation set");

    std::set<std::string> held_out(setup.test_subjects.begin(), setup.test_subjects.end());
    for (const auto& w : setup.global_eval) held_out.insert(w.subject_id);
    for (std::size_t i = 0; i < setup.agent_data.size(); ++i)
        for (const auto& w : setup.agent_data[i].train)
            if (held_out.contains(w.subject_id))
                throw data_error("agent " + std::to_string(i) + " trains on held-out subject " +
                                 w.subject_id);

    std::set<int> classes;
    for (const auto& w : setup.global_eval) classes.insert(w.label);
    for (int c = 0; c < setup.arch.num_classes; ++c)
        if (!classes.contains(c))
            throw data_error("held-out evaluation set lacks samples for class " +
                             std::to_string(c));
}

struct RecordGrid {
    std::vector<std::vector<EpochMetric>> slots;  // [series][epoch-1]
    std::vector<std::vector<char>> present;

    RecordGrid(std::size_t series, std::size_t max_epochs)
        : slots(series, std::vector<EpochMetric>(max_epochs)),
          present(series, std::vector<char>(max_epochs, 0)) {}

    void put(std::size_t series, long epoch, EpochMetric rec) {
        if (epoch < 1 || static_cast<std::size_t>(epoch) > slots[series].size()) return;
        slots[series][static_cast<std::size_t>(epoch - 1)] = rec;
        present[series][static_cast<std::size_t>(epoch - 1)] = 1;
    }

    std::vector<EpochMetric> flatten() const {
        std::vector<EpochMetric> out;
        for (std::size_t s = 0; s < slots.size(); ++s)
            for (std::size_t e = 0; e < slots[s].size(); ++e)
                if (present[s][e]) out.push_back(slots[s][e]);
        return out;
    }
};

long decentralized_batch_total(const ExperimentSetup& setup) {
    long total = 0;
    for (const auto& ds : setup.agent_data)
        total += setup.epochs * batches_per_epoch(ds.train.size(), setup.batch_size);
    return total;
}

RunHistory run_network(const ExperimentSetup& setup, RunMode mode, EvalScope scope) {
    if (setup.agent_data.empty()) throw usage_error("experiment has no agents");
    setup.arch.validate();
    if (scope == EvalScope::global) validate_global_plan(setup);

    const auto stats = agent_stats(setup);

    // Each agent trains on standardized windows and is evaluated against
    // its own standardized view of the evaluation target.
    std::vector<AgentDataset> prepared = setup.agent_data;
    std::vector<std::vector<SensorWindow>> eval_sets(prepared.size());
    for (std::size_t i = 0; i < prepared.size(); ++i) {
        if (setup.standardize_inputs) {
            standardize(prepared[i].train, stats[i]);
            standardize(prepared[i].test, stats[i]);
        }
        eval_sets[i] = scope == EvalScope::global ? standardized_copy(setup.global_eval, stats[i])
                                                  : prepared[i].test;
    }

    ExperimentSetup local = setup;
    local.agent_data = std::move(prepared);
    auto agents = build_agents(local);

    const auto topology = build_topology(static_cast<int>(agents.size()), setup.topology_kind,
                                         derive_seed(setup.master_seed, "topology", 0));
    std::vector<std::size_t> sizes;
    for (const auto& a : agents) sizes.push_back(a.data.size_weight);
    const auto weights = derive_weights(topology, sizes, setup.include_self);

    RecordGrid grid(agents.size(), static_cast<std::size_t>(setup.epochs));
    const EpochHook hook = [&](const AgentState& agent, long ordinal) {
        const auto idx = static_cast<std::size_t>(agent.agent_id);
        if (eval_sets[idx].empty()) return;  // empty local test partition: skip, see history
        auto rec = evaluate(agent, eval_sets[idx]);
        grid.put(idx, ordinal, {agent.agent_id, ordinal, rec.macro_f1, rec.mean_loss});
    };

    TrainOptions opt;
    opt.batch_size = setup.batch_size;
    opt.epochs = setup.epochs;
    opt.collaborate = mode == RunMode::collab;
    opt.include_self = setup.include_self;
    opt.workers = setup.workers;

    RunHistory history;
    history.dataset = setup.dataset;
    history.mode = mode;
    history.scope = scope;
    history.rounds = run_training(agents, topology, weights, opt, hook, &history.round_log);
    history.total_batches = decentralized_batch_total(setup);
    history.records = grid.flatten();
    for (const auto& a : agents) history.final_checkpoints.push_back(make_checkpoint(a));
    return history;
}

}  // namespace

RunHistory run_global_generalization(const ExperimentSetup& setup, RunMode mode) {
    if (mode == RunMode::centralized) return run_centralized_baseline(setup, EvalScope::global);
    return run_network(setup, mode, EvalScope::global);
}

RunHistory run_local_generalization(const ExperimentSetup& setup, RunMode mode) {
    if (mode == RunMode::centralized) return run_centralized_baseline(setup, EvalScope::local);
    return run_network(setup, mode, EvalScope::local);
}

RunHistory run_centralized_baseline(const ExperimentSetup& setup, EvalScope scope) {
    if (setup.agent_data.empty()) throw usage_error("experiment has no agents");
    setup.arch.validate();
    if (scope == EvalScope::global) validate_global_plan(setup);

    // Union of every agent's training partition, in agent order.
    AgentDataset merged;
    merged.class_map = setup.agent_data.front().class_map;
    for (const auto& ds : setup.agent_data) {
        merged.train.insert(merged.train.end(), ds.train.begin(), ds.train.end());
        merged.test.insert(merged.test.end(), ds.test.begin(), ds.test.end());
    }
    merged.size_weight = merged.train.size();
    if (merged.train.empty()) throw usage_error("centralized baseline has no training data");

    const long budget = decentralized_batch_total(setup);
    const long b_central = batches_per_epoch(merged.train.size(), setup.batch_size);
    const long max_epochs = (budget + b_central - 1) / b_central;

    ChannelStats stats = setup.standardize_inputs ? compute_channel_stats(merged.train)
                                                  : identity_stats(setup.arch.input_channels);
    if (setup.standardize_inputs) {
        standardize(merged.train, stats);
        standardize(merged.test, stats);
    }

    // The evaluation series: one global series, or one series per source
    // agent's test partition so local curves stay comparable with the
    // decentralized run.
    std::vector<std::vector<SensorWindow>> eval_sets;
    if (scope == EvalScope::global) {
        eval_sets.push_back(standardized_copy(setup.global_eval, stats));
    } else {
        for (const auto& ds : setup.agent_data) {
            auto part = ds.test;
            if (setup.standardize_inputs) standardize(part, stats);
            eval_sets.push_back(std::move(part));
        }
    }

    ExperimentSetup central = setup;
    central.agent_data = {std::move(merged)};
    auto agents = build_agents(central);

    const auto topology = build_topology(1, "full");
    std::vector<std::size_t> sizes = {agents.front().data.size_weight};
    const auto weights = derive_weights(topology, sizes, setup.include_self);

    RecordGrid grid(eval_sets.size(), static_cast<std::size_t>(max_epochs));
    const EpochHook hook = [&](const AgentState& agent, long ordinal) {
        for (std::size_t s = 0; s < eval_sets.size(); ++s) {
            if (eval_sets[s].empty()) continue;
            auto rec = evaluate(agent, eval_sets[s]);
            grid.put(s, ordinal, {static_cast<int>(s), ordinal, rec.macro_f1, rec.mean_loss});
        }
    };

    TrainOptions opt;
    opt.batch_size = setup.batch_size;
    opt.epochs = max_epochs;
    opt.collaborate = false;
    opt.include_self = setup.include_self;
    opt.workers = setup.workers;
    opt.round_budget = budget;

    RunHistory history;
    history.dataset = setup.dataset;
    history.mode = RunMode::centralized;
    history.scope = scope;
    history.rounds = run_training(agents, topology, weights, opt, hook, &history.round_log);
    history.total_batches = budget;
    history.records = grid.flatten();
    history.final_checkpoints.push_back(make_checkpoint(agents.front()));
    return history;
}

std::vector<SummaryRow> summarize(const RunHistory& history) {
    if (history.records.empty()) throw usage_error("summarize: empty history");

    std::map<long, SummaryRow> by_epoch;
    for (const auto& rec : history.records) {
        auto& row = by_epoch[rec.epoch];
        row.epoch = rec.epoch;
        row.avg_macro_f1 += rec.macro_f1;
        row.avg_mean_loss += rec.mean_loss;
        row.num_agents += 1;
    }
    std::vector<SummaryRow> rows;
    for (auto& [epoch, row] : by_epoch) {
        row.avg_macro_f1 /= row.num_agents;
        row.avg_mean_loss /= row.num_agents;
        rows.push_back(row);
    }
    return rows;
}

void write_results_csv(std::ostream& out, const std::string& experiment_id, const RunHistory& history) {
    out << "experiment_id,dataset,mode,scope,agent_id,epoch,macro_f1,mean_loss\n";
    for (const auto& r : history.records)
        out << experiment_id << "," << history.dataset << "," << to_string(history.mode) << ","
            << to_string(history.scope) << "," << r.agent_id << "," << r.epoch << ","
            << format_double(r.macro_f1) << "," << format_double(r.mean_loss) << "\n";
}

void write_summary_csv(std::ostream& out, const std::string& experiment_id, const RunHistory& history) {
    out << "experiment_id,dataset,mode,scope,epoch,avg_macro_f1,avg_mean_loss,num_agents\n";
    for (const auto& row : summarize(history))
        out << experiment_id << "," << history.dataset << "," << to_string(history.mode) << ","
            << to_string(history.scope) << "," << row.epoch << "," << format_double(row.avg_macro_f1)
            << "," << format_double(row.avg_mean_loss) << "," << row.num_agents << "\n";
}

}  // namespace colearn
