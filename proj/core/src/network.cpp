#include "colearn/network.hpp"

#include "colearn/error.hpp"
#include "colearn/rng.hpp"
#include "colearn/util.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <ostream>
#include <set>
#include <thread>

namespace colearn {

std::vector<std::vector<int>> Topology::in_lists() const {
    std::vector<std::vector<int>> lists(static_cast<std::size_t>(num_agents));
    for (const auto& [s, r] : edges) lists[static_cast<std::size_t>(r)].push_back(s);
    for (auto& l : lists) std::sort(l.begin(), l.end());
    return lists;
}

std::vector<std::vector<int>> Topology::out_lists() const {
    std::vector<std::vector<int>> lists(static_cast<std::size_t>(num_agents));
    for (const auto& [s, r] : edges) lists[static_cast<std::size_t>(s)].push_back(r);
    for (auto& l : lists) std::sort(l.begin(), l.end());
    return lists;
}

Topology build_topology(int num_agents, const std::string& kind, std::uint64_t seed) {
    if (num_agents < 1) throw usage_error("build_topology: num_agents must be >= 1");
    Topology topo;
    topo.num_agents = num_agents;

    if (kind == "full") {
        for (int i = 0; i < num_agents; ++i)
            for (int j = 0; j < num_agents; ++j)
                if (i != j) topo.edges.emplace_back(i, j);
        return topo;
    }
    if (kind == "ring") {
        if (num_agents > 1) {
            std::set<std::pair<int, int>> edges;
            for (int i = 0; i < num_agents; ++i) {
                const int j = (i + 1) % num_agents;
                edges.emplace(i, j);
                edges.emplace(j, i);
            }
            topo.edges.assign(edges.begin(), edges.end());
        }
        return topo;
    }
    if (kind.starts_with("random")) {
        bool ok = false;
        const long long k = parse_int(kind.substr(6), &ok);
        if (!ok || k < 1)
            throw config_error("topology kind '" + kind + "': expected random<k> with k >= 1");
        Rng rng(derive_seed(seed, "topology", 0));
        std::set<std::pair<int, int>> edges;
        for (int i = 0; i < num_agents; ++i) {
            std::vector<int> others;
            for (int j = 0; j < num_agents; ++j)
                if (j != i) others.push_back(j);
            shuffle(others, rng);
            const auto take = std::min<std::size_t>(static_cast<std::size_t>(k), others.size());
            for (std::size_t t = 0; t < take; ++t) {
                edges.emplace(i, others[t]);
                edges.emplace(others[t], i);
            }
        }
        topo.edges.assign(edges.begin(), edges.end());
        return topo;
    }
    throw config_error("unknown topology kind '" + kind + "' (expected full, ring or random<k>)");
}

InteractionWeights derive_weights(const Topology& topology, std::span<const std::size_t> dataset_sizes,
                                  bool include_self) {
    if (static_cast<int>(dataset_sizes.size()) != topology.num_agents)
        throw usage_error("derive_weights: one dataset size per agent required");

    InteractionWeights w;
    w.include_self = include_self;
    w.sender_weight.reserve(dataset_sizes.size());
    for (std::size_t s : dataset_sizes) w.sender_weight.push_back(static_cast<double>(s));

    const auto in = topology.in_lists();
    w.per_receiver.resize(static_cast<std::size_t>(topology.num_agents));
    for (int i = 0; i < topology.num_agents; ++i) {
        auto& vec = w.per_receiver[static_cast<std::size_t>(i)];
        for (int j : in[static_cast<std::size_t>(i)])
            vec.emplace_back(j, w.sender_weight[static_cast<std::size_t>(j)]);
        if (include_self) vec.emplace_back(i, w.sender_weight[static_cast<std::size_t>(i)]);
        std::sort(vec.begin(), vec.end());
    }
    return w;
}

std::optional<ParamVector> aggregate(std::span<const NeighborContribution> contributions) {
    if (contributions.empty()) throw usage_error("aggregate: no contributions");

    std::vector<const NeighborContribution*> sorted;
    sorted.reserve(contributions.size());
    for (const auto& c : contributions) sorted.push_back(&c);
    std::sort(sorted.begin(), sorted.end(),
              [](const auto* a, const auto* b) { return a->sender_id < b->sender_id; });

    const std::size_t p = sorted.front()->params.size();
    double total = 0.0;
    for (const auto* c : sorted) {
        if (c->params.size() != p)
            throw architecture_error("aggregate: contribution from sender " +
                                     std::to_string(c->sender_id) + " has length " +
                                     std::to_string(c->params.size()) + ", expected " +
                                     std::to_string(p));
        if (c->weight < 0.0) throw usage_error("aggregate: negative weight");
        total += c->weight;
    }
    if (total == 0.0) return std::nullopt;

    ParamVector out(p, 0.0);
    for (const auto* c : sorted) {
        const double wj = c->weight;
        if (wj == 0.0) continue;
        const double* v = c->params.data();
        for (std::size_t k = 0; k < p; ++k) out[k] += wj * v[k];
    }
    const double inv = 1.0 / total;
    for (auto& x : out) x *= inv;

    // Rounding must not push a mean outside the contributions' hull.
    for (std::size_t k = 0; k < p; ++k) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (const auto* c : sorted) {
            if (c->weight == 0.0) continue;
            lo = std::min(lo, c->params[k]);
            hi = std::max(hi, c->params[k]);
        }
        out[k] = std::clamp(out[k], lo, hi);
    }
    return out;
}

void write_round_log_csv(std::ostream& out, const RoundLog& log) {
    out << "round,agent,pre_checksum,post_checksum,loss\n";
    for (const auto& e : log)
        out << e.round << "," << e.agent_id << "," << to_hex(e.pre_checksum) << ","
            << to_hex(e.post_checksum) << "," << format_double(e.loss) << "\n";
}

namespace {

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
    if (workers <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    const int threads = std::min(workers, n);
    std::vector<std::thread> pool;
    std::exception_ptr first_error;
    std::mutex err_mutex;
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&, t]() {
            try {
                for (int i = t; i < n; i += threads) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

struct Envelope {
    int sender = 0;
    long round = 0;
    double weight = 0.0;
    std::uint64_t fingerprint = 0;
    std::shared_ptr<const ParamVector> params;
};

}  // namespace

long run_training(std::vector<AgentState>& agents, const Topology& topology,
                  const InteractionWeights& weights, const TrainOptions& options,
                  const EpochHook& hook, RoundLog* log) {
    const int n = static_cast<int>(agents.size());
    if (n != topology.num_agents)
        throw usage_error("run_training: agent count does not match topology");
    if (options.epochs < 1 && options.round_budget < 0)
        throw usage_error("run_training: epochs must be >= 1");

    const auto out_lists = topology.out_lists();

    // Per-agent batch quota.
    std::vector<long> quota(static_cast<std::size_t>(n), 0);
    long rounds = options.round_budget;
    if (rounds < 0) {
        rounds = 0;
        for (int i = 0; i < n; ++i) {
            const long b = batches_per_epoch(agents[static_cast<std::size_t>(i)].data.train.size(),
                                             options.batch_size);
            quota[static_cast<std::size_t>(i)] = options.epochs * b;
            rounds = std::max(rounds, quota[static_cast<std::size_t>(i)]);
        }
    } else {
        for (int i = 0; i < n; ++i)
            quota[static_cast<std::size_t>(i)] =
                agents[static_cast<std::size_t>(i)].passive ? 0 : rounds;
    }

    std::vector<std::vector<Envelope>> inbox(static_cast<std::size_t>(n));
    std::vector<std::vector<Envelope>> next_inbox(static_cast<std::size_t>(n));
    std::vector<RoundLogEntry> round_entries(static_cast<std::size_t>(n));

    for (long round = 0; round < rounds; ++round) {
        // Collect & aggregate the previous round's snapshots.
        parallel_for(n, options.workers, [&](int i) {
            auto& agent = agents[static_cast<std::size_t>(i)];
            auto& entry = round_entries[static_cast<std::size_t>(i)];
            entry = RoundLogEntry{};
            entry.round = round;
            entry.agent_id = agent.agent_id;
            entry.pre_checksum = checksum(agent.params);
            entry.loss = std::numeric_limits<double>::quiet_NaN();

            if (options.collaborate && round > 0) {
                std::vector<NeighborContribution> contribs;
                contribs.reserve(inbox[static_cast<std::size_t>(i)].size() + 1);
                for (const auto& env : inbox[static_cast<std::size_t>(i)]) {
                    if (env.fingerprint != agent.arch.fingerprint())
                        throw architecture_error("message fingerprint mismatch from sender " +
                                                 std::to_string(env.sender));
                    contribs.push_back({env.sender, *env.params, env.weight});
                }
                if (options.include_self)
                    contribs.push_back({agent.agent_id, agent.params,
                                        weights.sender_weight[static_cast<std::size_t>(i)]});
                if (!contribs.empty()) {
                    if (auto averaged = aggregate(contribs)) agent.params = std::move(*averaged);
                    // total weight zero: keep current parameters
                }
            }
            entry.post_checksum = checksum(agent.params);
        });

        // Local training.
        parallel_for(n, options.workers, [&](int i) {
            auto& agent = agents[static_cast<std::size_t>(i)];
            if (agent.passive || agent.trained_batches >= quota[static_cast<std::size_t>(i)]) return;
            const long epoch_before = agent.epoch;
            const auto loss = train_one_batch(agent, options.batch_size);
            if (loss) round_entries[static_cast<std::size_t>(i)].loss = *loss;
            if (hook && agent.epoch > epoch_before) hook(agent, agent.epoch);
        });

        // Publish snapshots for the next round.
        if (options.collaborate && round + 1 < rounds) {
            for (int i = 0; i < n; ++i) {
                const auto& agent = agents[static_cast<std::size_t>(i)];
                const auto& outs = out_lists[static_cast<std::size_t>(i)];
                if (outs.empty()) continue;
                auto snapshot = std::make_shared<const ParamVector>(agent.params);
                for (int r : outs)
                    next_inbox[static_cast<std::size_t>(r)].push_back(
                        {agent.agent_id, round, weights.sender_weight[static_cast<std::size_t>(i)],
                         agent.arch.fingerprint(), snapshot});
            }
        }
        for (int i = 0; i < n; ++i) {
            inbox[static_cast<std::size_t>(i)] = std::move(next_inbox[static_cast<std::size_t>(i)]);
            next_inbox[static_cast<std::size_t>(i)].clear();
        }

        if (log) log->insert(log->end(), round_entries.begin(), round_entries.end());
    }

    // Budget mode can leave an epoch in progress; surface it to the hook so
    // the final partial pass still gets evaluated.
    if (hook && options.round_budget >= 0) {
        for (auto& agent : agents)
            if (!agent.passive && agent.batch_cursor != 0) hook(agent, agent.epoch + 1);
    }
    return rounds;
}

}  // namespace colearn
