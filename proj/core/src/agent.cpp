#include "colearn/agent.hpp"

#include "colearn/error.hpp"
#include "colearn/rng.hpp"

#include <algorithm>
#include <numeric>

namespace colearn {

namespace {

void reshuffle(AgentState& agent) {
    Rng rng(derive_seed(agent.rng_seed, "shuffle", static_cast<std::uint64_t>(agent.epoch)));
    std::iota(agent.order.begin(), agent.order.end(), 0u);
    shuffle(agent.order, rng);
}

}  // namespace

long batches_per_epoch(std::size_t train_size, int batch_size) {
    if (train_size == 0) return 0;
    return static_cast<long>((train_size + static_cast<std::size_t>(batch_size) - 1) /
                             static_cast<std::size_t>(batch_size));
}

AgentState make_agent(int agent_id, const ModelArchitecture& arch, AgentDataset data,
                      std::uint64_t init_seed, std::uint64_t rng_seed,
                      const AdamState& adam_template) {
    arch.validate();
    AgentState agent;
    agent.agent_id = agent_id;
    agent.arch = arch;
    agent.params = init_params(arch, init_seed);
    agent.adam = AdamState::create(arch.param_count());
    agent.adam.alpha = adam_template.alpha;
    agent.adam.beta1 = adam_template.beta1;
    agent.adam.beta2 = adam_template.beta2;
    agent.adam.epsilon = adam_template.epsilon;
    agent.data = std::move(data);
    agent.rng_seed = rng_seed;
    agent.passive = agent.data.train.empty();
    if (!agent.passive) {
        agent.order.resize(agent.data.train.size());
        reshuffle(agent);
    }
    return agent;
}

std::optional<double> train_one_batch(AgentState& agent, int batch_size) {
    if (agent.passive) return std::nullopt;
    if (batch_size < 1) throw usage_error("batch_size must be >= 1");

    const std::size_t n = agent.data.train.size();
    const std::size_t begin = agent.batch_cursor * static_cast<std::size_t>(batch_size);
    const std::size_t end = std::min(n, begin + static_cast<std::size_t>(batch_size));

    std::vector<const SensorWindow*> batch;
    batch.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i)
        batch.push_back(&agent.data.train[agent.order[i]]);

    ParamVector grad;
    const double loss = loss_and_grad(agent.params, agent.arch, batch, grad);
    adam_step(agent.params, grad, agent.adam);

    agent.trained_batches += 1;
    agent.batch_cursor += 1;
    if (agent.batch_cursor >= static_cast<std::size_t>(batches_per_epoch(n, batch_size))) {
        agent.epoch += 1;
        agent.batch_cursor = 0;
        reshuffle(agent);
    }
    return loss;
}

MetricsRecord evaluate(const AgentState& agent, std::span<const SensorWindow> windows) {
    if (windows.empty()) throw usage_error("evaluate: empty window list");

    MetricsRecord rec;
    rec.agent_id = agent.agent_id;
    rec.epoch = agent.epoch;
    rec.confusion = ConfusionMatrix(agent.arch.num_classes);
    double loss_sum = 0.0;
    for (const auto& w : windows) {
        const auto logits = forward(agent.params, agent.arch, w);
        rec.confusion.at(w.label, argmax(logits)) += 1;
        loss_sum += cross_entropy(logits, w.label);
    }
    rec.mean_loss = loss_sum / static_cast<double>(windows.size());
    rec.per_class_f1 = per_class_f1(rec.confusion);
    rec.macro_f1 = macro_f1(rec.confusion);
    return rec;
}

ParamVector get_params(const AgentState& agent) { return agent.params; }

void set_params(AgentState& agent, const ParamVector& params) {
    if (params.size() != agent.arch.param_count())
        throw architecture_error("set_params: length " + std::to_string(params.size()) +
                                 " does not match architecture parameter count " +
                                 std::to_string(agent.arch.param_count()));
    agent.params = params;
}

AgentCheckpoint make_checkpoint(const AgentState& agent) {
    AgentCheckpoint ck;
    ck.fingerprint = agent.arch.fingerprint();
    ck.params = agent.params;
    ck.adam = agent.adam;
    ck.epoch = agent.epoch;
    ck.batch_cursor = agent.batch_cursor;
    return ck;
}

void restore_checkpoint(AgentState& agent, const AgentCheckpoint& ck) {
    if (ck.fingerprint != agent.arch.fingerprint())
        throw architecture_error("checkpoint fingerprint does not match agent architecture");
    if (ck.params.size() != agent.arch.param_count())
        throw architecture_error("checkpoint parameter length mismatch");
    agent.params = ck.params;
    agent.adam = ck.adam;
    agent.epoch = ck.epoch;
    agent.batch_cursor = static_cast<std::size_t>(ck.batch_cursor);
    if (!agent.passive) reshuffle(agent);
}

}  // namespace colearn
