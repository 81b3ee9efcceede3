#pragma once

#include "colearn/nn.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace colearn {

// Binary formats. Everything is little-endian regardless of host order.
//
// Parameter block (checkpoints, inter-agent messages):
//   u64  architecture fingerprint
//   u64  length p
//   f64  values[p]
//
// Checkpoint = parameter block + optimizer state + progress counters.
// Message   = header {sender, round, weight, fingerprint} + raw values.

void write_param_block(std::ostream& out, const ModelArchitecture& arch, const ParamVector& params);

// Throws architecture_error when the stored fingerprint does not match
// `arch`, data_error on a truncated or malformed stream.
ParamVector read_param_block(std::istream& in, const ModelArchitecture& arch);

struct AgentCheckpoint {
    std::uint64_t fingerprint = 0;
    ParamVector params;
    AdamState adam;
    long epoch = 0;
    std::uint64_t batch_cursor = 0;
};

void write_checkpoint(std::ostream& out, const AgentCheckpoint& ck);
AgentCheckpoint read_checkpoint(std::istream& in);

void save_checkpoint(const std::string& path, const AgentCheckpoint& ck);
AgentCheckpoint load_checkpoint(const std::string& path);

// Wire format for one parameter-exchange message. The weight rides along
// with every send, so receivers never need prior knowledge of the network
// weight table.
struct ParamMessage {
    std::uint32_t sender_id = 0;
    std::uint64_t round = 0;
    double weight = 0.0;
    std::uint64_t fingerprint = 0;
    ParamVector params;
};

std::vector<std::uint8_t> encode_message(const ParamMessage& msg);
ParamMessage decode_message(const std::vector<std::uint8_t>& bytes);

}  // namespace colearn
