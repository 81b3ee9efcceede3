#include "colearn/serialize.hpp"

#include "colearn/error.hpp"
#include "colearn/util.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <ostream>

namespace colearn {

namespace {

void put_u64(std::ostream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (!in) throw data_error("truncated binary stream");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

void put_f64(std::ostream& out, double d) { put_u64(out, std::bit_cast<std::uint64_t>(d)); }

double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

void put_values(std::ostream& out, const std::vector<double>& v) {
    for (double d : v) put_f64(out, d);
}

std::vector<double> get_values(std::istream& in, std::uint64_t n) {
    std::vector<double> v(n);
    for (auto& d : v) d = get_f64(in);
    return v;
}

void append_u64(std::vector<std::uint8_t>& buf, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

std::uint64_t take_u64(const std::vector<std::uint8_t>& buf, std::size_t& pos) {
    if (pos + 8 > buf.size()) throw data_error("truncated message");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[pos + i]) << (8 * i);
    pos += 8;
    return v;
}

}  // namespace

void write_param_block(std::ostream& out, const ModelArchitecture& arch, const ParamVector& params) {
    if (params.size() != arch.param_count())
        throw architecture_error("parameter length does not match architecture");
    put_u64(out, arch.fingerprint());
    put_u64(out, params.size());
    put_values(out, params);
}

ParamVector read_param_block(std::istream& in, const ModelArchitecture& arch) {
    const std::uint64_t fp = get_u64(in);
    if (fp != arch.fingerprint())
        throw architecture_error("architecture fingerprint mismatch: stream has " + to_hex(fp) +
                                 ", expected " + to_hex(arch.fingerprint()));
    const std::uint64_t n = get_u64(in);
    if (n != arch.param_count()) throw data_error("parameter block length mismatch");
    return get_values(in, n);
}

void write_checkpoint(std::ostream& out, const AgentCheckpoint& ck) {
    put_u64(out, ck.fingerprint);
    put_u64(out, static_cast<std::uint64_t>(ck.epoch));
    put_u64(out, ck.batch_cursor);
    put_u64(out, static_cast<std::uint64_t>(ck.adam.step_count));
    put_f64(out, ck.adam.alpha);
    put_f64(out, ck.adam.beta1);
    put_f64(out, ck.adam.beta2);
    put_f64(out, ck.adam.epsilon);
    put_u64(out, ck.params.size());
    put_values(out, ck.params);
    put_values(out, ck.adam.first_moment);
    put_values(out, ck.adam.second_moment);
}

AgentCheckpoint read_checkpoint(std::istream& in) {
    AgentCheckpoint ck;
    ck.fingerprint = get_u64(in);
    ck.epoch = static_cast<long>(get_u64(in));
    ck.batch_cursor = get_u64(in);
    ck.adam.step_count = static_cast<long>(get_u64(in));
    ck.adam.alpha = get_f64(in);
    ck.adam.beta1 = get_f64(in);
    ck.adam.beta2 = get_f64(in);
    ck.adam.epsilon = get_f64(in);
    const std::uint64_t n = get_u64(in);
    ck.params = get_values(in, n);
    ck.adam.first_moment = get_values(in, n);
    ck.adam.second_moment = get_values(in, n);
    return ck;
}

void save_checkpoint(const std::string& path, const AgentCheckpoint& ck) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot open checkpoint for writing: " + path);
    write_checkpoint(out, ck);
    if (!out) throw data_error("failed writing checkpoint: " + path);
}

AgentCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open checkpoint: " + path);
    return read_checkpoint(in);
}

std::vector<std::uint8_t> encode_message(const ParamMessage& msg) {
    std::vector<std::uint8_t> buf;
    buf.reserve(40 + msg.params.size() * 8);
    append_u64(buf, msg.sender_id);
    append_u64(buf, msg.round);
    append_u64(buf, std::bit_cast<std::uint64_t>(msg.weight));
    append_u64(buf, msg.fingerprint);
    append_u64(buf, msg.params.size());
    for (double d : msg.params) append_u64(buf, std::bit_cast<std::uint64_t>(d));
    return buf;
}

ParamMessage decode_message(const std::vector<std::uint8_t>& bytes) {
    std::size_t pos = 0;
    ParamMessage msg;
    msg.sender_id = static_cast<std::uint32_t>(take_u64(bytes, pos));
    msg.round = take_u64(bytes, pos);
    msg.weight = std::bit_cast<double>(take_u64(bytes, pos));
    msg.fingerprint = take_u64(bytes, pos);
    const std::uint64_t n = take_u64(bytes, pos);
    msg.params.resize(n);
    for (auto& d : msg.params) d = std::bit_cast<double>(take_u64(bytes, pos));
    return msg;
}

}  // namespace colearn
