#ifndef BIN2VEC_GCN_CHECKPOINT_HPP
#define BIN2VEC_GCN_CHECKPOINT_HPP

// Checkpoint layout (all integers u64 little-endian, reals IEEE-754 binary64
// little-endian):
//   u8 version | "B2VM" | input_dim | layer count | layer sizes... | mlp_hidden
//   | classes | mode (0 symmetric, 1 row) | seed | vocabulary hash
//   | tensor count | per tensor: rows, cols, rows*cols reals (row-major)

#include "bin2vec/error.hpp"
#include "bin2vec/gcn/model.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace bin2vec::gcn {

inline constexpr std::uint8_t kCheckpointVersion = 1;

struct Checkpoint {
    ModelConfig config;
    std::uint64_t vocab_hash = 0;
    Params<double> params;
};

namespace detail {

inline void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class ByteReader {
public:
    explicit ByteReader(const std::string& data) : data_(data) {}

    std::uint8_t u8() {
        need(1);
        return static_cast<std::uint8_t>(data_[pos_++]);
    }

    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(data_[pos_ + i])) << (8 * i);
        pos_ += 8;
        return v;
    }

    double f64() { return std::bit_cast<double>(u64()); }

    std::string bytes(std::size_t n) {
        need(n);
        auto s = data_.substr(pos_, n);
        pos_ += n;
        return s;
    }

    bool done() const { return pos_ == data_.size(); }

private:
    const std::string& data_;
    std::size_t pos_ = 0;

    void need(std::size_t n) const {
        if (data_.size() - pos_ < n) throw ParseError("truncated checkpoint");
    }
};

}

inline std::string serialize_checkpoint(const Checkpoint& ck) {
    std::string out;
    out.push_back(static_cast<char>(kCheckpointVersion));
    out += "B2VM";
    const auto& c = ck.config;
    detail::put_u64(out, c.input_dim);
    detail::put_u64(out, c.layers.size());
    for (auto h : c.layers) detail::put_u64(out, h);
    detail::put_u64(out, c.mlp_hidden);
    detail::put_u64(out, c.classes);
    detail::put_u64(out, c.mode == NormMode::symmetric ? 0 : 1);
    detail::put_u64(out, c.seed);
    detail::put_u64(out, ck.vocab_hash);
    auto params = ck.params;
    auto shapes = params.shapes();
    detail::put_u64(out, shapes.size());
    std::size_t k = 0;
    params.for_each([&](double* p, std::size_t n) {
        detail::put_u64(out, static_cast<std::uint64_t>(shapes[k].first));
        detail::put_u64(out, static_cast<std::uint64_t>(shapes[k].second));
        for (std::size_t i = 0; i < n; ++i) detail::put_u64(out, std::bit_cast<std::uint64_t>(p[i]));
        ++k;
    });
    return out;
}

inline Checkpoint deserialize_checkpoint(const std::string& data) {
    detail::ByteReader r(data);
    auto version = r.u8();
    if (version != kCheckpointVersion) {
        throw ParseError("unsupported checkpoint version " + std::to_string(version));
    }
    if (r.bytes(4) != "B2VM") throw ParseError("not a model checkpoint");
    Checkpoint ck;
    auto& c = ck.config;
    c.input_dim = r.u64();
    auto layers = r.u64();
    if (layers == 0 || layers > 64) throw ParseError("implausible layer count " + std::to_string(layers));
    c.layers.clear();
    for (std::uint64_t i = 0; i < layers; ++i) c.layers.push_back(r.u64());
    c.mlp_hidden = r.u64();
    c.classes = r.u64();
    auto mode = r.u64();
    if (mode > 1) throw ParseError("bad normalization mode in checkpoint");
    c.mode = mode == 0 ? NormMode::symmetric : NormMode::row;
    c.seed = r.u64();
    ck.vocab_hash = r.u64();
    ck.params = init_params<double>(c);
    auto shapes = ck.params.shapes();
    if (r.u64() != shapes.size()) throw ParseError("checkpoint tensor count does not match its configuration");
    std::size_t k = 0;
    ck.params.for_each([&](double* p, std::size_t n) {
        auto rows = r.u64();
        auto cols = r.u64();
        if (rows != static_cast<std::uint64_t>(shapes[k].first) || cols != static_cast<std::uint64_t>(shapes[k].second)) {
            throw ParseError("checkpoint tensor " + std::to_string(k) + " has shape " + std::to_string(rows) + "x" +
                             std::to_string(cols));
        }
        for (std::size_t i = 0; i < n; ++i) p[i] = r.f64();
        ++k;
    });
    if (!r.done()) throw ParseError("trailing bytes after checkpoint");
    return ck;
}

inline void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    auto bytes = serialize_checkpoint(ck);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize_checkpoint(data);
}

}

#endif
