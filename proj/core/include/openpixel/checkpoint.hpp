#pragma once

#include <cstring>
#include <fstream>
#include <variant>

#include "openpixel/network.hpp"

namespace openpixel {

// Versioned binary checkpoint: magic, format version, value dtype, n_classes,
// then each parameter tensor (rank, extents, raw little-endian values) in the
// fixed entries() order. Round-trips are bit-exact.

namespace ckpt_detail {

inline constexpr char kMagic[8] = {'O', 'P', 'X', 'C', 'K', 'P', 'T', '1'};
inline constexpr uint32_t kVersion = 1;

template <typename V>
void write_raw(std::ostream& os, const V& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(V));
}

template <typename V>
V read_raw(std::istream& is, const char* field) {
    V v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(V));
    if (!is) throw std::runtime_error(std::string("checkpoint: truncated while reading ") + field);
    return v;
}

}  // namespace ckpt_detail

template <typename T>
void save_checkpoint(const NetworkParams<T>& params, const std::string& path) {
    validate_params(params);
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("checkpoint: cannot open '" + path + "' for writing");
    using namespace ckpt_detail;
    os.write(kMagic, sizeof(kMagic));
    write_raw<uint32_t>(os, kVersion);
    write_raw<uint8_t>(os, std::is_same_v<T, float> ? 0 : 1);
    write_raw<uint32_t>(os, static_cast<uint32_t>(params.n_classes));
    const auto entries = params.entries();
    write_raw<uint32_t>(os, static_cast<uint32_t>(entries.size()));
    for (const auto& [name, tensor] : entries) {
        write_raw<uint8_t>(os, static_cast<uint8_t>(tensor->ndim()));
        for (int64_t d = 0; d < tensor->ndim(); ++d)
            write_raw<uint64_t>(os, static_cast<uint64_t>(tensor->dim(d)));
        os.write(reinterpret_cast<const char*>(tensor->data()),
                 static_cast<std::streamsize>(tensor->size() * sizeof(T)));
    }
    if (!os) throw std::runtime_error("checkpoint: write failed for '" + path + "'");
}

namespace ckpt_detail {

template <typename T>
NetworkParams<T> load_body(std::istream& is, uint32_t n_classes) {
    NetworkParams<T> params;
    params.n_classes = static_cast<int64_t>(n_classes);
    const auto expected = expected_param_shapes(params.n_classes);
    const auto count = read_raw<uint32_t>(is, "tensor count");
    if (count != expected.size())
        throw std::runtime_error("checkpoint: tensor count " + std::to_string(count) +
                                 ", expected " + std::to_string(expected.size()));
    auto entries = params.entries();
    for (size_t i = 0; i < expected.size(); ++i) {
        const auto& [name, want_shape] = expected[i];
        const auto ndim = read_raw<uint8_t>(is, name);
        Shape shape;
        for (uint8_t d = 0; d < ndim; ++d)
            shape.push_back(static_cast<int64_t>(read_raw<uint64_t>(is, name)));
        if (shape != want_shape)
            throw std::runtime_error(std::string("checkpoint: field ") + name + " has shape " +
                                     shape_str(shape) + ", expected " + shape_str(want_shape));
        Tensor<T> t(shape);
        is.read(reinterpret_cast<char*>(t.data()),
                static_cast<std::streamsize>(t.size() * sizeof(T)));
        if (!is)
            throw std::runtime_error(std::string("checkpoint: truncated in values of field ") +
                                     name);
        t.check_finite(name);
        *entries[i].second = std::move(t);
    }
    char extra;
    is.read(&extra, 1);
    if (is)
        throw std::runtime_error("checkpoint: trailing bytes after last tensor");
    return params;
}

}  // namespace ckpt_detail

using CheckpointParams = std::variant<NetworkParams<float>, NetworkParams<double>>;

// expected_classes >= 2 enforces that the stored head matches the class count
// the caller is about to run with.
inline CheckpointParams load_checkpoint(const std::string& path, int64_t expected_classes = -1) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("checkpoint: cannot open '" + path + "'");
    using namespace ckpt_detail;
    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kMagic, sizeof(magic)) != 0)
        throw std::runtime_error("checkpoint: bad magic in '" + path + "'");
    const auto version = read_raw<uint32_t>(is, "version");
    if (version != kVersion)
        throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
    const auto dtype = read_raw<uint8_t>(is, "dtype");
    const auto n_classes = read_raw<uint32_t>(is, "n_classes");
    if (n_classes < 2 || n_classes > 4096)
        throw std::runtime_error("checkpoint: implausible n_classes " + std::to_string(n_classes));
    if (expected_classes >= 2 && static_cast<int64_t>(n_classes) != expected_classes)
        throw std::runtime_error("checkpoint: field n_classes is " + std::to_string(n_classes) +
                                 " but the run needs " + std::to_string(expected_classes));
    if (dtype == 0) return ckpt_detail::load_body<float>(is, n_classes);
    if (dtype == 1) return ckpt_detail::load_body<double>(is, n_classes);
    throw std::runtime_error("checkpoint: unknown dtype tag " + std::to_string(dtype));
}

}  // namespace openpixel
