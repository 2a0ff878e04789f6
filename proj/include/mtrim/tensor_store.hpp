#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace mtrim {

enum class Dtype { F32, F16, I64, U8 };

std::size_t dtype_size(Dtype dtype);
std::string_view dtype_name(Dtype dtype);
Dtype dtype_from_name(std::string_view name);  // throws on unknown dtype

bool is_floating(Dtype dtype);

// One named tensor: little-endian raw bytes plus shape and element type.
// An empty shape denotes a scalar (one element).
struct TensorEntry {
    std::string name;
    Dtype dtype = Dtype::F32;
    std::vector<std::uint64_t> shape;
    std::vector<std::uint8_t> data;

    std::uint64_t numel() const;
    std::uint64_t byte_size() const { return numel() * dtype_size(dtype); }

    bool operator==(const TensorEntry&) const = default;
};

// In-memory checkpoint: named tensors plus optional string metadata. The
// on-disk layout is byte-compatible with the common safetensors container:
// an 8-byte little-endian header length, a JSON header mapping tensor names
// to {dtype, shape, data_offsets} (offsets relative to the end of the
// header), then the packed data blocks.
struct TensorFile {
    std::map<std::string, TensorEntry> entries;
    std::map<std::string, std::string> metadata;

    bool operator==(const TensorFile&) const = default;

    const TensorEntry& at(const std::string& name) const;
    void add(TensorEntry entry);  // validates byte length and name uniqueness
};

TensorFile read_tensor_file(const std::filesystem::path& path);

// Deterministic serialization: tensor names sorted, compact JSON header,
// data packed contiguously in header order. Equal inputs produce
// byte-identical files.
void write_tensor_file(const TensorFile& tf, const std::filesystem::path& path);

// Exact size write_tensor_file will produce: 8 + header bytes + data bytes.
std::uint64_t predicted_file_bytes(const TensorFile& tf);

}  // namespace mtrim
