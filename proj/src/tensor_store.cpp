#include "mtrim/tensor_store.hpp"

#include <fstream>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "mtrim/io_util.hpp"

namespace mtrim {

namespace {

// The safetensors format caps the header at 100 MB; enforcing it here keeps
// a corrupt length field from triggering a huge allocation.
constexpr std::uint64_t kMaxHeaderBytes = 100ull * 1000 * 1000;

std::string build_header(const TensorFile& tf) {
    nlohmann::ordered_json header;
    if (!tf.metadata.empty()) {
        header["__metadata__"] = tf.metadata;
    }
    std::uint64_t offset = 0;
    for (const auto& [name, entry] : tf.entries) {
        nlohmann::ordered_json info;
        info["dtype"] = std::string(dtype_name(entry.dtype));
        info["shape"] = entry.shape;
        info["data_offsets"] = {offset, offset + entry.data.size()};
        header[name] = std::move(info);
        offset += entry.data.size();
    }
    return header.dump();
}

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& why) {
    throw std::runtime_error(path.string() + ": " + why);
}

}  // namespace

std::size_t dtype_size(Dtype dtype) {
    switch (dtype) {
        case Dtype::F32: return 4;
        case Dtype::F16: return 2;
        case Dtype::I64: return 8;
        case Dtype::U8: return 1;
    }
    throw std::logic_error("unreachable dtype");
}

std::string_view dtype_name(Dtype dtype) {
    switch (dtype) {
        case Dtype::F32: return "F32";
        case Dtype::F16: return "F16";
        case Dtype::I64: return "I64";
        case Dtype::U8: return "U8";
    }
    throw std::logic_error("unreachable dtype");
}

Dtype dtype_from_name(std::string_view name) {
    if (name == "F32") return Dtype::F32;
    if (name == "F16") return Dtype::F16;
    if (name == "I64") return Dtype::I64;
    if (name == "U8") return Dtype::U8;
    throw std::runtime_error("unknown dtype \"" + std::string(name) + "\"");
}

bool is_floating(Dtype dtype) {
    return dtype == Dtype::F32 || dtype == Dtype::F16;
}

std::uint64_t TensorEntry::numel() const {
    std::uint64_t n = 1;
    for (std::uint64_t dim : shape) {
        if (dim != 0 && n > std::numeric_limits<std::uint64_t>::max() / dim) {
            throw std::runtime_error("tensor \"" + name + "\": shape product overflows");
        }
        n *= dim;
    }
    return n;
}

const TensorEntry& TensorFile::at(const std::string& name) const {
    auto it = entries.find(name);
    if (it == entries.end()) {
        throw std::runtime_error("no tensor named \"" + name + "\"");
    }
    return it->second;
}

void TensorFile::add(TensorEntry entry) {
    if (entry.name.empty()) {
        throw std::runtime_error("tensor name must be non-empty");
    }
    if (entry.data.size() != entry.byte_size()) {
        throw std::runtime_error("tensor \"" + entry.name + "\": data has " +
                                 std::to_string(entry.data.size()) + " bytes, shape requires " +
                                 std::to_string(entry.byte_size()));
    }
    const std::string name = entry.name;
    if (!entries.emplace(name, std::move(entry)).second) {
        throw std::runtime_error("duplicate tensor name \"" + name + "\"");
    }
}

TensorFile read_tensor_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail(path, "cannot open file");
    }
    const std::uint64_t file_size = std::filesystem::file_size(path);
    if (file_size < 8) {
        fail(path, "truncated: no header length");
    }
    std::uint8_t len_bytes[8];
    in.read(reinterpret_cast<char*>(len_bytes), 8);
    std::uint64_t header_len = 0;
    for (int i = 7; i >= 0; --i) {
        header_len = (header_len << 8) | len_bytes[i];
    }
    if (header_len > kMaxHeaderBytes) {
        fail(path, "header length " + std::to_string(header_len) + " exceeds limit");
    }
    if (8 + header_len > file_size) {
        fail(path, "truncated: header length " + std::to_string(header_len) +
                       " exceeds file size");
    }
    std::string header_text(header_len, '\0');
    in.read(header_text.data(), static_cast<std::streamsize>(header_len));
    if (!in) {
        fail(path, "truncated header");
    }
    nlohmann::ordered_json header;
    try {
        header = nlohmann::ordered_json::parse(header_text);
    } catch (const nlohmann::json::exception& e) {
        fail(path, std::string("malformed JSON header: ") + e.what());
    }
    if (!header.is_object()) {
        fail(path, "header is not a JSON object");
    }

    const std::uint64_t data_len = file_size - 8 - header_len;
    TensorFile tf;
    std::uint64_t expected_begin = 0;
    std::size_t tensor_count = 0;
    for (const auto& [name, info] : header.items()) {
        if (name == "__metadata__") {
            if (!info.is_object()) {
                fail(path, "__metadata__ is not an object");
            }
            for (const auto& [k, v] : info.items()) {
                if (!v.is_string()) {
                    fail(path, "__metadata__ value for \"" + k + "\" is not a string");
                }
                tf.metadata[k] = v.get<std::string>();
            }
            continue;
        }
        ++tensor_count;
        TensorEntry entry;
        entry.name = name;
        try {
            entry.dtype = dtype_from_name(info.at("dtype").get<std::string>());
            entry.shape = info.at("shape").get<std::vector<std::uint64_t>>();
            const auto offsets = info.at("data_offsets").get<std::vector<std::uint64_t>>();
            if (offsets.size() != 2 || offsets[0] > offsets[1]) {
                fail(path, "tensor \"" + name + "\": bad data_offsets");
            }
            const std::uint64_t begin = offsets[0];
            const std::uint64_t end = offsets[1];
            if (end > data_len) {
                fail(path, "tensor \"" + name + "\": data_offsets out of range");
            }
            if (begin != expected_begin) {
                fail(path, "tensor \"" + name + "\": data blocks not contiguous in header order");
            }
            if (end - begin != entry.byte_size()) {
                fail(path, "tensor \"" + name + "\": shape requires " +
                               std::to_string(entry.byte_size()) + " bytes but data_offsets span " +
                               std::to_string(end - begin));
            }
            expected_begin = end;
            entry.data.resize(end - begin);
            in.seekg(static_cast<std::streamoff>(8 + header_len + begin));
            in.read(reinterpret_cast<char*>(entry.data.data()),
                    static_cast<std::streamsize>(entry.data.size()));
            if (!in) {
                fail(path, "tensor \"" + name + "\": truncated data");
            }
        } catch (const nlohmann::json::exception& e) {
            fail(path, "tensor \"" + name + "\": malformed header entry: " + e.what());
        }
        tf.add(std::move(entry));
    }
    if (tf.entries.size() != tensor_count) {
        fail(path, "duplicate tensor names in header");
    }
    if (expected_begin != data_len) {
        fail(path, "data buffer has " + std::to_string(data_len) + " bytes but tensors cover " +
                       std::to_string(expected_begin));
    }
    return tf;
}

void write_tensor_file(const TensorFile& tf, const std::filesystem::path& path) {
    for (const auto& [name, entry] : tf.entries) {
        if (entry.name != name) {
            throw std::runtime_error("tensor map key \"" + name + "\" does not match entry name \"" +
                                     entry.name + "\"");
        }
        if (entry.data.size() != entry.byte_size()) {
            throw std::runtime_error("tensor \"" + name + "\": data has " +
                                     std::to_string(entry.data.size()) +
                                     " bytes, shape requires " + std::to_string(entry.byte_size()));
        }
    }
    const std::string header = build_header(tf);
    io::atomic_write(path, [&](std::ostream& out) {
        std::uint8_t len_bytes[8];
        std::uint64_t n = header.size();
        for (int i = 0; i < 8; ++i) {
            len_bytes[i] = static_cast<std::uint8_t>(n & 0xFF);
            n >>= 8;
        }
        out.write(reinterpret_cast<const char*>(len_bytes), 8);
        out.write(header.data(), static_cast<std::streamsize>(header.size()));
        for (const auto& [name, entry] : tf.entries) {
            out.write(reinterpret_cast<const char*>(entry.data.data()),
                      static_cast<std::streamsize>(entry.data.size()));
        }
    });
}

std::uint64_t predicted_file_bytes(const TensorFile& tf) {
    std::uint64_t total = 8 + build_header(tf).size();
    for (const auto& [name, entry] : tf.entries) {
        total += entry.data.size();
    }
    return total;
}

}  // namespace mtrim
