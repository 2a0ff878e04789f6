#pragma once

#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "mtrim/tensor_store.hpp"

namespace mtrim::testing {

inline TensorEntry random_f32_tensor(std::string name, std::vector<std::uint64_t> shape,
                                     std::mt19937& rng) {
    TensorEntry entry;
    entry.name = std::move(name);
    entry.shape = std::move(shape);
    entry.dtype = Dtype::F32;
    std::uniform_real_distribution<float> dist(-2.0f, 2.0f);
    entry.data.resize(entry.byte_size());
    for (std::size_t i = 0; i < entry.data.size(); i += 4) {
        const float v = dist(rng);
        std::memcpy(entry.data.data() + i, &v, 4);
    }
    return entry;
}

inline TensorEntry random_raw_tensor(std::string name, Dtype dtype,
                                     std::vector<std::uint64_t> shape, std::mt19937& rng) {
    TensorEntry entry;
    entry.name = std::move(name);
    entry.dtype = dtype;
    entry.shape = std::move(shape);
    entry.data.resize(entry.byte_size());
    std::uniform_int_distribution<int> dist(0, 255);
    for (auto& b : entry.data) {
        b = static_cast<std::uint8_t>(dist(rng));
    }
    return entry;
}

// Checkpoint shaped like a one-layer encoder: a V x H word embedding, a
// length-V output bias, and non-vocabulary tensors that must survive any
// trim byte-identically.
inline TensorFile synthetic_checkpoint(std::uint64_t vocab_size, std::uint64_t hidden,
                                       std::mt19937& rng) {
    TensorFile tf;
    tf.add(random_f32_tensor("embeddings.word_embeddings.weight", {vocab_size, hidden}, rng));
    tf.add(random_f32_tensor("cls.predictions.bias", {vocab_size}, rng));
    tf.add(random_f32_tensor("encoder.layer.0.dense.weight", {hidden, hidden}, rng));
    tf.add(random_f32_tensor("encoder.layer.0.dense.bias", {hidden}, rng));
    tf.add(random_f32_tensor("embeddings.position_embeddings.weight", {16, hidden}, rng));
    return tf;
}

inline void write_lines(const std::filesystem::path& path,
                        const std::vector<std::string>& lines) {
    std::ofstream out(path, std::ios::binary);
    for (const auto& line : lines) {
        out << line << '\n';
    }
}

}  // namespace mtrim::testing
