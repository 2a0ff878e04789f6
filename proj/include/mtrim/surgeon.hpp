#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mtrim/selection.hpp"
#include "mtrim/tensor_store.hpp"
#include "mtrim/tokenizer.hpp"

namespace mtrim {

// Injective, order-preserving old-id -> new-id mapping that drives vocab
// rewriting and every vocabulary-axis tensor slice.
struct TrimPlan {
    std::uint64_t old_vocab_size = 0;
    std::vector<TokenId> kept_old_ids;    // strictly ascending
    std::vector<std::string> new_tokens;  // token strings in new-id order

    std::size_t new_size() const { return kept_old_ids.size(); }
    bool keeps(TokenId old_id) const;
    // New id of a kept old id; throws if the id was dropped.
    TokenId remap(TokenId old_id) const;
};

TrimPlan build_trim_plan(const Selection& sel, const Vocab& vocab);

// Name pattern selecting tensors to slice, with an optional explicit axis
// for tensors where the vocabulary axis is ambiguous. Parsed from
// "GLOB" or "GLOB:AXIS"; the glob supports '*' and '?'.
struct AxisRule {
    std::string pattern;
    std::optional<std::size_t> axis;
};

AxisRule parse_axis_rule(std::string_view text);
bool glob_match(std::string_view pattern, std::string_view text);

// Maps tensor name -> axis to slice, combining explicit rules with
// auto-detection (a unique axis of length old_vocab_size). A tensor with
// two vocab-sized axes and no explicit axis is a hard error.
std::map<std::string, std::size_t> find_vocab_axes(const TensorFile& tf,
                                                   std::uint64_t old_vocab_size,
                                                   const std::vector<AxisRule>& rules);

// Gathers the kept rows along `axis`; all other bytes are copied verbatim.
TensorEntry slice_vocab_axis(const TensorEntry& t, const TrimPlan& plan, std::size_t axis);

// BERT-base encoder dimensions; heads do not change the parameter count but
// are part of the architecture identity.
struct BertArch {
    std::uint64_t hidden = 768;
    std::uint64_t layers = 12;
    std::uint64_t heads = 12;
    std::uint64_t intermediate = 3072;
    std::uint64_t max_position = 512;
    std::uint64_t type_vocab = 2;
};

// Total parameters of the encoder with a tied output projection: word,
// position and type embeddings, embedding layer norm, the transformer
// stack, and the pooler.
std::uint64_t param_count(std::uint64_t vocab_size, const BertArch& arch = {});

// Percentage of parameters held by the word-embedding matrix.
double embedding_share_pct(std::uint64_t vocab_size, const BertArch& arch = {});

struct TensorParams {
    std::uint64_t old_params = 0;
    std::uint64_t new_params = 0;

    bool operator==(const TensorParams&) const = default;
};

struct ModelReport {
    std::uint64_t old_vocab_size = 0;
    std::uint64_t new_vocab_size = 0;
    std::uint64_t hidden_size = 0;
    std::map<std::string, TensorParams> per_tensor_params;  // floating tensors
    std::uint64_t total_params_old = 0;
    std::uint64_t total_params_new = 0;
    double embedding_share = 0.0;  // % of source-model params in the word embedding
    double reduction_pct = 0.0;    // 100 * (1 - new/old)
    std::uint64_t predicted_file_bytes = 0;
};

struct TrimResult {
    TensorFile model;
    ModelReport report;
};

// Slices every vocabulary-axis tensor per plan and rules, copies everything
// else byte-identically, and computes the parameter accounting.
TrimResult trim_model(const TensorFile& tf, const TrimPlan& plan,
                      const std::vector<AxisRule>& rules = {});

// Writes the trimmed vocabulary, one token per line with LF endings.
// Loading the file reproduces the plan's new-id assignment exactly.
void emit_trimmed_vocab(const TrimPlan& plan, const std::filesystem::path& path);

std::string report_to_json(const ModelReport& report);

}  // namespace mtrim
