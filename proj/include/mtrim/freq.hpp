#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>

#include "mtrim/tokenizer.hpp"

namespace mtrim {

// Paragraph document frequencies for one language: for each vocabulary id,
// the number of corpus lines containing it at least once. Ids absent from
// df have count zero.
struct FreqTable {
    std::string language;
    std::uint64_t total_paragraphs = 0;
    std::uint64_t vocab_fingerprint = 0;
    std::map<TokenId, std::uint64_t> df;

    std::uint64_t count(TokenId id) const {
        auto it = df.find(id);
        return it == df.end() ? 0 : it->second;
    }
};

// Single-pass counter over a line-oriented stream. One non-empty line
// (after trimming surrounding whitespace) is one paragraph; each distinct
// token id of the line increments its df by one. Invalid UTF-8 is a hard
// error naming the line.
FreqTable count_paragraph_df(std::istream& corpus, const Vocab& vocab,
                             const TokenizerConfig& cfg, std::string language);

// Counts a file with `threads` workers over disjoint byte ranges split at
// line boundaries, then merges the shard tables. Output is identical to the
// single-pass counter for any thread count.
FreqTable count_file_df(const std::filesystem::path& path, const Vocab& vocab,
                        const TokenizerConfig& cfg, std::string language, unsigned threads = 1);

// Elementwise sum of two shard tables covering disjoint line sets.
FreqTable merge_freq(const FreqTable& a, const FreqTable& b);

// JSON form: {"language", "total_paragraphs", "vocab_fingerprint" (16 hex
// chars), "df": {id: count, ...}} with df keys in ascending numeric order.
std::string freq_to_json(const FreqTable& table);
FreqTable freq_from_json(std::string_view text, const std::string& origin);

void save_freq(const FreqTable& table, const std::filesystem::path& path);
FreqTable load_freq(const std::filesystem::path& path);

}  // namespace mtrim
