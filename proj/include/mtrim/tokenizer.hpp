#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace mtrim {

using TokenId = std::uint32_t;

// WordPiece vocabulary. Immutable after construction; ids are the zero-based
// positions of the tokens.
struct Vocab {
    std::vector<std::string> tokens;
    std::unordered_map<std::string, TokenId> id_of;
    std::string unk_token = "[UNK]";
    std::unordered_set<std::string> special_tokens = {"[PAD]", "[UNK]", "[CLS]", "[SEP]",
                                                      "[MASK]"};
    std::string continuation_prefix = "##";
    // FNV-1a 64 over the vocab file bytes (or the canonical one-token-per-line
    // serialization when built in memory).
    std::uint64_t fingerprint = 0;

    std::size_t size() const { return tokens.size(); }
    TokenId unk_id() const { return id_of.at(unk_token); }
    bool contains(const std::string& token) const { return id_of.count(token) != 0; }

    // Ids of special tokens present in the vocabulary, ascending.
    std::vector<TokenId> special_ids() const;
};

// Behavior switches of the basic tokenizer. Defaults match the cased
// multilingual model; the lowercased/accent-stripped variants are out of
// scope and rejected at run time.
struct TokenizerConfig {
    bool lowercase = false;
    bool strip_accents = false;
    bool split_cjk = true;
    std::size_t max_word_chars = 100;
};

// Reads a one-token-per-line UTF-8 vocab file. Trailing newline on the last
// line is tolerated; duplicate tokens, empty interior lines and a missing
// unk token are hard errors.
Vocab load_vocab(const std::filesystem::path& path);

// Builds a Vocab from token strings, for tests and in-memory pipelines.
// The fingerprint is computed over the canonical file serialization, so it
// matches load_vocab on a file written from the same tokens.
Vocab make_vocab(std::vector<std::string> tokens);

// Cleaning, CJK isolation, whitespace split, punctuation split.
std::vector<std::string> basic_tokenize(std::string_view text, const TokenizerConfig& cfg);

// Greedy longest-prefix-match segmentation of one word. Pieces after the
// first are matched with the continuation prefix prepended; if no prefix
// matches at some position, or the word exceeds max_word_chars code points,
// the whole word collapses to the unk token.
std::vector<std::string> wordpiece_tokenize(std::string_view word, const Vocab& vocab,
                                            const TokenizerConfig& cfg);

// basic_tokenize + wordpiece_tokenize, mapped to ids. No [CLS]/[SEP] framing;
// this is the statistics-mode encoding used for corpus counting.
std::vector<TokenId> encode(std::string_view text, const Vocab& vocab,
                            const TokenizerConfig& cfg);

}  // namespace mtrim
