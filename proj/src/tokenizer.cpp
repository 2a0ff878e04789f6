#include "mtrim/tokenizer.hpp"

#include <algorithm>
#include <stdexcept>

#include "mtrim/io_util.hpp"
#include "mtrim/unicode.hpp"

namespace mtrim {

namespace {

Vocab build_vocab(std::vector<std::string> tokens, std::uint64_t fingerprint,
                  const std::string& origin) {
    Vocab vocab;
    vocab.tokens = std::move(tokens);
    vocab.fingerprint = fingerprint;
    vocab.id_of.reserve(vocab.tokens.size());
    for (std::size_t i = 0; i < vocab.tokens.size(); ++i) {
        const std::string& token = vocab.tokens[i];
        if (token.empty()) {
            throw std::runtime_error(origin + ": empty token at line " + std::to_string(i + 1));
        }
        if (token.find('\n') != std::string::npos) {
            throw std::runtime_error(origin + ": token at line " + std::to_string(i + 1) +
                                     " contains a newline");
        }
        auto [it, inserted] = vocab.id_of.emplace(token, static_cast<TokenId>(i));
        if (!inserted) {
            throw std::runtime_error(origin + ": duplicate token \"" + token + "\" at lines " +
                                     std::to_string(it->second + 1) + " and " +
                                     std::to_string(i + 1));
        }
    }
    if (!vocab.contains(vocab.unk_token)) {
        throw std::runtime_error(origin + ": unk token \"" + vocab.unk_token +
                                 "\" missing from vocabulary");
    }
    return vocab;
}

void check_config(const TokenizerConfig& cfg) {
    if (cfg.lowercase || cfg.strip_accents) {
        throw std::runtime_error("uncased tokenization (lowercase/strip_accents) is not supported");
    }
    if (cfg.max_word_chars < 1) {
        throw std::runtime_error("max_word_chars must be at least 1");
    }
}

}  // namespace

std::vector<TokenId> Vocab::special_ids() const {
    std::vector<TokenId> ids;
    for (const auto& token : special_tokens) {
        auto it = id_of.find(token);
        if (it != id_of.end()) {
            ids.push_back(it->second);
        }
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

Vocab load_vocab(const std::filesystem::path& path) {
    const std::string bytes = io::read_file_bytes(path);
    const std::size_t bad = uni::find_invalid_utf8(bytes);
    if (bad != std::string::npos) {
        throw std::runtime_error(path.string() + ": invalid UTF-8 at byte offset " +
                                 std::to_string(bad));
    }
    std::vector<std::string> tokens;
    std::size_t start = 0;
    while (start < bytes.size()) {
        std::size_t end = bytes.find('\n', start);
        if (end == std::string::npos) {
            end = bytes.size();
        }
        tokens.emplace_back(bytes, start, end - start);
        start = end + 1;
    }
    // A trailing newline produces no extra entry; an empty final line after
    // it would, and is dropped here rather than rejected.
    if (!tokens.empty() && tokens.back().empty()) {
        tokens.pop_back();
    }
    return build_vocab(std::move(tokens), io::fnv1a64(bytes), path.string());
}

Vocab make_vocab(std::vector<std::string> tokens) {
    std::string canonical;
    for (const auto& token : tokens) {
        canonical += token;
        canonical += '\n';
    }
    return build_vocab(std::move(tokens), io::fnv1a64(canonical), "<memory>");
}

std::vector<std::string> basic_tokenize(std::string_view text, const TokenizerConfig& cfg) {
    check_config(cfg);

    // Clean: drop NUL, U+FFFD and Cc/Cf controls, map whitespace to ' ',
    // and isolate CJK ideographs with surrounding spaces.
    std::u32string cleaned;
    cleaned.reserve(text.size());
    std::size_t pos = 0;
    while (pos < text.size()) {
        const char32_t cp = uni::decode_next(text, pos);
        if (cp == 0 || cp == uni::kReplacementChar || uni::is_control(cp)) {
            continue;
        }
        if (uni::is_whitespace(cp)) {
            cleaned.push_back(U' ');
        } else if (cfg.split_cjk && uni::is_cjk_ideograph(cp)) {
            cleaned.push_back(U' ');
            cleaned.push_back(cp);
            cleaned.push_back(U' ');
        } else {
            cleaned.push_back(cp);
        }
    }

    std::vector<std::string> words;
    std::string current;
    auto flush = [&] {
        if (!current.empty()) {
            words.push_back(std::move(current));
            current.clear();
        }
    };
    for (char32_t cp : cleaned) {
        if (cp == U' ') {
            flush();
        } else if (uni::is_punctuation(cp)) {
            flush();
            std::string punct;
            uni::append_utf8(cp, punct);
            words.push_back(std::move(punct));
        } else {
            uni::append_utf8(cp, current);
        }
    }
    flush();
    return words;
}

std::vector<std::string> wordpiece_tokenize(std::string_view word, const Vocab& vocab,
                                            const TokenizerConfig& cfg) {
    check_config(cfg);
    const std::u32string chars = uni::decode(word);
    if (chars.empty()) {
        return {};
    }
    if (chars.size() > cfg.max_word_chars) {
        return {vocab.unk_token};
    }
    std::vector<std::string> pieces;
    std::size_t start = 0;
    while (start < chars.size()) {
        std::size_t end = chars.size();
        std::string match;
        while (start < end) {
            std::string candidate;
            if (start > 0) {
                candidate = vocab.continuation_prefix;
            }
            candidate += uni::encode(std::u32string_view(chars).substr(start, end - start));
            if (vocab.contains(candidate)) {
                match = std::move(candidate);
                break;
            }
            --end;
        }
        if (match.empty()) {
            return {vocab.unk_token};
        }
        pieces.push_back(std::move(match));
        start = end;
    }
    return pieces;
}

std::vector<TokenId> encode(std::string_view text, const Vocab& vocab,
                            const TokenizerConfig& cfg) {
    std::vector<TokenId> ids;
    for (const std::string& word : basic_tokenize(text, cfg)) {
        for (const std::string& piece : wordpiece_tokenize(word, vocab, cfg)) {
            ids.push_back(vocab.id_of.at(piece));
        }
    }
    return ids;
}

}  // namespace mtrim
