#pragma once

#include <string>
#include <vector>

#include "mtrim/unicode.hpp"

namespace mtrim::testing {

// Brute-force WordPiece reference: at each position, scan the entire token
// list for the longest entry that matches the remaining characters (with the
// continuation prefix applied after the first piece). Deliberately shares no
// code with the production matcher, which shrinks a candidate window and
// uses a hash lookup.
inline std::vector<std::string> oracle_wordpiece(const std::string& word,
                                                 const std::vector<std::string>& tokens,
                                                 const std::string& unk_token,
                                                 const std::string& continuation_prefix,
                                                 std::size_t max_word_chars) {
    const std::u32string chars = uni::decode(word);
    if (chars.empty()) {
        return {};
    }
    if (chars.size() > max_word_chars) {
        return {unk_token};
    }
    std::vector<std::string> pieces;
    std::size_t start = 0;
    while (start < chars.size()) {
        std::size_t best_len = 0;
        std::string best_token;
        for (const auto& token : tokens) {
            std::string_view body = token;
            if (start > 0) {
                if (body.substr(0, continuation_prefix.size()) != continuation_prefix) {
                    continue;
                }
                body.remove_prefix(continuation_prefix.size());
            }
            const std::u32string body_chars = uni::decode(std::string(body));
            if (body_chars.empty() || body_chars.size() > chars.size() - start ||
                body_chars.size() <= best_len) {
                continue;
            }
            if (std::u32string_view(chars).substr(start, body_chars.size()) == body_chars) {
                best_len = body_chars.size();
                best_token = token;
            }
        }
        if (best_len == 0) {
            return {unk_token};
        }
        pieces.push_back(best_token);
        start += best_len;
    }
    return pieces;
}

}  // namespace mtrim::testing
