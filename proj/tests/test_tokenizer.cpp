#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <random>
#include <set>

#include <doctest.h>

#include "mtrim/io_util.hpp"
#include "mtrim/tokenizer.hpp"
#include "support/temp_dir.hpp"
#include "support/wordpiece_oracle.hpp"

using namespace mtrim;
using testing::TempDir;

namespace {

const TokenizerConfig kCfg;

Vocab toy_vocab() {
    return make_vocab({"[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]", "un", "##aff", "##able", "a",
                       "##a", "b", "##b", "c", "hello", "world", ",", "!"});
}

}  // namespace

TEST_CASE("load_vocab assigns ids by line number") {
    TempDir dir;
    std::ofstream(dir.file("vocab.txt")) << "[PAD]\n[UNK]\na\n##a\nb\n";
    const Vocab vocab = load_vocab(dir.file("vocab.txt"));
    CHECK(vocab.size() == 5);
    CHECK(vocab.id_of.at("##a") == 3);
    CHECK(vocab.tokens[0] == "[PAD]");
    CHECK(vocab.unk_id() == 1);
    CHECK(vocab.fingerprint == io::fnv1a64("[PAD]\n[UNK]\na\n##a\nb\n"));
}

TEST_CASE("load_vocab tolerates a missing trailing newline") {
    TempDir dir;
    std::ofstream(dir.file("vocab.txt")) << "[UNK]\na";
    CHECK(load_vocab(dir.file("vocab.txt")).size() == 2);
}

TEST_CASE("load_vocab rejects duplicates naming both lines") {
    TempDir dir;
    std::ofstream(dir.file("vocab.txt")) << "[UNK]\na\na\n";
    CHECK_THROWS_WITH_AS(load_vocab(dir.file("vocab.txt")),
                         doctest::Contains("duplicate token \"a\" at lines 2 and 3"),
                         std::runtime_error);
}

TEST_CASE("load_vocab rejects empty interior lines") {
    TempDir dir;
    std::ofstream(dir.file("vocab.txt")) << "[UNK]\n\na\n";
    CHECK_THROWS_AS(load_vocab(dir.file("vocab.txt")), std::runtime_error);
}

TEST_CASE("load_vocab requires the unk token") {
    TempDir dir;
    std::ofstream(dir.file("vocab.txt")) << "a\nb\n";
    CHECK_THROWS_WITH_AS(load_vocab(dir.file("vocab.txt")), doctest::Contains("[UNK]"),
                         std::runtime_error);
}

TEST_CASE("load_vocab counts the published vocabulary when available") {
    // Points at the real cased multilingual vocab file; skipped when the
    // environment does not provide one.
    const char* path = std::getenv("MTRIM_MBERT_VOCAB");
    if (path == nullptr) {
        return;
    }
    const Vocab vocab = load_vocab(path);
    CHECK(vocab.size() == 119547);
}

TEST_CASE("basic_tokenize splits punctuation into standalone words") {
    CHECK(basic_tokenize("Hello, world!", kCfg) ==
          std::vector<std::string>{"Hello", ",", "world", "!"});
}

TEST_CASE("basic_tokenize isolates CJK ideographs") {
    CHECK(basic_tokenize("中文abc", kCfg) ==
          std::vector<std::string>{"中", "文", "abc"});
    TokenizerConfig no_cjk = kCfg;
    no_cjk.split_cjk = false;
    CHECK(basic_tokenize("中文abc", no_cjk) ==
          std::vector<std::string>{"中文abc"});
}

TEST_CASE("basic_tokenize on empty and whitespace-only input") {
    CHECK(basic_tokenize("", kCfg).empty());
    CHECK(basic_tokenize(" \t\n", kCfg).empty());
}

TEST_CASE("basic_tokenize cleaning rules") {
    SUBCASE("control characters vanish") {
        CHECK(basic_tokenize("a\x01"
                             "b",
                             kCfg) == std::vector<std::string>{"ab"});
    }
    SUBCASE("U+FFFD vanishes") {
        CHECK(basic_tokenize("a\xEF\xBF\xBD"
                             "b",
                             kCfg) == std::vector<std::string>{"ab"});
    }
    SUBCASE("unicode whitespace separates words") {
        CHECK(basic_tokenize("a b", kCfg) == std::vector<std::string>{"a", "b"});
    }
    SUBCASE("unicode punctuation splits") {
        CHECK(basic_tokenize("«x»", kCfg) ==
              std::vector<std::string>{"«", "x", "»"});
    }
    SUBCASE("uncased variants are rejected") {
        TokenizerConfig lower = kCfg;
        lower.lowercase = true;
        CHECK_THROWS_AS(basic_tokenize("A", lower), std::runtime_error);
    }
}

TEST_CASE("wordpiece_tokenize greedy longest match") {
    const Vocab vocab = toy_vocab();
    CHECK(wordpiece_tokenize("unaffable", vocab, kCfg) ==
          std::vector<std::string>{"un", "##aff", "##able"});
    CHECK(wordpiece_tokenize("b", vocab, kCfg) == std::vector<std::string>{"b"});
    CHECK(wordpiece_tokenize("qzx", vocab, kCfg) == std::vector<std::string>{"[UNK]"});
    CHECK(wordpiece_tokenize("", vocab, kCfg).empty());
}

TEST_CASE("wordpiece_tokenize collapses overlong words to unk") {
    const Vocab vocab = toy_vocab();
    const std::string word(101, 'a');
    CHECK(wordpiece_tokenize(word, vocab, kCfg) == std::vector<std::string>{"[UNK]"});
    CHECK(wordpiece_tokenize(std::string(100, 'a'), vocab, kCfg).size() == 100);
}

TEST_CASE("encode composes basic and wordpiece steps") {
    const Vocab vocab = toy_vocab();
    CHECK(encode("", vocab, kCfg).empty());
    CHECK(encode("hello world", vocab, kCfg) == std::vector<TokenId>{13, 14});
    CHECK(encode("qzx", vocab, kCfg) == std::vector<TokenId>{vocab.unk_id()});
    CHECK(encode("unaffable, hello!", vocab, kCfg) ==
          std::vector<TokenId>{5, 6, 7, 15, 13, 16});
}

TEST_CASE("encode ids are always in range and deterministic") {
    const Vocab vocab = toy_vocab();
    std::mt19937 rng(1234);
    std::uniform_int_distribution<int> len(0, 40);
    const std::string alphabet = "ab c,!\xC2\xA0z";
    for (int iter = 0; iter < 200; ++iter) {
        std::string text;
        for (int i = len(rng); i > 0; --i) {
            text += alphabet[static_cast<std::size_t>(rng()) % alphabet.size()];
        }
        const auto ids = encode(text, vocab, kCfg);
        CHECK(encode(text, vocab, kCfg) == ids);
        for (TokenId id : ids) {
            CHECK(id < vocab.size());
        }
    }
}

namespace {

// Random vocabulary over a tiny alphabet, always containing the specials and
// the single characters so every word is tokenizable in the full vocab.
Vocab random_vocab(std::mt19937& rng, std::vector<std::string>* out_tokens = nullptr) {
    std::set<std::string> pieces;
    const char alphabet[] = {'a', 'b', 'c'};
    std::uniform_int_distribution<int> n_tokens(4, 14);
    std::uniform_int_distribution<int> piece_len(2, 5);
    std::uniform_int_distribution<int> pick(0, 2);
    for (int i = n_tokens(rng); i > 0; --i) {
        std::string piece;
        for (int j = piece_len(rng); j > 0; --j) {
            piece += alphabet[pick(rng)];
        }
        if (rng() % 2 == 0) {
            piece = "##" + piece;
        }
        pieces.insert(piece);
    }
    std::vector<std::string> tokens = {"[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]",
                                       "a",     "b",     "c",     "##a",   "##b",
                                       "##c"};
    for (const auto& piece : pieces) {
        if (std::find(tokens.begin(), tokens.end(), piece) == tokens.end()) {
            tokens.push_back(piece);
        }
    }
    if (out_tokens != nullptr) {
        *out_tokens = tokens;
    }
    return make_vocab(tokens);
}

std::string random_word(std::mt19937& rng) {
    std::uniform_int_distribution<int> len(1, 8);
    std::uniform_int_distribution<int> pick(0, 2);
    std::string word;
    for (int i = len(rng); i > 0; --i) {
        word += static_cast<char>('a' + pick(rng));
    }
    return word;
}

}  // namespace

TEST_CASE("wordpiece matches the brute-force oracle on random vocabularies") {
    std::mt19937 rng(99);
    for (int iter = 0; iter < 300; ++iter) {
        std::vector<std::string> tokens;
        const Vocab vocab = random_vocab(rng, &tokens);
        const std::string word = random_word(rng);
        const auto expected = testing::oracle_wordpiece(word, tokens, vocab.unk_token,
                                                        vocab.continuation_prefix,
                                                        kCfg.max_word_chars);
        CHECK(wordpiece_tokenize(word, vocab, kCfg) == expected);
    }
}

TEST_CASE("subset vocabularies preserve segmentations whose pieces survive") {
    std::mt19937 rng(2024);
    int preserved_cases = 0;
    for (int iter = 0; iter < 500; ++iter) {
        std::vector<std::string> full_tokens;
        const Vocab full = random_vocab(rng, &full_tokens);

        std::vector<std::string> sub_tokens;
        for (const auto& token : full_tokens) {
            const bool special = full.special_tokens.count(token) != 0;
            if (special || rng() % 3 != 0) {
                sub_tokens.push_back(token);
            }
        }
        const Vocab sub = make_vocab(sub_tokens);

        const std::string word = random_word(rng);
        const auto full_pieces = wordpiece_tokenize(word, full, kCfg);
        CHECK(full_pieces == testing::oracle_wordpiece(word, full_tokens, full.unk_token,
                                                       full.continuation_prefix,
                                                       kCfg.max_word_chars));
        const auto sub_pieces = wordpiece_tokenize(word, sub, kCfg);
        CHECK(sub_pieces == testing::oracle_wordpiece(word, sub_tokens, sub.unk_token,
                                                      sub.continuation_prefix,
                                                      kCfg.max_word_chars));

        if (full_pieces == std::vector<std::string>{full.unk_token}) {
            continue;
        }
        const bool all_kept = std::all_of(full_pieces.begin(), full_pieces.end(),
                                          [&](const std::string& p) { return sub.contains(p); });
        if (all_kept) {
            ++preserved_cases;
            CHECK(sub_pieces == full_pieces);
        }
    }
    CHECK(preserved_cases > 50);  // the property must actually be exercised
}

TEST_CASE("shrinking the vocabulary never lowers the unk count") {
    std::mt19937 rng(777);
    for (int iter = 0; iter < 100; ++iter) {
        std::vector<std::string> full_tokens;
        const Vocab full = random_vocab(rng, &full_tokens);
        std::vector<std::string> sub_tokens;
        for (const auto& token : full_tokens) {
            if (full.special_tokens.count(token) != 0 || rng() % 2 == 0) {
                sub_tokens.push_back(token);
            }
        }
        const Vocab sub = make_vocab(sub_tokens);

        std::string text;
        for (int w = 0; w < 12; ++w) {
            text += random_word(rng) + " ";
        }
        const auto count_unk = [&](const Vocab& v) {
            const auto ids = encode(text, v, kCfg);
            return std::count(ids.begin(), ids.end(), v.unk_id());
        };
        CHECK(count_unk(sub) >= count_unk(full));
    }
}
