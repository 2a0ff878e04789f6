#include "mtrim/freq.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <optional>
#include <stdexcept>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "mtrim/io_util.hpp"
#include "mtrim/unicode.hpp"

namespace mtrim {

namespace {

bool is_blank_line(std::string_view line) {
    std::size_t pos = 0;
    while (pos < line.size()) {
        if (!uni::is_whitespace(uni::decode_next(line, pos))) {
            return false;
        }
    }
    return true;
}

// Accumulates one shard with a dense per-id array; cheap to merge.
struct DenseCounts {
    std::uint64_t total = 0;
    std::vector<std::uint64_t> df;

    explicit DenseCounts(std::size_t vocab_size) : df(vocab_size, 0) {}

    void add_line(std::string_view line, const Vocab& vocab, const TokenizerConfig& cfg,
                  std::vector<TokenId>& scratch) {
        if (is_blank_line(line)) {
            return;
        }
        ++total;
        scratch = encode(line, vocab, cfg);
        std::sort(scratch.begin(), scratch.end());
        scratch.erase(std::unique(scratch.begin(), scratch.end()), scratch.end());
        for (TokenId id : scratch) {
            ++df[id];
        }
    }

    void merge(const DenseCounts& other) {
        total += other.total;
        for (std::size_t i = 0; i < df.size(); ++i) {
            df[i] += other.df[i];
        }
    }
};

FreqTable finish(DenseCounts counts, std::string language, std::uint64_t fingerprint) {
    FreqTable table;
    table.language = std::move(language);
    table.total_paragraphs = counts.total;
    table.vocab_fingerprint = fingerprint;
    for (std::size_t id = 0; id < counts.df.size(); ++id) {
        if (counts.df[id] != 0) {
            table.df.emplace(static_cast<TokenId>(id), counts.df[id]);
        }
    }
    return table;
}

// Processes the byte range [begin, end): every line whose first byte lies in
// the range, even if it extends past end. Returns the offset of the first
// invalid-UTF-8 line, if any.
std::optional<std::uint64_t> count_range(const std::filesystem::path& path, std::uint64_t begin,
                                         std::uint64_t end, std::uint64_t file_size,
                                         const Vocab& vocab, const TokenizerConfig& cfg,
                                         DenseCounts& counts) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open corpus: " + path.string());
    }
    std::string line;
    std::uint64_t pos = begin;
    if (begin > 0) {
        // The line straddling the boundary belongs to the previous shard;
        // skip its remainder. Seeking one byte back makes a boundary that
        // falls exactly on a line start cost only the preceding newline.
        in.seekg(static_cast<std::streamoff>(begin - 1));
        std::getline(in, line);
        auto at = in.tellg();
        pos = (at == std::streampos(-1)) ? file_size : static_cast<std::uint64_t>(at);
    }
    std::vector<TokenId> scratch;
    while (pos < end && std::getline(in, line)) {
        auto at = in.tellg();
        const std::uint64_t next = (at == std::streampos(-1)) ? file_size
                                                              : static_cast<std::uint64_t>(at);
        if (!uni::is_valid_utf8(line)) {
            return pos;
        }
        counts.add_line(line, vocab, cfg, scratch);
        pos = next;
    }
    return std::nullopt;
}

std::uint64_t line_number_at_offset(const std::filesystem::path& path, std::uint64_t offset) {
    std::ifstream in(path, std::ios::binary);
    std::uint64_t lines = 1;
    char c;
    for (std::uint64_t i = 0; i < offset && in.get(c); ++i) {
        if (c == '\n') {
            ++lines;
        }
    }
    return lines;
}

}  // namespace

FreqTable count_paragraph_df(std::istream& corpus, const Vocab& vocab, const TokenizerConfig& cfg,
                             std::string language) {
    DenseCounts counts(vocab.size());
    std::vector<TokenId> scratch;
    std::string line;
    std::uint64_t line_no = 0;
    while (std::getline(corpus, line)) {
        ++line_no;
        if (!uni::is_valid_utf8(line)) {
            throw std::runtime_error("invalid UTF-8 at line " + std::to_string(line_no));
        }
        counts.add_line(line, vocab, cfg, scratch);
    }
    return finish(std::move(counts), std::move(language), vocab.fingerprint);
}

FreqTable count_file_df(const std::filesystem::path& path, const Vocab& vocab,
                        const TokenizerConfig& cfg, std::string language, unsigned threads) {
    const std::uint64_t file_size = std::filesystem::file_size(path);
    const unsigned workers =
        std::max<unsigned>(1, std::min<std::uint64_t>(threads == 0 ? 1 : threads,
                                                      std::max<std::uint64_t>(1, file_size)));

    std::vector<DenseCounts> shard_counts(workers, DenseCounts(vocab.size()));
    std::vector<std::optional<std::uint64_t>> bad_offsets(workers);
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        const std::uint64_t begin = file_size * w / workers;
        const std::uint64_t end = file_size * (w + 1) / workers;
        pool.emplace_back([&, w, begin, end] {
            try {
                bad_offsets[w] =
                    count_range(path, begin, end, file_size, vocab, cfg, shard_counts[w]);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
    for (const auto& err : errors) {
        if (err) {
            std::rethrow_exception(err);
        }
    }
    std::optional<std::uint64_t> first_bad;
    for (const auto& offset : bad_offsets) {
        if (offset && (!first_bad || *offset < *first_bad)) {
            first_bad = offset;
        }
    }
    if (first_bad) {
        throw std::runtime_error(path.string() + ": invalid UTF-8 at line " +
                                 std::to_string(line_number_at_offset(path, *first_bad)));
    }
    DenseCounts merged = std::move(shard_counts[0]);
    for (unsigned w = 1; w < workers; ++w) {
        merged.merge(shard_counts[w]);
    }
    return finish(std::move(merged), std::move(language), vocab.fingerprint);
}

FreqTable merge_freq(const FreqTable& a, const FreqTable& b) {
    if (a.language != b.language) {
        throw std::runtime_error("cannot merge frequency tables for languages \"" + a.language +
                                 "\" and \"" + b.language + "\"");
    }
    if (a.vocab_fingerprint != b.vocab_fingerprint) {
        throw std::runtime_error("cannot merge frequency tables with different vocab fingerprints");
    }
    FreqTable out = a;
    out.total_paragraphs += b.total_paragraphs;
    for (const auto& [id, c] : b.df) {
        out.df[id] += c;
    }
    return out;
}

std::string freq_to_json(const FreqTable& table) {
    nlohmann::ordered_json j;
    j["language"] = table.language;
    j["total_paragraphs"] = table.total_paragraphs;
    j["vocab_fingerprint"] = io::to_hex16(table.vocab_fingerprint);
    nlohmann::ordered_json df = nlohmann::ordered_json::object();
    for (const auto& [id, c] : table.df) {
        df[std::to_string(id)] = c;
    }
    j["df"] = std::move(df);
    return j.dump();
}

FreqTable freq_from_json(std::string_view text, const std::string& origin) {
    FreqTable table;
    try {
        const auto j = nlohmann::json::parse(text);
        table.language = j.at("language").get<std::string>();
        table.total_paragraphs = j.at("total_paragraphs").get<std::uint64_t>();
        table.vocab_fingerprint = io::from_hex16(j.at("vocab_fingerprint").get<std::string>());
        for (const auto& [key, value] : j.at("df").items()) {
            std::size_t consumed = 0;
            const unsigned long id = std::stoul(key, &consumed);
            if (consumed != key.size()) {
                throw std::runtime_error(origin + ": df key is not a decimal id: \"" + key + "\"");
            }
            const std::uint64_t c = value.get<std::uint64_t>();
            if (c < 1 || c > table.total_paragraphs) {
                throw std::runtime_error(origin + ": df count " + std::to_string(c) + " for id " +
                                         key + " outside [1, total_paragraphs]");
            }
            if (!table.df.emplace(static_cast<TokenId>(id), c).second) {
                throw std::runtime_error(origin + ": duplicate df id " + key);
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(origin + ": malformed frequency file: " + e.what());
    }
    return table;
}

void save_freq(const FreqTable& table, const std::filesystem::path& path) {
    io::atomic_write_bytes(path, freq_to_json(table));
}

FreqTable load_freq(const std::filesystem::path& path) {
    return freq_from_json(io::read_file_bytes(path), path.string());
}

}  // namespace mtrim
