#include "mtrim/selection.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "mtrim/io_util.hpp"

namespace mtrim {

namespace {

using u128 = unsigned __int128;

void check_ascending(const std::vector<TokenId>& ids, const char* what) {
    for (std::size_t i = 1; i < ids.size(); ++i) {
        if (ids[i] <= ids[i - 1]) {
            throw std::runtime_error(std::string(what) + " not strictly ascending");
        }
    }
}

}  // namespace

Threshold Threshold::parse(std::string_view text) {
    const auto fail = [&](const std::string& why) {
        throw std::runtime_error("invalid threshold \"" + std::string(text) + "\": " + why);
    };
    std::uint64_t num = 0;
    std::uint64_t den = 1;
    bool seen_digit = false;
    bool seen_dot = false;
    int digits = 0;
    for (char c : text) {
        if (c == '.') {
            if (seen_dot) {
                fail("more than one decimal point");
            }
            seen_dot = true;
        } else if (c >= '0' && c <= '9') {
            seen_digit = true;
            if (++digits > 18) {
                fail("more than 18 digits");
            }
            num = num * 10 + static_cast<std::uint64_t>(c - '0');
            if (seen_dot) {
                den *= 10;
            }
        } else {
            fail("unexpected character");
        }
    }
    if (!seen_digit) {
        fail("no digits");
    }
    if (num == 0) {
        fail("must be greater than 0");
    }
    if (num > den) {
        fail("must be at most 1");
    }
    return Threshold{num, den, std::string(text)};
}

bool Threshold::same_value(const Threshold& other) const {
    return static_cast<u128>(numerator) * other.denominator ==
           static_cast<u128>(other.numerator) * denominator;
}

bool Threshold::admits(std::uint64_t df, std::uint64_t total) const {
    return static_cast<u128>(df) * denominator >= static_cast<u128>(numerator) * total;
}

Selection select_tokens(const FreqTable& freq, const Threshold& threshold, const Vocab& vocab) {
    if (freq.total_paragraphs == 0) {
        throw std::runtime_error("empty corpus: language \"" + freq.language +
                                 "\" has zero non-empty paragraphs");
    }
    if (freq.vocab_fingerprint != vocab.fingerprint) {
        throw std::runtime_error("vocab fingerprint mismatch: frequency table was computed "
                                 "against a different vocabulary");
    }
    std::set<TokenId> keep;
    for (const auto& [id, c] : freq.df) {
        if (id >= vocab.size()) {
            throw std::runtime_error("frequency table id " + std::to_string(id) +
                                     " exceeds vocab size " + std::to_string(vocab.size()));
        }
        if (threshold.admits(c, freq.total_paragraphs)) {
            keep.insert(id);
        }
    }
    Selection sel;
    sel.languages = {freq.language};
    sel.threshold = threshold;
    sel.forced_ids = vocab.special_ids();
    keep.insert(sel.forced_ids.begin(), sel.forced_ids.end());
    sel.selected_ids.assign(keep.begin(), keep.end());
    sel.source_fingerprint = vocab.fingerprint;
    return sel;
}

Selection union_selections(const std::vector<Selection>& parts) {
    if (parts.empty()) {
        throw std::runtime_error("cannot union zero selections");
    }
    Selection out;
    out.threshold = parts.front().threshold;
    out.source_fingerprint = parts.front().source_fingerprint;
    std::set<std::string> languages;
    std::set<TokenId> selected;
    std::set<TokenId> forced;
    for (const auto& part : parts) {
        if (part.source_fingerprint != out.source_fingerprint) {
            throw std::runtime_error("cannot union selections with different vocab fingerprints");
        }
        if (!part.threshold.same_value(out.threshold)) {
            throw std::runtime_error("cannot union selections with different thresholds (" +
                                     part.threshold.text + " vs " + out.threshold.text + ")");
        }
        languages.insert(part.languages.begin(), part.languages.end());
        selected.insert(part.selected_ids.begin(), part.selected_ids.end());
        forced.insert(part.forced_ids.begin(), part.forced_ids.end());
    }
    out.languages.assign(languages.begin(), languages.end());
    out.selected_ids.assign(selected.begin(), selected.end());
    out.forced_ids.assign(forced.begin(), forced.end());
    return out;
}

double round_to_tenth_pct(std::uint64_t count, std::uint64_t original) {
    if (original == 0) {
        throw std::runtime_error("original vocab size must be positive");
    }
    const u128 tenths = (static_cast<u128>(count) * 2000 + original) / (2 * static_cast<u128>(original));
    return static_cast<double>(static_cast<std::uint64_t>(tenths)) / 10.0;
}

Coverage coverage_stats(const Selection& sel, std::uint64_t original_size) {
    if (!sel.selected_ids.empty() && original_size < sel.selected_ids.back() + 1ull) {
        throw std::runtime_error("original vocab size " + std::to_string(original_size) +
                                 " smaller than max selected id " +
                                 std::to_string(sel.selected_ids.back()));
    }
    return Coverage{sel.selected_ids.size(),
                    round_to_tenth_pct(sel.selected_ids.size(), original_size)};
}

CoverageReport build_coverage_report(const std::vector<Selection>& parts,
                                     const Selection& unioned, std::uint64_t original_size) {
    CoverageReport report;
    report.original_size = original_size;
    std::uint64_t sum = 0;
    std::uint64_t max_count = 0;
    for (const auto& part : parts) {
        std::string label;
        for (const auto& lang : part.languages) {
            label += label.empty() ? lang : "," + lang;
        }
        const Coverage cov = coverage_stats(part, original_size);
        sum += cov.selected_count;
        max_count = std::max(max_count, cov.selected_count);
        report.per_language.emplace_back(std::move(label), cov);
    }
    report.union_coverage = coverage_stats(unioned, original_size);
    if (!parts.empty() && (report.union_coverage.selected_count > sum ||
                           report.union_coverage.selected_count < max_count)) {
        throw std::runtime_error("union selection size is outside [max part, sum of parts]");
    }
    return report;
}

std::string selection_to_json(const Selection& sel) {
    nlohmann::ordered_json j;
    j["languages"] = sel.languages;
    j["threshold"] = sel.threshold.text;
    j["vocab_fingerprint"] = io::to_hex16(sel.source_fingerprint);
    j["selected_ids"] = sel.selected_ids;
    j["forced_ids"] = sel.forced_ids;
    return j.dump();
}

Selection selection_from_json(std::string_view text, const std::string& origin) {
    Selection sel;
    try {
        const auto j = nlohmann::json::parse(text);
        sel.languages = j.at("languages").get<std::vector<std::string>>();
        sel.threshold = Threshold::parse(j.at("threshold").get<std::string>());
        sel.source_fingerprint = io::from_hex16(j.at("vocab_fingerprint").get<std::string>());
        sel.selected_ids = j.at("selected_ids").get<std::vector<TokenId>>();
        sel.forced_ids = j.at("forced_ids").get<std::vector<TokenId>>();
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(origin + ": malformed selection file: " + e.what());
    }
    check_ascending(sel.selected_ids, "selected_ids");
    check_ascending(sel.forced_ids, "forced_ids");
    if (!std::includes(sel.selected_ids.begin(), sel.selected_ids.end(), sel.forced_ids.begin(),
                       sel.forced_ids.end())) {
        throw std::runtime_error(origin + ": forced_ids not a subset of selected_ids");
    }
    return sel;
}

void save_selection(const Selection& sel, const std::filesystem::path& path) {
    io::atomic_write_bytes(path, selection_to_json(sel));
}

Selection load_selection(const std::filesystem::path& path) {
    return selection_from_json(io::read_file_bytes(path), path.string());
}

}  // namespace mtrim
