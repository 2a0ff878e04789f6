#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mtrim/freq.hpp"
#include "mtrim/tokenizer.hpp"

namespace mtrim {

// Selection threshold as an exact decimal fraction in (0, 1]. The original
// spelling is kept so config and files can round-trip it verbatim; all
// comparisons are exact integer arithmetic, never floating point.
struct Threshold {
    std::uint64_t numerator = 5;
    std::uint64_t denominator = 10000;  // power of ten
    std::string text = "0.0005";

    static Threshold parse(std::string_view text);
    bool same_value(const Threshold& other) const;
    // df/total >= threshold, evaluated exactly.
    bool admits(std::uint64_t df, std::uint64_t total) const;
};

// Retained token ids for a language set, with provenance.
struct Selection {
    std::vector<std::string> languages;  // sorted, unique
    Threshold threshold;
    std::vector<TokenId> selected_ids;  // strictly ascending
    std::vector<TokenId> forced_ids;    // strictly ascending, subset of selected_ids
    std::uint64_t source_fingerprint = 0;
};

// Applies the threshold to one language's frequencies. Special tokens are
// force-retained regardless of corpus content.
Selection select_tokens(const FreqTable& freq, const Threshold& threshold, const Vocab& vocab);

// Set union over per-language selections sharing fingerprint and threshold.
Selection union_selections(const std::vector<Selection>& parts);

struct Coverage {
    std::uint64_t selected_count = 0;
    double proportion_pct = 0.0;  // one decimal, rounded half away from zero
};

Coverage coverage_stats(const Selection& sel, std::uint64_t original_size);

// 100 * count / original, rounded to one decimal half away from zero.
double round_to_tenth_pct(std::uint64_t count, std::uint64_t original);

struct CoverageReport {
    std::vector<std::pair<std::string, Coverage>> per_language;
    Coverage union_coverage;
    std::uint64_t original_size = 0;
};

CoverageReport build_coverage_report(const std::vector<Selection>& parts,
                                     const Selection& unioned, std::uint64_t original_size);

std::string selection_to_json(const Selection& sel);
Selection selection_from_json(std::string_view text, const std::string& origin);

void save_selection(const Selection& sel, const std::filesystem::path& path);
Selection load_selection(const std::filesystem::path& path);

}  // namespace mtrim
