#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mtrim/surgeon.hpp"
#include "mtrim/tensor_store.hpp"
#include "mtrim/tokenizer.hpp"

namespace mtrim {

struct RowCheck {
    std::uint64_t rows_checked = 0;
    std::uint64_t rows_identical = 0;
};

// Byte-compares every kept row of every vocabulary-axis tensor against its
// source row. Tensors outside the plan must be byte-identical and shapes
// must be consistent with the plan; violations are hard errors rather than
// row mismatches.
RowCheck verify_rows(const TensorFile& original, const TensorFile& trimmed, const TrimPlan& plan,
                     const std::vector<AxisRule>& rules = {});

struct TokenizationCheck {
    std::uint64_t cases = 0;      // words whose full-vocab pieces are all retained
    std::uint64_t preserved = 0;  // of those, identical pieces with remapped ids
    std::uint64_t words_with_dropped_pieces = 0;
};

// Checks the segmentation-preservation property on a word sample: whenever
// all full-vocab pieces of a word survive the trim, the trimmed tokenizer
// must produce the same pieces with ids remapped through the plan.
TokenizationCheck verify_tokenization(const std::vector<std::string>& words, const Vocab& full,
                                      const Vocab& trimmed, const TrimPlan& plan,
                                      const TokenizerConfig& cfg);

// Fraction of emitted pieces equal to the unk token over the sample lines.
double unk_rate(const std::vector<std::string>& lines, const Vocab& vocab,
                const TokenizerConfig& cfg);

struct AuditResult {
    std::uint64_t rows_checked = 0;
    std::uint64_t rows_identical = 0;
    std::uint64_t tokenization_cases = 0;
    std::uint64_t tokenization_preserved = 0;
    double unk_rate_original = 0.0;
    double unk_rate_trimmed = 0.0;
    bool passed = false;
};

AuditResult make_audit_result(const RowCheck& rows, const TokenizationCheck& tokenization,
                              double unk_original, double unk_trimmed);

std::string audit_to_json(const AuditResult& result);

struct BenchResult {
    std::uint64_t file_bytes = 0;
    std::vector<double> load_wall_times;  // seconds per full read
    double load_median = 0.0;             // seconds
};

// Times `repetitions` full reads of the checkpoint. Runs strictly
// sequentially; cold caches are not required.
BenchResult bench_load(const std::filesystem::path& path, unsigned repetitions);

std::string bench_to_json(const BenchResult& result);

}  // namespace mtrim
