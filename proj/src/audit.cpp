#include "mtrim/audit.hpp"

#include <algorithm>
#include <chrono>
#include <cstring>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace mtrim {

namespace {

struct AxisView {
    std::uint64_t outer = 1;
    std::uint64_t axis_len = 0;
    std::uint64_t inner_bytes = 1;
};

AxisView axis_view(const TensorEntry& t, std::size_t axis) {
    AxisView view;
    view.axis_len = t.shape[axis];
    for (std::size_t i = 0; i < axis; ++i) {
        view.outer *= t.shape[i];
    }
    view.inner_bytes = dtype_size(t.dtype);
    for (std::size_t i = axis + 1; i < t.shape.size(); ++i) {
        view.inner_bytes *= t.shape[i];
    }
    return view;
}

}  // namespace

RowCheck verify_rows(const TensorFile& original, const TensorFile& trimmed, const TrimPlan& plan,
                     const std::vector<AxisRule>& rules) {
    const auto axes = find_vocab_axes(original, plan.old_vocab_size, rules);
    if (trimmed.entries.size() != original.entries.size()) {
        throw std::runtime_error("trimmed model has " + std::to_string(trimmed.entries.size()) +
                                 " tensors, original has " +
                                 std::to_string(original.entries.size()));
    }
    RowCheck check;
    for (const auto& [name, orig] : original.entries) {
        auto it = trimmed.entries.find(name);
        if (it == trimmed.entries.end()) {
            throw std::runtime_error("tensor \"" + name + "\" missing from trimmed model");
        }
        const TensorEntry& trim = it->second;
        if (trim.dtype != orig.dtype) {
            throw std::runtime_error("tensor \"" + name + "\": dtype changed");
        }
        auto axis_it = axes.find(name);
        if (axis_it == axes.end()) {
            if (trim.shape != orig.shape || trim.data != orig.data) {
                throw std::runtime_error("tensor \"" + name +
                                         "\" was modified outside the vocabulary axis");
            }
            continue;
        }
        const std::size_t axis = axis_it->second;
        std::vector<std::uint64_t> expected_shape = orig.shape;
        expected_shape[axis] = plan.new_size();
        if (trim.shape != expected_shape) {
            throw std::runtime_error("tensor \"" + name +
                                     "\": trimmed shape inconsistent with the plan");
        }
        const AxisView src = axis_view(orig, axis);
        const AxisView dst = axis_view(trim, axis);
        for (std::size_t k = 0; k < plan.new_size(); ++k) {
            bool identical = true;
            for (std::uint64_t o = 0; o < src.outer && identical; ++o) {
                const std::uint8_t* src_row = orig.data.data() +
                                              (o * src.axis_len + plan.kept_old_ids[k]) *
                                                  src.inner_bytes;
                const std::uint8_t* dst_row =
                    trim.data.data() + (o * dst.axis_len + k) * dst.inner_bytes;
                identical = std::memcmp(src_row, dst_row, src.inner_bytes) == 0;
            }
            ++check.rows_checked;
            if (identical) {
                ++check.rows_identical;
            }
        }
    }
    return check;
}

TokenizationCheck verify_tokenization(const std::vector<std::string>& words, const Vocab& full,
                                      const Vocab& trimmed, const TrimPlan& plan,
                                      const TokenizerConfig& cfg) {
    if (trimmed.tokens != plan.new_tokens) {
        throw std::runtime_error("trimmed vocabulary does not match the trim plan");
    }
    TokenizationCheck check;
    for (const auto& word : words) {
        const auto full_pieces = wordpiece_tokenize(word, full, cfg);
        bool all_retained = true;
        for (const auto& piece : full_pieces) {
            if (!trimmed.contains(piece)) {
                all_retained = false;
                break;
            }
        }
        if (!all_retained) {
            ++check.words_with_dropped_pieces;
            continue;
        }
        ++check.cases;
        const auto trimmed_pieces = wordpiece_tokenize(word, trimmed, cfg);
        bool ok = trimmed_pieces == full_pieces;
        for (std::size_t i = 0; ok && i < full_pieces.size(); ++i) {
            ok = trimmed.id_of.at(trimmed_pieces[i]) == plan.remap(full.id_of.at(full_pieces[i]));
        }
        if (ok) {
            ++check.preserved;
        }
    }
    return check;
}

double unk_rate(const std::vector<std::string>& lines, const Vocab& vocab,
                const TokenizerConfig& cfg) {
    std::uint64_t pieces = 0;
    std::uint64_t unk = 0;
    const TokenId unk_id = vocab.unk_id();
    for (const auto& line : lines) {
        for (TokenId id : encode(line, vocab, cfg)) {
            ++pieces;
            if (id == unk_id) {
                ++unk;
            }
        }
    }
    if (pieces == 0) {
        throw std::runtime_error("empty sample: no pieces emitted");
    }
    return static_cast<double>(unk) / static_cast<double>(pieces);
}

AuditResult make_audit_result(const RowCheck& rows, const TokenizationCheck& tokenization,
                              double unk_original, double unk_trimmed) {
    AuditResult result;
    result.rows_checked = rows.rows_checked;
    result.rows_identical = rows.rows_identical;
    result.tokenization_cases = tokenization.cases;
    result.tokenization_preserved = tokenization.preserved;
    result.unk_rate_original = unk_original;
    result.unk_rate_trimmed = unk_trimmed;
    result.passed = rows.rows_identical == rows.rows_checked &&
                    tokenization.preserved == tokenization.cases;
    return result;
}

std::string audit_to_json(const AuditResult& result) {
    nlohmann::ordered_json j;
    j["rows_checked"] = result.rows_checked;
    j["rows_identical"] = result.rows_identical;
    j["tokenization_cases"] = result.tokenization_cases;
    j["tokenization_preserved"] = result.tokenization_preserved;
    j["unk_rate_original"] = result.unk_rate_original;
    j["unk_rate_trimmed"] = result.unk_rate_trimmed;
    j["passed"] = result.passed;
    return j.dump(2);
}

BenchResult bench_load(const std::filesystem::path& path, unsigned repetitions) {
    if (repetitions < 1) {
        throw std::runtime_error("repetitions must be at least 1");
    }
    BenchResult result;
    result.file_bytes = std::filesystem::file_size(path);
    result.load_wall_times.reserve(repetitions);
    for (unsigned i = 0; i < repetitions; ++i) {
        const auto start = std::chrono::steady_clock::now();
        const TensorFile tf = read_tensor_file(path);
        const auto stop = std::chrono::steady_clock::now();
        (void)tf;
        result.load_wall_times.push_back(std::chrono::duration<double>(stop - start).count());
    }
    std::vector<double> sorted = result.load_wall_times;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    result.load_median = (n % 2 == 1) ? sorted[n / 2] : (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0;
    return result;
}

std::string bench_to_json(const BenchResult& result) {
    nlohmann::ordered_json j;
    j["file_bytes"] = result.file_bytes;
    j["load_wall_times"] = result.load_wall_times;
    j["load_median"] = result.load_median;
    return j.dump(2);
}

}  // namespace mtrim
