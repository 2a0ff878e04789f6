// mtrim: shrink a multilingual WordPiece checkpoint to a chosen language set.
//
// Pipeline: count -> select -> trim -> verify -> bench, with JSON files
// between the stages so the expensive per-language counting can be reused
// across model configurations.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <unordered_set>
#include <vector>

#include <CLI11.hpp>

#include "mtrim/audit.hpp"
#include "mtrim/freq.hpp"
#include "mtrim/io_util.hpp"
#include "mtrim/selection.hpp"
#include "mtrim/surgeon.hpp"
#include "mtrim/tensor_store.hpp"
#include "mtrim/tokenizer.hpp"
#include "mtrim/unicode.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct CountOptions {
    std::string vocab_path;
    std::vector<std::string> corpora;  // LANG=PATH
    std::string out_dir;
    unsigned threads = 1;
};

struct SelectOptions {
    std::string vocab_path;
    std::string freq_dir;
    std::string languages;  // comma separated
    std::string threshold = "0.0005";
    std::string out_file;
};

struct TrimOptions {
    std::string model_path;
    std::string vocab_path;
    std::string selection_path;
    std::string out_dir;
    std::vector<std::string> axis_rules;
};

struct VerifyOptions {
    std::string original_path;
    std::string trimmed_path;
    std::string selection_path;
    std::string vocab_path;
    std::string trimmed_vocab_path;
    std::string corpus_path;
    std::vector<std::string> axis_rules;
};

struct BenchOptions {
    std::string model_path;
    unsigned reps = 10;
};

std::vector<std::string> split_csv(const std::string& text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find(',', start);
        if (end == std::string::npos) {
            end = text.size();
        }
        const std::string item = text.substr(start, end - start);
        if (!item.empty()) {
            out.push_back(item);
        }
        start = end + 1;
    }
    return out;
}

std::vector<mtrim::AxisRule> parse_rules(const std::vector<std::string>& texts) {
    std::vector<mtrim::AxisRule> rules;
    rules.reserve(texts.size());
    for (const auto& text : texts) {
        rules.push_back(mtrim::parse_axis_rule(text));
    }
    return rules;
}

std::vector<std::string> read_corpus_lines(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open corpus: " + path.string());
    }
    std::vector<std::string> lines;
    std::string line;
    std::uint64_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!mtrim::uni::is_valid_utf8(line)) {
            throw std::runtime_error(path.string() + ": invalid UTF-8 at line " +
                                     std::to_string(line_no));
        }
        lines.push_back(line);
    }
    return lines;
}

int cmd_count(const CountOptions& opts) {
    const mtrim::Vocab vocab = mtrim::load_vocab(opts.vocab_path);
    const mtrim::TokenizerConfig cfg;
    fs::create_directories(opts.out_dir);
    bool any_failed = false;
    for (const auto& spec : opts.corpora) {
        const std::size_t eq = spec.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
            std::cerr << "error: --corpus expects LANG=PATH, got \"" << spec << "\"\n";
            any_failed = true;
            continue;
        }
        const std::string lang = spec.substr(0, eq);
        const std::string path = spec.substr(eq + 1);
        try {
            const mtrim::FreqTable table =
                mtrim::count_file_df(path, vocab, cfg, lang, opts.threads);
            const fs::path out = fs::path(opts.out_dir) / (lang + ".freq.json");
            mtrim::save_freq(table, out);
            std::cout << lang << ": " << table.total_paragraphs << " paragraphs, "
                      << table.df.size() << " distinct tokens -> " << out.string() << "\n";
        } catch (const std::exception& e) {
            std::cerr << "error: " << lang << ": " << e.what() << "\n";
            any_failed = true;
        }
    }
    return any_failed ? kExitFailure : kExitOk;
}

void print_coverage(const mtrim::CoverageReport& report) {
    std::printf("%-10s %10s %12s\n", "language", "selected", "proportion");
    for (const auto& [label, cov] : report.per_language) {
        std::printf("%-10s %10llu %11.1f%%\n", label.c_str(),
                    static_cast<unsigned long long>(cov.selected_count), cov.proportion_pct);
    }
    std::printf("%-10s %10llu %11.1f%%\n", "union",
                static_cast<unsigned long long>(report.union_coverage.selected_count),
                report.union_coverage.proportion_pct);
    std::printf("%-10s %10llu %11.1f%%\n", "original",
                static_cast<unsigned long long>(report.original_size), 100.0);
}

int cmd_select(const SelectOptions& opts) {
    const mtrim::Vocab vocab = mtrim::load_vocab(opts.vocab_path);
    const mtrim::Threshold threshold = mtrim::Threshold::parse(opts.threshold);
    const std::vector<std::string> languages = split_csv(opts.languages);
    if (languages.empty()) {
        throw std::runtime_error("--languages must name at least one language");
    }
    std::vector<mtrim::Selection> parts;
    parts.reserve(languages.size());
    for (const auto& lang : languages) {
        const fs::path freq_path = fs::path(opts.freq_dir) / (lang + ".freq.json");
        const mtrim::FreqTable table = mtrim::load_freq(freq_path);
        if (table.language != lang) {
            throw std::runtime_error(freq_path.string() + ": holds language \"" + table.language +
                                     "\", expected \"" + lang + "\"");
        }
        parts.push_back(mtrim::select_tokens(table, threshold, vocab));
    }
    const mtrim::Selection unioned = mtrim::union_selections(parts);
    const mtrim::CoverageReport report =
        mtrim::build_coverage_report(parts, unioned, vocab.size());
    print_coverage(report);
    mtrim::save_selection(unioned, opts.out_file);
    std::cout << "selection -> " << opts.out_file << "\n";
    return kExitOk;
}

int cmd_trim(const TrimOptions& opts) {
    const mtrim::Vocab vocab = mtrim::load_vocab(opts.vocab_path);
    const mtrim::Selection selection = mtrim::load_selection(opts.selection_path);
    const mtrim::TrimPlan plan = mtrim::build_trim_plan(selection, vocab);
    const mtrim::TensorFile model = mtrim::read_tensor_file(opts.model_path);
    const mtrim::TrimResult result = mtrim::trim_model(model, plan, parse_rules(opts.axis_rules));

    fs::create_directories(opts.out_dir);
    const fs::path out_dir(opts.out_dir);
    mtrim::write_tensor_file(result.model, out_dir / "model.safetensors");
    mtrim::emit_trimmed_vocab(plan, out_dir / "vocab.txt");
    mtrim::io::atomic_write_bytes(out_dir / "report.json", mtrim::report_to_json(result.report));

    std::printf("vocab: %llu -> %llu tokens\n",
                static_cast<unsigned long long>(result.report.old_vocab_size),
                static_cast<unsigned long long>(result.report.new_vocab_size));
    std::printf("params: %llu -> %llu (reduction %.1f%%)\n",
                static_cast<unsigned long long>(result.report.total_params_old),
                static_cast<unsigned long long>(result.report.total_params_new),
                result.report.reduction_pct);
    std::printf("output -> %s\n", (out_dir / "model.safetensors").c_str());
    return kExitOk;
}

int cmd_verify(const VerifyOptions& opts) {
    const mtrim::Vocab vocab = mtrim::load_vocab(opts.vocab_path);
    const mtrim::Selection selection = mtrim::load_selection(opts.selection_path);
    if (selection.source_fingerprint != vocab.fingerprint) {
        throw std::runtime_error("selection fingerprint does not match the vocabulary file");
    }
    const mtrim::TrimPlan plan = mtrim::build_trim_plan(selection, vocab);
    const mtrim::TensorFile original = mtrim::read_tensor_file(opts.original_path);
    const mtrim::TensorFile trimmed = mtrim::read_tensor_file(opts.trimmed_path);
    const mtrim::RowCheck rows =
        mtrim::verify_rows(original, trimmed, plan, parse_rules(opts.axis_rules));

    mtrim::Vocab trimmed_vocab = opts.trimmed_vocab_path.empty()
                                     ? mtrim::make_vocab(plan.new_tokens)
                                     : mtrim::load_vocab(opts.trimmed_vocab_path);
    mtrim::TokenizationCheck tokenization;
    double unk_original = 0.0;
    double unk_trimmed = 0.0;
    if (!opts.corpus_path.empty()) {
        const mtrim::TokenizerConfig cfg;
        const std::vector<std::string> lines = read_corpus_lines(opts.corpus_path);
        std::vector<std::string> words;
        std::unordered_set<std::string> seen;
        for (const auto& line : lines) {
            for (auto& word : mtrim::basic_tokenize(line, cfg)) {
                if (seen.insert(word).second) {
                    words.push_back(std::move(word));
                }
            }
        }
        tokenization = mtrim::verify_tokenization(words, vocab, trimmed_vocab, plan, cfg);
        unk_original = mtrim::unk_rate(lines, vocab, cfg);
        unk_trimmed = mtrim::unk_rate(lines, trimmed_vocab, cfg);
    }
    const mtrim::AuditResult result =
        mtrim::make_audit_result(rows, tokenization, unk_original, unk_trimmed);
    std::cout << mtrim::audit_to_json(result) << "\n";
    if (!result.passed) {
        std::cerr << "error: audit failed\n";
        return kExitFailure;
    }
    return kExitOk;
}

int cmd_bench(const BenchOptions& opts) {
    const mtrim::BenchResult result = mtrim::bench_load(opts.model_path, opts.reps);
    std::cout << mtrim::bench_to_json(result) << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Trim a multilingual WordPiece checkpoint to a language set"};
    app.require_subcommand(1);

    CountOptions count_opts;
    auto* count = app.add_subcommand(
        "count", "Count per-paragraph token document frequencies for each language");
    count->add_option("--vocab", count_opts.vocab_path, "vocabulary file, one token per line")
        ->required();
    count->add_option("--corpus", count_opts.corpora, "LANG=PATH, one paragraph per line")
        ->required();
    count->add_option("--out", count_opts.out_dir, "output directory for <lang>.freq.json")
        ->required();
    count->add_option("--threads", count_opts.threads, "worker threads per corpus");

    SelectOptions select_opts;
    auto* select =
        app.add_subcommand("select", "Select token ids above the frequency threshold and union "
                                     "them over the target languages");
    select->add_option("--vocab", select_opts.vocab_path, "vocabulary file")->required();
    select->add_option("--freq", select_opts.freq_dir, "directory holding <lang>.freq.json")
        ->required();
    select->add_option("--languages", select_opts.languages, "comma-separated language codes")
        ->required();
    select->add_option("--threshold", select_opts.threshold,
                       "minimum df/total fraction as a decimal string");
    select->add_option("--out", select_opts.out_file, "output selection file")->required();

    TrimOptions trim_opts;
    auto* trim = app.add_subcommand(
        "trim", "Slice vocabulary-axis tensors and rewrite the vocab per a selection");
    trim->add_option("--model", trim_opts.model_path, "input checkpoint (.safetensors/.stc)")
        ->required();
    trim->add_option("--vocab", trim_opts.vocab_path, "vocabulary file")->required();
    trim->add_option("--selection", trim_opts.selection_path, "selection file")->required();
    trim->add_option("--out", trim_opts.out_dir, "output directory")->required();
    trim->add_option("--vocab-axis", trim_opts.axis_rules,
                     "tensor name glob to slice, optionally GLOB:AXIS");

    VerifyOptions verify_opts;
    auto* verify = app.add_subcommand(
        "verify", "Audit a trimmed checkpoint against its source row by row");
    verify->add_option("--original", verify_opts.original_path, "source checkpoint")->required();
    verify->add_option("--trimmed", verify_opts.trimmed_path, "trimmed checkpoint")->required();
    verify->add_option("--selection", verify_opts.selection_path, "selection file")->required();
    verify->add_option("--vocab", verify_opts.vocab_path, "original vocabulary file")->required();
    verify->add_option("--trimmed-vocab", verify_opts.trimmed_vocab_path,
                       "trimmed vocabulary file (default: derived from the plan)");
    verify->add_option("--corpus", verify_opts.corpus_path,
                       "sample corpus for tokenization-preservation and unk-rate checks");
    verify->add_option("--vocab-axis", verify_opts.axis_rules,
                       "tensor name glob to treat as vocabulary-axis, optionally GLOB:AXIS");

    BenchOptions bench_opts;
    auto* bench = app.add_subcommand("bench", "Measure checkpoint size and load time");
    bench->add_option("--model", bench_opts.model_path, "checkpoint to load")->required();
    bench->add_option("--reps", bench_opts.reps, "number of timed loads")
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (count->parsed()) {
            return cmd_count(count_opts);
        }
        if (select->parsed()) {
            return cmd_select(select_opts);
        }
        if (trim->parsed()) {
            return cmd_trim(trim_opts);
        }
        if (verify->parsed()) {
            return cmd_verify(verify_opts);
        }
        if (bench->parsed()) {
            return cmd_bench(bench_opts);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitUsage;
}
