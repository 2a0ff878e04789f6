#include "mtrim/surgeon.hpp"

#include <algorithm>
#include <cstring>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "mtrim/io_util.hpp"

namespace mtrim {

namespace {

// Splits the shape around `axis` into [outer, axis_len, inner] so a slice is
// outer x kept gather operations of inner-sized byte blocks.
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

bool TrimPlan::keeps(TokenId old_id) const {
    return std::binary_search(kept_old_ids.begin(), kept_old_ids.end(), old_id);
}

TokenId TrimPlan::remap(TokenId old_id) const {
    auto it = std::lower_bound(kept_old_ids.begin(), kept_old_ids.end(), old_id);
    if (it == kept_old_ids.end() || *it != old_id) {
        throw std::runtime_error("old id " + std::to_string(old_id) + " is not kept by the plan");
    }
    return static_cast<TokenId>(it - kept_old_ids.begin());
}

TrimPlan build_trim_plan(const Selection& sel, const Vocab& vocab) {
    if (sel.source_fingerprint != vocab.fingerprint) {
        throw std::runtime_error("selection fingerprint does not match the vocabulary file");
    }
    TrimPlan plan;
    plan.old_vocab_size = vocab.size();
    plan.kept_old_ids = sel.selected_ids;
    plan.new_tokens.reserve(sel.selected_ids.size());
    for (TokenId id : sel.selected_ids) {
        if (id >= vocab.size()) {
            throw std::runtime_error("selected id " + std::to_string(id) + " exceeds vocab size " +
                                     std::to_string(vocab.size()));
        }
        plan.new_tokens.push_back(vocab.tokens[id]);
    }
    return plan;
}

AxisRule parse_axis_rule(std::string_view text) {
    AxisRule rule;
    const std::size_t colon = text.rfind(':');
    if (colon != std::string_view::npos && colon + 1 < text.size() &&
        text.find_first_not_of("0123456789", colon + 1) == std::string_view::npos) {
        rule.pattern = std::string(text.substr(0, colon));
        rule.axis = std::stoul(std::string(text.substr(colon + 1)));
    } else {
        rule.pattern = std::string(text);
    }
    if (rule.pattern.empty()) {
        throw std::runtime_error("empty tensor name pattern in vocab-axis rule");
    }
    return rule;
}

bool glob_match(std::string_view pattern, std::string_view text) {
    std::size_t p = 0;
    std::size_t t = 0;
    std::size_t star = std::string_view::npos;
    std::size_t star_t = 0;
    while (t < text.size()) {
        if (p < pattern.size() && (pattern[p] == '?' || pattern[p] == text[t])) {
            ++p;
            ++t;
        } else if (p < pattern.size() && pattern[p] == '*') {
            star = p++;
            star_t = t;
        } else if (star != std::string_view::npos) {
            p = star + 1;
            t = ++star_t;
        } else {
            return false;
        }
    }
    while (p < pattern.size() && pattern[p] == '*') {
        ++p;
    }
    return p == pattern.size();
}

std::map<std::string, std::size_t> find_vocab_axes(const TensorFile& tf,
                                                   std::uint64_t old_vocab_size,
                                                   const std::vector<AxisRule>& rules) {
    std::map<std::string, std::size_t> axes;
    for (const auto& [name, entry] : tf.entries) {
        const AxisRule* matched = nullptr;
        for (const auto& rule : rules) {
            if (glob_match(rule.pattern, name)) {
                matched = &rule;
                break;
            }
        }
        std::vector<std::size_t> vocab_axes;
        for (std::size_t i = 0; i < entry.shape.size(); ++i) {
            if (entry.shape[i] == old_vocab_size) {
                vocab_axes.push_back(i);
            }
        }
        if (matched != nullptr) {
            if (matched->axis) {
                if (*matched->axis >= entry.shape.size() ||
                    entry.shape[*matched->axis] != old_vocab_size) {
                    throw std::runtime_error("tensor \"" + name + "\": axis " +
                                             std::to_string(*matched->axis) +
                                             " does not have vocab size " +
                                             std::to_string(old_vocab_size));
                }
                axes[name] = *matched->axis;
            } else if (vocab_axes.size() == 1) {
                axes[name] = vocab_axes.front();
            } else if (vocab_axes.empty()) {
                throw std::runtime_error("tensor \"" + name + "\" matches rule \"" +
                                         matched->pattern + "\" but has no axis of vocab size " +
                                         std::to_string(old_vocab_size));
            } else {
                throw std::runtime_error("tensor \"" + name + "\" has several axes of vocab size " +
                                         std::to_string(old_vocab_size) +
                                         "; disambiguate with \"" + matched->pattern + ":AXIS\"");
            }
        } else {
            if (vocab_axes.size() == 1) {
                axes[name] = vocab_axes.front();
            } else if (vocab_axes.size() > 1) {
                throw std::runtime_error("tensor \"" + name + "\" has several axes of vocab size " +
                                         std::to_string(old_vocab_size) +
                                         "; pass an explicit rule \"" + name + ":AXIS\"");
            }
        }
    }
    return axes;
}

TensorEntry slice_vocab_axis(const TensorEntry& t, const TrimPlan& plan, std::size_t axis) {
    if (axis >= t.shape.size()) {
        throw std::runtime_error("tensor \"" + t.name + "\": axis " + std::to_string(axis) +
                                 " out of range for rank " + std::to_string(t.shape.size()));
    }
    if (t.shape[axis] != plan.old_vocab_size) {
        throw std::runtime_error("tensor \"" + t.name + "\": axis " + std::to_string(axis) +
                                 " has length " + std::to_string(t.shape[axis]) +
                                 ", expected vocab size " + std::to_string(plan.old_vocab_size));
    }
    TensorEntry out;
    out.name = t.name;
    out.dtype = t.dtype;
    out.shape = t.shape;
    out.shape[axis] = plan.new_size();

    const AxisView view = axis_view(t, axis);
    out.data.resize(view.outer * plan.new_size() * view.inner_bytes);
    const std::uint8_t* src = t.data.data();
    std::uint8_t* dst = out.data.data();
    for (std::uint64_t o = 0; o < view.outer; ++o) {
        const std::uint8_t* src_block = src + o * view.axis_len * view.inner_bytes;
        std::uint8_t* dst_block = dst + o * plan.new_size() * view.inner_bytes;
        for (std::size_t k = 0; k < plan.new_size(); ++k) {
            std::memcpy(dst_block + k * view.inner_bytes,
                        src_block + plan.kept_old_ids[k] * view.inner_bytes, view.inner_bytes);
        }
    }
    return out;
}

std::uint64_t param_count(std::uint64_t vocab_size, const BertArch& arch) {
    const std::uint64_t h = arch.hidden;
    const std::uint64_t inter = arch.intermediate;
    const std::uint64_t embeddings =
        vocab_size * h + (arch.max_position + arch.type_vocab) * h + 2 * h;
    const std::uint64_t per_layer = 4 * h * h + 2 * h * inter + 9 * h + inter;
    const std::uint64_t pooler = h * h + h;
    return embeddings + arch.layers * per_layer + pooler;
}

double embedding_share_pct(std::uint64_t vocab_size, const BertArch& arch) {
    return 100.0 * static_cast<double>(vocab_size * arch.hidden) /
           static_cast<double>(param_count(vocab_size, arch));
}

TrimResult trim_model(const TensorFile& tf, const TrimPlan& plan,
                      const std::vector<AxisRule>& rules) {
    const auto axes = find_vocab_axes(tf, plan.old_vocab_size, rules);
    if (axes.empty()) {
        throw std::runtime_error("no tensor with a vocabulary axis of size " +
                                 std::to_string(plan.old_vocab_size) + " found");
    }

    TrimResult result;
    result.model.metadata = tf.metadata;
    ModelReport& report = result.report;
    report.old_vocab_size = plan.old_vocab_size;
    report.new_vocab_size = plan.new_size();

    const TensorEntry* embedding_old = nullptr;
    for (const auto& [name, entry] : tf.entries) {
        auto it = axes.find(name);
        TensorEntry out = (it != axes.end()) ? slice_vocab_axis(entry, plan, it->second) : entry;
        if (is_floating(entry.dtype)) {
            report.per_tensor_params[name] = TensorParams{entry.numel(), out.numel()};
            report.total_params_old += entry.numel();
            report.total_params_new += out.numel();
            if (it != axes.end() && entry.shape.size() >= 2 &&
                (embedding_old == nullptr || entry.numel() > embedding_old->numel())) {
                embedding_old = &entry;
            }
        }
        result.model.add(std::move(out));
    }
    if (embedding_old != nullptr) {
        report.hidden_size = embedding_old->numel() / plan.old_vocab_size;
        if (report.total_params_old > 0) {
            report.embedding_share = 100.0 * static_cast<double>(embedding_old->numel()) /
                                     static_cast<double>(report.total_params_old);
        }
    }
    if (report.total_params_old > 0) {
        report.reduction_pct = 100.0 * (1.0 - static_cast<double>(report.total_params_new) /
                                                  static_cast<double>(report.total_params_old));
    }
    report.predicted_file_bytes = predicted_file_bytes(result.model);
    return result;
}

void emit_trimmed_vocab(const TrimPlan& plan, const std::filesystem::path& path) {
    io::atomic_write(path, [&](std::ostream& out) {
        for (const auto& token : plan.new_tokens) {
            out << token << '\n';
        }
    });
}

std::string report_to_json(const ModelReport& report) {
    nlohmann::ordered_json j;
    j["old_vocab_size"] = report.old_vocab_size;
    j["new_vocab_size"] = report.new_vocab_size;
    j["hidden_size"] = report.hidden_size;
    nlohmann::ordered_json per_tensor = nlohmann::ordered_json::object();
    for (const auto& [name, params] : report.per_tensor_params) {
        per_tensor[name] = {{"old", params.old_params}, {"new", params.new_params}};
    }
    j["per_tensor_params"] = std::move(per_tensor);
    j["total_params_old"] = report.total_params_old;
    j["total_params_new"] = report.total_params_new;
    j["embedding_share"] = report.embedding_share;
    j["reduction_pct"] = report.reduction_pct;
    j["predicted_file_bytes"] = report.predicted_file_bytes;
    return j.dump(2);
}

}  // namespace mtrim
