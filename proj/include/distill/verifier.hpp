#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace distill {

// Structural facts about one model response: tag blocks and the boxed
// final answer. All flags are derived from the text alone.
struct ParsedResponse {
    std::string raw_text;
    std::optional<std::string> boxed_answer; // content of the last \boxed{...}
    bool has_think_block = false;            // matched <think>...</think>
    bool has_answer_block = false;           // matched <answer>...</answer>
    bool has_boxed = false;
    bool tags_ordered = false;               // </think> closes before <answer> opens
};

struct GoldAnswer {
    enum class Kind { numeric, option_letter, free_text };

    std::string raw;
    Kind kind = Kind::free_text;

    static GoldAnswer from_raw(std::string_view raw);
};

// Content of the last brace-balanced \boxed{...} in the text; nested
// braces are allowed. Absent when there is no occurrence whose braces
// balance.
std::optional<std::string> extract_boxed(std::string_view text);

ParsedResponse parse_structure(std::string_view text);

// Canonical answer form: trimmed, leading '$' and surrounding \text{...}
// removed, thousands separators and trailing periods dropped, option
// letters A-J lowercased (parentheses stripped), numbers reduced to
// their shortest round-trip decimal representation.
std::string normalize_answer(std::string_view raw);

// Full-string numeric parse of an already-normalized answer.
std::optional<double> parse_numeric_answer(std::string_view normalized);

// Relative tolerance 1e-6, absolute 1e-9 near zero.
bool numeric_answers_equal(double a, double b);

// True iff the response's last boxed answer matches the gold answer:
// tolerant numeric comparison when both sides parse as numbers, exact
// canonical-text equality otherwise. Trailing unit words on the
// response side are stripped only when the gold answer is numeric.
bool is_correct(std::string_view response, const GoldAnswer& gold);

} // namespace distill
