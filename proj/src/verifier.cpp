#include "distill/verifier.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <system_error>

namespace distill {

namespace {

constexpr std::string_view kBoxedMarker = "\\boxed{";
constexpr std::string_view kThinkOpen = "<think>";
constexpr std::string_view kThinkClose = "</think>";
constexpr std::string_view kAnswerOpen = "<answer>";
constexpr std::string_view kAnswerClose = "</answer>";

inline bool is_space(char c) {
    return std::isspace(static_cast<unsigned char>(c)) != 0;
}

inline bool is_digit(char c) {
    return c >= '0' && c <= '9';
}

inline bool is_alpha(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) != 0;
}

std::string_view trim_view(std::string_view s) {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

// Index just past the matching close brace of an opening brace at
// `open`, or npos when the braces never balance.
std::size_t matching_brace_end(std::string_view s, std::size_t open) {
    int depth = 0;
    for (std::size_t i = open; i < s.size(); ++i) {
        if (s[i] == '{') {
            ++depth;
        } else if (s[i] == '}') {
            --depth;
            if (depth == 0) return i + 1;
        }
    }
    return std::string_view::npos;
}

// One pass of the canonicalization rules. Returns true when something
// changed so the caller can run to a fixpoint.
bool strip_once(std::string& s) {
    const std::string before = s;
    std::string_view v = trim_view(s);

    while (v.starts_with('$')) v.remove_prefix(1);
    while (v.starts_with("\\$")) v.remove_prefix(2);

    if (v.starts_with("\\text{")) {
        std::size_t end = matching_brace_end(v, 5);
        if (end == v.size()) {
            v.remove_prefix(6);
            v.remove_suffix(1);
        }
    }

    std::string out;
    out.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] == ',' && i > 0 && i + 1 < v.size() && is_digit(v[i - 1]) && is_digit(v[i + 1]))
            continue; // thousands separator
        out.push_back(v[i]);
    }

    while (!out.empty() && out.back() == '.') out.pop_back();

    // Surrounding parentheses, e.g. "(E)".
    if (out.size() >= 2 && out.front() == '(' && out.back() == ')') {
        std::string_view inner(out.data() + 1, out.size() - 2);
        if (inner.find('(') == std::string_view::npos &&
            inner.find(')') == std::string_view::npos) {
            out = std::string(inner);
        }
    }

    std::string_view trimmed = trim_view(out);
    s.assign(trimmed.data(), trimmed.size());
    return s != before;
}

std::string canonical_decimal(double value) {
    if (value == 0.0) return "0"; // collapse -0
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return ec == std::errc() ? std::string(buf, ptr) : std::string();
}

// Drops the last whitespace-separated token when it is purely
// alphabetic (a unit word such as "inches"). Returns false when no
// such token exists.
bool strip_last_alpha_word(std::string& s) {
    std::string_view v = trim_view(s);
    std::size_t end = v.size();
    while (end > 0 && !is_space(v[end - 1])) --end;
    std::string_view last = v.substr(end);
    if (last.empty() || last.size() == v.size()) return false;
    if (!std::all_of(last.begin(), last.end(), [](char c) { return is_alpha(c); }))
        return false;
    std::string_view rest = trim_view(v.substr(0, end));
    s.assign(rest.data(), rest.size());
    return true;
}

} // namespace

std::optional<std::string> extract_boxed(std::string_view text) {
    std::optional<std::string> result;
    std::size_t pos = 0;
    while ((pos = text.find(kBoxedMarker, pos)) != std::string_view::npos) {
        std::size_t open = pos + kBoxedMarker.size() - 1;
        std::size_t end = matching_brace_end(text, open);
        if (end != std::string_view::npos)
            result = std::string(text.substr(open + 1, end - open - 2));
        pos += kBoxedMarker.size();
    }
    return result;
}

ParsedResponse parse_structure(std::string_view text) {
    ParsedResponse p;
    p.raw_text = std::string(text);

    std::size_t think_open = text.find(kThinkOpen);
    if (think_open != std::string_view::npos)
        p.has_think_block =
            text.find(kThinkClose, think_open + kThinkOpen.size()) != std::string_view::npos;

    std::size_t answer_open = text.find(kAnswerOpen);
    if (answer_open != std::string_view::npos)
        p.has_answer_block =
            text.find(kAnswerClose, answer_open + kAnswerOpen.size()) != std::string_view::npos;

    p.boxed_answer = extract_boxed(text);
    p.has_boxed = p.boxed_answer.has_value();

    if (p.has_think_block && p.has_answer_block) {
        std::size_t first_close = text.find(kThinkClose);
        p.tags_ordered = first_close < answer_open;
    }
    return p;
}

std::string normalize_answer(std::string_view raw) {
    std::string s(trim_view(raw));
    while (strip_once(s)) {
    }

    if (s.size() == 1 && s[0] >= 'A' && s[0] <= 'J') {
        s[0] = static_cast<char>(s[0] - 'A' + 'a');
        return s;
    }
    if (auto num = parse_numeric_answer(s)) return canonical_decimal(*num);
    return s;
}

std::optional<double> parse_numeric_answer(std::string_view normalized) {
    std::string_view v = trim_view(normalized);
    if (!v.empty() && v.front() == '+') v.remove_prefix(1);
    if (v.empty()) return std::nullopt;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), value);
    if (ec != std::errc() || ptr != v.data() + v.size()) return std::nullopt;
    if (!std::isfinite(value)) return std::nullopt;
    return value;
}

bool numeric_answers_equal(double a, double b) {
    double tol = std::max(1e-9, 1e-6 * std::max(std::fabs(a), std::fabs(b)));
    return std::fabs(a - b) <= tol;
}

GoldAnswer GoldAnswer::from_raw(std::string_view raw) {
    GoldAnswer g;
    g.raw = std::string(raw);
    std::string n = normalize_answer(raw);
    if (parse_numeric_answer(n)) {
        g.kind = Kind::numeric;
    } else if (n.size() == 1 && n[0] >= 'a' && n[0] <= 'j') {
        g.kind = Kind::option_letter;
    } else {
        g.kind = Kind::free_text;
    }
    return g;
}

bool is_correct(std::string_view response, const GoldAnswer& gold) {
    auto boxed = extract_boxed(response);
    if (!boxed) return false;

    std::string cand = normalize_answer(*boxed);
    std::string gold_norm = normalize_answer(gold.raw);

    auto gold_num = parse_numeric_answer(gold_norm);
    auto cand_num = parse_numeric_answer(cand);

    if (gold.kind == GoldAnswer::Kind::numeric && gold_num && !cand_num) {
        // "6 inches" vs gold "6": unit words only come off when the
        // gold side is a number.
        std::string stripped = cand;
        while (!cand_num && strip_last_alpha_word(stripped))
            cand_num = parse_numeric_answer(normalize_answer(stripped));
    }

    if (gold_num && cand_num) return numeric_answers_equal(*cand_num, *gold_num);
    return cand == gold_norm;
}

} // namespace distill
