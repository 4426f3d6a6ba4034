#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>
#include <string>

#include "distill/verifier.hpp"
#include "support.hpp"

using namespace distill;

namespace {

// Independent balance check used by the fuzz property: every '{' must
// be closed before the content ends.
bool braces_balanced(std::string_view s) {
    int depth = 0;
    for (char c : s) {
        if (c == '{') ++depth;
        if (c == '}') --depth;
        if (depth < 0) return false;
    }
    return depth == 0;
}

std::string random_soup(std::mt19937_64& rng, std::size_t max_len) {
    static constexpr std::string_view alphabet = "\\boxed{}ax <>/thinkanswer$.,19";
    std::string s;
    std::size_t len = rng() % (max_len + 1);
    for (std::size_t i = 0; i < len; ++i) s.push_back(alphabet[rng() % alphabet.size()]);
    return s;
}

} // namespace

TEST_CASE("extract_boxed basic cases") {
    CHECK(extract_boxed("the answer is \\boxed{158}.") == "158");
    CHECK(!extract_boxed("no boxed here").has_value());
    CHECK(extract_boxed("\\boxed{a} then \\boxed{\\frac{1}{2}}") == "\\frac{1}{2}");
}

TEST_CASE("extract_boxed nesting and truncation") {
    CHECK(extract_boxed("\\boxed{\\frac{1}{2}}") == "\\frac{1}{2}");
    CHECK(extract_boxed("\\boxed{{{x}}}") == "{{x}}");
    CHECK(!extract_boxed("\\boxed{never closes").has_value());
    // A truncated final box falls back to the last balanced one.
    CHECK(extract_boxed("\\boxed{first} and \\boxed{cut off") == "first");
    CHECK(extract_boxed("\\boxed{}") == "");
}

TEST_CASE("extract_boxed returns brace-balanced content on arbitrary input") {
    std::mt19937_64 rng(20240811);
    for (int i = 0; i < 5000; ++i) {
        std::string s = random_soup(rng, 80);
        auto boxed = extract_boxed(s);
        if (boxed) CHECK(braces_balanced(*boxed));
    }
}

TEST_CASE("parse_structure flag extraction") {
    auto all = parse_structure("<think>x</think><answer>\\boxed{E}</answer>");
    CHECK(all.has_think_block);
    CHECK(all.has_answer_block);
    CHECK(all.has_boxed);
    CHECK(all.tags_ordered);
    CHECK(all.boxed_answer == "E");

    auto empty = parse_structure("");
    CHECK(!empty.has_think_block);
    CHECK(!empty.has_answer_block);
    CHECK(!empty.has_boxed);
    CHECK(!empty.tags_ordered);

    auto reversed = parse_structure("<answer>\\boxed{3}</answer><think>y</think>");
    CHECK(reversed.has_think_block);
    CHECK(reversed.has_answer_block);
    CHECK(!reversed.tags_ordered);
}

TEST_CASE("parse_structure unmatched tags count as absent") {
    CHECK(!parse_structure("<think>never closed <answer>x</answer>").has_think_block);
    CHECK(!parse_structure("</think> early close, no open").has_think_block);
    CHECK(!parse_structure("<answer>unclosed").has_answer_block);
}

TEST_CASE("parse_structure never orders tags without both blocks") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 3000; ++i) {
        auto p = parse_structure(random_soup(rng, 120));
        if (p.tags_ordered) {
            CHECK(p.has_think_block);
            CHECK(p.has_answer_block);
        }
        CHECK(p.has_boxed == p.boxed_answer.has_value());
    }
}

TEST_CASE("normalize_answer canonical forms") {
    CHECK(normalize_answer("$1,158.") == "1158");
    CHECK(normalize_answer("E") == "e");
    CHECK(normalize_answer("  6  ") == "6");
    CHECK(normalize_answer("(E)") == "e");
    CHECK(normalize_answer("\\text{42}") == "42");
    CHECK(normalize_answer("0.50") == "0.5");
    CHECK(normalize_answer("6.") == "6");
    CHECK(normalize_answer("-0") == "0");
    CHECK(normalize_answer("1,234,567") == "1234567");
    CHECK(normalize_answer("\\$158") == "158");
    CHECK(normalize_answer("(6.)") == "6");
    CHECK(normalize_answer("free text stays") == "free text stays");
}

TEST_CASE("normalize_answer is idempotent") {
    const char* tricky[] = {"$1,158.", "(E)", "\\text{ 42 }", " .5", "((e))", "6 inches",
                            "1e+30",   "-0",  "$\\text{B}",   "", "K"};
    for (const char* t : tricky) {
        std::string once = normalize_answer(t);
        CHECK(normalize_answer(once) == once);
    }
    std::mt19937_64 rng(99);
    for (int i = 0; i < 3000; ++i) {
        std::string once = normalize_answer(random_soup(rng, 40));
        CHECK(normalize_answer(once) == once);
    }
}

TEST_CASE("is_correct numeric and text comparison") {
    GoldAnswer six = GoldAnswer::from_raw("6");
    CHECK(six.kind == GoldAnswer::Kind::numeric);
    CHECK(is_correct("the wire piece is \\boxed{6} inches", six));
    CHECK(!is_correct("no box", six));
    CHECK(is_correct("...\\boxed{6.0000001}...", six));
    CHECK(!is_correct("...\\boxed{6.00002}...", six)); // 3.3e-6 relative, above tolerance
    CHECK(is_correct("\\boxed{6 inches}", six));
    CHECK(!is_correct("\\boxed{60}", six));

    GoldAnswer letter = GoldAnswer::from_raw("E");
    CHECK(letter.kind == GoldAnswer::Kind::option_letter);
    CHECK(is_correct("\\boxed{(e)}", letter));
    CHECK(is_correct("\\boxed{E}", letter));
    CHECK(!is_correct("\\boxed{F}", letter));

    GoldAnswer text = GoldAnswer::from_raw("blue whale");
    CHECK(text.kind == GoldAnswer::Kind::free_text);
    CHECK(is_correct("\\boxed{blue whale}", text));
    CHECK(!is_correct("\\boxed{blue}", text));
    // Unit stripping only applies to numeric gold answers.
    CHECK(!is_correct("\\boxed{blue whale inches}", text));
}

TEST_CASE("is_correct near-zero tolerance is absolute") {
    GoldAnswer zero = GoldAnswer::from_raw("0");
    CHECK(is_correct("\\boxed{0.0000000005}", zero));
    CHECK(!is_correct("\\boxed{0.001}", zero));
}

TEST_CASE("is_correct invariant under surrounding non-boxed text") {
    std::mt19937_64 rng(1234);
    GoldAnswer gold = GoldAnswer::from_raw("42");
    const std::string answers[] = {"\\boxed{42}", "\\boxed{41}", "\\boxed{forty-two}"};
    for (int i = 0; i < 500; ++i) {
        for (const auto& core : answers) {
            bool base = is_correct(core, gold);
            std::string prefix = random_soup(rng, 30);
            std::string suffix = random_soup(rng, 30);
            // Junk must not introduce another box.
            if (prefix.find("\\boxed{") != std::string::npos ||
                suffix.find("\\boxed{") != std::string::npos)
                continue;
            CHECK(is_correct(prefix + core + " " + suffix, gold) == base);
        }
    }
}

TEST_CASE("gold answer kind inference") {
    CHECK(GoldAnswer::from_raw("3.5").kind == GoldAnswer::Kind::numeric);
    CHECK(GoldAnswer::from_raw("$1,000").kind == GoldAnswer::Kind::numeric);
    CHECK(GoldAnswer::from_raw("(a)").kind == GoldAnswer::Kind::option_letter);
    CHECK(GoldAnswer::from_raw("k").kind == GoldAnswer::Kind::free_text); // outside A-J
    CHECK(GoldAnswer::from_raw("yes").kind == GoldAnswer::Kind::free_text);
}

TEST_CASE("reference samples verify as expected") {
    GoldAnswer six = GoldAnswer::from_raw("6");
    CHECK(is_correct(testsupport::kSamplePlainBoxed, six));
    CHECK(is_correct(testsupport::kSampleRepeatingTags, six));
    CHECK(!is_correct(testsupport::kSampleWrongConversion, six));
    CHECK(extract_boxed(testsupport::kSampleWrongConversion) == "60");
}
