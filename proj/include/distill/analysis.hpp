#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "distill/verifier.hpp"

namespace distill {

struct EvalRecord {
    std::string response;
    bool correct = false;
    std::size_t token_count = 0;
};

struct DegeneracyThresholds {
    std::size_t n_min = 5;    // shortest phrase considered an n-gram repeat
    std::size_t r_min = 3;    // back-to-back repeats required
    std::size_t run_min = 20; // consecutive identical tokens

    void validate() const;
    static DegeneracyThresholds from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

struct BehaviorReport {
    std::uint64_t n_correct = 0;
    std::uint64_t n_incorrect = 0;
    std::uint64_t degenerate_correct = 0;
    std::uint64_t degenerate_incorrect = 0;
    std::uint64_t adherent = 0;
    std::optional<double> mean_len_correct;
    std::optional<double> mean_len_incorrect;
    std::optional<double> verbosity_ratio; // incorrect / correct mean length
    std::optional<double> degeneracy_per_1000_correct;
    std::optional<double> degeneracy_per_1000_incorrect;
    std::optional<double> adherence_pct;

    nlohmann::ordered_json to_json() const;
};

// True iff some phrase of at least n_min tokens repeats at least r_min
// times back-to-back, or a single token runs for run_min in a row.
// Uniform-token stretches are governed by run_min alone: an n-gram
// repeat only counts when the repeating unit's shortest period is
// itself >= n_min.
bool is_degenerate(const std::vector<std::string>& tokens,
                   const DegeneracyThresholds& thresholds = {});

// Same predicate the format reward uses: think + answer + boxed +
// ordered tags.
bool adherence(const ParsedResponse& parsed);

// Aggregates length, degeneracy and adherence statistics split by
// correctness. Permutation-invariant over the records.
BehaviorReport behavior_report(const std::vector<EvalRecord>& records,
                               const DegeneracyThresholds& thresholds = {});

// Streaming form: one JSON object per line with "response" and at
// least one of "gold_answer" / "correct". When a gold answer is
// present correctness is recomputed with the verifier. Malformed lines
// are reported to `diag` and skipped.
struct AnalyzeResult {
    BehaviorReport report;
    std::uint64_t records_in = 0;
    std::uint64_t malformed_records = 0;
};

AnalyzeResult analyze_stream(std::istream& input, const DegeneracyThresholds& thresholds,
                             std::ostream& diag);

} // namespace distill
