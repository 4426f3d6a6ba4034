#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "distill/advantage.hpp"
#include "distill/reward.hpp"
#include "distill/tokenizer.hpp"

namespace distill {

// One prompt with its k teacher responses and the gold answer; the
// unit of scoring, normalization and filtering.
struct ResponseGroup {
    std::string prompt_id;
    std::string prompt;
    std::string gold_answer;
    std::vector<std::string> responses;
};

struct ScoredResponse {
    std::string text;
    std::size_t tokens = 0; // truncated at max_len
    bool correct = false;
    bool format_ok = false;
    double cosine = 0.0;
    double reward = 0.0;
    double advantage = 0.0;
    double weight = 0.0;
};

struct ScoredGroup {
    std::string prompt_id;
    std::string prompt;
    int num_correct = 0;
    std::vector<ScoredResponse> responses;
    double mu = 0.0;    // group mean reward
    double sigma = 0.0; // group reward standard deviation
};

struct CurationConfig {
    double advantage_bin_width = 0.1;
    double advantage_bin_min = -3.0;
    double advantage_bin_max = 3.0;
    std::size_t workers = 1;

    void validate() const;
    static CurationConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

struct CurationStats {
    std::uint64_t records_in = 0;  // non-empty input lines
    std::uint64_t groups_in = 0;   // records that parsed and validated
    std::uint64_t groups_kept = 0;
    std::uint64_t groups_dropped = 0; // zero correct responses
    std::uint64_t malformed_records = 0;
    std::uint64_t responses_emitted = 0;
    std::map<int, std::uint64_t> correct_count_histogram;
    std::map<int, std::uint64_t> advantage_histogram; // bin index -> count

    nlohmann::ordered_json to_json(const CurationConfig& cfg) const;
};

// Accumulates stats over scored groups in input order. Histogram bins
// clamp out-of-range advantages into the edge bins.
class StatsAccumulator {
public:
    explicit StatsAccumulator(const CurationConfig& cfg);

    void add_scored(const ScoredGroup& group, bool kept);
    void add_malformed();
    const CurationStats& stats() const { return stats_; }

private:
    int bin_index(double advantage) const;

    CurationConfig cfg_;
    CurationStats stats_;
};

// Parses, verifies and rewards every response, then normalizes the
// group into advantages and weights. Rejects groups whose size is not
// cfg.k.
ScoredGroup score_group(const ResponseGroup& group, const RewardConfig& cfg,
                        const Tokenizer& tokenizer);

// The acceptance rule: a group enters the dataset iff at least one
// response is correct.
inline bool keep_group(const ScoredGroup& group) { return group.num_correct >= 1; }

// In-memory convenience used by tests; streaming runs use CurationPipeline.
CurationStats compute_stats(const std::vector<ScoredGroup>& scored, const CurationConfig& cfg);

// {"prompt_id", "prompt", "gold_answer", "responses": [text x k]}
bool parse_generation_record(const std::string& line, ResponseGroup& out, std::string& error);

std::string scored_group_to_jsonl(const ScoredGroup& group);
bool parse_scored_record(const std::string& line, ScoredGroup& out, std::string& error);

struct CurateOptions {
    bool apply_filter = true; // `score` keeps zero-correct groups too
    std::size_t workers = 1;
};

// Streaming one-record-per-line run: bounded batches, any number of
// scoring workers, single ordered writer. Output is byte-identical
// regardless of worker count. Malformed lines are reported to `diag`
// and counted, never fatal.
CurationStats run_curation(std::istream& input, std::ostream& output, const RewardConfig& reward_cfg,
                           const CurationConfig& curation_cfg, const CurateOptions& options,
                           std::ostream& diag);

// Re-derives statistics from an already-scored (curated) file.
CurationStats recompute_stats(std::istream& curated, const CurationConfig& cfg,
                              std::ostream& diag);

} // namespace distill
