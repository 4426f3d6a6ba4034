#pragma once

#include <cstddef>
#include <string>

#include "json.hpp"

#include "distill/verifier.hpp"

namespace distill {

// Constants of the reward, advantage and weighting scheme. Defaults
// follow the generation/training settings the toolkit ships with.
struct RewardConfig {
    double w_cosine = 2.0;
    double w_format = 1.0;
    double eta_min_correct = 0.5;
    double eta_max_correct = 1.0;
    double eta_min_wrong = -0.5;
    double eta_max_wrong = 0.0;
    std::size_t max_len = 2048; // token cap L for the cosine reward
    double epsilon = 1e-8;      // stabilizer in the advantage denominator
    double tau = 0.5;           // softmax temperature for weights
    std::size_t k = 8;          // responses per group

    // Throws std::invalid_argument when a bound or positivity
    // constraint is violated.
    void validate() const;

    // Missing fields take the defaults; unknown fields are rejected.
    static RewardConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

// Per-response score parts: truncated token length, correctness,
// format flag, cosine reward and the composite reward.
struct ResponseScore {
    std::size_t length = 0; // truncated at max_len
    bool correct = false;
    bool format_ok = false;
    double cosine = 0.0;
    double reward = 0.0;
};

// 1 iff think block, answer block, boxed answer and think-before-answer
// ordering are all present.
int format_reward(const ParsedResponse& parsed);

// Length-aware reward interpolating between correctness-dependent
// bounds: eta_min + (eta_max - eta_min)/2 * (1 + cos(l*pi/L)).
// Lengths above max_len are truncated before use.
double cosine_reward(std::size_t length, bool correct, const RewardConfig& cfg);

double composite_reward(double cosine, int format_flag, const RewardConfig& cfg);

// Convenience: full per-response scoring against a gold answer.
ResponseScore score_response(std::string_view response, const GoldAnswer& gold,
                             std::size_t token_count, const RewardConfig& cfg);

} // namespace distill
