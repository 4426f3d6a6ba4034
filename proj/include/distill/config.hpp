#pragma once

#include <string>

#include "json.hpp"

#include "distill/analysis.hpp"
#include "distill/curation.hpp"
#include "distill/reward.hpp"

namespace distill {

// Training-side constants for the toy loop and the group objective.
struct LossConfig {
    double lambda_wrong = 0.5;
    double clamp_delta = 1e-6;
    double max_grad_norm = 1.0;
    double learning_rate = 0.1;

    void validate() const;
    static LossConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

// Whole-tool configuration: one JSON document with sections
// "reward", "curation", "loss" and "analysis". Missing sections and
// fields take the built-in defaults; unknown names are rejected.
struct ToolConfig {
    RewardConfig reward;
    CurationConfig curation;
    LossConfig loss;
    DegeneracyThresholds analysis;

    static ToolConfig from_json(const nlohmann::json& j);
    static ToolConfig load_file(const std::string& path);
    nlohmann::ordered_json to_json() const;
};

} // namespace distill
