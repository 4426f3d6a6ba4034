#include "distill/config.hpp"

#include <fstream>
#include <stdexcept>

namespace distill {

void LossConfig::validate() const {
    if (lambda_wrong < 0.0) throw std::invalid_argument("loss config: lambda_wrong must be >= 0");
    if (clamp_delta <= 0.0 || clamp_delta >= 1.0)
        throw std::invalid_argument("loss config: clamp_delta must lie in (0, 1)");
    if (max_grad_norm <= 0.0)
        throw std::invalid_argument("loss config: max_grad_norm must be > 0");
    if (learning_rate <= 0.0)
        throw std::invalid_argument("loss config: learning_rate must be > 0");
}

LossConfig LossConfig::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw std::invalid_argument("loss config: expected a JSON object");
    LossConfig c;
    for (const auto& [key, value] : j.items()) {
        if (key == "lambda_wrong") c.lambda_wrong = value.get<double>();
        else if (key == "clamp_delta") c.clamp_delta = value.get<double>();
        else if (key == "max_grad_norm") c.max_grad_norm = value.get<double>();
        else if (key == "learning_rate") c.learning_rate = value.get<double>();
        else throw std::invalid_argument("loss config: unknown field '" + key + "'");
    }
    c.validate();
    return c;
}

nlohmann::json LossConfig::to_json() const {
    return nlohmann::json{
        {"lambda_wrong", lambda_wrong},
        {"clamp_delta", clamp_delta},
        {"max_grad_norm", max_grad_norm},
        {"learning_rate", learning_rate},
    };
}

ToolConfig ToolConfig::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
    ToolConfig c;
    for (const auto& [key, value] : j.items()) {
        if (key == "reward") c.reward = RewardConfig::from_json(value);
        else if (key == "curation") c.curation = CurationConfig::from_json(value);
        else if (key == "loss") c.loss = LossConfig::from_json(value);
        else if (key == "analysis") c.analysis = DegeneracyThresholds::from_json(value);
        else throw std::invalid_argument("config: unknown section '" + key + "'");
    }
    return c;
}

ToolConfig ToolConfig::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded())
        throw std::invalid_argument("config: '" + path + "' is not valid JSON");
    return from_json(j);
}

nlohmann::ordered_json ToolConfig::to_json() const {
    nlohmann::ordered_json j;
    j["reward"] = reward.to_json();
    j["curation"] = curation.to_json();
    j["loss"] = loss.to_json();
    j["analysis"] = analysis.to_json();
    return j;
}

} // namespace distill
