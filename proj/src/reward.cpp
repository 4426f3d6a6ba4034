#include "distill/reward.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace distill {

void RewardConfig::validate() const {
    if (eta_min_correct > eta_max_correct)
        throw std::invalid_argument("reward config: eta_min_correct > eta_max_correct");
    if (eta_min_wrong > eta_max_wrong)
        throw std::invalid_argument("reward config: eta_min_wrong > eta_max_wrong");
    if (eta_min_wrong >= eta_min_correct)
        throw std::invalid_argument("reward config: eta_min_wrong must be below eta_min_correct");
    if (max_len < 1) throw std::invalid_argument("reward config: max_len must be >= 1");
    if (epsilon <= 0.0) throw std::invalid_argument("reward config: epsilon must be > 0");
    if (tau <= 0.0) throw std::invalid_argument("reward config: tau must be > 0");
    if (k < 2) throw std::invalid_argument("reward config: k must be >= 2");
}

RewardConfig RewardConfig::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw std::invalid_argument("reward config: expected a JSON object");
    RewardConfig c;
    for (const auto& [key, value] : j.items()) {
        if (key == "w_cosine") c.w_cosine = value.get<double>();
        else if (key == "w_format") c.w_format = value.get<double>();
        else if (key == "eta_min_correct") c.eta_min_correct = value.get<double>();
        else if (key == "eta_max_correct") c.eta_max_correct = value.get<double>();
        else if (key == "eta_min_wrong") c.eta_min_wrong = value.get<double>();
        else if (key == "eta_max_wrong") c.eta_max_wrong = value.get<double>();
        else if (key == "max_len") c.max_len = value.get<std::size_t>();
        else if (key == "epsilon") c.epsilon = value.get<double>();
        else if (key == "tau") c.tau = value.get<double>();
        else if (key == "k") c.k = value.get<std::size_t>();
        else throw std::invalid_argument("reward config: unknown field '" + key + "'");
    }
    c.validate();
    return c;
}

nlohmann::json RewardConfig::to_json() const {
    return nlohmann::json{
        {"w_cosine", w_cosine},
        {"w_format", w_format},
        {"eta_min_correct", eta_min_correct},
        {"eta_max_correct", eta_max_correct},
        {"eta_min_wrong", eta_min_wrong},
        {"eta_max_wrong", eta_max_wrong},
        {"max_len", max_len},
        {"epsilon", epsilon},
        {"tau", tau},
        {"k", k},
    };
}

int format_reward(const ParsedResponse& parsed) {
    return (parsed.has_think_block && parsed.has_answer_block && parsed.has_boxed &&
            parsed.tags_ordered)
               ? 1
               : 0;
}

double cosine_reward(std::size_t length, bool correct, const RewardConfig& cfg) {
    double eta_min = correct ? cfg.eta_min_correct : cfg.eta_min_wrong;
    double eta_max = correct ? cfg.eta_max_correct : cfg.eta_max_wrong;
    double l = static_cast<double>(std::min(length, cfg.max_len));
    double big_l = static_cast<double>(cfg.max_len);
    return eta_min + 0.5 * (eta_max - eta_min) * (1.0 + std::cos(l * std::numbers::pi / big_l));
}

double composite_reward(double cosine, int format_flag, const RewardConfig& cfg) {
    return cfg.w_cosine * cosine + cfg.w_format * static_cast<double>(format_flag);
}

ResponseScore score_response(std::string_view response, const GoldAnswer& gold,
                             std::size_t token_count, const RewardConfig& cfg) {
    ResponseScore s;
    ParsedResponse parsed = parse_structure(response);
    s.length = std::min(token_count, cfg.max_len);
    s.correct = is_correct(response, gold);
    s.format_ok = format_reward(parsed) == 1;
    s.cosine = cosine_reward(s.length, s.correct, cfg);
    s.reward = composite_reward(s.cosine, s.format_ok ? 1 : 0, cfg);
    return s;
}

} // namespace distill
