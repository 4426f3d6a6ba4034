#include "distill/curation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace distill {

namespace {

int histogram_decimals(double width) {
    int decimals = 0;
    while (decimals < 9 && width * std::pow(10.0, decimals) < 0.999999) ++decimals;
    return decimals;
}

std::string bin_label(double lower, int decimals) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, lower);
    return buf;
}

} // namespace

void CurationConfig::validate() const {
    if (advantage_bin_width <= 0.0)
        throw std::invalid_argument("curation config: advantage_bin_width must be > 0");
    if (advantage_bin_min >= advantage_bin_max)
        throw std::invalid_argument("curation config: advantage_bin_min must be below max");
    if (workers < 1) throw std::invalid_argument("curation config: workers must be >= 1");
}

CurationConfig CurationConfig::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw std::invalid_argument("curation config: expected a JSON object");
    CurationConfig c;
    for (const auto& [key, value] : j.items()) {
        if (key == "advantage_bin_width") c.advantage_bin_width = value.get<double>();
        else if (key == "advantage_bin_min") c.advantage_bin_min = value.get<double>();
        else if (key == "advantage_bin_max") c.advantage_bin_max = value.get<double>();
        else if (key == "workers") c.workers = value.get<std::size_t>();
        else throw std::invalid_argument("curation config: unknown field '" + key + "'");
    }
    c.validate();
    return c;
}

nlohmann::json CurationConfig::to_json() const {
    return nlohmann::json{
        {"advantage_bin_width", advantage_bin_width},
        {"advantage_bin_min", advantage_bin_min},
        {"advantage_bin_max", advantage_bin_max},
        {"workers", workers},
    };
}

nlohmann::ordered_json CurationStats::to_json(const CurationConfig& cfg) const {
    nlohmann::ordered_json j;
    j["records_in"] = records_in;
    j["groups_in"] = groups_in;
    j["groups_kept"] = groups_kept;
    j["groups_dropped"] = groups_dropped;
    j["malformed_records"] = malformed_records;
    j["responses_emitted"] = responses_emitted;

    nlohmann::ordered_json cc = nlohmann::ordered_json::object();
    for (const auto& [count, n] : correct_count_histogram) cc[std::to_string(count)] = n;
    j["correct_count_histogram"] = std::move(cc);

    const int decimals = histogram_decimals(cfg.advantage_bin_width);
    nlohmann::ordered_json adv = nlohmann::ordered_json::object();
    for (const auto& [bin, n] : advantage_histogram) {
        double lower = cfg.advantage_bin_min + bin * cfg.advantage_bin_width;
        adv[bin_label(lower, decimals)] = n;
    }
    j["advantage_histogram"] = std::move(adv);
    j["advantage_bin_width"] = cfg.advantage_bin_width;
    return j;
}

StatsAccumulator::StatsAccumulator(const CurationConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
}

int StatsAccumulator::bin_index(double advantage) const {
    int bins = static_cast<int>(
        std::ceil((cfg_.advantage_bin_max - cfg_.advantage_bin_min) / cfg_.advantage_bin_width -
                  1e-9));
    int idx = static_cast<int>(
        std::floor((advantage - cfg_.advantage_bin_min) / cfg_.advantage_bin_width));
    return std::clamp(idx, 0, bins - 1);
}

void StatsAccumulator::add_scored(const ScoredGroup& group, bool kept) {
    ++stats_.records_in;
    ++stats_.groups_in;
    if (kept) {
        ++stats_.groups_kept;
        stats_.responses_emitted += group.responses.size();
    } else {
        ++stats_.groups_dropped;
    }
    ++stats_.correct_count_histogram[group.num_correct];
    for (const auto& r : group.responses) ++stats_.advantage_histogram[bin_index(r.advantage)];
}

void StatsAccumulator::add_malformed() {
    ++stats_.records_in;
    ++stats_.malformed_records;
}

ScoredGroup score_group(const ResponseGroup& group, const RewardConfig& cfg,
                        const Tokenizer& tokenizer) {
    if (group.responses.size() != cfg.k)
        throw std::invalid_argument("score_group: group '" + group.prompt_id + "' has " +
                                    std::to_string(group.responses.size()) +
                                    " responses, expected k=" + std::to_string(cfg.k));

    GoldAnswer gold = GoldAnswer::from_raw(group.gold_answer);

    ScoredGroup out;
    out.prompt_id = group.prompt_id;
    out.prompt = group.prompt;
    out.responses.reserve(group.responses.size());

    std::vector<double> rewards;
    rewards.reserve(group.responses.size());
    for (const auto& text : group.responses) {
        ResponseScore s = score_response(text, gold, tokenizer.count_tokens(text), cfg);
        ScoredResponse r;
        r.text = text;
        r.tokens = s.length;
        r.correct = s.correct;
        r.format_ok = s.format_ok;
        r.cosine = s.cosine;
        r.reward = s.reward;
        out.responses.push_back(std::move(r));
        rewards.push_back(s.reward);
        if (s.correct) ++out.num_correct;
    }

    GroupAdvantages ga = compute_group_advantages(rewards, cfg.epsilon, cfg.tau);
    for (std::size_t i = 0; i < out.responses.size(); ++i) {
        out.responses[i].advantage = ga.advantages[i];
        out.responses[i].weight = ga.weights[i];
    }
    out.mu = ga.mu;
    out.sigma = ga.sigma;
    return out;
}

CurationStats compute_stats(const std::vector<ScoredGroup>& scored, const CurationConfig& cfg) {
    StatsAccumulator acc(cfg);
    for (const auto& g : scored) acc.add_scored(g, keep_group(g));
    return acc.stats();
}

bool parse_generation_record(const std::string& line, ResponseGroup& out, std::string& error) {
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) {
        error = "invalid JSON";
        return false;
    }
    if (!j.is_object()) {
        error = "record is not a JSON object";
        return false;
    }
    for (const char* field : {"prompt_id", "prompt", "gold_answer"}) {
        if (!j.contains(field) || !j[field].is_string()) {
            error = std::string("missing or non-string field '") + field + "'";
            return false;
        }
    }
    if (!j.contains("responses") || !j["responses"].is_array()) {
        error = "missing or non-array field 'responses'";
        return false;
    }
    out.prompt_id = j["prompt_id"].get<std::string>();
    out.prompt = j["prompt"].get<std::string>();
    out.gold_answer = j["gold_answer"].get<std::string>();
    out.responses.clear();
    for (const auto& r : j["responses"]) {
        if (!r.is_string()) {
            error = "responses must be strings";
            return false;
        }
        out.responses.push_back(r.get<std::string>());
    }
    if (out.responses.empty()) {
        error = "responses array is empty";
        return false;
    }
    return true;
}

std::string scored_group_to_jsonl(const ScoredGroup& group) {
    nlohmann::ordered_json j;
    j["prompt_id"] = group.prompt_id;
    j["prompt"] = group.prompt;
    j["num_correct"] = group.num_correct;
    nlohmann::ordered_json responses = nlohmann::ordered_json::array();
    for (const auto& r : group.responses) {
        nlohmann::ordered_json jr;
        jr["text"] = r.text;
        jr["tokens"] = r.tokens;
        jr["correct"] = r.correct;
        jr["format_ok"] = r.format_ok;
        jr["cosine"] = r.cosine;
        jr["reward"] = r.reward;
        jr["advantage"] = r.advantage;
        jr["weight"] = r.weight;
        responses.push_back(std::move(jr));
    }
    j["responses"] = std::move(responses);
    return j.dump();
}

bool parse_scored_record(const std::string& line, ScoredGroup& out, std::string& error) {
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        error = "invalid JSON";
        return false;
    }
    try {
        out.prompt_id = j.at("prompt_id").get<std::string>();
        out.prompt = j.value("prompt", std::string());
        out.num_correct = j.at("num_correct").get<int>();
        out.responses.clear();
        for (const auto& r : j.at("responses")) {
            ScoredResponse sr;
            sr.text = r.at("text").get<std::string>();
            sr.tokens = r.at("tokens").get<std::size_t>();
            sr.correct = r.at("correct").get<bool>();
            sr.format_ok = r.at("format_ok").get<bool>();
            sr.cosine = r.at("cosine").get<double>();
            sr.reward = r.at("reward").get<double>();
            sr.advantage = r.at("advantage").get<double>();
            sr.weight = r.at("weight").get<double>();
            out.responses.push_back(std::move(sr));
        }
    } catch (const nlohmann::json::exception& e) {
        error = e.what();
        return false;
    }
    if (out.responses.empty()) {
        error = "responses array is empty";
        return false;
    }
    return true;
}

namespace {

struct LineResult {
    bool ok = false;
    bool kept = false;
    ScoredGroup group;
    std::string serialized;
    std::string error;
};

void process_line(const std::string& line, const RewardConfig& reward_cfg,
                  const Tokenizer& tokenizer, bool apply_filter, LineResult& result) {
    try {
        ResponseGroup group;
        if (!parse_generation_record(line, group, result.error)) return;
        if (group.responses.size() != reward_cfg.k) {
            result.error = "group '" + group.prompt_id + "' has " +
                           std::to_string(group.responses.size()) +
                           " responses, expected k=" + std::to_string(reward_cfg.k);
            return;
        }
        result.group = score_group(group, reward_cfg, tokenizer);
        result.kept = !apply_filter || keep_group(result.group);
        if (result.kept) result.serialized = scored_group_to_jsonl(result.group);
        result.ok = true;
    } catch (const std::exception& e) {
        result.ok = false;
        result.error = e.what();
    }
}

} // namespace

CurationStats run_curation(std::istream& input, std::ostream& output,
                           const RewardConfig& reward_cfg, const CurationConfig& curation_cfg,
                           const CurateOptions& options, std::ostream& diag) {
    reward_cfg.validate();
    StatsAccumulator acc(curation_cfg);
    WhitespaceTokenizer tokenizer;

    const std::size_t workers = std::max<std::size_t>(1, options.workers);
    const std::size_t batch_size = std::max<std::size_t>(64, workers * 16);

    std::vector<std::string> lines;
    std::vector<std::size_t> line_numbers;
    lines.reserve(batch_size);
    std::size_t line_no = 0;

    auto flush_batch = [&]() {
        if (lines.empty()) return;
        std::vector<LineResult> results(lines.size());
        auto work = [&](std::size_t tid) {
            for (std::size_t i = tid; i < lines.size(); i += workers)
                process_line(lines[i], reward_cfg, tokenizer, options.apply_filter, results[i]);
        };
        if (workers == 1) {
            work(0);
        } else {
            std::vector<std::thread> pool;
            pool.reserve(workers);
            for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(work, t);
            for (auto& th : pool) th.join();
        }
        for (std::size_t i = 0; i < results.size(); ++i) {
            auto& r = results[i];
            if (!r.ok) {
                diag << "malformed record at line " << line_numbers[i] << ": " << r.error
                     << "\n";
                acc.add_malformed();
                continue;
            }
            acc.add_scored(r.group, keep_group(r.group));
            if (r.kept) output << r.serialized << '\n';
        }
        lines.clear();
        line_numbers.clear();
    };

    std::string line;
    while (std::getline(input, line)) {
        ++line_no;
        if (line.empty()) continue;
        lines.push_back(line);
        line_numbers.push_back(line_no);
        if (lines.size() >= batch_size) flush_batch();
    }
    flush_batch();
    return acc.stats();
}

CurationStats recompute_stats(std::istream& curated, const CurationConfig& cfg,
                              std::ostream& diag) {
    StatsAccumulator acc(cfg);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(curated, line)) {
        ++line_no;
        if (line.empty()) continue;
        ScoredGroup group;
        std::string error;
        if (!parse_scored_record(line, group, error)) {
            diag << "malformed record at line " << line_no << ": " << error << "\n";
            acc.add_malformed();
            continue;
        }
        acc.add_scored(group, keep_group(group));
    }
    return acc.stats();
}

} // namespace distill
