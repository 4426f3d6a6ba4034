#include "distill/analysis.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <unordered_map>

#include "distill/reward.hpp"
#include "distill/tokenizer.hpp"

namespace distill {

namespace {

std::vector<int> intern_tokens(const std::vector<std::string>& tokens) {
    std::unordered_map<std::string_view, int> ids;
    std::vector<int> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) {
        auto [it, inserted] = ids.try_emplace(t, static_cast<int>(ids.size()));
        out.push_back(it->second);
    }
    return out;
}

// Shortest period of the id window via the KMP border array.
std::size_t smallest_period(const int* s, std::size_t n) {
    std::vector<std::size_t> border(n + 1, 0);
    for (std::size_t i = 1; i < n; ++i) {
        std::size_t b = border[i];
        while (b > 0 && s[i] != s[b]) b = border[b];
        if (s[i] == s[b]) ++b;
        border[i + 1] = b;
    }
    return n - border[n];
}

bool has_long_run(const std::vector<int>& ids, std::size_t run_min) {
    std::size_t run = 0;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        run = (i > 0 && ids[i] == ids[i - 1]) ? run + 1 : 1;
        if (run >= run_min) return true;
    }
    return false;
}

} // namespace

void DegeneracyThresholds::validate() const {
    if (n_min < 1 || r_min < 2 || run_min < 2)
        throw std::invalid_argument("degeneracy thresholds: need n_min >= 1, r_min >= 2, run_min >= 2");
}

DegeneracyThresholds DegeneracyThresholds::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw std::invalid_argument("analysis config: expected a JSON object");
    DegeneracyThresholds t;
    for (const auto& [key, value] : j.items()) {
        if (key == "n_min") t.n_min = value.get<std::size_t>();
        else if (key == "r_min") t.r_min = value.get<std::size_t>();
        else if (key == "run_min") t.run_min = value.get<std::size_t>();
        else throw std::invalid_argument("analysis config: unknown field '" + key + "'");
    }
    t.validate();
    return t;
}

nlohmann::json DegeneracyThresholds::to_json() const {
    return nlohmann::json{{"n_min", n_min}, {"r_min", r_min}, {"run_min", run_min}};
}

bool is_degenerate(const std::vector<std::string>& tokens,
                   const DegeneracyThresholds& thresholds) {
    thresholds.validate();
    const std::size_t len = tokens.size();
    if (len == 0) return false;

    std::vector<int> ids = intern_tokens(tokens);
    if (has_long_run(ids, thresholds.run_min)) return true;
    if (len < thresholds.n_min * thresholds.r_min) return false;

    // streak[i] = how far ids[i..] agrees with ids[i+n..]; a phrase of
    // length n starting at i repeats r times back-to-back iff
    // streak[i] >= (r-1)*n.
    std::vector<std::size_t> streak(len);
    const std::size_t max_n = len / thresholds.r_min;
    for (std::size_t n = thresholds.n_min; n <= max_n; ++n) {
        const std::size_t need = (thresholds.r_min - 1) * n;
        for (std::size_t i = len - n; i-- > 0;) {
            streak[i] = ids[i] == ids[i + n] ? (i + 1 < len - n ? streak[i + 1] + 1 : 1) : 0;
        }
        for (std::size_t i = 0; i + n * thresholds.r_min <= len; ++i) {
            if (streak[i] < need) continue;
            // Uniform or shorter-period spam is someone else's match:
            // only count windows whose fundamental period is >= n_min.
            if (smallest_period(ids.data() + i, n * thresholds.r_min) >= thresholds.n_min)
                return true;
        }
    }
    return false;
}

bool adherence(const ParsedResponse& parsed) { return format_reward(parsed) == 1; }

BehaviorReport behavior_report(const std::vector<EvalRecord>& records,
                               const DegeneracyThresholds& thresholds) {
    BehaviorReport report;
    WhitespaceTokenizer tokenizer;
    std::uint64_t len_correct = 0;
    std::uint64_t len_incorrect = 0;

    for (const auto& record : records) {
        if (record.correct) {
            ++report.n_correct;
            len_correct += record.token_count;
        } else {
            ++report.n_incorrect;
            len_incorrect += record.token_count;
        }
        if (is_degenerate(tokenizer.tokenize(record.response), thresholds)) {
            if (record.correct) ++report.degenerate_correct;
            else ++report.degenerate_incorrect;
        }
        if (adherence(parse_structure(record.response))) ++report.adherent;
    }

    if (report.n_correct > 0) {
        report.mean_len_correct =
            static_cast<double>(len_correct) / static_cast<double>(report.n_correct);
        report.degeneracy_per_1000_correct = 1000.0 *
                                             static_cast<double>(report.degenerate_correct) /
                                             static_cast<double>(report.n_correct);
    }
    if (report.n_incorrect > 0) {
        report.mean_len_incorrect =
            static_cast<double>(len_incorrect) / static_cast<double>(report.n_incorrect);
        report.degeneracy_per_1000_incorrect =
            1000.0 * static_cast<double>(report.degenerate_incorrect) /
            static_cast<double>(report.n_incorrect);
    }
    if (report.mean_len_correct && report.mean_len_incorrect && *report.mean_len_correct > 0.0 &&
        *report.mean_len_incorrect > 0.0)
        report.verbosity_ratio = *report.mean_len_incorrect / *report.mean_len_correct;

    std::uint64_t total = report.n_correct + report.n_incorrect;
    if (total > 0)
        report.adherence_pct =
            100.0 * static_cast<double>(report.adherent) / static_cast<double>(total);
    return report;
}

nlohmann::ordered_json BehaviorReport::to_json() const {
    nlohmann::ordered_json j;
    j["n_correct"] = n_correct;
    j["n_incorrect"] = n_incorrect;
    auto set_optional = [&j](const char* key, const std::optional<double>& v) {
        if (v) j[key] = *v;
    };
    set_optional("mean_len_correct", mean_len_correct);
    set_optional("mean_len_incorrect", mean_len_incorrect);
    set_optional("verbosity_ratio", verbosity_ratio);
    set_optional("degeneracy_per_1000_correct", degeneracy_per_1000_correct);
    set_optional("degeneracy_per_1000_incorrect", degeneracy_per_1000_incorrect);
    j["degenerate_correct"] = degenerate_correct;
    j["degenerate_incorrect"] = degenerate_incorrect;
    set_optional("adherence_pct", adherence_pct);
    return j;
}

AnalyzeResult analyze_stream(std::istream& input, const DegeneracyThresholds& thresholds,
                             std::ostream& diag) {
    AnalyzeResult result;
    std::vector<EvalRecord> records;
    WhitespaceTokenizer tokenizer;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(input, line)) {
        ++line_no;
        if (line.empty()) continue;
        ++result.records_in;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("response") ||
            !j["response"].is_string()) {
            diag << "malformed record at line " << line_no << ": missing 'response'\n";
            ++result.malformed_records;
            continue;
        }
        EvalRecord record;
        record.response = j["response"].get<std::string>();
        if (j.contains("gold_answer") && j["gold_answer"].is_string()) {
            record.correct = is_correct(record.response,
                                        GoldAnswer::from_raw(j["gold_answer"].get<std::string>()));
        } else if (j.contains("correct") && j["correct"].is_boolean()) {
            record.correct = j["correct"].get<bool>();
        } else {
            diag << "malformed record at line " << line_no
                 << ": needs 'gold_answer' or 'correct'\n";
            ++result.malformed_records;
            continue;
        }
        record.token_count = tokenizer.count_tokens(record.response);
        records.push_back(std::move(record));
    }
    result.report = behavior_report(records, thresholds);
    return result;
}

} // namespace distill
