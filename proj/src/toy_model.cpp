#include "distill/toy_model.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <random>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "distill/advantage.hpp"
#include "distill/tokenizer.hpp"

namespace distill {

namespace {

void check_tokens(const ToyModel& model, std::span<const int> tokens) {
    if (tokens.size() < 2)
        throw std::invalid_argument("toy model: sequence needs a context token and a target");
    for (int t : tokens)
        if (t < 0 || static_cast<std::size_t>(t) >= model.vocab_size)
            throw std::invalid_argument("toy model: token id out of vocabulary");
}

GroupLossInput to_loss_input(const ToyModel& model, const TokenGroup& group,
                             const LossParams& params) {
    GroupLossInput input;
    input.sequences.reserve(group.sequences.size());
    for (const auto& seq : group.sequences)
        input.sequences.push_back(toy_logprobs(model, seq));
    input.weights = group.weights;
    input.correct = group.correct;
    input.lambda_wrong = params.lambda_wrong;
    input.clamp_delta = params.clamp_delta;
    return input;
}

std::set<int> touched_rows(std::span<const TokenGroup> batch) {
    std::set<int> rows;
    for (const auto& group : batch)
        for (const auto& seq : group.sequences)
            for (std::size_t t = 0; t + 1 < seq.size(); ++t) rows.insert(seq[t]);
    return rows;
}

// Deterministic Fisher-Yates; avoids relying on std::shuffle internals.
void shuffle_indices(std::vector<std::size_t>& indices, std::mt19937_64& rng) {
    for (std::size_t i = indices.size(); i > 1; --i)
        std::swap(indices[i - 1], indices[rng() % i]);
}

} // namespace

ToyModel ToyModel::zeros(std::size_t vocab_size) {
    ToyModel m;
    m.vocab_size = vocab_size;
    m.logits.assign(vocab_size * vocab_size, 0.0);
    return m;
}

std::vector<double> ToyModel::row_softmax(int prev) const {
    auto lp = row_log_softmax(prev);
    for (double& v : lp) v = std::exp(v);
    return lp;
}

std::vector<double> ToyModel::row_log_softmax(int prev) const {
    const double* row = logits.data() + static_cast<std::size_t>(prev) * vocab_size;
    double max_logit = *std::max_element(row, row + vocab_size);
    double total = 0.0;
    for (std::size_t v = 0; v < vocab_size; ++v) total += std::exp(row[v] - max_logit);
    double lse = max_logit + std::log(total);
    std::vector<double> out(vocab_size);
    for (std::size_t v = 0; v < vocab_size; ++v) out[v] = row[v] - lse;
    return out;
}

LogProbSequence toy_logprobs(const ToyModel& model, std::span<const int> tokens) {
    check_tokens(model, tokens);
    std::vector<double> lps;
    lps.reserve(tokens.size() - 1);
    for (std::size_t t = 0; t + 1 < tokens.size(); ++t) {
        auto row_lp = model.row_log_softmax(tokens[t]);
        lps.push_back(row_lp[static_cast<std::size_t>(tokens[t + 1])]);
    }
    return LogProbSequence::from(std::move(lps));
}

double batch_loss(const ToyModel& model, std::span<const TokenGroup> batch,
                  const LossParams& params) {
    if (batch.empty()) throw std::invalid_argument("batch_loss: empty batch");
    double total = 0.0;
    for (const auto& group : batch)
        total += advantage_weighted_loss(to_loss_input(model, group, params)).total;
    return total / static_cast<double>(batch.size());
}

std::vector<double> analytic_gradient(const ToyModel& model, std::span<const TokenGroup> batch,
                                      const LossParams& params) {
    if (batch.empty()) throw std::invalid_argument("analytic_gradient: empty batch");
    const std::size_t vocab = model.vocab_size;
    std::vector<double> grad(vocab * vocab, 0.0);
    const double batch_scale = 1.0 / static_cast<double>(batch.size());

    for (const auto& group : batch) {
        std::size_t k = group.sequences.size();
        if (group.weights.size() != k || group.correct.size() != k)
            throw std::invalid_argument("analytic_gradient: group fields must have equal length");
        std::size_t num_wrong = 0;
        for (auto c : group.correct)
            if (!c) ++num_wrong;

        for (std::size_t i = 0; i < k; ++i) {
            const auto& seq = group.sequences[i];
            check_tokens(model, seq);
            const double transitions = static_cast<double>(seq.size() - 1);

            // pi_avg is needed up front to decide whether the clamp froze
            // the contrastive branch.
            double pi_avg = 0.0;
            bool wrong = !group.correct[i];
            if (wrong) pi_avg = mean_token_probability(model, seq);
            bool penalty_active = wrong && pi_avg < 1.0 - params.clamp_delta;
            double penalty_coeff = 0.0;
            if (penalty_active)
                penalty_coeff = batch_scale * params.lambda_wrong /
                                static_cast<double>(num_wrong) / (1.0 - pi_avg) / transitions;

            const double ce_coeff = batch_scale * group.weights[i] / transitions;

            for (std::size_t t = 0; t + 1 < seq.size(); ++t) {
                const int prev = seq[t];
                const int next = seq[t + 1];
                auto probs = model.row_softmax(prev);
                double* grad_row = grad.data() + static_cast<std::size_t>(prev) * vocab;
                const double p_next = probs[static_cast<std::size_t>(next)];

                for (std::size_t c = 0; c < vocab; ++c) grad_row[c] += ce_coeff * probs[c];
                grad_row[static_cast<std::size_t>(next)] -= ce_coeff;

                if (penalty_active) {
                    // d(-log(1-pi))/dtheta = 1/(1-pi) * dpi/dtheta with
                    // dp/dtheta[prev][c] = p * (1[c=next] - softmax[c]).
                    for (std::size_t c = 0; c < vocab; ++c)
                        grad_row[c] -= penalty_coeff * p_next * probs[c];
                    grad_row[static_cast<std::size_t>(next)] += penalty_coeff * p_next;
                }
            }
        }
    }
    return grad;
}

std::vector<double> finite_difference_gradient(const ToyModel& model,
                                               std::span<const TokenGroup> batch,
                                               const LossParams& params, double step) {
    if (step <= 0.0) throw std::invalid_argument("finite_difference_gradient: step must be > 0");
    ToyModel probe = model;
    std::vector<double> grad(model.vocab_size * model.vocab_size, 0.0);
    for (int row : touched_rows(batch)) {
        for (std::size_t c = 0; c < model.vocab_size; ++c) {
            double& cell = probe.logit(row, static_cast<int>(c));
            const double saved = cell;
            cell = saved + step;
            double up = batch_loss(probe, batch, params);
            cell = saved - step;
            double down = batch_loss(probe, batch, params);
            cell = saved;
            grad[static_cast<std::size_t>(row) * model.vocab_size + c] =
                (up - down) / (2.0 * step);
        }
    }
    return grad;
}

double clip_global_norm(std::span<double> gradient, double max_norm) {
    double sq = 0.0;
    for (double g : gradient) sq += g * g;
    double norm = std::sqrt(sq);
    if (norm > max_norm && norm > 0.0) {
        double scale = max_norm / norm;
        for (double& g : gradient) g *= scale;
    }
    return norm;
}

double mean_token_probability(const ToyModel& model, std::span<const int> tokens) {
    auto lps = toy_logprobs(model, tokens);
    double avg = 0.0;
    for (double lp : lps.log_probs) avg += std::exp(lp);
    return avg / static_cast<double>(lps.log_probs.size());
}

TrainTrace train_toy(ToyModel& model, const std::vector<TokenGroup>& dataset,
                     const TrainOptions& options) {
    if (dataset.empty()) throw std::invalid_argument("train_toy: empty dataset");
    if (options.epochs < 0) throw std::invalid_argument("train_toy: epochs must be >= 0");

    TrainTrace trace;
    trace.initial_loss = batch_loss(model, dataset, options.loss);
    trace.final_loss = trace.initial_loss;

    std::mt19937_64 rng(options.seed);
    std::vector<std::size_t> order(dataset.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int epoch = 0; epoch < options.epochs; ++epoch) {
        shuffle_indices(order, rng);
        for (std::size_t idx : order) {
            auto grad =
                analytic_gradient(model, std::span(&dataset[idx], 1), options.loss);
            clip_global_norm(grad, options.max_grad_norm);
            for (std::size_t p = 0; p < grad.size(); ++p)
                model.logits[p] -= options.learning_rate * grad[p];
        }
        trace.epoch_losses.push_back(batch_loss(model, dataset, options.loss));
    }
    if (!trace.epoch_losses.empty()) trace.final_loss = trace.epoch_losses.back();
    return trace;
}

GradCheckReport run_gradcheck(const GradCheckOptions& options) {
    if (options.trials < 1) throw std::invalid_argument("gradcheck: trials must be >= 1");
    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> normal(0.0, 1.2);
    auto uniform_int = [&rng](std::size_t lo, std::size_t hi) {
        return lo + static_cast<std::size_t>(rng() % (hi - lo + 1));
    };

    GradCheckReport report;
    report.trials = options.trials;
    LossParams params;

    for (int trial = 0; trial < options.trials; ++trial) {
        const std::size_t vocab = uniform_int(3, 8);
        ToyModel model = ToyModel::zeros(vocab);
        for (double& z : model.logits) z = normal(rng);

        TokenGroup group;
        const std::size_t k = uniform_int(2, 6);
        const int pattern = trial % 4; // all-correct / all-wrong / mixed
        for (std::size_t i = 0; i < k; ++i) {
            std::vector<int> seq(uniform_int(2, 7));
            for (int& tok : seq) tok = static_cast<int>(uniform_int(0, vocab - 1));
            group.sequences.push_back(std::move(seq));
            bool correct = pattern == 0 ? true : pattern == 1 ? false : (rng() % 2 == 0);
            group.correct.push_back(correct ? 1 : 0);
        }
        std::vector<double> adv(k);
        for (double& a : adv) a = normal(rng);
        group.weights = softmax_weights(adv, 0.5);

        if (trial % 5 == 4) {
            // Saturate one wrong single-transition sequence so pi_avg
            // crosses the clamp.
            group.correct[0] = 0;
            int a = static_cast<int>(uniform_int(0, vocab - 1));
            int b = static_cast<int>(uniform_int(0, vocab - 1));
            group.sequences[0] = {a, b};
            model.logit(a, b) = 40.0;
        }

        std::vector<TokenGroup> batch{std::move(group)};
        auto analytic = analytic_gradient(model, batch, params);
        auto numeric = finite_difference_gradient(model, batch, params, options.step);

        if (options.inject_error != 0.0 && !analytic.empty()) {
            int row = *touched_rows(batch).begin();
            analytic[static_cast<std::size_t>(row) * vocab] += options.inject_error;
        }

        for (int row : touched_rows(batch)) {
            for (std::size_t c = 0; c < vocab; ++c) {
                std::size_t p = static_cast<std::size_t>(row) * vocab + c;
                double denom = std::max({std::fabs(analytic[p]), std::fabs(numeric[p]), 1e-6});
                report.max_rel_err =
                    std::max(report.max_rel_err, std::fabs(analytic[p] - numeric[p]) / denom);
            }
        }
    }
    report.passed = report.max_rel_err <= options.tolerance;
    return report;
}

ToyDataset load_toy_dataset(std::istream& curated_jsonl, double tau) {
    ToyDataset dataset;
    dataset.vocab = {"<bos>", "<eos>"};
    std::unordered_map<std::string, int> ids;
    WhitespaceTokenizer tokenizer;

    auto token_id = [&](const std::string& token) {
        auto [it, inserted] = ids.try_emplace(token, static_cast<int>(dataset.vocab.size()));
        if (inserted) dataset.vocab.push_back(token);
        return it->second;
    };

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(curated_jsonl, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json record = nlohmann::json::parse(line, nullptr, false);
        if (record.is_discarded() || !record.contains("responses"))
            throw std::runtime_error("toy dataset: malformed record at line " +
                                     std::to_string(line_no));

        TokenGroup group;
        std::vector<double> advantages;
        for (const auto& response : record.at("responses")) {
            std::vector<int> seq{0};
            for (const auto& token : tokenizer.tokenize(response.at("text").get<std::string>()))
                seq.push_back(token_id(token));
            seq.push_back(1);
            group.sequences.push_back(std::move(seq));
            group.correct.push_back(response.at("correct").get<bool>() ? 1 : 0);
            advantages.push_back(response.at("advantage").get<double>());
        }
        if (group.sequences.empty())
            throw std::runtime_error("toy dataset: group without responses at line " +
                                     std::to_string(line_no));
        group.weights = softmax_weights(advantages, tau);
        dataset.groups.push_back(std::move(group));
    }
    return dataset;
}

nlohmann::ordered_json toy_model_to_json(const ToyModel& model,
                                         const std::vector<std::string>& vocab) {
    nlohmann::ordered_json j;
    j["vocab_size"] = model.vocab_size;
    j["vocab"] = vocab;
    j["learning_rate"] = model.learning_rate;
    j["max_grad_norm"] = model.max_grad_norm;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (std::size_t r = 0; r < model.vocab_size; ++r) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (std::size_t c = 0; c < model.vocab_size; ++c)
            row.push_back(model.logits[r * model.vocab_size + c]);
        rows.push_back(std::move(row));
    }
    j["logits"] = std::move(rows);
    return j;
}

nlohmann::ordered_json train_trace_to_json(const TrainTrace& trace) {
    nlohmann::ordered_json j;
    j["initial_loss"] = trace.initial_loss;
    j["epoch_losses"] = trace.epoch_losses;
    j["final_loss"] = trace.final_loss;
    return j;
}

} // namespace distill
