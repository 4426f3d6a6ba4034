#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "distill/loss.hpp"

namespace distill {

// First-order (bigram) categorical language model: a vocab x vocab
// logit table where row = previous token. Small enough to gradient-check
// exhaustively, rich enough to exercise every term of the group loss.
struct ToyModel {
    std::size_t vocab_size = 0;
    std::vector<double> logits; // row-major vocab_size x vocab_size
    double learning_rate = 0.1;
    double max_grad_norm = 1.0;

    static ToyModel zeros(std::size_t vocab_size);

    double logit(int prev, int next) const {
        return logits[static_cast<std::size_t>(prev) * vocab_size +
                      static_cast<std::size_t>(next)];
    }
    double& logit(int prev, int next) {
        return logits[static_cast<std::size_t>(prev) * vocab_size +
                      static_cast<std::size_t>(next)];
    }

    std::vector<double> row_softmax(int prev) const;
    std::vector<double> row_log_softmax(int prev) const;
};

// One group in token form: per-response token ids (first token is
// context), precomputed weights and correctness flags.
struct TokenGroup {
    std::vector<std::vector<int>> sequences;
    std::vector<double> weights;
    std::vector<std::uint8_t> correct;
};

struct LossParams {
    double lambda_wrong = 0.5;
    double clamp_delta = 1e-6;
};

// Per-transition log softmax(theta[prev])[next] for tokens[1..].
// Rejects out-of-vocab tokens and sequences shorter than 2.
LogProbSequence toy_logprobs(const ToyModel& model, std::span<const int> tokens);

// Mean group objective over the batch.
double batch_loss(const ToyModel& model, std::span<const TokenGroup> batch,
                  const LossParams& params);

// Exact gradient of batch_loss with respect to the logit table.
// Weights are treated as constants.
std::vector<double> analytic_gradient(const ToyModel& model, std::span<const TokenGroup> batch,
                                      const LossParams& params);

// Central finite differences of batch_loss over every row touched by
// the batch; the independent route the gradient check compares against.
std::vector<double> finite_difference_gradient(const ToyModel& model,
                                               std::span<const TokenGroup> batch,
                                               const LossParams& params, double step);

// Scales the gradient in place so its global L2 norm is at most
// max_norm; returns the pre-clip norm.
double clip_global_norm(std::span<double> gradient, double max_norm);

// Mean per-token probability of the sequence under the model.
double mean_token_probability(const ToyModel& model, std::span<const int> tokens);

struct TrainOptions {
    int epochs = 0;
    std::uint64_t seed = 0;
    double learning_rate = 0.1;
    double max_grad_norm = 1.0;
    LossParams loss;
};

struct TrainTrace {
    double initial_loss = 0.0;
    std::vector<double> epoch_losses; // full-dataset loss after each epoch
    double final_loss = 0.0;
};

// Per-group gradient descent with global-norm clipping. Group order is
// reshuffled each epoch from the seed; identical seeds give identical
// parameter tables.
TrainTrace train_toy(ToyModel& model, const std::vector<TokenGroup>& dataset,
                     const TrainOptions& options);

struct GradCheckOptions {
    std::uint64_t seed = 1;
    int trials = 100;
    double step = 1e-5;
    double tolerance = 1e-4;
    double inject_error = 0.0; // test hook: offsets one analytic entry
};

struct GradCheckReport {
    double max_rel_err = 0.0;
    int trials = 0;
    bool passed = false;
};

// Random (model, batch) trials covering all-correct, all-wrong and
// mixed groups plus saturated sequences that engage the clamp.
GradCheckReport run_gradcheck(const GradCheckOptions& options);

// Curated-dataset groups tokenized into the toy vocabulary
// (id 0 = <bos>, id 1 = <eos>, then first-appearance order).
struct ToyDataset {
    std::vector<std::string> vocab;
    std::vector<TokenGroup> groups;
};

// Reads a curated JSONL file; weights are recomputed from the stored
// advantages at the given temperature.
ToyDataset load_toy_dataset(std::istream& curated_jsonl, double tau);

nlohmann::ordered_json toy_model_to_json(const ToyModel& model,
                                         const std::vector<std::string>& vocab);
nlohmann::ordered_json train_trace_to_json(const TrainTrace& trace);

} // namespace distill
