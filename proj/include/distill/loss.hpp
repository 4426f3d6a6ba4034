#pragma once

#include <cstdint>
#include <vector>

namespace distill {

// Per-token log-probabilities of one response under the student model.
// Entries are logs of probabilities, so every entry must be <= 0.
struct LogProbSequence {
    std::vector<double> log_probs;

    static LogProbSequence from(std::vector<double> log_probs);
};

// One response group ready for the training objective: sequences,
// precomputed softmax weights (data, not differentiated through) and
// correctness flags.
struct GroupLossInput {
    std::vector<LogProbSequence> sequences;
    std::vector<double> weights;
    std::vector<std::uint8_t> correct;
    double lambda_wrong = 0.5;
    double clamp_delta = 1e-6;
};

struct LossBreakdown {
    double total = 0.0;
    double weighted_sft = 0.0; // sum_i w_i * CE(y_i)
    double contrastive = 0.0;  // lambda * mean penalty over incorrect responses
};

// Mean negative log-probability of the sequence; rejects empty input.
double ce_loss(const LogProbSequence& seq);

// -log(1 - pi_avg) where pi_avg is the mean token probability, clamped
// to at most 1 - clamp_delta before the logarithm.
double contrastive_penalty(const LogProbSequence& seq, double clamp_delta);

// Weighted-CE term plus the contrastive penalty averaged over the
// incorrect responses of the group (zero when all are correct).
LossBreakdown advantage_weighted_loss(const GroupLossInput& input);

// (1-alpha) * CE(targets, softmax(student)) +
// alpha * KL(softmax(teacher/tau) || softmax(student/tau)),
// averaged over positions. Logits are positions x vocab.
double kd_baseline_loss(const std::vector<std::vector<double>>& teacher_logits,
                        const std::vector<std::vector<double>>& student_logits,
                        const std::vector<int>& targets, double alpha, double tau);

} // namespace distill
