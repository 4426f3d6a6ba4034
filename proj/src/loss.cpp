#include "distill/loss.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace distill {

namespace {

std::vector<double> log_softmax(const std::vector<double>& logits) {
    double max_logit = *std::max_element(logits.begin(), logits.end());
    double total = 0.0;
    for (double z : logits) total += std::exp(z - max_logit);
    double lse = max_logit + std::log(total);
    std::vector<double> out(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - lse;
    return out;
}

} // namespace

LogProbSequence LogProbSequence::from(std::vector<double> log_probs) {
    if (log_probs.empty())
        throw std::invalid_argument("log-prob sequence: must be non-empty");
    for (double lp : log_probs)
        if (!(lp <= 0.0))
            throw std::invalid_argument("log-prob sequence: entries must be <= 0");
    return LogProbSequence{std::move(log_probs)};
}

double ce_loss(const LogProbSequence& seq) {
    if (seq.log_probs.empty()) throw std::invalid_argument("ce_loss: empty sequence");
    double sum = 0.0;
    for (double lp : seq.log_probs) sum += lp;
    return -sum / static_cast<double>(seq.log_probs.size());
}

double contrastive_penalty(const LogProbSequence& seq, double clamp_delta) {
    if (seq.log_probs.empty())
        throw std::invalid_argument("contrastive_penalty: empty sequence");
    if (clamp_delta <= 0.0 || clamp_delta >= 1.0)
        throw std::invalid_argument("contrastive_penalty: clamp_delta must lie in (0, 1)");
    double avg = 0.0;
    for (double lp : seq.log_probs) avg += std::exp(lp);
    avg /= static_cast<double>(seq.log_probs.size());
    double clamped = std::min(avg, 1.0 - clamp_delta);
    return -std::log1p(-clamped);
}

LossBreakdown advantage_weighted_loss(const GroupLossInput& input) {
    std::size_t k = input.sequences.size();
    if (k == 0) throw std::invalid_argument("advantage_weighted_loss: empty group");
    if (input.weights.size() != k || input.correct.size() != k)
        throw std::invalid_argument(
            "advantage_weighted_loss: sequences, weights and flags must have equal length");
    double weight_sum = 0.0;
    for (double w : input.weights) weight_sum += w;
    if (std::fabs(weight_sum - 1.0) > 1e-12)
        throw std::invalid_argument("advantage_weighted_loss: weights must sum to 1");

    LossBreakdown out;
    std::size_t num_wrong = 0;
    double penalty_sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        out.weighted_sft += input.weights[i] * ce_loss(input.sequences[i]);
        if (!input.correct[i]) {
            ++num_wrong;
            penalty_sum += contrastive_penalty(input.sequences[i], input.clamp_delta);
        }
    }
    if (num_wrong > 0)
        out.contrastive =
            input.lambda_wrong * penalty_sum / static_cast<double>(num_wrong);
    out.total = out.weighted_sft + out.contrastive;
    return out;
}

double kd_baseline_loss(const std::vector<std::vector<double>>& teacher_logits,
                        const std::vector<std::vector<double>>& student_logits,
                        const std::vector<int>& targets, double alpha, double tau) {
    if (teacher_logits.size() != student_logits.size() ||
        teacher_logits.size() != targets.size())
        throw std::invalid_argument("kd_baseline_loss: position counts must agree");
    if (teacher_logits.empty()) throw std::invalid_argument("kd_baseline_loss: no positions");
    if (tau <= 0.0) throw std::invalid_argument("kd_baseline_loss: tau must be > 0");
    if (alpha < 0.0 || alpha > 1.0)
        throw std::invalid_argument("kd_baseline_loss: alpha must lie in [0, 1]");

    double total = 0.0;
    for (std::size_t p = 0; p < targets.size(); ++p) {
        const auto& zt = teacher_logits[p];
        const auto& zs = student_logits[p];
        if (zt.size() != zs.size() || zt.empty())
            throw std::invalid_argument("kd_baseline_loss: vocab sizes must agree");
        int target = targets[p];
        if (target < 0 || static_cast<std::size_t>(target) >= zs.size())
            throw std::invalid_argument("kd_baseline_loss: target out of range");

        auto student_lp = log_softmax(zs);
        double ce = -student_lp[static_cast<std::size_t>(target)];

        std::vector<double> zt_soft(zt.size()), zs_soft(zs.size());
        for (std::size_t v = 0; v < zt.size(); ++v) {
            zt_soft[v] = zt[v] / tau;
            zs_soft[v] = zs[v] / tau;
        }
        auto teacher_lp = log_softmax(zt_soft);
        auto student_lp_soft = log_softmax(zs_soft);
        double kl = 0.0;
        for (std::size_t v = 0; v < zt.size(); ++v)
            kl += std::exp(teacher_lp[v]) * (teacher_lp[v] - student_lp_soft[v]);

        total += (1.0 - alpha) * ce + alpha * kl;
    }
    return total / static_cast<double>(targets.size());
}

} // namespace distill
