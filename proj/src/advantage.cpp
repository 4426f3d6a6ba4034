#include "distill/advantage.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace distill {

namespace {

struct Moments {
    double mu;
    double sigma;
};

Moments group_moments(std::span<const double> rewards) {
    double sum = 0.0;
    for (double r : rewards) sum += r;
    double mu = sum / static_cast<double>(rewards.size());
    double sq = 0.0;
    for (double r : rewards) sq += (r - mu) * (r - mu);
    return {mu, std::sqrt(sq / static_cast<double>(rewards.size()))};
}

} // namespace

std::vector<double> group_advantages(std::span<const double> rewards, double epsilon) {
    if (rewards.size() < 2)
        throw std::invalid_argument("group_advantages: need at least 2 rewards per group");
    if (epsilon <= 0.0) throw std::invalid_argument("group_advantages: epsilon must be > 0");

    auto [mu, sigma] = group_moments(rewards);
    std::vector<double> advantages(rewards.size());
    for (std::size_t i = 0; i < rewards.size(); ++i)
        advantages[i] = (rewards[i] - mu) / (sigma + epsilon);
    return advantages;
}

std::vector<double> softmax_weights(std::span<const double> advantages, double tau) {
    if (advantages.empty()) throw std::invalid_argument("softmax_weights: empty input");
    if (tau <= 0.0) throw std::invalid_argument("softmax_weights: tau must be > 0");

    double max_scaled = -std::numeric_limits<double>::infinity();
    for (double a : advantages) max_scaled = std::max(max_scaled, a / tau);

    std::vector<double> weights(advantages.size());
    double total = 0.0;
    for (std::size_t i = 0; i < advantages.size(); ++i) {
        weights[i] = std::exp(advantages[i] / tau - max_scaled);
        total += weights[i];
    }
    for (double& w : weights) w /= total;
    return weights;
}

GroupAdvantages compute_group_advantages(std::span<const double> rewards, double epsilon,
                                         double tau) {
    GroupAdvantages g;
    g.advantages = group_advantages(rewards, epsilon);
    g.weights = softmax_weights(g.advantages, tau);
    auto [mu, sigma] = group_moments(rewards);
    g.mu = mu;
    g.sigma = sigma;
    return g;
}

} // namespace distill
