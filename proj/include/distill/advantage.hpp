#pragma once

#include <span>
#include <vector>

namespace distill {

// Group-normalized rewards and the softmax weights derived from them.
struct GroupAdvantages {
    std::vector<double> advantages;
    std::vector<double> weights;
    double mu = 0.0;    // group mean reward
    double sigma = 0.0; // population standard deviation (divisor k)
};

// A_j = (r_j - mu) / (sigma + epsilon) with population-form sigma.
// Groups of fewer than two rewards are rejected.
std::vector<double> group_advantages(std::span<const double> rewards, double epsilon);

// w_i = exp(A_i / tau) / sum exp(A_i' / tau), evaluated with
// max-subtraction; strictly positive and summing to one.
std::vector<double> softmax_weights(std::span<const double> advantages, double tau);

GroupAdvantages compute_group_advantages(std::span<const double> rewards, double epsilon,
                                         double tau);

} // namespace distill
