#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "distill/reward.hpp"

using namespace distill;

TEST_CASE("format reward is the four-way conjunction") {
    CHECK(format_reward(parse_structure("<think>x</think><answer>\\boxed{4}</answer>")) == 1);
    CHECK(format_reward(parse_structure("")) == 0);
    CHECK(format_reward(parse_structure("\\boxed{4}")) == 0);
    CHECK(format_reward(parse_structure("<think>x</think> \\boxed{4}")) == 0);
    CHECK(format_reward(parse_structure("<answer>\\boxed{4}</answer><think>x</think>")) == 0);
}

TEST_CASE("cosine reward hits the pinned endpoints exactly") {
    RewardConfig cfg;
    CHECK(std::fabs(cosine_reward(0, true, cfg) - 1.0) <= 1e-12);
    CHECK(std::fabs(cosine_reward(2048, true, cfg) - 0.5) <= 1e-12);
    CHECK(std::fabs(cosine_reward(1024, false, cfg) - (-0.25)) <= 1e-12);
    CHECK(std::fabs(cosine_reward(0, false, cfg) - 0.0) <= 1e-12);
    CHECK(std::fabs(cosine_reward(2048, false, cfg) - (-0.5)) <= 1e-12);
}

TEST_CASE("cosine reward truncates lengths above the cap") {
    RewardConfig cfg;
    for (std::size_t l : {2048ul, 2049ul, 5000ul, 1u << 20}) {
        CHECK(cosine_reward(l, true, cfg) ==
              cosine_reward(std::min<std::size_t>(l, cfg.max_len), true, cfg));
    }
}

TEST_CASE("cosine reward is non-increasing in length") {
    RewardConfig cfg;
    for (bool correct : {true, false}) {
        double prev = cosine_reward(0, correct, cfg);
        for (std::size_t l = 1; l <= cfg.max_len; l += 7) {
            double cur = cosine_reward(l, correct, cfg);
            CHECK(cur <= prev + 1e-15);
            prev = cur;
        }
    }
}

TEST_CASE("correct answers always outscore incorrect ones on the cosine term") {
    RewardConfig cfg;
    std::mt19937_64 rng(5);
    for (int i = 0; i < 2000; ++i) {
        std::size_t l_correct = rng() % (cfg.max_len + 1);
        std::size_t l_wrong = rng() % (cfg.max_len + 1);
        double c = cosine_reward(l_correct, true, cfg);
        double w = cosine_reward(l_wrong, false, cfg);
        CHECK(c >= 0.5);
        CHECK(w <= 0.0);
        CHECK(c > w);
    }
}

TEST_CASE("composite reward and its range") {
    RewardConfig cfg;
    CHECK(composite_reward(1.0, 1, cfg) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(composite_reward(-0.5, 0, cfg) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(composite_reward(0.75, 1, cfg) == doctest::Approx(2.5).epsilon(1e-12));

    std::mt19937_64 rng(6);
    for (int i = 0; i < 2000; ++i) {
        std::size_t l = rng() % (cfg.max_len + 1);
        bool correct = rng() % 2 == 0;
        int format_flag = static_cast<int>(rng() % 2);
        double r = composite_reward(cosine_reward(l, correct, cfg), format_flag, cfg);
        CHECK(r >= cfg.w_cosine * cfg.eta_min_wrong - 1e-12);
        CHECK(r <= cfg.w_cosine * cfg.eta_max_correct + cfg.w_format + 1e-12);
    }
}

TEST_CASE("score_response ties the pieces together") {
    RewardConfig cfg;
    GoldAnswer gold = GoldAnswer::from_raw("4");
    auto s = score_response("<think>a</think><answer>\\boxed{4}</answer>", gold, 9, cfg);
    CHECK(s.correct);
    CHECK(s.format_ok);
    CHECK(s.length == 9);
    CHECK(s.reward == doctest::Approx(cfg.w_cosine * s.cosine + cfg.w_format));

    auto wrong = score_response("\\boxed{5}", gold, 5000, cfg);
    CHECK(!wrong.correct);
    CHECK(!wrong.format_ok);
    CHECK(wrong.length == cfg.max_len);
    CHECK(wrong.cosine == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(wrong.reward == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("reward config loads from JSON with defaults") {
    auto defaults = RewardConfig::from_json(nlohmann::json::object());
    CHECK(defaults.w_cosine == 2.0);
    CHECK(defaults.w_format == 1.0);
    CHECK(defaults.eta_min_correct == 0.5);
    CHECK(defaults.eta_max_correct == 1.0);
    CHECK(defaults.eta_min_wrong == -0.5);
    CHECK(defaults.eta_max_wrong == 0.0);
    CHECK(defaults.max_len == 2048);
    CHECK(defaults.epsilon == 1e-8);
    CHECK(defaults.tau == 0.5);
    CHECK(defaults.k == 8);

    auto partial = RewardConfig::from_json({{"tau", 1.25}, {"k", 4}});
    CHECK(partial.tau == 1.25);
    CHECK(partial.k == 4);
    CHECK(partial.max_len == 2048);
}

TEST_CASE("reward config rejects unknown fields and broken invariants") {
    CHECK_THROWS_AS(RewardConfig::from_json({{"cosine_weight", 2.0}}), std::invalid_argument);
    CHECK_THROWS_AS(RewardConfig::from_json({{"k", 1}}), std::invalid_argument);
    CHECK_THROWS_AS(RewardConfig::from_json({{"tau", 0.0}}), std::invalid_argument);
    CHECK_THROWS_AS(RewardConfig::from_json({{"epsilon", -1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(RewardConfig::from_json({{"max_len", 0}}), std::invalid_argument);
    CHECK_THROWS_AS(
        RewardConfig::from_json({{"eta_min_correct", 2.0}, {"eta_max_correct", 1.0}}),
        std::invalid_argument);
    CHECK_THROWS_AS(RewardConfig::from_json({{"eta_min_wrong", 0.7}, {"eta_max_wrong", 0.8}}),
                    std::invalid_argument);
}
