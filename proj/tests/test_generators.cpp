#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "wager/generators.hpp"

using namespace wager;

TEST_SUITE_BEGIN("generators");

TEST_CASE("synthetic model with all factors at zero") {
    const GeneratedPredictions out = synthetic_from_factors({0.0, 0.0, 0.0});
    CHECK(out.happening_probs[1] == doctest::Approx(0.5));
    for (const auto& p : out.predictions) CHECK(p.p_one() == doctest::Approx(0.5));
}

TEST_CASE("logit-normal collapses to q as the variance vanishes") {
    RngStream rng(1);
    const auto model = PredictionModel::logit_normal(1.0, 1e-18);
    const GeneratedPredictions out = gen_predictions(model, 5, 2, rng);
    for (const auto& p : out.predictions)
        CHECK(p.p_one() == doctest::Approx(out.happening_probs[1]).epsilon(1e-6));
}

TEST_CASE("logit-normal defaults") {
    const auto model = PredictionModel::parse("logit");
    CHECK(model.alpha == doctest::Approx(2.0));
    CHECK(model.sigma2 == doctest::Approx(1.0));
    CHECK_THROWS_AS(PredictionModel::logit_normal(0.0, 1.0), dimension_error);
}

TEST_CASE("generated instances satisfy the core invariants") {
    RngStream rng(2);
    for (const char* name : {"uniform", "logit", "synthetic"}) {
        const auto model = PredictionModel::parse(name);
        for (int trial = 0; trial < 20; ++trial) {
            const GameInstance g = gen_instance(model, WagerModel::pareto(), 6, 2, rng);
            g.validate();
        }
    }
    // Uniform predictions over more than two outcomes.
    const GameInstance g = gen_instance(PredictionModel::uniform(), WagerModel::uniform(), 4, 5, rng);
    g.validate();
    CHECK(g.num_outcomes() == 5);
    CHECK_THROWS_AS(gen_predictions(PredictionModel::synthetic(), 3, 3, rng), dimension_error);
}

TEST_CASE("uniform wagers are all one") {
    RngStream rng(3);
    const auto wagers = gen_wagers(WagerModel::uniform(), 3, rng);
    CHECK(wagers == std::vector<double>{1.0, 1.0, 1.0});
}

TEST_CASE("pareto wagers: support and median") {
    RngStream rng(4);
    const int draws = 1000000;
    std::vector<double> sample(static_cast<size_t>(draws));
    const WagerModel model = WagerModel::pareto();
    for (auto& w : sample) w = gen_wagers(model, 1, rng)[0];
    double lo = sample[0];
    for (double w : sample) lo = std::min(lo, w);
    CHECK(lo >= 1.0);
    std::nth_element(sample.begin(), sample.begin() + draws / 2, sample.end());
    const double median = sample[static_cast<size_t>(draws / 2)];
    CHECK(median == doctest::Approx(std::pow(2.0, 1.0 / 1.16)).epsilon(0.01 / 1.8));
}

TEST_CASE("identical seeds give identical instances") {
    for (const char* name : {"uniform", "logit", "synthetic"}) {
        const auto model = PredictionModel::parse(name);
        RngStream a(77), b(77);
        const GameInstance ga = gen_instance(model, WagerModel::pareto(), 8, 2, a);
        const GameInstance gb = gen_instance(model, WagerModel::pareto(), 8, 2, b);
        CHECK(ga.wagers == gb.wagers);
        for (size_t i = 0; i < ga.predictions.size(); ++i)
            CHECK(ga.predictions[i] == gb.predictions[i]);
        CHECK(ga.happening_probs == gb.happening_probs);
    }
}

TEST_CASE("normal cdf reference points") {
    CHECK(normal_cdf(0.0) == doctest::Approx(0.5));
    CHECK(normal_cdf(1.959963985) == doctest::Approx(0.975).epsilon(1e-6));
    CHECK(normal_cdf(-1.959963985) == doctest::Approx(0.025).epsilon(1e-6));
}

TEST_SUITE_END();
