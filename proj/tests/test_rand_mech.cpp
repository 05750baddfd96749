#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "wager/generators.hpp"
#include "wager/rand_mech.hpp"

using namespace wager;

namespace {

GameInstance binary_instance(std::vector<double> p_ones, std::vector<double> wagers) {
    GameInstance g;
    for (double p : p_ones) g.predictions.push_back(Prediction::binary(p));
    g.wagers = std::move(wagers);
    return g;
}

const ScoringRule kBrier = ScoringRule::brier();

std::vector<double> enumerated_min(const PayoffDistribution& d) {
    std::vector<double> lo(static_cast<size_t>(d.num_agents()), 0.0);
    for (const auto& point : d.support())
        for (size_t i = 0; i < lo.size(); ++i) lo[i] = std::min(lo[i], point.payoffs[i]);
    return lo;
}

} // namespace

TEST_SUITE_BEGIN("rand_mech");

TEST_CASE("lottery wrapper hand examples") {
    SUBCASE("identical reports give wager-proportional odds") {
        const auto g = binary_instance({0.4, 0.4, 0.4}, {1.0, 2.0, 1.0});
        const PayoffDistribution d = lws(g, 1, kBrier);
        REQUIRE(d.support().size() == 3);
        CHECK(d.support()[0].prob == doctest::Approx(0.25));
        CHECK(d.support()[1].prob == doctest::Approx(0.5));
        CHECK(d.support()[2].prob == doctest::Approx(0.25));
    }

    SUBCASE("two-agent example: odds 0.75/0.25 and the WSWM expectation") {
        const auto g = binary_instance({1.0, 0.0}, {1.0, 1.0});
        const PayoffDistribution d = lws(g, 1, kBrier);
        REQUIRE(d.support().size() == 2);
        CHECK(d.support()[0].prob == doctest::Approx(0.75));
        CHECK(d.support()[0].payoffs[0] == doctest::Approx(1.0));
        CHECK(d.support()[0].payoffs[1] == doctest::Approx(-1.0));
        CHECK(d.support()[1].prob == doctest::Approx(0.25));
        const auto expected = d.expected_payoffs();
        CHECK(expected[0] == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(expected[1] == doctest::Approx(-0.5).epsilon(1e-12));
    }

    SUBCASE("a base mechanism breaking the wager constraint is rejected") {
        CHECK_THROWS_AS(lottery_wrap({-1.5, 1.5}, {1.0, 1.0}), invalid_base_mechanism_error);
    }

    SUBCASE("all-zero wagers collapse to the zero point") {
        const PayoffDistribution d = lottery_wrap({0.0, 0.0}, {0.0, 0.0});
        REQUIRE(d.support().size() == 1);
        CHECK(d.support().front().payoffs[0] == 0.0);
    }
}

TEST_CASE("every lottery support point has a single winner") {
    RngStream rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2 + static_cast<int>(rng.below(5));
        const GameInstance g = gen_instance(PredictionModel::uniform(),
                                            trial % 2 ? WagerModel::pareto() : WagerModel::uniform(),
                                            n, 2, rng);
        const double total = g.total_wager();
        for (int x = 0; x < 2; ++x) {
            const PayoffDistribution d = lws(g, x, kBrier);
            for (const auto& point : d.support()) {
                int winners = 0;
                for (size_t i = 0; i < point.payoffs.size(); ++i) {
                    if (point.payoffs[i] >= 0.0 && point.payoffs[i] > -g.wagers[i] + 1e-12) {
                        ++winners;
                        CHECK(point.payoffs[i] == doctest::Approx(total - g.wagers[i]));
                    } else {
                        CHECK(point.payoffs[i] == doctest::Approx(-g.wagers[i]));
                    }
                }
                CHECK(winners == 1);
            }
        }
    }
}

TEST_CASE("mixing the lottery with its deterministic base") {
    const auto g = binary_instance({0.8, 0.3}, {1.0, 2.0});
    const PayoffDistribution mixed = lws_mixed(g, 1, kBrier, 0.3);
    const auto expected = mixed.expected_payoffs();
    const PayoffVector det = wswm(g, 1, kBrier);
    for (size_t i = 0; i < det.size(); ++i)
        CHECK(expected[i] == doctest::Approx(det[i]).epsilon(1e-12));
}

TEST_CASE("surrogate wagering distribution") {
    SUBCASE("no noise reduces to the deterministic mechanism") {
        const auto g = binary_instance({0.8, 0.3, 0.5}, {1.0, 1.0, 2.0});
        const std::vector<ErrorRates> rates(3, ErrorRates(0, 0));
        const PayoffDistribution d = swm_distribution(g, 1, kBrier, rates);
        REQUIRE(d.support().size() == 1);
        const PayoffVector det = wswm(g, 1, kBrier);
        for (size_t i = 0; i < det.size(); ++i)
            CHECK(d.support().front().payoffs[i] == doctest::Approx(det[i]));
    }

    SUBCASE("hand-enumerated two-agent game at e=0.25") {
        const auto g = binary_instance({1.0, 0.0}, {1.0, 1.0});
        const std::vector<ErrorRates> rates(2, ErrorRates(0.25, 0.25));
        const PayoffDistribution d = swm_distribution(g, 1, kBrier, rates);
        REQUIRE(d.support().size() == 4);
        double worst = 0.0;
        for (const auto& point : d.support()) worst = std::min(worst, point.payoffs[0]);
        CHECK(worst == doctest::Approx(-1.0));
        const auto expected = d.expected_payoffs();
        CHECK(expected[0] == doctest::Approx(0.5).epsilon(1e-10));
        CHECK(expected[1] == doctest::Approx(-0.5).epsilon(1e-10));
    }

    SUBCASE("generic rates may violate the wager constraint and report it") {
        const auto g = binary_instance({1.0, 0.0}, {1.0, 1.0});
        const std::vector<ErrorRates> rates(2, ErrorRates(0.4, 0.4));
        const PayoffDistribution d = swm_distribution(g, 1, kBrier, rates);
        // Worst surrogate pair pays -2.5, well below the wager of 1.
        CHECK(enumerated_min(d)[0] == doctest::Approx(-2.5));
        CHECK(d.max_wager_shortfall() == doctest::Approx(1.5));
    }

    SUBCASE("enumeration caps are enforced") {
        GameInstance big;
        for (int i = 0; i < 20; ++i) {
            big.predictions.push_back(Prediction::binary(0.5));
            big.wagers.push_back(1.0);
        }
        const std::vector<ErrorRates> rates(20, ErrorRates(0.2, 0.2));
        CHECK_THROWS_AS(swm_distribution(big, 1, kBrier, rates), cap_exceeded_error);
    }
}

TEST_CASE("error rate selection") {
    SUBCASE("uninformative reports select zero noise") {
        const auto g = binary_instance({0.5, 0.5, 0.5}, {1.0, 2.0, 1.0});
        CHECK(select_error_rates(g, kBrier) == 0.0);
    }

    SUBCASE("hand-derived two-agent value 0.25") {
        const auto g = binary_instance({1.0, 0.0}, {1.0, 1.0});
        const auto r = error_rate_scores(g, kBrier);
        CHECK(r[0] == doctest::Approx(0.25));
        CHECK(r[1] == doctest::Approx(0.25));
        CHECK(select_error_rates(g, kBrier) == doctest::Approx(0.25));
    }

    SUBCASE("the selection-minimizing agent loses everything in the worst case") {
        RngStream rng(17);
        for (int trial = 0; trial < 60; ++trial) {
            const int n = 2 + static_cast<int>(rng.below(4));
            const GameInstance g =
                gen_instance(PredictionModel::uniform(),
                             trial % 2 ? WagerModel::pareto() : WagerModel::uniform(), n, 2, rng);
            if (select_error_rates(g, kBrier) == 0.0) continue;
            const auto scores = error_rate_scores(g, kBrier);
            const size_t argmin = static_cast<size_t>(
                std::min_element(scores.begin(), scores.end()) - scores.begin());
            const auto worst = swme_worst_payoffs(g, kBrier);
            CHECK(worst[argmin] == doctest::Approx(-g.wagers[argmin]).epsilon(1e-9));
        }
    }
}

TEST_CASE("error-selected surrogate wagering never violates wagers") {
    RngStream rng(23);
    for (int trial = 0; trial < 80; ++trial) {
        const int n = 2 + static_cast<int>(rng.below(4));
        const GameInstance g =
            gen_instance(PredictionModel::uniform(),
                         trial % 2 ? WagerModel::pareto() : WagerModel::uniform(), n, 2, rng);
        for (int x = 0; x < 2; ++x) {
            const PayoffDistribution d = swme_distribution(g, x, kBrier);
            CHECK(d.max_wager_shortfall() <= 1e-9);
            CHECK(d.max_abs_balance_error() <= 1e-9);
            const auto expected = d.expected_payoffs();
            const PayoffVector det = wswm(g, x, kBrier);
            for (size_t i = 0; i < det.size(); ++i)
                CHECK(expected[i] == doctest::Approx(det[i]).epsilon(1e-9));
            // The closed-form worst case matches the enumerated support.
            const auto sep = swme_worst_payoffs(g, kBrier);
            const auto lo = enumerated_min(d);
            for (size_t i = 0; i < lo.size(); ++i)
                CHECK(sep[i] <= lo[i] + 1e-9);
        }
    }
}

TEST_CASE("partition counting and enumeration") {
    CHECK(count_partitions(2) == 1);
    CHECK(count_partitions(3) == 1);
    CHECK(count_partitions(4) == 3);
    CHECK(count_partitions(6) == 15);
    CHECK(count_partitions(7) == 105);

    SUBCASE("enumerated lists match the counts and are valid partitions") {
        for (int n : {2, 3, 4, 5, 6, 7}) {
            const auto all = enumerate_partitions(n);
            CHECK(all.size() == count_partitions(n));
            std::set<Partition> distinct(all.begin(), all.end());
            CHECK(distinct.size() == all.size());
            for (const auto& p : all) {
                std::set<int> seen;
                int triples = 0;
                for (const auto& group : p) {
                    CHECK((group.size() == 2 || group.size() == 3));
                    if (group.size() == 3) ++triples;
                    for (int v : group) CHECK(seen.insert(v).second);
                }
                CHECK(static_cast<int>(seen.size()) == n);
                CHECK(triples == (n % 2));
            }
        }
    }

    SUBCASE("independent brute force for five agents") {
        // Every way to pick the triple fixes the remaining pair.
        std::set<std::set<std::set<int>>> brute;
        for (int a = 0; a < 5; ++a)
            for (int b = a + 1; b < 5; ++b)
                for (int c = b + 1; c < 5; ++c) {
                    std::set<int> triple{a, b, c};
                    std::set<int> pair;
                    for (int v = 0; v < 5; ++v)
                        if (!triple.count(v)) pair.insert(v);
                    brute.insert({triple, pair});
                }
        CHECK(brute.size() == 10);
        CHECK(enumerate_partitions(5).size() == brute.size());
    }

    SUBCASE("caps route callers to sampling") {
        CHECK_THROWS_AS(enumerate_partitions(12), cap_exceeded_error);
        RngStream rng(5);
        const Partition p = sample_partition(12, rng);
        std::set<int> seen;
        for (const auto& group : p)
            for (int v : group) seen.insert(v);
        CHECK(seen.size() == 12);
    }

    SUBCASE("sampling is close to uniform for four agents") {
        RngStream rng(9);
        std::map<Partition, int> counts;
        for (int s = 0; s < 3000; ++s) counts[sample_partition(4, rng)] += 1;
        REQUIRE(counts.size() == 3);
        for (const auto& [partition, count] : counts) CHECK(std::abs(count - 1000) < 150);
    }
}

TEST_CASE("random partition surrogate wagering") {
    SUBCASE("two agents reduce to plain error-selected wagering") {
        const auto g = binary_instance({1.0, 0.0}, {1.0, 1.0});
        const PayoffDistribution rp = rp_swme_distribution(g, 1, kBrier);
        const PayoffDistribution swme = swme_distribution(g, 1, kBrier);
        REQUIRE(rp.support().size() == swme.support().size());
        for (size_t k = 0; k < rp.support().size(); ++k) {
            CHECK(rp.support()[k].prob == doctest::Approx(swme.support()[k].prob));
            for (size_t i = 0; i < 2; ++i)
                CHECK(rp.support()[k].payoffs[i] ==
                      doctest::Approx(swme.support()[k].payoffs[i]));
        }
        CHECK(enumerated_min(rp)[0] == doctest::Approx(-1.0));
    }

    SUBCASE("uninformative reports pay nothing anywhere") {
        const auto g = binary_instance({0.5, 0.5, 0.5, 0.5}, {1.0, 1.0, 1.0, 1.0});
        const PayoffDistribution d = rp_swme_distribution(g, 1, kBrier);
        for (const auto& point : d.support())
            for (double pay : point.payoffs) CHECK(pay == doctest::Approx(0.0).epsilon(1e-12));
    }

    SUBCASE("identical informative reports still flip, with zero expectation") {
        // The selection algorithm picks a positive rate for any report away
        // from 1/2, so the support spans +-w even though nobody can expect
        // to win anything.
        const auto g = binary_instance({0.3, 0.3}, {1.0, 1.0});
        const PayoffDistribution d = rp_swme_distribution(g, 1, kBrier);
        CHECK(d.support().size() == 4);
        const auto expected = d.expected_payoffs();
        CHECK(expected[0] == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(expected[1] == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(enumerated_min(d)[0] == doctest::Approx(-1.0));
        CHECK(d.max_wager_shortfall() <= 1e-9);
    }

    SUBCASE("unbiasedness, budget balance and the wager constraint") {
        RngStream rng(31);
        for (int trial = 0; trial < 25; ++trial) {
            const int n = 2 + static_cast<int>(rng.below(4)); // up to 5 agents, incl. a triple
            const GameInstance g =
                gen_instance(PredictionModel::uniform(),
                             trial % 2 ? WagerModel::pareto() : WagerModel::uniform(), n, 2, rng);
            for (int x = 0; x < 2; ++x) {
                const PayoffDistribution d = rp_swme_distribution(g, x, kBrier);
                CHECK(d.max_abs_balance_error() <= 1e-9);
                CHECK(d.max_wager_shortfall() <= 1e-9);
                // The surrogate noise is removed in expectation, leaving the
                // partition average of the per-group deterministic payoffs.
                const auto expected = d.expected_payoffs();
                const auto partitions = enumerate_partitions(n);
                std::vector<double> det(static_cast<size_t>(n), 0.0);
                for (const auto& partition : partitions)
                    for (const auto& group : partition) {
                        GameInstance sub;
                        for (int idx : group) {
                            sub.predictions.push_back(g.predictions[static_cast<size_t>(idx)]);
                            sub.wagers.push_back(g.wagers[static_cast<size_t>(idx)]);
                        }
                        const PayoffVector group_pay = wswm(sub, x, kBrier);
                        for (size_t k = 0; k < group.size(); ++k)
                            det[static_cast<size_t>(group[k])] +=
                                group_pay[k] / static_cast<double>(partitions.size());
                    }
                for (size_t i = 0; i < det.size(); ++i)
                    CHECK(std::fabs(expected[i] - det[i]) <= 1e-9);
            }
        }
    }

    SUBCASE("closed-form worst case agrees with enumeration") {
        RngStream rng(37);
        for (int trial = 0; trial < 10; ++trial) {
            const int n = 4 + static_cast<int>(rng.below(2)); // 4 or 5
            const GameInstance g =
                gen_instance(PredictionModel::uniform(), WagerModel::uniform(), n, 2, rng);
            const auto closed = rp_swme_worst_payoffs(g, kBrier);
            std::vector<double> lo(static_cast<size_t>(n), 0.0);
            for (int x = 0; x < 2; ++x) {
                const auto m = enumerated_min(rp_swme_distribution(g, x, kBrier));
                for (size_t i = 0; i < lo.size(); ++i) lo[i] = std::min(lo[i], m[i]);
            }
            for (size_t i = 0; i < lo.size(); ++i)
                CHECK(closed[i] == doctest::Approx(lo[i]).epsilon(1e-9));
        }
    }

    SUBCASE("expected exchanged fraction matches the joint enumeration") {
        RngStream rng(41);
        const GameInstance g =
            gen_instance(PredictionModel::uniform(), WagerModel::uniform(), 4, 2, rng);
        for (int x = 0; x < 2; ++x) {
            double joint = 0.0;
            const PayoffDistribution d = rp_swme_distribution(g, x, kBrier);
            for (const auto& point : d.support()) {
                double gains = 0.0;
                for (double p : point.payoffs)
                    if (p > 0.0) gains += p;
                joint += point.prob * gains;
            }
            joint /= g.total_wager();
            CHECK(rp_swme_expected_exchanged(g, x, kBrier) ==
                  doctest::Approx(joint).epsilon(1e-9));
        }
    }
}

TEST_CASE("surrogate no-arbitrage wagering") {
    const auto g = binary_instance({0.9, 0.2, 0.6}, {1.0, 2.0, 1.0});

    SUBCASE("no noise reduces to the deterministic mechanism") {
        const std::vector<ErrorRates> rates(3, ErrorRates(0, 0));
        const PayoffDistribution d = surrogate_nawm_distribution(g, 1, kBrier, rates);
        REQUIRE(d.support().size() == 1);
        const PayoffVector det = nawm(g, 1, kBrier);
        for (size_t i = 0; i < det.size(); ++i)
            CHECK(d.support().front().payoffs[i] == doctest::Approx(det[i]).epsilon(1e-12));
    }

    SUBCASE("expectation equals the deterministic payoffs under noise") {
        const std::vector<ErrorRates> rates(3, ErrorRates(0.25, 0.25));
        for (int x = 0; x < 2; ++x) {
            const auto expected = surrogate_nawm_distribution(g, x, kBrier, rates).expected_payoffs();
            const PayoffVector det = nawm(g, x, kBrier);
            for (size_t i = 0; i < det.size(); ++i)
                CHECK(expected[i] == doctest::Approx(det[i]).epsilon(1e-9));
        }
    }

    SUBCASE("reporting the peer average earns zero in expectation") {
        auto anchored = g;
        anchored.predictions[0] = peer_average(anchored, 0);
        const std::vector<ErrorRates> rates(3, ErrorRates(0.2, 0.3));
        for (int x = 0; x < 2; ++x)
            CHECK(surrogate_nawm_distribution(anchored, x, kBrier, rates).expected_payoffs()[0] ==
                  doctest::Approx(0.0).epsilon(1e-9));
    }

    SUBCASE("weak budget balance at every support point") {
        const std::vector<ErrorRates> rates(3, ErrorRates(0.25, 0.25));
        for (int x = 0; x < 2; ++x)
            CHECK(surrogate_nawm_distribution(g, x, kBrier, rates).max_balance_surplus() <= 1e-9);
    }

    SUBCASE("closed-form worst case agrees with enumeration") {
        const std::vector<ErrorRates> rates(3, ErrorRates(0.25, 0.25));
        const auto closed = surrogate_nawm_worst_payoffs(g, kBrier, rates);
        std::vector<double> lo(3, 0.0);
        for (int x = 0; x < 2; ++x) {
            const auto m = enumerated_min(surrogate_nawm_distribution(g, x, kBrier, rates));
            for (size_t i = 0; i < lo.size(); ++i) lo[i] = std::min(lo[i], m[i]);
        }
        for (size_t i = 0; i < lo.size(); ++i)
            CHECK(closed[i] == doctest::Approx(lo[i]).epsilon(1e-9));
    }
}

TEST_CASE("noise composition and its inverse") {
    SUBCASE("identities") {
        const ErrorRates flip(0.2, 0.3);
        const ErrorRates none(0.0, 0.0);
        CHECK(compose_noise(flip, none).e0 == doctest::Approx(0.2));
        CHECK(compose_noise(flip, none).e1 == doctest::Approx(0.3));
        CHECK(compose_noise(none, flip).e0 == doctest::Approx(0.2));
        CHECK(compose_noise(none, flip).e1 == doctest::Approx(0.3));
    }

    SUBCASE("hand-derived composition 0.2 over 0.1 gives 0.26") {
        const ErrorRates composed = compose_noise(ErrorRates(0.2, 0.2), ErrorRates(0.1, 0.1));
        CHECK(composed.e0 == doctest::Approx(0.26));
        CHECK(composed.e1 == doctest::Approx(0.26));
    }

    SUBCASE("solving recovers the flip") {
        const auto flips = solve_agent_flip(ErrorRates(0.26, 0.26), ErrorRates(0.1, 0.1));
        REQUIRE(flips.has_value());
        CHECK(flips->e0 == doctest::Approx(0.2));
        CHECK(flips->e1 == doctest::Approx(0.2));
        const auto identity = solve_agent_flip(ErrorRates(0.1, 0.1), ErrorRates(0.1, 0.1));
        REQUIRE(identity.has_value());
        CHECK(identity->e0 == doctest::Approx(0.0));
        CHECK(identity->e1 == doctest::Approx(0.0));
    }

    SUBCASE("a noiseless target under real noise is infeasible") {
        CHECK_FALSE(solve_agent_flip(ErrorRates(0, 0), ErrorRates(0.1, 0.1)).has_value());
    }

    SUBCASE("information factors multiply") {
        RngStream rng(13);
        for (int trial = 0; trial < 50; ++trial) {
            const double a0 = rng.uniform01() * 0.45, a1 = rng.uniform01() * 0.45;
            const double b0 = rng.uniform01() * 0.45, b1 = rng.uniform01() * 0.45;
            const ErrorRates composed = compose_noise(ErrorRates(a0, a1), ErrorRates(b0, b1));
            CHECK(1.0 - composed.e0 - composed.e1 ==
                  doctest::Approx((1.0 - a0 - a1) * (1.0 - b0 - b1)).epsilon(1e-12));
        }
    }
}

TEST_CASE("payoff rescaling") {
    SUBCASE("distributions inside the constraint are untouched") {
        const auto d = PayoffDistribution::point({0.5, -0.5}, {1.0, 1.0});
        const auto scaled = scale_payoffs(d);
        CHECK(scaled.support().front().payoffs[0] == doctest::Approx(0.5));
    }

    SUBCASE("a violating point is pulled to the boundary") {
        const auto d = PayoffDistribution::point({-2.0, 2.0}, {1.0, 1.0});
        const auto scaled = scale_payoffs(d);
        CHECK(scaled.support().front().payoffs[0] == doctest::Approx(-1.0));
        CHECK(scaled.support().front().payoffs[1] == doctest::Approx(1.0));
    }

    SUBCASE("zero wager with nonzero payoff is an upstream bug") {
        const auto d = PayoffDistribution::point({-2.0, 2.0}, {0.0, 1.0});
        CHECK_THROWS_AS(scale_payoffs(d), invalid_base_mechanism_error);
    }

    SUBCASE("a common scale preserves the best report") {
        // Direct debiasing of a noisy copy, agent 0's report swept over a
        // grid; dividing every alternative by one common factor must not
        // move the argmax.
        const ErrorRates noise(0.4, 0.4);
        const Prediction belief = Prediction::binary(0.7);
        const auto value_for = [&](double report, double scale) {
            const auto g = binary_instance({report, 0.2}, {1.0, 1.0});
            double total = 0.0;
            for (int x = 0; x < 2; ++x)
                for (int copy = 0; copy < 2; ++copy) {
                    std::vector<double> scores = {
                        surrogate_score_binary(kBrier, g.predictions[0], copy, noise),
                        surrogate_score_binary(kBrier, g.predictions[1], copy, noise)};
                    total += belief[x] * noise.flip_prob(x, copy) *
                             wswm_from_scores(scores, g.wagers)[0] / scale;
                }
            return total;
        };
        int best_raw = 0, best_scaled = 0;
        for (int k = 1; k <= 100; ++k) {
            if (value_for(0.01 * k, 1.0) > value_for(0.01 * best_raw, 1.0)) best_raw = k;
            if (value_for(0.01 * k, 2.5) > value_for(0.01 * best_scaled, 2.5)) best_scaled = k;
        }
        CHECK(best_raw == best_scaled);
        CHECK(best_raw == 70);
    }
}

TEST_CASE("wagering against a noisy outcome copy") {
    SUBCASE("noiseless copies reduce to the random-partition mechanism") {
        const auto g = binary_instance({0.8, 0.3}, {1.0, 1.0});
        const ErrorRates none(0.0, 0.0);
        for (int x = 0; x < 2; ++x) {
            const PayoffDistribution noisy =
                noisy_swme_true_outcome_distribution(g, x, none, kBrier);
            const PayoffDistribution rp = rp_swme_distribution(g, x, kBrier);
            REQUIRE(noisy.support().size() == rp.support().size());
            const auto en = noisy.expected_payoffs();
            const auto er = rp.expected_payoffs();
            for (size_t i = 0; i < en.size(); ++i)
                CHECK(en[i] == doctest::Approx(er[i]).epsilon(1e-12));
        }
    }

    SUBCASE("derived flip rates 0.1875 and exact end-to-end unbiasedness") {
        const auto g = binary_instance({1.0, 0.0}, {1.0, 1.0});
        // Selection targets 0.25; under 0.1 outcome noise the tuned flip is
        // (0.25 - 0.1) / 0.8.
        const auto flips = solve_agent_flip(ErrorRates(0.25, 0.25), ErrorRates(0.1, 0.1));
        REQUIRE(flips.has_value());
        CHECK(flips->e0 == doctest::Approx(0.1875));
        CHECK(flips->e1 == doctest::Approx(0.1875));

        const ErrorRates noise(0.1, 0.1);
        for (int x = 0; x < 2; ++x) {
            const PayoffDistribution d = noisy_swme_true_outcome_distribution(g, x, noise, kBrier);
            const auto expected = d.expected_payoffs();
            const PayoffVector det = wswm(g, x, kBrier);
            for (size_t i = 0; i < det.size(); ++i)
                CHECK(expected[i] == doctest::Approx(det[i]).epsilon(1e-9));
            CHECK(d.max_abs_balance_error() <= 1e-9);
            CHECK(d.max_wager_shortfall() <= 1e-9);
        }
    }

    SUBCASE("infeasible tuning falls back to direct debiasing with scaling") {
        // Selection still targets 0.25 but the copy noise of 0.4 cannot be
        // composed down to it; the direct path divides by the worst case.
        const auto g = binary_instance({1.0, 0.0}, {1.0, 1.0});
        const ErrorRates noise(0.4, 0.4);
        CHECK_FALSE(solve_agent_flip(ErrorRates(0.25, 0.25), noise).has_value());
        for (int x = 0; x < 2; ++x) {
            const PayoffDistribution d = noisy_swme_true_outcome_distribution(g, x, noise, kBrier);
            CHECK(d.max_wager_shortfall() <= 1e-9);
            CHECK(d.max_abs_balance_error() <= 1e-9);
            // Direct debias spans +-2.5 before scaling, so the factor is 2.5.
            const auto expected = d.expected_payoffs();
            const PayoffVector det = wswm(g, x, kBrier);
            for (size_t i = 0; i < det.size(); ++i)
                CHECK(expected[i] == doctest::Approx(det[i] / 2.5).epsilon(1e-9));
            CHECK(enumerated_min(d)[0] == doctest::Approx(-1.0).epsilon(1e-9));
        }
    }

    SUBCASE("closed-form worst case agrees with enumeration") {
        RngStream rng(43);
        for (int trial = 0; trial < 10; ++trial) {
            const int n = 2 + static_cast<int>(rng.below(3));
            const GameInstance g =
                gen_instance(PredictionModel::uniform(), WagerModel::uniform(), n, 2, rng);
            const ErrorRates noise(0.1, 0.1);
            const auto closed = noisy_swme_worst_payoffs(g, noise, kBrier);
            std::vector<double> lo(static_cast<size_t>(n), 0.0);
            for (int x = 0; x < 2; ++x) {
                const auto m =
                    enumerated_min(noisy_swme_true_outcome_distribution(g, x, noise, kBrier));
                for (size_t i = 0; i < lo.size(); ++i) lo[i] = std::min(lo[i], m[i]);
            }
            for (size_t i = 0; i < lo.size(); ++i)
                CHECK(closed[i] == doctest::Approx(lo[i]).epsilon(1e-9));
        }
    }
}

TEST_CASE("multi-outcome error-selected wagering") {
    RngStream rng(47);
    for (int trial = 0; trial < 8; ++trial) {
        const GameInstance g =
            gen_instance(PredictionModel::uniform(), WagerModel::uniform(), 3, 3, rng);
        const double eps = select_confusion_mass(g, kBrier);
        CHECK(eps >= 0.0);
        CHECK(eps < 1.0 / 3.0);
        for (int x = 0; x < 3; ++x) {
            const PayoffDistribution d = swme_distribution(g, x, kBrier);
            CHECK(d.max_wager_shortfall() <= 1e-9);
            CHECK(d.max_abs_balance_error() <= 1e-9);
            const auto expected = d.expected_payoffs();
            const PayoffVector det = wswm(g, x, kBrier);
            for (size_t i = 0; i < det.size(); ++i)
                CHECK(expected[i] == doctest::Approx(det[i]).epsilon(1e-8));
        }
    }
}

TEST_CASE("sampled realizations agree with enumerated expectations") {
    RngStream gen(53);
    const GameInstance pair =
        gen_instance(PredictionModel::uniform(), WagerModel::uniform(), 2, 2, gen);
    const GameInstance trio =
        gen_instance(PredictionModel::uniform(), WagerModel::uniform(), 3, 2, gen);

    struct Case {
        const char* label;
        const GameInstance* g;
        std::function<PayoffDistribution(const GameInstance&, int)> enumerate;
        std::function<PayoffVector(const GameInstance&, int, RngStream&)> sample;
    };
    const std::vector<ErrorRates> trio_rates(3, ErrorRates(0.2, 0.2));
    const ErrorRates noise(0.1, 0.1);
    const std::vector<Case> cases = {
        {"lws", &pair, [](const GameInstance& g, int x) { return lws(g, x, kBrier); },
         [](const GameInstance& g, int x, RngStream& r) { return sample_lws(g, x, kBrier, r); }},
        {"swme", &trio,
         [](const GameInstance& g, int x) { return swme_distribution(g, x, kBrier); },
         [](const GameInstance& g, int x, RngStream& r) { return sample_swme(g, x, kBrier, r); }},
        {"rp-swme", &trio,
         [](const GameInstance& g, int x) { return rp_swme_distribution(g, x, kBrier); },
         [](const GameInstance& g, int x, RngStream& r) { return sample_rp_swme(g, x, kBrier, r); }},
        {"s-nawm", &trio,
         [&](const GameInstance& g, int x) {
             return surrogate_nawm_distribution(g, x, kBrier, trio_rates);
         },
         [&](const GameInstance& g, int x, RngStream& r) {
             return sample_surrogate_nawm(g, x, kBrier, trio_rates, r);
         }},
        {"noisy-swme", &pair,
         [&](const GameInstance& g, int x) {
             return noisy_swme_true_outcome_distribution(g, x, noise, kBrier);
         },
         [&](const GameInstance& g, int x, RngStream& r) {
             return sample_noisy_swme(g, x, noise, kBrier, r);
         }},
    };

    const int samples = 100000;
    uint64_t case_seed = 99;
    for (const auto& test_case : cases) {
        CAPTURE(test_case.label);
        const GameInstance& g = *test_case.g;
        const int x = 1;
        const PayoffDistribution d = test_case.enumerate(g, x);
        const auto expected = d.expected_payoffs();
        const size_t n = expected.size();

        RngStream rng(case_seed++);
        std::vector<double> sum(n, 0.0), sum_sq(n, 0.0);
        for (int s = 0; s < samples; ++s) {
            const PayoffVector pay = test_case.sample(g, x, rng);
            for (size_t i = 0; i < n; ++i) {
                sum[i] += pay[i];
                sum_sq[i] += pay[i] * pay[i];
            }
        }
        for (size_t i = 0; i < n; ++i) {
            const double mean = sum[i] / samples;
            const double var = std::max(0.0, sum_sq[i] / samples - mean * mean);
            const double band = 3.0 * std::sqrt(var / samples) + 1e-9;
            CHECK(std::fabs(mean - expected[i]) <= band);
        }
    }
}

TEST_SUITE_END();
