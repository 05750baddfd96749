#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wager/experiment.hpp"
#include "wager/generators.hpp"

using namespace wager;

namespace {

ExperimentConfig small_config() {
    ExperimentConfig cfg;
    cfg.mechanisms = {"wswm", "lws", "rp-swme"};
    cfg.n_min = 2;
    cfg.n_max = 6;
    cfg.n_step = 2;
    cfg.instances = 25;
    cfg.seed = 31337;
    return cfg;
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

} // namespace

TEST_SUITE_BEGIN("experiment");

TEST_CASE("number formatting uses 12 significant digits") {
    CHECK(format_number(0.5) == "0.5");
    CHECK(format_number(1.0 / 3.0) == "0.333333333333");
    CHECK(format_number(123456789012345.0) == "1.23456789012e+14");
}

TEST_CASE("config validation rejects degenerate setups") {
    ExperimentConfig cfg = small_config();
    cfg.n_min = 1;
    CHECK_THROWS_AS(cfg.validate(), dimension_error);
    cfg = small_config();
    cfg.mechanisms = {"no-such-mechanism"};
    CHECK_THROWS_AS(cfg.validate(), dimension_error);
    cfg = small_config();
    cfg.n_max = 0;
    CHECK_THROWS_AS(cfg.validate(), dimension_error);
    cfg = small_config();
    cfg.instances = 0;
    CHECK_THROWS_AS(cfg.validate(), dimension_error);
}

TEST_CASE("efficiency sweep is byte-identical across thread counts") {
    ExperimentConfig cfg = small_config();
    cfg.threads = 1;
    const std::string one = run_efficiency_sweep(cfg);
    cfg.threads = 4;
    const std::string four = run_efficiency_sweep(cfg);
    CHECK(one == four);
    CHECK_FALSE(one.empty());

    const auto lines = split_lines(one);
    REQUIRE(lines.size() == 2 + 3 * 3); // comment, header, 3 mechanisms x 3 sizes
    CHECK(lines[1] == "mechanism,N,pred_model,wager_model,avg_risk,avg_exchange_rate,mode");
    CHECK(lines[2].rfind("wswm,2,uniform,uniform,", 0) == 0);
    // Exact metrics throughout at these sizes.
    for (size_t i = 2; i < lines.size(); ++i)
        CHECK(lines[i].substr(lines[i].size() - 5) == "exact");
}

TEST_CASE("variance sweep is byte-identical across thread counts") {
    ExperimentConfig cfg = small_config();
    cfg.mechanisms = {"rp-swme", "lws"};
    cfg.n_min = 2;
    cfg.n_max = 6;
    cfg.instances = 60;
    cfg.threads = 1;
    const std::string one = run_variance_sweep(cfg);
    cfg.threads = 3;
    const std::string three = run_variance_sweep(cfg);
    CHECK(one == three);
    const auto lines = split_lines(one);
    REQUIRE(lines.size() == 2 + 2 * 10);
    CHECK(lines[1] == "mechanism,accuracy_bin,std_norm_payoff,frac_not_losing");
}

TEST_CASE("concentrating predictions drive the deterministic exchange toward zero") {
    // Under the latent-factor model every belief approaches 1/2 as the
    // population grows, so the score gaps and the money moved vanish.
    ExperimentConfig cfg;
    cfg.mechanisms = {"wswm"};
    cfg.pred_model = "synthetic";
    cfg.n_min = 2;
    cfg.n_max = 32;
    cfg.n_step = 30;
    cfg.instances = 150;
    cfg.seed = 99;
    const auto lines = split_lines(run_efficiency_sweep(cfg));
    REQUIRE(lines.size() == 4);
    const auto rate_of = [](const std::string& line) {
        size_t pos = 0;
        for (int commas = 0; commas < 5; ++commas) pos = line.find(',', pos) + 1;
        return std::stod(line.substr(pos));
    };
    const double rate_small = rate_of(lines[2]);
    const double rate_large = rate_of(lines[3]);
    CHECK(rate_large < rate_small);
    CHECK(rate_large < 0.05);
}

TEST_CASE("fixed-intensity surrogate wagering over three outcomes") {
    const auto mech = make_mechanism("swm:0.2");
    RngStream rng(71);
    const GameInstance g = gen_instance(PredictionModel::uniform(), WagerModel::uniform(), 3, 3, rng);
    for (int x = 0; x < 3; ++x) {
        const PayoffDistribution d = mech->enumerate(g, x);
        CHECK(d.support().size() == 27);
        CHECK(d.max_abs_balance_error() <= 1e-9);
        const auto expected = d.expected_payoffs();
        const PayoffVector det = wswm(g, x, ScoringRule::brier());
        for (size_t i = 0; i < det.size(); ++i)
            CHECK(std::fabs(expected[i] - det[i]) <= 1e-9);
        // Closed-form worst case against the enumerated support.
        const auto worst = mech->exact_worst_payoffs(g);
        REQUIRE(worst.has_value());
        std::vector<double> lo(det.size(), 0.0);
        for (const auto& point : d.support())
            for (size_t i = 0; i < lo.size(); ++i) lo[i] = std::min(lo[i], point.payoffs[i]);
        for (size_t i = 0; i < lo.size(); ++i) CHECK((*worst)[i] <= lo[i] + 1e-9);
    }
    // Two explicit rates only make sense for binary events.
    CHECK_THROWS_AS(make_mechanism("swm:0.2/0.3")->enumerate(g, 0), dimension_error);
}

TEST_CASE("sweep-level anchors: risk and exchange ordering") {
    ExperimentConfig cfg;
    cfg.mechanisms = {"rp-swme", "lws", "wswm"};
    cfg.n_min = 2;
    cfg.n_max = 12;
    cfg.n_step = 5;
    cfg.instances = 60;
    cfg.seed = 4242;
    cfg.threads = 2;
    const auto lines = split_lines(run_efficiency_sweep(cfg));
    REQUIRE(lines.size() == 2 + 3 * 3);
    struct Row {
        std::string mech;
        double risk;
        double exchange;
    };
    std::vector<Row> rows;
    for (size_t i = 2; i < lines.size(); ++i) {
        std::istringstream in(lines[i]);
        std::string field;
        Row row;
        std::getline(in, row.mech, ',');
        for (int skip = 0; skip < 3; ++skip) std::getline(in, field, ',');
        std::getline(in, field, ',');
        row.risk = std::stod(field);
        std::getline(in, field, ',');
        row.exchange = std::stod(field);
        rows.push_back(row);
    }
    double lws_risk = 0, rp_risk = 0, wswm_risk = 0, lws_exch = 0, wswm_exch = 0;
    for (const Row& row : rows) {
        if (row.mech == "lws") {
            lws_risk += row.risk / 3;
            lws_exch += row.exchange / 3;
        } else if (row.mech == "rp-swme") {
            rp_risk += row.risk / 3;
        } else {
            wswm_risk += row.risk / 3;
            wswm_exch += row.exchange / 3;
        }
    }
    CHECK(lws_risk == doctest::Approx(1.0));
    CHECK(rp_risk > 0.95);
    CHECK(wswm_risk < 0.6);
    CHECK(lws_exch > wswm_exch);
}

TEST_CASE("asserted property sets follow the mechanism contracts") {
    const auto has = [](const std::vector<PropertyTag>& tags, PropertyTag tag) {
        return std::find(tags.begin(), tags.end(), tag) != tags.end();
    };
    CHECK(has(asserted_properties("wswm"), PropertyTag::EBB));
    CHECK_FALSE(has(asserted_properties("wswm"), PropertyTag::PO));
    CHECK(has(asserted_properties("nawm"), PropertyTag::WEBB));
    CHECK(has(asserted_properties("lws"), PropertyTag::PO));
    CHECK(has(asserted_properties("rp-swme"), PropertyTag::PO));
    CHECK_FALSE(has(asserted_properties("rp-swme"), PropertyTag::sybilproof));
    CHECK(has(asserted_properties("swme"), PropertyTag::no_arbitrage));
    CHECK_FALSE(has(asserted_properties("swme"), PropertyTag::PO));
    CHECK(has(asserted_properties("noisy-swme:0.1,0.1"), PropertyTag::neutrality));
    CHECK_FALSE(has(asserted_properties("noisy-swme:0.1,0.3"), PropertyTag::neutrality));
    CHECK(has(asserted_properties("stub-midpay"), PropertyTag::SIC));
}

TEST_SUITE_END();
