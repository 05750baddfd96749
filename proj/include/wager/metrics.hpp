#ifndef WAGER_METRICS_HPP
#define WAGER_METRICS_HPP

#include <optional>

#include "wager/mechanism.hpp"

namespace wager {

// Compensated accumulator; keeps reductions order-stable to ~1e-16.
class KahanSum {
public:
    void add(double v) {
        const double y = v - carry_;
        const double t = sum_ + y;
        carry_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const { return sum_; }

private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

struct RiskResult {
    std::vector<double> risk; // per agent, in [0,1]
    bool exact = true;
};

// Worst-case fraction of wager an agent can lose, over outcomes and
// mechanism randomness. Exact when the mechanism has a closed worst case or
// is enumerable; otherwise estimated from `sample_count` draws per outcome.
RiskResult individual_risk(const Mechanism& mech, const GameInstance& g,
                           const EnumerationCaps& caps = {}, int sample_count = 200,
                           RngStream* rng = nullptr);

// Money exchanged in one realization: the positive payoffs, which equal the
// losses whenever the realization balances. With require_balance set, a
// gains/losses mismatch beyond tolerance throws.
double exchanged_fraction(const PayoffVector& payoffs, const std::vector<double>& wagers);
double exchanged_fraction(const PayoffVector& payoffs, const std::vector<double>& wagers,
                          bool require_balance);

double expected_exchanged_fraction(const PayoffDistribution& d, bool require_balance = false);

struct ExchangeResult {
    double rate = 0.0; // in [0,1]
    bool exact = true;
};

// Expected money exchange rate over the outcome distribution q and the
// mechanism randomness.
ExchangeResult money_exchange_rate(const Mechanism& mech, const GameInstance& g,
                                   const EnumerationCaps& caps = {}, int sample_count = 200,
                                   RngStream* rng = nullptr);

struct AccuracyBin {
    long long count = 0;
    std::optional<double> std_norm_payoff; // sample std; set for count >= 2
    std::optional<double> frac_not_losing; // set for count >= 1
};

// Streaming accumulator over (accuracy, payoff / wager) observations in 10
// equal-width accuracy bins.
class AccuracyBinner {
public:
    explicit AccuracyBinner(int bins = 10);

    void add(double accuracy, double normalized_payoff);

    // Folds another binner in; merge order must be fixed for reproducibility.
    void absorb(const AccuracyBinner& other);

    std::vector<AccuracyBin> bins() const;

private:
    struct Cell {
        long long count = 0;
        KahanSum sum;
        KahanSum sum_sq;
        long long not_losing = 0;
    };
    std::vector<Cell> cells_;
};

// accuracy = 1 - |x - p_i| against the realized outcome, or 1 - |q - p_i|
// against the happening probability when `against_probability` is set.
double prediction_accuracy(const Prediction& report, int outcome, double happening_prob,
                           bool against_probability = false);

// Spearman rank correlation of (index, value) pairs; ties share average rank.
double spearman_index_correlation(const std::vector<double>& values);

} // namespace wager

#endif // WAGER_METRICS_HPP
