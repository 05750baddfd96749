#ifndef WAGER_TYPES_HPP
#define WAGER_TYPES_HPP

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace wager {

// Comparison tolerance for identities that are exact in real arithmetic.
inline constexpr double kTol = 1e-9;

struct dimension_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct degenerate_noise_error : std::domain_error {
    using std::domain_error::domain_error;
};
struct rank_error : std::domain_error {
    using std::domain_error::domain_error;
};
struct invalid_base_mechanism_error : std::domain_error {
    using std::domain_error::domain_error;
};
struct cap_exceeded_error : std::length_error {
    using std::length_error::length_error;
};
struct algorithm_inconsistency_error : std::logic_error {
    using std::logic_error::logic_error;
};
struct infeasible_error : std::domain_error {
    using std::domain_error::domain_error;
};

// A reported probability vector over M >= 2 outcomes.
class Prediction {
public:
    Prediction() = default;
    explicit Prediction(std::vector<double> probs);

    // Binary convenience: probability that outcome 1 happens.
    static Prediction binary(double p_one);

    int num_outcomes() const { return static_cast<int>(probs_.size()); }
    double operator[](int outcome) const { return probs_.at(static_cast<size_t>(outcome)); }
    const std::vector<double>& probs() const { return probs_; }

    // Probability of outcome 1; the usual scalar report for binary events.
    double p_one() const { return probs_.at(1); }

    bool operator==(const Prediction& other) const { return probs_ == other.probs_; }

private:
    std::vector<double> probs_;
};

// One wagering game: everyone's report and wager, plus what is known about
// the outcome (its distribution q, a realized value, or both).
struct GameInstance {
    std::vector<Prediction> predictions;
    std::vector<double> wagers;
    std::vector<double> happening_probs; // q; empty if unknown
    std::optional<int> realized_outcome; // x; nullopt if not yet realized

    int num_agents() const { return static_cast<int>(predictions.size()); }
    int num_outcomes() const { return predictions.empty() ? 0 : predictions.front().num_outcomes(); }
    double total_wager() const;

    void validate() const;

    // Copy with one agent's report replaced; used by incentive checks.
    GameInstance with_report(int agent, const Prediction& report) const;
};

using PayoffVector = std::vector<double>;

struct WeightedPayoff {
    double prob = 0.0;
    PayoffVector payoffs;
};

struct AgentPayoffStats {
    double expected = 0.0;
    double min = 0.0;
    double max = 0.0;
};

// Exact finite-support joint distribution of net payoffs, the object all
// property checks run against. Probabilities must be positive and sum to 1.
class PayoffDistribution {
public:
    PayoffDistribution() = default;
    PayoffDistribution(std::vector<WeightedPayoff> support, std::vector<double> wagers);

    static PayoffDistribution point(PayoffVector payoffs, std::vector<double> wagers);

    const std::vector<WeightedPayoff>& support() const { return support_; }
    const std::vector<double>& wagers() const { return wagers_; }
    int num_agents() const { return static_cast<int>(wagers_.size()); }

    std::vector<AgentPayoffStats> stats() const;
    std::vector<double> expected_payoffs() const;

    // Largest amount by which any support point dips below -w_i; <= 0 means
    // the wager constraint holds everywhere.
    double max_wager_shortfall() const;

    // Largest absolute deviation of a support-point payoff sum from zero
    // (signed max for the weak version).
    double max_abs_balance_error() const;
    double max_balance_surplus() const;

private:
    std::vector<WeightedPayoff> support_;
    std::vector<double> wagers_;
};

// Mixture: run `a` with probability lambda, else `b`. Support points with
// identical payoff vectors are coalesced.
PayoffDistribution mix_distributions(const PayoffDistribution& a, const PayoffDistribution& b,
                                     double lambda);

} // namespace wager

#endif // WAGER_TYPES_HPP
