#ifndef WAGER_SCORING_HPP
#define WAGER_SCORING_HPP

#include <functional>
#include <string>
#include <vector>

#include "wager/types.hpp"

namespace wager {

// A scoring rule bounded in [0,1]: score(x, report). Brier and spherical are
// built in; custom rules must keep the [0,1] range themselves.
class ScoringRule {
public:
    using Fn = std::function<double(int, const Prediction&)>;

    static ScoringRule brier();
    static ScoringRule spherical();
    static ScoringRule custom(std::string name, Fn fn);

    double operator()(int outcome, const Prediction& report) const;
    const std::string& name() const { return name_; }

    // Expected score of `report` when the outcome is drawn from `belief`.
    double expected(const Prediction& belief, const Prediction& report) const;

private:
    ScoringRule(std::string name, Fn fn) : name_(std::move(name)), fn_(std::move(fn)) {}

    std::string name_;
    Fn fn_;
};

// Quadratic score rescaled into [0,1]; equals 1-(p1-x)^2 for binary events.
double brier_score(int outcome, const Prediction& report);

// Flip probabilities of a binary surrogate outcome:
//   e0 = P(surrogate=1 | truth=0), e1 = P(surrogate=0 | truth=1).
// e0+e1 = 1 would make the surrogate carry no information and is rejected.
struct ErrorRates {
    double e0 = 0.0;
    double e1 = 0.0;

    ErrorRates() = default;
    ErrorRates(double e0_, double e1_);

    bool noiseless() const { return e0 == 0.0 && e1 == 0.0; }
    // P(surrogate = xt | truth = x) for binary outcomes.
    double flip_prob(int truth, int surrogate) const;
};

// Row-stochastic M x M matrix; entry (j,k) = P(surrogate=k | truth=j).
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(std::vector<std::vector<double>> rows);

    int size() const { return static_cast<int>(rows_.size()); }
    double operator()(int truth, int surrogate) const {
        return rows_[static_cast<size_t>(truth)][static_cast<size_t>(surrogate)];
    }
    const std::vector<std::vector<double>>& rows() const { return rows_; }

    // Solves C * phi = s; throws rank_error when the residual betrays a
    // singular or ill-conditioned matrix.
    std::vector<double> solve(const std::vector<double>& rhs) const;

    std::vector<std::vector<double>> inverse() const;

private:
    std::vector<std::vector<double>> rows_;
};

// Diagonal 1/2, off-diagonal 1/(2(M-1)). Requires M > 2.
ConfusionMatrix uniform_confusion(int num_outcomes);

// Diagonal 1-(M-1)*eps, off-diagonal eps; eps in [0, 1/M).
ConfusionMatrix uniform_confusion_mass(int num_outcomes, double eps);

// Debiased score against a binary surrogate outcome; may leave [0,1].
double surrogate_score_binary(const ScoringRule& rule, const Prediction& report,
                              int surrogate_outcome, const ErrorRates& rates);

// Debiased score against a multi-outcome surrogate; component of C^-1 * s.
double surrogate_score_multi(const ScoringRule& rule, const Prediction& report,
                             int surrogate_outcome, const ConfusionMatrix& confusion);

// All M debiased score components at once.
std::vector<double> surrogate_score_vector(const ScoringRule& rule, const Prediction& report,
                                           const ConfusionMatrix& confusion);

// Exact E[debiased score | true outcome]; equals rule(x, report) by
// construction, asserted against that identity in the tests.
double unbiasedness_oracle(const ScoringRule& rule, const Prediction& report, int true_outcome,
                           const ErrorRates& rates);
double unbiasedness_oracle(const ScoringRule& rule, const Prediction& report, int true_outcome,
                           const ConfusionMatrix& confusion);

} // namespace wager

#endif // WAGER_SCORING_HPP
