#include "wager/types.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace wager {

Prediction::Prediction(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.size() < 2) throw dimension_error("prediction needs at least two outcomes");
    double sum = 0.0;
    for (double p : probs_) {
        if (p < -kTol || p > 1.0 + kTol) throw dimension_error("prediction entry outside [0,1]");
        sum += p;
    }
    if (std::fabs(sum - 1.0) > kTol) throw dimension_error("prediction does not sum to 1");
}

Prediction Prediction::binary(double p_one) {
    return Prediction({1.0 - p_one, p_one});
}

double GameInstance::total_wager() const {
    double sum = 0.0;
    for (double w : wagers) sum += w;
    return sum;
}

void GameInstance::validate() const {
    if (predictions.empty()) throw dimension_error("instance needs at least one agent");
    if (wagers.size() != predictions.size())
        throw dimension_error("wager count differs from prediction count");
    const int m = predictions.front().num_outcomes();
    for (const auto& p : predictions)
        if (p.num_outcomes() != m) throw dimension_error("mixed outcome counts across predictions");
    for (double w : wagers)
        if (w < 0.0) throw dimension_error("negative wager");
    if (!happening_probs.empty()) {
        if (static_cast<int>(happening_probs.size()) != m)
            throw dimension_error("happening probabilities have wrong length");
        double sum = 0.0;
        for (double q : happening_probs) {
            if (q < -kTol || q > 1.0 + kTol) throw dimension_error("happening prob outside [0,1]");
            sum += q;
        }
        if (std::fabs(sum - 1.0) > kTol) throw dimension_error("happening probs do not sum to 1");
    }
    if (realized_outcome && (*realized_outcome < 0 || *realized_outcome >= m))
        throw dimension_error("realized outcome out of range");
}

GameInstance GameInstance::with_report(int agent, const Prediction& report) const {
    GameInstance copy = *this;
    copy.predictions.at(static_cast<size_t>(agent)) = report;
    return copy;
}

PayoffDistribution::PayoffDistribution(std::vector<WeightedPayoff> support,
                                       std::vector<double> wagers)
    : support_(std::move(support)), wagers_(std::move(wagers)) {
    if (support_.empty()) throw dimension_error("empty payoff distribution");
    double total = 0.0;
    for (const auto& point : support_) {
        if (point.prob <= 0.0 || point.prob > 1.0 + kTol)
            throw dimension_error("support probability outside (0,1]");
        if (point.payoffs.size() != wagers_.size())
            throw dimension_error("payoff vector length differs from wager count");
        total += point.prob;
    }
    if (std::fabs(total - 1.0) > kTol) throw dimension_error("support probabilities do not sum to 1");
}

PayoffDistribution PayoffDistribution::point(PayoffVector payoffs, std::vector<double> wagers) {
    std::vector<WeightedPayoff> support;
    support.push_back({1.0, std::move(payoffs)});
    return PayoffDistribution(std::move(support), std::move(wagers));
}

std::vector<AgentPayoffStats> PayoffDistribution::stats() const {
    const size_t n = wagers_.size();
    std::vector<AgentPayoffStats> out(n);
    for (size_t i = 0; i < n; ++i) {
        out[i].min = support_.front().payoffs[i];
        out[i].max = support_.front().payoffs[i];
    }
    for (const auto& point : support_) {
        for (size_t i = 0; i < n; ++i) {
            const double pay = point.payoffs[i];
            out[i].expected += point.prob * pay;
            out[i].min = std::min(out[i].min, pay);
            out[i].max = std::max(out[i].max, pay);
        }
    }
    return out;
}

std::vector<double> PayoffDistribution::expected_payoffs() const {
    std::vector<double> out(wagers_.size(), 0.0);
    for (const auto& point : support_)
        for (size_t i = 0; i < out.size(); ++i) out[i] += point.prob * point.payoffs[i];
    return out;
}

double PayoffDistribution::max_wager_shortfall() const {
    double worst = -1.0;
    for (const auto& point : support_)
        for (size_t i = 0; i < wagers_.size(); ++i)
            worst = std::max(worst, -point.payoffs[i] - wagers_[i]);
    return worst;
}

double PayoffDistribution::max_abs_balance_error() const {
    double worst = 0.0;
    for (const auto& point : support_) {
        double sum = 0.0;
        for (double pay : point.payoffs) sum += pay;
        worst = std::max(worst, std::fabs(sum));
    }
    return worst;
}

double PayoffDistribution::max_balance_surplus() const {
    double worst = -1.0;
    for (const auto& point : support_) {
        double sum = 0.0;
        for (double pay : point.payoffs) sum += pay;
        worst = std::max(worst, sum);
    }
    return worst;
}

PayoffDistribution mix_distributions(const PayoffDistribution& a, const PayoffDistribution& b,
                                     double lambda) {
    if (lambda < 0.0 || lambda > 1.0) throw dimension_error("mixture weight outside [0,1]");
    if (a.num_agents() != b.num_agents()) throw dimension_error("mixture over different agent counts");
    for (int i = 0; i < a.num_agents(); ++i)
        if (a.wagers()[static_cast<size_t>(i)] != b.wagers()[static_cast<size_t>(i)])
            throw dimension_error("mixture over different wagers");
    if (lambda == 1.0) return a;
    if (lambda == 0.0) return b;

    std::map<PayoffVector, double> merged;
    for (const auto& point : a.support()) merged[point.payoffs] += lambda * point.prob;
    for (const auto& point : b.support()) merged[point.payoffs] += (1.0 - lambda) * point.prob;

    std::vector<WeightedPayoff> support;
    support.reserve(merged.size());
    for (auto& [payoffs, prob] : merged) support.push_back({prob, payoffs});
    return PayoffDistribution(std::move(support), a.wagers());
}

} // namespace wager
