#include "wager/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace wager {

RiskResult individual_risk(const Mechanism& mech, const GameInstance& g,
                           const EnumerationCaps& caps, int sample_count, RngStream* rng) {
    const size_t n = static_cast<size_t>(g.num_agents());
    const auto to_risk = [&](const std::vector<double>& worst) {
        std::vector<double> risk(n, 0.0);
        for (size_t i = 0; i < n; ++i) {
            if (g.wagers[i] <= 0.0) continue;
            risk[i] = std::clamp(-worst[i] / g.wagers[i], 0.0, 1.0);
        }
        return risk;
    };

    if (const auto worst = mech.exact_worst_payoffs(g)) return {to_risk(*worst), true};

    if (mech.enumerable(g, caps)) {
        std::vector<double> worst(n, 0.0);
        for (int x = 0; x < g.num_outcomes(); ++x) {
            const PayoffDistribution d = mech.enumerate(g, x, caps);
            for (const auto& point : d.support())
                for (size_t i = 0; i < n; ++i) worst[i] = std::min(worst[i], point.payoffs[i]);
        }
        return {to_risk(worst), true};
    }

    if (!rng) throw cap_exceeded_error("risk needs sampling but no stream was provided");
    std::vector<double> worst(n, 0.0);
    for (int x = 0; x < g.num_outcomes(); ++x)
        for (int s = 0; s < sample_count; ++s) {
            const PayoffVector pay = mech.sample(g, x, *rng, caps);
            for (size_t i = 0; i < n; ++i) worst[i] = std::min(worst[i], pay[i]);
        }
    return {to_risk(worst), false};
}

double exchanged_fraction(const PayoffVector& payoffs, const std::vector<double>& wagers) {
    return exchanged_fraction(payoffs, wagers, false);
}

double exchanged_fraction(const PayoffVector& payoffs, const std::vector<double>& wagers,
                          bool require_balance) {
    double total = 0.0;
    for (double w : wagers) total += w;
    if (total <= 0.0) throw dimension_error("exchange rate undefined for zero total wager");
    KahanSum gains, losses;
    for (double p : payoffs) (p >= 0.0 ? gains : losses).add(p >= 0.0 ? p : -p);
    // Under exact budget balance the gains equal the losses.
    if (require_balance && std::fabs(gains.value() - losses.value()) > kTol)
        throw algorithm_inconsistency_error("realization does not balance; gains differ from losses");
    return gains.value() / total;
}

double expected_exchanged_fraction(const PayoffDistribution& d, bool require_balance) {
    KahanSum acc;
    for (const auto& point : d.support())
        acc.add(point.prob * exchanged_fraction(point.payoffs, d.wagers(), require_balance));
    return acc.value();
}

ExchangeResult money_exchange_rate(const Mechanism& mech, const GameInstance& g,
                                   const EnumerationCaps& caps, int sample_count, RngStream* rng) {
    if (g.happening_probs.empty())
        throw dimension_error("exchange rate needs outcome happening probabilities");
    {
        KahanSum acc;
        bool have_hook = true;
        for (int x = 0; x < g.num_outcomes() && have_hook; ++x) {
            const double q = g.happening_probs[static_cast<size_t>(x)];
            if (q <= 0.0) continue;
            if (const auto v = mech.expected_exchanged(g, x, caps))
                acc.add(q * *v);
            else
                have_hook = false;
        }
        if (have_hook) return {acc.value(), true};
    }
    if (mech.enumerable(g, caps)) {
        KahanSum acc;
        for (int x = 0; x < g.num_outcomes(); ++x) {
            const double q = g.happening_probs[static_cast<size_t>(x)];
            if (q <= 0.0) continue;
            acc.add(q * expected_exchanged_fraction(mech.enumerate(g, x, caps),
                                                    mech.strictly_budget_balanced()));
        }
        return {acc.value(), true};
    }
    if (!rng) throw cap_exceeded_error("exchange rate needs sampling but no stream was provided");
    KahanSum acc;
    for (int s = 0; s < sample_count; ++s) {
        const double u = rng->uniform01();
        double cum = 0.0;
        int x = g.num_outcomes() - 1;
        for (int v = 0; v < g.num_outcomes(); ++v) {
            cum += g.happening_probs[static_cast<size_t>(v)];
            if (u < cum) {
                x = v;
                break;
            }
        }
        acc.add(exchanged_fraction(mech.sample(g, x, *rng, caps), g.wagers,
                                   mech.strictly_budget_balanced()));
    }
    return {acc.value() / sample_count, false};
}

AccuracyBinner::AccuracyBinner(int bins) : cells_(static_cast<size_t>(bins)) {
    if (bins < 1) throw dimension_error("need at least one accuracy bin");
}

void AccuracyBinner::add(double accuracy, double normalized_payoff) {
    const int bins = static_cast<int>(cells_.size());
    int idx = static_cast<int>(accuracy * bins);
    idx = std::clamp(idx, 0, bins - 1); // accuracy 1.0 lands in the top bin
    Cell& cell = cells_[static_cast<size_t>(idx)];
    cell.count += 1;
    cell.sum.add(normalized_payoff);
    cell.sum_sq.add(normalized_payoff * normalized_payoff);
    if (normalized_payoff >= 0.0) cell.not_losing += 1;
}

void AccuracyBinner::absorb(const AccuracyBinner& other) {
    if (other.cells_.size() != cells_.size()) throw dimension_error("bin counts differ");
    for (size_t k = 0; k < cells_.size(); ++k) {
        cells_[k].count += other.cells_[k].count;
        cells_[k].sum.add(other.cells_[k].sum.value());
        cells_[k].sum_sq.add(other.cells_[k].sum_sq.value());
        cells_[k].not_losing += other.cells_[k].not_losing;
    }
}

std::vector<AccuracyBin> AccuracyBinner::bins() const {
    std::vector<AccuracyBin> out(cells_.size());
    for (size_t k = 0; k < cells_.size(); ++k) {
        const Cell& cell = cells_[k];
        out[k].count = cell.count;
        if (cell.count >= 1)
            out[k].frac_not_losing =
                static_cast<double>(cell.not_losing) / static_cast<double>(cell.count);
        if (cell.count >= 2) {
            const double n = static_cast<double>(cell.count);
            const double mean = cell.sum.value() / n;
            const double var = std::max(0.0, (cell.sum_sq.value() - n * mean * mean) / (n - 1.0));
            out[k].std_norm_payoff = std::sqrt(var);
        }
    }
    return out;
}

double prediction_accuracy(const Prediction& report, int outcome, double happening_prob,
                           bool against_probability) {
    const double target = against_probability ? happening_prob : static_cast<double>(outcome);
    return 1.0 - std::fabs(target - report.p_one());
}

double spearman_index_correlation(const std::vector<double>& values) {
    const size_t n = values.size();
    if (n < 2) return 0.0;
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return values[a] < values[b]; });
    std::vector<double> rank(n, 0.0);
    size_t pos = 0;
    while (pos < n) {
        size_t end = pos + 1;
        while (end < n && values[order[end]] == values[order[pos]]) ++end;
        const double shared = 0.5 * static_cast<double>(pos + end - 1) + 1.0;
        for (size_t k = pos; k < end; ++k) rank[order[k]] = shared;
        pos = end;
    }
    const double mean = 0.5 * static_cast<double>(n + 1);
    double num = 0.0, den_a = 0.0, den_b = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double a = static_cast<double>(i + 1) - mean;
        const double b = rank[i] - mean;
        num += a * b;
        den_a += a * a;
        den_b += b * b;
    }
    if (den_a <= 0.0 || den_b <= 0.0) return 0.0;
    return num / std::sqrt(den_a * den_b);
}

} // namespace wager
