#include "wager/det_mech.hpp"

namespace wager {

PayoffVector wswm_from_scores(const std::vector<double>& scores, const std::vector<double>& wagers) {
    const size_t n = wagers.size();
    if (scores.size() != n) throw dimension_error("score count differs from wager count");
    double total = 0.0;
    for (double w : wagers) total += w;
    PayoffVector payoffs(n, 0.0);
    if (total <= 0.0) return payoffs;
    // Pi_i = (w_i / W) * sum_{j != i} w_j (s_i - s_j); antisymmetric, so the
    // payoffs sum to zero regardless of the scoring rule.
    double weighted_score = 0.0;
    for (size_t j = 0; j < n; ++j) weighted_score += wagers[j] * scores[j];
    for (size_t i = 0; i < n; ++i) {
        if (wagers[i] == 0.0) continue;
        payoffs[i] = wagers[i] / total * (scores[i] * (total - wagers[i]) -
                                          (weighted_score - wagers[i] * scores[i]));
    }
    return payoffs;
}

PayoffVector wswm(const GameInstance& g, int outcome, const ScoringRule& rule) {
    const size_t n = static_cast<size_t>(g.num_agents());
    std::vector<double> scores(n, 0.0);
    for (size_t i = 0; i < n; ++i) scores[i] = rule(outcome, g.predictions[i]);
    return wswm_from_scores(scores, g.wagers);
}

Prediction peer_average(const GameInstance& g, int agent, AverageMode mode) {
    const int n = g.num_agents();
    if (n < 2) throw dimension_error("peer average undefined for a single agent");
    const int m = g.num_outcomes();
    std::vector<double> avg(static_cast<size_t>(m), 0.0);
    double weight_sum = 0.0;
    for (int j = 0; j < n; ++j) {
        if (j == agent) continue;
        const double weight = mode == AverageMode::wager_weighted
                                  ? g.wagers[static_cast<size_t>(j)]
                                  : 1.0;
        if (weight == 0.0) continue;
        weight_sum += weight;
        for (int k = 0; k < m; ++k) avg[static_cast<size_t>(k)] += weight * g.predictions[static_cast<size_t>(j)][k];
    }
    if (weight_sum <= 0.0) {
        // Nobody else wagered; fall back to the unweighted mean so the
        // anchor stays defined. The agent's own payoff weight is zero then.
        return peer_average(g, agent, AverageMode::unweighted);
    }
    for (double& v : avg) v /= weight_sum;
    return Prediction(std::move(avg));
}

PayoffVector nawm(const GameInstance& g, int outcome, const ScoringRule& rule, AverageMode mode) {
    const int n = g.num_agents();
    if (n < 2) throw dimension_error("no-arbitrage mechanism needs at least two agents");
    const double total = g.total_wager();
    PayoffVector payoffs(static_cast<size_t>(n), 0.0);
    if (total <= 0.0) return payoffs;
    std::vector<double> scores(static_cast<size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) scores[static_cast<size_t>(i)] = rule(outcome, g.predictions[static_cast<size_t>(i)]);
    // Both WSWM terms share the opponents' scores, so the difference
    // collapses to the agent's own score against the anchor's score.
    for (int i = 0; i < n; ++i) {
        const double w_i = g.wagers[static_cast<size_t>(i)];
        if (w_i == 0.0) continue;
        const double anchor = rule(outcome, peer_average(g, i, mode));
        payoffs[static_cast<size_t>(i)] =
            w_i * (total - w_i) / total * (scores[static_cast<size_t>(i)] - anchor);
    }
    return payoffs;
}

} // namespace wager
