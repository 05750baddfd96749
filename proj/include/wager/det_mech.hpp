#ifndef WAGER_DET_MECH_HPP
#define WAGER_DET_MECH_HPP

#include "wager/scoring.hpp"
#include "wager/types.hpp"

namespace wager {

// Weighted score wagering: each agent's net payoff is the wager-weighted gap
// between his score and the other agents' scores. Sums to zero exactly;
// agents with zero wager (or no opponents with wager) get zero.
PayoffVector wswm(const GameInstance& g, int outcome, const ScoringRule& rule);

// WSWM computed from precomputed per-agent scores at the realized outcome.
PayoffVector wswm_from_scores(const std::vector<double>& scores, const std::vector<double>& wagers);

enum class AverageMode {
    wager_weighted, // p-bar_i = sum_{j!=i} w_j p_j / W_{-i}
    unweighted,     // p-bar_i = mean_{j!=i} p_j
};

// The average of everyone else's reports, the no-arbitrage anchor.
Prediction peer_average(const GameInstance& g, int agent,
                        AverageMode mode = AverageMode::wager_weighted);

// No-arbitrage wagering: WSWM payoff minus the WSWM payoff the agent would
// have received by reporting the others' average prediction.
PayoffVector nawm(const GameInstance& g, int outcome, const ScoringRule& rule,
                  AverageMode mode = AverageMode::wager_weighted);

} // namespace wager

#endif // WAGER_DET_MECH_HPP
