#ifndef WAGER_RAND_MECH_HPP
#define WAGER_RAND_MECH_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "wager/det_mech.hpp"
#include "wager/rng.hpp"
#include "wager/scoring.hpp"
#include "wager/types.hpp"

namespace wager {

// Enumeration is exact only at desk scale; beyond these caps callers must
// fall back to the sampled forms.
struct EnumerationCaps {
    long long max_joint_realizations = 65536; // M^N surrogate combinations
    int max_partition_agents = 10;            // partitions enumerated up to here
    std::size_t max_support_points = 1u << 21;
};

// --- Random pairing -------------------------------------------------------

using Group = std::vector<int>;
using Partition = std::vector<Group>; // groups of two, one triple when N is odd

std::uint64_t count_partitions(int num_agents);
std::vector<Partition> enumerate_partitions(int num_agents, const EnumerationCaps& caps = {});
Partition sample_partition(int num_agents, RngStream& rng, const EnumerationCaps& caps = {});

// --- Lottery wrapper ------------------------------------------------------

// Turns a budget-balanced deterministic payoff vector into a winner-take-all
// lottery with odds proportional to wager + net payoff.
PayoffDistribution lottery_wrap(const PayoffVector& det_payoffs, const std::vector<double>& wagers);

PayoffDistribution lws(const GameInstance& g, int outcome, const ScoringRule& rule);

// Runs LWS with probability lambda and plain WSWM otherwise.
PayoffDistribution lws_mixed(const GameInstance& g, int outcome, const ScoringRule& rule,
                             double lambda);

PayoffVector sample_lws(const GameInstance& g, int outcome, const ScoringRule& rule,
                        RngStream& rng, double lambda = 1.0);

// --- Surrogate wagering ---------------------------------------------------

// Joint distribution over all surrogate realizations, scored with the
// debiasing operator and paid through the WSWM formula. With arbitrary
// rates the wager constraint can fail; max_wager_shortfall() reports it.
PayoffDistribution swm_distribution(const GameInstance& g, int outcome, const ScoringRule& rule,
                                    const std::vector<ErrorRates>& rates,
                                    const EnumerationCaps& caps = {});

PayoffDistribution swm_distribution_multi(const GameInstance& g, int outcome,
                                          const ScoringRule& rule, const ConfusionMatrix& confusion,
                                          const EnumerationCaps& caps = {});

// Error-rate selection: the largest common rate that keeps every agent
// within his wager; zero when every report is uninformative.
double select_error_rates(const GameInstance& g, const ScoringRule& rule);

// Per-agent selection scores r_i before taking the minimum.
std::vector<double> error_rate_scores(const GameInstance& g, const ScoringRule& rule);

// Multi-outcome counterpart: largest single off-diagonal mass of a uniform
// confusion matrix with no wager violation, found by bisection against the
// exact worst case.
double select_confusion_mass(const GameInstance& g, const ScoringRule& rule);

PayoffDistribution swme_distribution(const GameInstance& g, int outcome, const ScoringRule& rule,
                                     const EnumerationCaps& caps = {});

PayoffVector sample_swme(const GameInstance& g, int outcome, const ScoringRule& rule,
                         RngStream& rng);

// Exact per-agent worst case of SWME over outcomes and realizations,
// computable without joint enumeration because the payoff separates.
std::vector<double> swme_worst_payoffs(const GameInstance& g, const ScoringRule& rule);

// --- Random partition SWME -------------------------------------------------

PayoffDistribution rp_swme_distribution(const GameInstance& g, int outcome,
                                        const ScoringRule& rule, const EnumerationCaps& caps = {});

PayoffVector sample_rp_swme(const GameInstance& g, int outcome, const ScoringRule& rule,
                            RngStream& rng, const EnumerationCaps& caps = {});

// Worst case over all groups the agent can land in; exact at any N.
std::vector<double> rp_swme_worst_payoffs(const GameInstance& g, const ScoringRule& rule);

// Exact expected fraction of wagers changing hands, averaged over the
// uniform partition draw; group independence keeps this linear-time in the
// partition list without building the joint support.
double rp_swme_expected_exchanged(const GameInstance& g, int outcome, const ScoringRule& rule,
                                  const EnumerationCaps& caps = {});

// Exact worst case of generic-rate surrogate wagering over outcomes and
// attainable realizations.
std::vector<double> swm_worst_payoffs(const GameInstance& g, const ScoringRule& rule,
                                      const std::vector<ErrorRates>& rates);
std::vector<double> swm_worst_payoffs_multi(const GameInstance& g, const ScoringRule& rule,
                                            const ConfusionMatrix& confusion);

// --- Surrogate NAWM ---------------------------------------------------------

// Surrogate-scored WSWM term minus the deterministic anchor payoff of
// reporting the peers' average, evaluated at the true outcome.
PayoffDistribution surrogate_nawm_distribution(const GameInstance& g, int outcome,
                                               const ScoringRule& rule,
                                               const std::vector<ErrorRates>& rates,
                                               const EnumerationCaps& caps = {},
                                               AverageMode mode = AverageMode::wager_weighted);

PayoffVector sample_surrogate_nawm(const GameInstance& g, int outcome, const ScoringRule& rule,
                                   const std::vector<ErrorRates>& rates, RngStream& rng,
                                   AverageMode mode = AverageMode::wager_weighted);

std::vector<double> surrogate_nawm_worst_payoffs(const GameInstance& g, const ScoringRule& rule,
                                                 const std::vector<ErrorRates>& rates,
                                                 AverageMode mode = AverageMode::wager_weighted);

// --- Noisy ground truth -----------------------------------------------------

// Error rates of the agent surrogate w.r.t. the true outcome when the flip
// is applied to an already-noisy copy of it.
ErrorRates compose_noise(const ErrorRates& agent_flip, const ErrorRates& outcome_noise);

// Inverse of compose_noise in its first argument; nullopt when the solution
// leaves [0,1] and the caller must fall back to payoff scaling.
std::optional<ErrorRates> solve_agent_flip(const ErrorRates& target,
                                           const ErrorRates& outcome_noise);

// Divides every payoff by max(1, worst loss / wager) so the wager
// constraint holds with at least one agent tight whenever scaling engaged.
PayoffDistribution scale_payoffs(const PayoffDistribution& d);

struct NoisyOutcomeModel {
    int noisy_outcome = 0; // realized noisy copy of the event outcome
    ErrorRates rates;      // its known error rates w.r.t. the truth
};

// Random-partition surrogate wagering driven by a noisy outcome copy:
// per group, agent flips are tuned so the composed rates match the
// error-rate selection target; groups where that is infeasible score the
// noisy outcome directly and rescale.
PayoffDistribution noisy_swme_distribution(const GameInstance& g, const NoisyOutcomeModel& noisy,
                                           const ScoringRule& rule,
                                           const EnumerationCaps& caps = {});

// Full distribution w.r.t. the true outcome: mixes the above over both
// possible noisy copies with their conditional probabilities.
PayoffDistribution noisy_swme_true_outcome_distribution(const GameInstance& g, int true_outcome,
                                                        const ErrorRates& outcome_noise,
                                                        const ScoringRule& rule,
                                                        const EnumerationCaps& caps = {});

PayoffVector sample_noisy_swme(const GameInstance& g, int true_outcome,
                               const ErrorRates& outcome_noise, const ScoringRule& rule,
                               RngStream& rng, const EnumerationCaps& caps = {});

std::vector<double> noisy_swme_worst_payoffs(const GameInstance& g,
                                             const ErrorRates& outcome_noise,
                                             const ScoringRule& rule);

} // namespace wager

#endif // WAGER_RAND_MECH_HPP
