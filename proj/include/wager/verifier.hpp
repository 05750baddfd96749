#ifndef WAGER_VERIFIER_HPP
#define WAGER_VERIFIER_HPP

#include "wager/mechanism.hpp"

namespace wager {

enum class PropertyTag {
    IR,
    WIC,
    SIC,
    WEBB,
    EBB,
    sybilproof,
    anonymity,
    neutrality,
    no_arbitrage,
    PO,
};

std::string property_name(PropertyTag tag);

struct PropertyReport {
    std::string mechanism;
    PropertyTag property = PropertyTag::EBB;
    bool pass = false;
    std::string witness;  // replayable description of the first violation
    double tolerance = kTol;
};

// Every support point of every outcome sums to zero (strict) or at most
// zero (weak), depending on the mechanism's budget-balance contract.
PropertyReport check_budget_balance(const Mechanism& mech,
                                    const std::vector<GameInstance>& instances,
                                    const EnumerationCaps& caps = {});

struct IncentiveConfig {
    Prediction belief;                 // agent 0's belief, taken from the report grid
    std::vector<Prediction> opponents; // reports of agents 1..N-1
    std::vector<double> wagers;        // all N wagers
};

struct IncentiveReports {
    PropertyReport ir;
    PropertyReport wic;
    PropertyReport sic;
};

// Exact expected payoff of every grid report for agent 0 under each config;
// honesty must be the unique argmax (SIC) and nonnegative (IR).
IncentiveReports check_ir_sic(const Mechanism& mech, const std::vector<IncentiveConfig>& configs,
                              double grid_step = 0.01, const EnumerationCaps& caps = {});

// Each wagering agent faces some outcome with a strictly losing support
// point. Instances with all-identical reports are skipped.
PropertyReport check_no_arbitrage(const Mechanism& mech,
                                  const std::vector<GameInstance>& instances,
                                  const EnumerationCaps& caps = {});

// For every pair of agents with differing reports, one of them hits exactly
// -w under some outcome.
PropertyReport check_po(const Mechanism& mech, const std::vector<GameInstance>& instances,
                        const EnumerationCaps& caps = {});

// Splitting one wager across two identities with the same (truthful) report
// never increases the summed expected payoff.
PropertyReport check_sybilproof(const Mechanism& mech, const std::vector<GameInstance>& instances,
                                const std::vector<double>& split_fractions = {},
                                const EnumerationCaps& caps = {});

struct SymmetryReports {
    PropertyReport anonymity;
    PropertyReport neutrality;
};

// Distribution equality (as multisets of weighted payoff vectors) under
// agent permutations and under outcome relabelings.
SymmetryReports check_symmetries(const Mechanism& mech, const std::vector<GameInstance>& instances,
                                 const EnumerationCaps& caps = {});

// --- Negative controls ------------------------------------------------------
//
// Deliberately broken mechanisms; the verifier is itself tested by the
// requirement that these fail their respective checks.

// WSWM with a constant bonus added to agent 0: breaks budget balance and
// anonymity.
class CorruptedStubMechanism final : public Mechanism {
public:
    explicit CorruptedStubMechanism(double bonus = 0.01) : bonus_(bonus) {}
    std::string name() const override { return "stub-corrupt"; }

protected:
    PayoffDistribution do_enumerate(const GameInstance& g, int outcome,
                                    const EnumerationCaps& caps) const override;
    PayoffVector do_sample(const GameInstance& g, int outcome, RngStream& rng,
                           const EnumerationCaps& caps) const override;

private:
    double bonus_;
};

// Pays by distance of the report from 1/2 instead of a proper score:
// breaks incentive compatibility.
class MidpointStubMechanism final : public Mechanism {
public:
    std::string name() const override { return "stub-midpay"; }

protected:
    PayoffDistribution do_enumerate(const GameInstance& g, int outcome,
                                    const EnumerationCaps& caps) const override;
    PayoffVector do_sample(const GameInstance& g, int outcome, RngStream& rng,
                           const EnumerationCaps& caps) const override;
};

// WSWM plus a fixed per-identity bonus: breaks sybilproofness.
class BonusStubMechanism final : public Mechanism {
public:
    explicit BonusStubMechanism(double bonus = 0.05) : bonus_(bonus) {}
    std::string name() const override { return "stub-bonus"; }

protected:
    PayoffDistribution do_enumerate(const GameInstance& g, int outcome,
                                    const EnumerationCaps& caps) const override;
    PayoffVector do_sample(const GameInstance& g, int outcome, RngStream& rng,
                           const EnumerationCaps& caps) const override;

private:
    double bonus_;
};

// Resolves standard mechanism names and the stub-* negative controls.
std::unique_ptr<Mechanism> make_verify_mechanism(const std::string& name,
                                                 ScoringRule rule = ScoringRule::brier());

} // namespace wager

#endif // WAGER_VERIFIER_HPP
