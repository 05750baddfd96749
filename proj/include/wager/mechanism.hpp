#ifndef WAGER_MECHANISM_HPP
#define WAGER_MECHANISM_HPP

#include <memory>
#include <optional>
#include <string>

#include "wager/rand_mech.hpp"

namespace wager {

enum class MechanismKind {
    wswm,
    nawm,
    lws,
    lws_mixed,
    swm,
    swme,
    rp_swme,
    s_nawm,
    noisy_swme,
};

// Identifier plus the per-mechanism parameters needed to instantiate it.
struct MechanismId {
    MechanismKind kind = MechanismKind::wswm;
    double lambda = 1.0;                     // lws_mixed mixture weight
    std::vector<ErrorRates> rates;           // swm / s_nawm binary rates; broadcast if size 1
    std::optional<double> flip_mass;         // swm single flip intensity; for events with
                                             // M > 2 this is the off-diagonal confusion mass
    std::optional<ErrorRates> outcome_noise; // noisy_swme
    AverageMode average_mode = AverageMode::wager_weighted; // nawm family

    std::string name() const;

    // Parses e.g. "wswm", "lws-mixed:0.5", "swm:0.2", "swm:0.2/0.3",
    // "noisy-swme:0.1/0.1". Throws dimension_error on unknown names.
    static MechanismId parse(const std::string& text);
};

// Uniform view over a wagering mechanism: exact enumeration of its payoff
// distribution, one sampled realization, and (where available) a closed-form
// per-agent worst case that avoids full enumeration.
class Mechanism {
public:
    virtual ~Mechanism() = default;

    virtual std::string name() const = 0;

    // Exact joint distribution given the realized outcome; throws
    // cap_exceeded_error beyond the enumeration caps.
    PayoffDistribution enumerate(const GameInstance& g, int outcome,
                                 const EnumerationCaps& caps = {}) const {
        return do_enumerate(g, outcome, caps);
    }

    PayoffVector sample(const GameInstance& g, int outcome, RngStream& rng,
                        const EnumerationCaps& caps = {}) const {
        return do_sample(g, outcome, rng, caps);
    }

    bool enumerable(const GameInstance& g, const EnumerationCaps& caps = {}) const {
        return do_enumerable(g, caps);
    }

    // Exact per-agent minimum payoff over outcomes and mechanism randomness,
    // when a closed form exists.
    std::optional<std::vector<double>> exact_worst_payoffs(const GameInstance& g) const {
        return do_exact_worst_payoffs(g);
    }

    // Exact expected money-exchanged fraction for one outcome, when a
    // cheaper route than full enumeration exists.
    std::optional<double> expected_exchanged(const GameInstance& g, int outcome,
                                             const EnumerationCaps& caps = {}) const {
        return do_expected_exchanged(g, outcome, caps);
    }

    // Whether payoff sums are exactly zero (strict) or merely nonpositive.
    virtual bool strictly_budget_balanced() const { return true; }

protected:
    virtual PayoffDistribution do_enumerate(const GameInstance& g, int outcome,
                                            const EnumerationCaps& caps) const = 0;
    virtual PayoffVector do_sample(const GameInstance& g, int outcome, RngStream& rng,
                                   const EnumerationCaps& caps) const = 0;
    virtual bool do_enumerable(const GameInstance&, const EnumerationCaps&) const { return true; }
    virtual std::optional<std::vector<double>> do_exact_worst_payoffs(const GameInstance&) const {
        return std::nullopt;
    }
    virtual std::optional<double> do_expected_exchanged(const GameInstance&, int,
                                                        const EnumerationCaps&) const {
        return std::nullopt;
    }
};

// The mechanisms of this library, dispatched on MechanismId.
class StandardMechanism final : public Mechanism {
public:
    explicit StandardMechanism(MechanismId id, ScoringRule rule = ScoringRule::brier());

    const MechanismId& id() const { return id_; }
    std::string name() const override { return id_.name(); }
    const ScoringRule& rule() const { return rule_; }
    bool strictly_budget_balanced() const override;

protected:
    PayoffDistribution do_enumerate(const GameInstance& g, int outcome,
                                    const EnumerationCaps& caps) const override;
    PayoffVector do_sample(const GameInstance& g, int outcome, RngStream& rng,
                           const EnumerationCaps& caps) const override;
    bool do_enumerable(const GameInstance& g, const EnumerationCaps& caps) const override;
    std::optional<std::vector<double>> do_exact_worst_payoffs(
        const GameInstance& g) const override;
    std::optional<double> do_expected_exchanged(const GameInstance& g, int outcome,
                                                const EnumerationCaps& caps) const override;

private:
    std::vector<ErrorRates> rates_for(const GameInstance& g) const;
    ConfusionMatrix confusion_for(const GameInstance& g) const;

    MechanismId id_;
    ScoringRule rule_;
};

std::unique_ptr<Mechanism> make_mechanism(const MechanismId& id,
                                          ScoringRule rule = ScoringRule::brier());
std::unique_ptr<Mechanism> make_mechanism(const std::string& name,
                                          ScoringRule rule = ScoringRule::brier());

} // namespace wager

#endif // WAGER_MECHANISM_HPP
