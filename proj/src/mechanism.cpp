#include "wager/mechanism.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace wager {

namespace {

// Mechanism parameters accept '/' or ',' separators; names render with '/'
// so they stay a single CSV field.
std::vector<std::string> split_args(const std::string& text) {
    std::vector<std::string> parts;
    std::string token;
    for (char c : text) {
        if (c == '/' || c == ',') {
            parts.push_back(token);
            token.clear();
        } else {
            token += c;
        }
    }
    parts.push_back(token);
    return parts;
}

std::string format_rate(double v) {
    std::ostringstream out;
    out << v;
    return out.str();
}

} // namespace

std::string MechanismId::name() const {
    switch (kind) {
        case MechanismKind::wswm: return "wswm";
        case MechanismKind::nawm: return "nawm";
        case MechanismKind::lws: return "lws";
        case MechanismKind::lws_mixed: return "lws-mixed:" + format_rate(lambda);
        case MechanismKind::swm: {
            std::string s = "swm";
            if (flip_mass)
                s += ":" + format_rate(*flip_mass);
            else if (!rates.empty())
                s += ":" + format_rate(rates.front().e0) + "/" + format_rate(rates.front().e1);
            return s;
        }
        case MechanismKind::swme: return "swme";
        case MechanismKind::rp_swme: return "rp-swme";
        case MechanismKind::s_nawm: return "s-nawm";
        case MechanismKind::noisy_swme:
            return "noisy-swme:" + format_rate(outcome_noise ? outcome_noise->e0 : 0.0) + "/" +
                   format_rate(outcome_noise ? outcome_noise->e1 : 0.0);
    }
    return "unknown";
}

MechanismId MechanismId::parse(const std::string& text) {
    MechanismId id;
    const auto colon = text.find(':');
    const std::string head = text.substr(0, colon);
    const std::string args = colon == std::string::npos ? "" : text.substr(colon + 1);

    if (head == "wswm") {
        id.kind = MechanismKind::wswm;
    } else if (head == "nawm") {
        id.kind = MechanismKind::nawm;
    } else if (head == "lws") {
        id.kind = MechanismKind::lws;
    } else if (head == "lws-mixed") {
        id.kind = MechanismKind::lws_mixed;
        id.lambda = args.empty() ? 0.5 : std::stod(args);
        if (id.lambda < 0.0 || id.lambda > 1.0)
            throw dimension_error("mixture weight outside [0,1]");
    } else if (head == "swm") {
        id.kind = MechanismKind::swm;
        if (!args.empty()) {
            const auto parts = split_args(args);
            if (parts.size() == 1) {
                // One value: common binary flip rate, or the off-diagonal
                // confusion mass for events with more than two outcomes.
                id.flip_mass = std::stod(parts[0]);
                id.rates.push_back(ErrorRates(*id.flip_mass, *id.flip_mass));
            } else if (parts.size() == 2) {
                id.rates.push_back(ErrorRates(std::stod(parts[0]), std::stod(parts[1])));
            } else {
                throw dimension_error("swm takes one flip intensity or two error rates");
            }
        }
    } else if (head == "swme") {
        id.kind = MechanismKind::swme;
    } else if (head == "rp-swme") {
        id.kind = MechanismKind::rp_swme;
    } else if (head == "s-nawm") {
        id.kind = MechanismKind::s_nawm;
        if (!args.empty()) {
            const auto parts = split_args(args);
            if (parts.size() != 2) throw dimension_error("s-nawm takes two error rates");
            id.rates.push_back(ErrorRates(std::stod(parts[0]), std::stod(parts[1])));
        }
    } else if (head == "noisy-swme") {
        id.kind = MechanismKind::noisy_swme;
        const auto parts = split_args(args.empty() ? "0.1/0.1" : args);
        if (parts.size() != 2) throw dimension_error("noisy-swme takes two noise rates");
        id.outcome_noise = ErrorRates(std::stod(parts[0]), std::stod(parts[1]));
    } else {
        throw dimension_error("unknown mechanism: " + text);
    }
    return id;
}

StandardMechanism::StandardMechanism(MechanismId id, ScoringRule rule)
    : id_(std::move(id)), rule_(std::move(rule)) {}

ConfusionMatrix StandardMechanism::confusion_for(const GameInstance& g) const {
    const int m = g.num_outcomes();
    if (!id_.rates.empty() && !id_.flip_mass)
        throw dimension_error("per-outcome error rates apply to binary events only");
    const double mass = id_.flip_mass ? *id_.flip_mass : select_confusion_mass(g, rule_);
    return uniform_confusion_mass(m, mass);
}

std::vector<ErrorRates> StandardMechanism::rates_for(const GameInstance& g) const {
    const size_t n = static_cast<size_t>(g.num_agents());
    if (id_.rates.empty()) {
        // Default to Algorithm-selected common rates; keeps the surrogate
        // family runnable without hand-picked noise.
        const double e = select_error_rates(g, rule_);
        return std::vector<ErrorRates>(n, ErrorRates(e, e));
    }
    if (id_.rates.size() == 1) return std::vector<ErrorRates>(n, id_.rates.front());
    if (id_.rates.size() != n) throw dimension_error("error-rate count differs from agent count");
    return id_.rates;
}

PayoffDistribution StandardMechanism::do_enumerate(const GameInstance& g, int outcome,
                                                   const EnumerationCaps& caps) const {
    switch (id_.kind) {
        case MechanismKind::wswm:
            return PayoffDistribution::point(wswm(g, outcome, rule_), g.wagers);
        case MechanismKind::nawm:
            return PayoffDistribution::point(nawm(g, outcome, rule_, id_.average_mode), g.wagers);
        case MechanismKind::lws:
            return lws(g, outcome, rule_);
        case MechanismKind::lws_mixed:
            return lws_mixed(g, outcome, rule_, id_.lambda);
        case MechanismKind::swm:
            if (g.num_outcomes() != 2)
                return swm_distribution_multi(g, outcome, rule_, confusion_for(g), caps);
            return swm_distribution(g, outcome, rule_, rates_for(g), caps);
        case MechanismKind::swme:
            return swme_distribution(g, outcome, rule_, caps);
        case MechanismKind::rp_swme:
            return rp_swme_distribution(g, outcome, rule_, caps);
        case MechanismKind::s_nawm:
            return surrogate_nawm_distribution(g, outcome, rule_, rates_for(g), caps,
                                               id_.average_mode);
        case MechanismKind::noisy_swme:
            return noisy_swme_true_outcome_distribution(g, outcome, *id_.outcome_noise, rule_,
                                                        caps);
    }
    throw dimension_error("unhandled mechanism kind");
}

PayoffVector StandardMechanism::do_sample(const GameInstance& g, int outcome, RngStream& rng,
                                          const EnumerationCaps& caps) const {
    switch (id_.kind) {
        case MechanismKind::wswm:
            return wswm(g, outcome, rule_);
        case MechanismKind::nawm:
            return nawm(g, outcome, rule_, id_.average_mode);
        case MechanismKind::lws:
            return sample_lws(g, outcome, rule_, rng);
        case MechanismKind::lws_mixed:
            return sample_lws(g, outcome, rule_, rng, id_.lambda);
        case MechanismKind::swm: {
            std::vector<double> scores(static_cast<size_t>(g.num_agents()), 0.0);
            if (g.num_outcomes() != 2) {
                const ConfusionMatrix c = confusion_for(g);
                for (size_t i = 0; i < scores.size(); ++i) {
                    const double u = rng.uniform01();
                    double acc = 0.0;
                    int xt = g.num_outcomes() - 1;
                    for (int v = 0; v < g.num_outcomes(); ++v) {
                        acc += c(outcome, v);
                        if (u < acc) {
                            xt = v;
                            break;
                        }
                    }
                    scores[i] = surrogate_score_multi(rule_, g.predictions[i], xt, c);
                }
                return wswm_from_scores(scores, g.wagers);
            }
            const std::vector<ErrorRates> rates = rates_for(g);
            for (size_t i = 0; i < scores.size(); ++i) {
                const int xt = rng.uniform01() < rates[i].flip_prob(outcome, 1) ? 1 : 0;
                scores[i] = rates[i].noiseless()
                                ? rule_(outcome, g.predictions[i])
                                : surrogate_score_binary(rule_, g.predictions[i], xt, rates[i]);
            }
            return wswm_from_scores(scores, g.wagers);
        }
        case MechanismKind::swme:
            return sample_swme(g, outcome, rule_, rng);
        case MechanismKind::rp_swme:
            return sample_rp_swme(g, outcome, rule_, rng, caps);
        case MechanismKind::s_nawm:
            return sample_surrogate_nawm(g, outcome, rule_, rates_for(g), rng, id_.average_mode);
        case MechanismKind::noisy_swme:
            return sample_noisy_swme(g, outcome, *id_.outcome_noise, rule_, rng, caps);
    }
    throw dimension_error("unhandled mechanism kind");
}

bool StandardMechanism::do_enumerable(const GameInstance& g, const EnumerationCaps& caps) const {
    const long long n = g.num_agents();
    const long long m = g.num_outcomes();
    const auto joint_ok = [&] {
        long long count = 1;
        for (long long i = 0; i < n; ++i) {
            count *= m;
            if (count > caps.max_joint_realizations) return false;
        }
        return true;
    };
    switch (id_.kind) {
        case MechanismKind::wswm:
        case MechanismKind::nawm:
        case MechanismKind::lws:
        case MechanismKind::lws_mixed:
            return true;
        case MechanismKind::swm:
        case MechanismKind::swme:
        case MechanismKind::s_nawm:
            return joint_ok();
        case MechanismKind::rp_swme:
        case MechanismKind::noisy_swme: {
            if (n > caps.max_partition_agents || !joint_ok()) return false;
            // Partition count times the largest per-partition product.
            const double points = static_cast<double>(count_partitions(static_cast<int>(n))) *
                                  std::pow(static_cast<double>(m), static_cast<double>(n));
            return points <= static_cast<double>(caps.max_support_points);
        }
    }
    return false;
}

std::optional<std::vector<double>> StandardMechanism::do_exact_worst_payoffs(
    const GameInstance& g) const {
    const int n = g.num_agents();
    const int m = g.num_outcomes();
    switch (id_.kind) {
        case MechanismKind::wswm:
        case MechanismKind::nawm: {
            std::vector<double> worst(static_cast<size_t>(n),
                                      std::numeric_limits<double>::infinity());
            for (int x = 0; x < m; ++x) {
                const PayoffVector pay = id_.kind == MechanismKind::wswm
                                             ? wswm(g, x, rule_)
                                             : nawm(g, x, rule_, id_.average_mode);
                for (size_t i = 0; i < pay.size(); ++i) worst[i] = std::min(worst[i], pay[i]);
            }
            return worst;
        }
        case MechanismKind::lws:
        case MechanismKind::lws_mixed: {
            std::vector<double> worst(static_cast<size_t>(n),
                                      std::numeric_limits<double>::infinity());
            for (int x = 0; x < m; ++x) {
                const PayoffDistribution d = id_.kind == MechanismKind::lws
                                                 ? lws(g, x, rule_)
                                                 : lws_mixed(g, x, rule_, id_.lambda);
                for (const auto& point : d.support())
                    for (size_t i = 0; i < point.payoffs.size(); ++i)
                        worst[i] = std::min(worst[i], point.payoffs[i]);
            }
            return worst;
        }
        case MechanismKind::swme:
            return swme_worst_payoffs(g, rule_);
        case MechanismKind::rp_swme:
            return rp_swme_worst_payoffs(g, rule_);
        case MechanismKind::swm:
            if (m != 2) return swm_worst_payoffs_multi(g, rule_, confusion_for(g));
            return swm_worst_payoffs(g, rule_, rates_for(g));
        case MechanismKind::s_nawm:
            if (m != 2) return std::nullopt;
            return surrogate_nawm_worst_payoffs(g, rule_, rates_for(g), id_.average_mode);
        case MechanismKind::noisy_swme:
            if (m != 2) return std::nullopt;
            return noisy_swme_worst_payoffs(g, *id_.outcome_noise, rule_);
    }
    return std::nullopt;
}

std::optional<double> StandardMechanism::do_expected_exchanged(const GameInstance& g, int outcome,
                                                               const EnumerationCaps& caps) const {
    if (id_.kind != MechanismKind::rp_swme) return std::nullopt;
    if (g.num_agents() > caps.max_partition_agents) return std::nullopt;
    return rp_swme_expected_exchanged(g, outcome, rule_, caps);
}

bool StandardMechanism::strictly_budget_balanced() const {
    return id_.kind != MechanismKind::nawm && id_.kind != MechanismKind::s_nawm;
}

std::unique_ptr<Mechanism> make_mechanism(const MechanismId& id, ScoringRule rule) {
    return std::make_unique<StandardMechanism>(id, std::move(rule));
}

std::unique_ptr<Mechanism> make_mechanism(const std::string& name, ScoringRule rule) {
    return std::make_unique<StandardMechanism>(MechanismId::parse(name), std::move(rule));
}

} // namespace wager
