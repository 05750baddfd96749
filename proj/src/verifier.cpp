#include "wager/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace wager {

namespace {

std::string describe_instance(const GameInstance& g) {
    std::ostringstream out;
    out << "reports=[";
    for (size_t i = 0; i < g.predictions.size(); ++i) {
        if (i) out << ";";
        for (int k = 0; k < g.predictions[i].num_outcomes(); ++k) {
            if (k) out << ",";
            out << g.predictions[i][k];
        }
    }
    out << "] wagers=[";
    for (size_t i = 0; i < g.wagers.size(); ++i) {
        if (i) out << ",";
        out << g.wagers[i];
    }
    out << "]";
    return out.str();
}

bool identical_reports(const GameInstance& g) {
    for (size_t i = 1; i < g.predictions.size(); ++i)
        if (!(g.predictions[i] == g.predictions.front())) return false;
    return true;
}

double expected_payoff_under_belief(const Mechanism& mech, const GameInstance& g, int agent,
                                    const Prediction& belief, const EnumerationCaps& caps) {
    double total = 0.0;
    for (int x = 0; x < belief.num_outcomes(); ++x) {
        if (belief[x] <= 0.0) continue;
        total += belief[x] * mech.enumerate(g, x, caps).expected_payoffs()[static_cast<size_t>(agent)];
    }
    return total;
}

} // namespace

std::string property_name(PropertyTag tag) {
    switch (tag) {
        case PropertyTag::IR: return "IR";
        case PropertyTag::WIC: return "WIC";
        case PropertyTag::SIC: return "SIC";
        case PropertyTag::WEBB: return "WEBB";
        case PropertyTag::EBB: return "EBB";
        case PropertyTag::sybilproof: return "sybilproof";
        case PropertyTag::anonymity: return "anonymity";
        case PropertyTag::neutrality: return "neutrality";
        case PropertyTag::no_arbitrage: return "no-arbitrage";
        case PropertyTag::PO: return "PO";
    }
    return "unknown";
}

PropertyReport check_budget_balance(const Mechanism& mech,
                                    const std::vector<GameInstance>& instances,
                                    const EnumerationCaps& caps) {
    const bool strict = mech.strictly_budget_balanced();
    PropertyReport report;
    report.mechanism = mech.name();
    report.property = strict ? PropertyTag::EBB : PropertyTag::WEBB;
    report.pass = true;
    for (size_t idx = 0; idx < instances.size(); ++idx) {
        const GameInstance& g = instances[idx];
        for (int x = 0; x < g.num_outcomes(); ++x) {
            const PayoffDistribution d = mech.enumerate(g, x, caps);
            const double err = strict ? d.max_abs_balance_error() : d.max_balance_surplus();
            if (err > kTol) {
                report.pass = false;
                std::ostringstream w;
                w << "instance " << idx << " outcome " << x << " payoff sum off by " << err << ": "
                  << describe_instance(g);
                report.witness = w.str();
                return report;
            }
        }
    }
    return report;
}

IncentiveReports check_ir_sic(const Mechanism& mech, const std::vector<IncentiveConfig>& configs,
                              double grid_step, const EnumerationCaps& caps) {
    IncentiveReports out;
    out.ir = {mech.name(), PropertyTag::IR, true, "", kTol};
    out.wic = {mech.name(), PropertyTag::WIC, true, "", kTol};
    out.sic = {mech.name(), PropertyTag::SIC, true, "", kTol};

    for (size_t ci = 0; ci < configs.size(); ++ci) {
        const IncentiveConfig& cfg = configs[ci];
        GameInstance g;
        g.predictions.push_back(cfg.belief);
        for (const auto& p : cfg.opponents) g.predictions.push_back(p);
        g.wagers = cfg.wagers;
        g.validate();

        const double truthful =
            expected_payoff_under_belief(mech, g, 0, cfg.belief, caps);
        if (out.ir.pass && truthful < -kTol) {
            out.ir.pass = false;
            std::ostringstream w;
            w << "config " << ci << " truthful expected payoff " << truthful << ": "
              << describe_instance(g);
            out.ir.witness = w.str();
        }

        const int steps = static_cast<int>(std::lround(1.0 / grid_step));
        for (int k = 0; k <= steps; ++k) {
            const double r = std::min(static_cast<double>(k) * grid_step, 1.0);
            if (std::fabs(r - cfg.belief.p_one()) <= 1e-9) continue; // honesty itself
            const Prediction report = Prediction::binary(r);
            const double value =
                expected_payoff_under_belief(mech, g.with_report(0, report), 0, cfg.belief, caps);
            if (out.wic.pass && value > truthful + kTol) {
                out.wic.pass = false;
                std::ostringstream w;
                w << "config " << ci << " report " << r << " beats honesty by "
                  << value - truthful << ": " << describe_instance(g);
                out.wic.witness = w.str();
            }
            if (out.sic.pass && value > truthful - kTol) {
                out.sic.pass = false;
                std::ostringstream w;
                w << "config " << ci << " report " << r << " ties or beats honesty (margin "
                  << truthful - value << "): " << describe_instance(g);
                out.sic.witness = w.str();
            }
        }
    }
    return out;
}

PropertyReport check_no_arbitrage(const Mechanism& mech,
                                  const std::vector<GameInstance>& instances,
                                  const EnumerationCaps& caps) {
    PropertyReport report{mech.name(), PropertyTag::no_arbitrage, true, "", kTol};
    for (size_t idx = 0; idx < instances.size(); ++idx) {
        const GameInstance& g = instances[idx];
        if (identical_reports(g)) continue;
        const size_t n = static_cast<size_t>(g.num_agents());
        std::vector<double> lowest(n, 0.0);
        for (int x = 0; x < g.num_outcomes(); ++x) {
            const PayoffDistribution d = mech.enumerate(g, x, caps);
            std::vector<double> floor(n, 0.0);
            for (const auto& point : d.support())
                for (size_t i = 0; i < n; ++i) floor[i] = std::min(floor[i], point.payoffs[i]);
            for (size_t i = 0; i < n; ++i) lowest[i] = std::min(lowest[i], floor[i]);
        }
        for (size_t i = 0; i < n; ++i) {
            if (g.wagers[i] <= 0.0) continue;
            if (lowest[i] >= -kTol) {
                report.pass = false;
                std::ostringstream w;
                w << "instance " << idx << " agent " << i
                  << " never risks a loss under any outcome: " << describe_instance(g);
                report.witness = w.str();
                return report;
            }
        }
    }
    return report;
}

PropertyReport check_po(const Mechanism& mech, const std::vector<GameInstance>& instances,
                        const EnumerationCaps& caps) {
    PropertyReport report{mech.name(), PropertyTag::PO, true, "", kTol};
    for (size_t idx = 0; idx < instances.size(); ++idx) {
        const GameInstance& g = instances[idx];
        const int n = g.num_agents();
        // hits_floor[i][x]: some support point pays agent i exactly -w_i.
        std::vector<std::vector<bool>> hits(static_cast<size_t>(n),
                                            std::vector<bool>(static_cast<size_t>(g.num_outcomes()), false));
        for (int x = 0; x < g.num_outcomes(); ++x) {
            const PayoffDistribution d = mech.enumerate(g, x, caps);
            for (const auto& point : d.support())
                for (int i = 0; i < n; ++i)
                    if (point.payoffs[static_cast<size_t>(i)] <=
                        -g.wagers[static_cast<size_t>(i)] + kTol)
                        hits[static_cast<size_t>(i)][static_cast<size_t>(x)] = true;
        }
        const auto full_loss_somewhere = [&](int i) {
            for (int x = 0; x < g.num_outcomes(); ++x)
                if (hits[static_cast<size_t>(i)][static_cast<size_t>(x)]) return true;
            return false;
        };
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                if (g.predictions[static_cast<size_t>(i)] == g.predictions[static_cast<size_t>(j)])
                    continue;
                if (!full_loss_somewhere(i) && !full_loss_somewhere(j)) {
                    report.pass = false;
                    std::ostringstream w;
                    w << "instance " << idx << " agents " << i << "," << j
                      << " both keep part of their wager under every outcome: "
                      << describe_instance(g);
                    report.witness = w.str();
                    return report;
                }
            }
    }
    return report;
}

PropertyReport check_sybilproof(const Mechanism& mech, const std::vector<GameInstance>& instances,
                                const std::vector<double>& split_fractions,
                                const EnumerationCaps& caps) {
    PropertyReport report{mech.name(), PropertyTag::sybilproof, true, "", kTol};
    std::vector<double> splits = split_fractions;
    if (splits.empty())
        for (int k = 1; k <= 9; ++k) splits.push_back(0.1 * k);

    for (size_t idx = 0; idx < instances.size(); ++idx) {
        const GameInstance& g = instances[idx];
        if (g.wagers.front() <= 0.0) continue;
        const Prediction belief = g.predictions.front(); // truthful common report
        const double unsplit = expected_payoff_under_belief(mech, g, 0, belief, caps);

        for (double f : splits) {
            GameInstance split;
            split.predictions.push_back(belief);
            split.predictions.push_back(belief);
            split.wagers.push_back(g.wagers.front() * f);
            split.wagers.push_back(g.wagers.front() * (1.0 - f));
            for (size_t j = 1; j < g.predictions.size(); ++j) {
                split.predictions.push_back(g.predictions[j]);
                split.wagers.push_back(g.wagers[j]);
            }
            double combined = 0.0;
            for (int x = 0; x < belief.num_outcomes(); ++x) {
                if (belief[x] <= 0.0) continue;
                const std::vector<double> expect = mech.enumerate(split, x, caps).expected_payoffs();
                combined += belief[x] * (expect[0] + expect[1]);
            }
            if (combined > unsplit + kTol) {
                report.pass = false;
                std::ostringstream w;
                w << "instance " << idx << " split " << f << " raises expected payoff by "
                  << combined - unsplit << ": " << describe_instance(g);
                report.witness = w.str();
                return report;
            }
        }
    }
    return report;
}

namespace {

// Multiset equality of weighted payoff vectors within tolerance, by greedy
// matching; supports here stay small enough for the quadratic scan.
bool distributions_match(const PayoffDistribution& a, const PayoffDistribution& b,
                         const std::vector<int>& agent_map) {
    const auto& pa = a.support();
    const auto& pb = b.support();
    // Coalesce nothing; match total probability mass per payoff vector.
    std::vector<double> remaining(pb.size(), 0.0);
    for (size_t k = 0; k < pb.size(); ++k) remaining[k] = pb[k].prob;

    for (const auto& point : pa) {
        double need = point.prob;
        for (size_t k = 0; k < pb.size() && need > kTol; ++k) {
            if (remaining[k] <= kTol) continue;
            bool same = true;
            for (size_t i = 0; i < point.payoffs.size() && same; ++i)
                if (std::fabs(point.payoffs[i] -
                              pb[k].payoffs[static_cast<size_t>(agent_map[i])]) > kTol)
                    same = false;
            if (!same) continue;
            const double used = std::min(need, remaining[k]);
            need -= used;
            remaining[k] -= used;
        }
        if (need > kTol) return false;
    }
    for (double r : remaining)
        if (r > kTol) return false;
    return true;
}

std::vector<std::vector<int>> permutations_of(int n) {
    std::vector<int> base(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) base[static_cast<size_t>(i)] = i;
    std::vector<std::vector<int>> out;
    do {
        out.push_back(base);
    } while (std::next_permutation(base.begin(), base.end()));
    return out;
}

} // namespace

SymmetryReports check_symmetries(const Mechanism& mech,
                                 const std::vector<GameInstance>& instances,
                                 const EnumerationCaps& caps) {
    SymmetryReports out;
    out.anonymity = {mech.name(), PropertyTag::anonymity, true, "", kTol};
    out.neutrality = {mech.name(), PropertyTag::neutrality, true, "", kTol};

    for (size_t idx = 0; idx < instances.size(); ++idx) {
        const GameInstance& g = instances[idx];
        const int n = g.num_agents();
        const int m = g.num_outcomes();

        if (out.anonymity.pass && n <= 4) {
            for (const auto& sigma : permutations_of(n)) {
                GameInstance permuted;
                permuted.happening_probs = g.happening_probs;
                permuted.predictions.resize(static_cast<size_t>(n));
                permuted.wagers.resize(static_cast<size_t>(n));
                for (int i = 0; i < n; ++i) {
                    permuted.predictions[static_cast<size_t>(i)] =
                        g.predictions[static_cast<size_t>(sigma[static_cast<size_t>(i)])];
                    permuted.wagers[static_cast<size_t>(i)] =
                        g.wagers[static_cast<size_t>(sigma[static_cast<size_t>(i)])];
                }
                // Agent i of the permuted game is original agent sigma[i];
                // original agent payoffs must match through that map.
                std::vector<int> inverse(static_cast<size_t>(n), 0);
                for (int i = 0; i < n; ++i)
                    inverse[static_cast<size_t>(sigma[static_cast<size_t>(i)])] = i;
                for (int x = 0; x < m && out.anonymity.pass; ++x) {
                    if (!distributions_match(mech.enumerate(g, x, caps),
                                             mech.enumerate(permuted, x, caps), inverse)) {
                        out.anonymity.pass = false;
                        std::ostringstream w;
                        w << "instance " << idx << " outcome " << x
                          << " distribution changed under an agent permutation: "
                          << describe_instance(g);
                        out.anonymity.witness = w.str();
                    }
                }
                if (!out.anonymity.pass) break;
            }
        }

        if (out.neutrality.pass && m <= 3) {
            std::vector<int> identity_map(static_cast<size_t>(n));
            for (int i = 0; i < n; ++i) identity_map[static_cast<size_t>(i)] = i;
            for (const auto& sigma : permutations_of(m)) {
                GameInstance relabeled;
                relabeled.wagers = g.wagers;
                for (const auto& p : g.predictions) {
                    std::vector<double> probs(static_cast<size_t>(m), 0.0);
                    for (int x = 0; x < m; ++x)
                        probs[static_cast<size_t>(sigma[static_cast<size_t>(x)])] = p[x];
                    relabeled.predictions.push_back(Prediction(std::move(probs)));
                }
                for (int x = 0; x < m && out.neutrality.pass; ++x) {
                    if (!distributions_match(
                            mech.enumerate(g, x, caps),
                            mech.enumerate(relabeled, sigma[static_cast<size_t>(x)], caps),
                            identity_map)) {
                        out.neutrality.pass = false;
                        std::ostringstream w;
                        w << "instance " << idx << " outcome " << x
                          << " distribution changed under an outcome relabeling: "
                          << describe_instance(g);
                        out.neutrality.witness = w.str();
                    }
                }
                if (!out.neutrality.pass) break;
            }
        }
    }
    return out;
}

// --- Negative controls ------------------------------------------------------

PayoffDistribution CorruptedStubMechanism::do_enumerate(const GameInstance& g, int outcome,
                                                        const EnumerationCaps&) const {
    PayoffVector pay = wswm(g, outcome, ScoringRule::brier());
    pay.front() += bonus_;
    return PayoffDistribution::point(std::move(pay), g.wagers);
}

PayoffVector CorruptedStubMechanism::do_sample(const GameInstance& g, int outcome, RngStream&,
                                               const EnumerationCaps&) const {
    PayoffVector pay = wswm(g, outcome, ScoringRule::brier());
    pay.front() += bonus_;
    return pay;
}

namespace {

PayoffVector midpoint_payoffs(const GameInstance& g) {
    std::vector<double> scores(static_cast<size_t>(g.num_agents()), 0.0);
    for (size_t i = 0; i < scores.size(); ++i)
        scores[i] = 2.0 * std::fabs(g.predictions[i].p_one() - 0.5);
    return wswm_from_scores(scores, g.wagers);
}

} // namespace

PayoffDistribution MidpointStubMechanism::do_enumerate(const GameInstance& g, int,
                                                       const EnumerationCaps&) const {
    return PayoffDistribution::point(midpoint_payoffs(g), g.wagers);
}

PayoffVector MidpointStubMechanism::do_sample(const GameInstance& g, int, RngStream&,
                                              const EnumerationCaps&) const {
    return midpoint_payoffs(g);
}

PayoffDistribution BonusStubMechanism::do_enumerate(const GameInstance& g, int outcome,
                                                    const EnumerationCaps&) const {
    PayoffVector pay = wswm(g, outcome, ScoringRule::brier());
    for (double& p : pay) p += bonus_;
    return PayoffDistribution::point(std::move(pay), g.wagers);
}

PayoffVector BonusStubMechanism::do_sample(const GameInstance& g, int outcome, RngStream&,
                                           const EnumerationCaps&) const {
    PayoffVector pay = wswm(g, outcome, ScoringRule::brier());
    for (double& p : pay) p += bonus_;
    return pay;
}

std::unique_ptr<Mechanism> make_verify_mechanism(const std::string& name, ScoringRule rule) {
    if (name == "stub-corrupt") return std::make_unique<CorruptedStubMechanism>();
    if (name == "stub-midpay") return std::make_unique<MidpointStubMechanism>();
    if (name == "stub-bonus") return std::make_unique<BonusStubMechanism>();
    return make_mechanism(name, std::move(rule));
}

} // namespace wager
