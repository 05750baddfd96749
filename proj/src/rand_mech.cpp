#include "wager/rand_mech.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>

namespace wager {

namespace {

GameInstance sub_instance(const GameInstance& g, const Group& group) {
    GameInstance sub;
    sub.predictions.reserve(group.size());
    sub.wagers.reserve(group.size());
    for (int idx : group) {
        sub.predictions.push_back(g.predictions[static_cast<size_t>(idx)]);
        sub.wagers.push_back(g.wagers[static_cast<size_t>(idx)]);
    }
    sub.happening_probs = g.happening_probs;
    sub.realized_outcome = g.realized_outcome;
    return sub;
}

// One positive-probability surrogate value for one agent.
struct Branch {
    int value;
    double prob;
};

long long branch_product(const std::vector<std::vector<Branch>>& branches) {
    long long count = 1;
    for (const auto& b : branches) {
        count *= static_cast<long long>(b.size());
        if (count < 0) return count; // overflow guard; caps catch it anyway
    }
    return count;
}

// Walks the cartesian product of per-agent branches, handing each joint
// realization (probability, chosen surrogate values) to the sink.
template <typename Sink>
void enumerate_joint(const std::vector<std::vector<Branch>>& branches, Sink&& sink) {
    const size_t n = branches.size();
    std::vector<size_t> cursor(n, 0);
    std::vector<int> values(n, 0);
    for (;;) {
        double prob = 1.0;
        for (size_t i = 0; i < n; ++i) {
            prob *= branches[i][cursor[i]].prob;
            values[i] = branches[i][cursor[i]].value;
        }
        sink(prob, values);
        size_t pos = 0;
        while (pos < n && ++cursor[pos] == branches[pos].size()) cursor[pos++] = 0;
        if (pos == n) break;
    }
}

std::vector<double> worst_case_separable(const std::vector<double>& phi_min,
                                         const std::vector<double>& phi_max,
                                         const std::vector<double>& wagers) {
    const size_t n = wagers.size();
    double total = 0.0, weighted_max = 0.0;
    for (size_t i = 0; i < n; ++i) {
        total += wagers[i];
        weighted_max += wagers[i] * phi_max[i];
    }
    std::vector<double> worst(n, 0.0);
    if (total <= 0.0) return worst;
    for (size_t i = 0; i < n; ++i) {
        if (wagers[i] == 0.0) continue;
        worst[i] = wagers[i] / total *
                   (phi_min[i] * (total - wagers[i]) - (weighted_max - wagers[i] * phi_max[i]));
    }
    return worst;
}

std::vector<double> det_worst_over_outcomes(const GameInstance& g, const ScoringRule& rule) {
    std::vector<double> worst(static_cast<size_t>(g.num_agents()),
                              std::numeric_limits<double>::infinity());
    for (int x = 0; x < g.num_outcomes(); ++x) {
        const PayoffVector pay = wswm(g, x, rule);
        for (size_t i = 0; i < pay.size(); ++i) worst[i] = std::min(worst[i], pay[i]);
    }
    return worst;
}

} // namespace

// --- Random pairing -------------------------------------------------------

std::uint64_t count_partitions(int num_agents) {
    if (num_agents < 2) throw dimension_error("partitions need at least two agents");
    auto double_factorial = [](int k) {
        std::uint64_t r = 1;
        for (int v = k; v > 1; v -= 2) r *= static_cast<std::uint64_t>(v);
        return r;
    };
    if (num_agents % 2 == 0) return double_factorial(num_agents - 1);
    // Choose the triple, then match the rest.
    const std::uint64_t choose3 = static_cast<std::uint64_t>(num_agents) * (num_agents - 1) *
                                  (num_agents - 2) / 6;
    return choose3 * double_factorial(num_agents - 4);
}

namespace {

void enumerate_matchings(std::vector<int>& pool, Partition& current,
                         std::vector<Partition>& out) {
    if (pool.empty()) {
        out.push_back(current);
        return;
    }
    const int first = pool.front();
    for (size_t k = 1; k < pool.size(); ++k) {
        const int partner = pool[k];
        std::vector<int> rest;
        rest.reserve(pool.size() - 2);
        for (size_t t = 1; t < pool.size(); ++t)
            if (t != k) rest.push_back(pool[t]);
        current.push_back({first, partner});
        enumerate_matchings(rest, current, out);
        current.pop_back();
    }
}

void canonicalize(Partition& p) {
    for (Group& g : p) std::sort(g.begin(), g.end());
    std::sort(p.begin(), p.end(),
              [](const Group& a, const Group& b) { return a.front() < b.front(); });
}

} // namespace

std::vector<Partition> enumerate_partitions(int num_agents, const EnumerationCaps& caps) {
    if (num_agents < 2) throw dimension_error("partitions need at least two agents");
    if (num_agents > caps.max_partition_agents)
        throw cap_exceeded_error("partition enumeration beyond cap; use the sampled form");

    std::vector<Partition> out;
    Partition current;
    if (num_agents % 2 == 0) {
        std::vector<int> pool(static_cast<size_t>(num_agents));
        for (int i = 0; i < num_agents; ++i) pool[static_cast<size_t>(i)] = i;
        enumerate_matchings(pool, current, out);
    } else {
        for (int a = 0; a < num_agents; ++a)
            for (int b = a + 1; b < num_agents; ++b)
                for (int c = b + 1; c < num_agents; ++c) {
                    std::vector<int> rest;
                    for (int v = 0; v < num_agents; ++v)
                        if (v != a && v != b && v != c) rest.push_back(v);
                    current.push_back({a, b, c});
                    if (rest.empty())
                        out.push_back(current);
                    else
                        enumerate_matchings(rest, current, out);
                    current.pop_back();
                }
    }
    for (Partition& p : out) canonicalize(p);
    return out;
}

Partition sample_partition(int num_agents, RngStream& rng, const EnumerationCaps& caps) {
    if (num_agents < 2) throw dimension_error("partitions need at least two agents");
    if (num_agents <= caps.max_partition_agents) {
        const std::vector<Partition> all = enumerate_partitions(num_agents, caps);
        auto idx = static_cast<size_t>(rng.uniform01() * static_cast<double>(all.size()));
        if (idx >= all.size()) idx = all.size() - 1;
        return all[idx];
    }
    // Fisher-Yates shuffle, pair off, last three form the odd triple.
    std::vector<int> order(static_cast<size_t>(num_agents));
    for (int i = 0; i < num_agents; ++i) order[static_cast<size_t>(i)] = i;
    for (int i = num_agents - 1; i > 0; --i)
        std::swap(order[static_cast<size_t>(i)],
                  order[static_cast<size_t>(rng.below(static_cast<uint64_t>(i + 1)))]);
    Partition p;
    const int pairs = num_agents % 2 == 0 ? num_agents / 2 : (num_agents - 3) / 2;
    for (int k = 0; k < pairs; ++k)
        p.push_back({order[static_cast<size_t>(2 * k)], order[static_cast<size_t>(2 * k + 1)]});
    if (num_agents % 2 == 1)
        p.push_back({order[static_cast<size_t>(num_agents - 3)],
                     order[static_cast<size_t>(num_agents - 2)],
                     order[static_cast<size_t>(num_agents - 1)]});
    canonicalize(p);
    return p;
}

// --- Lottery wrapper ------------------------------------------------------

PayoffDistribution lottery_wrap(const PayoffVector& det_payoffs,
                                const std::vector<double>& wagers) {
    const size_t n = wagers.size();
    if (det_payoffs.size() != n) throw dimension_error("payoff count differs from wager count");
    double total_wager = 0.0;
    for (double w : wagers) total_wager += w;

    std::vector<double> tickets(n, 0.0);
    double ticket_sum = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double t = wagers[i] + det_payoffs[i];
        if (t < -kTol)
            throw invalid_base_mechanism_error(
                "lottery base mechanism paid below the wager constraint");
        tickets[i] = std::max(t, 0.0);
        ticket_sum += tickets[i];
    }
    if (ticket_sum <= 0.0)
        return PayoffDistribution::point(PayoffVector(n, 0.0), wagers);

    std::vector<WeightedPayoff> support;
    for (size_t winner = 0; winner < n; ++winner) {
        if (tickets[winner] <= 0.0) continue;
        PayoffVector pay(n, 0.0);
        for (size_t i = 0; i < n; ++i)
            pay[i] = i == winner ? total_wager - wagers[i] : -wagers[i];
        support.push_back({tickets[winner] / ticket_sum, std::move(pay)});
    }
    return PayoffDistribution(std::move(support), wagers);
}

PayoffDistribution lws(const GameInstance& g, int outcome, const ScoringRule& rule) {
    return lottery_wrap(wswm(g, outcome, rule), g.wagers);
}

PayoffDistribution lws_mixed(const GameInstance& g, int outcome, const ScoringRule& rule,
                             double lambda) {
    return mix_distributions(lws(g, outcome, rule),
                             PayoffDistribution::point(wswm(g, outcome, rule), g.wagers), lambda);
}

PayoffVector sample_lws(const GameInstance& g, int outcome, const ScoringRule& rule,
                        RngStream& rng, double lambda) {
    const PayoffVector det = wswm(g, outcome, rule);
    if (lambda < 1.0 && rng.uniform01() >= lambda) return det;

    const size_t n = g.wagers.size();
    double total_wager = 0.0;
    for (double w : g.wagers) total_wager += w;
    std::vector<double> tickets(n, 0.0);
    double ticket_sum = 0.0;
    for (size_t i = 0; i < n; ++i) {
        tickets[i] = std::max(g.wagers[i] + det[i], 0.0);
        ticket_sum += tickets[i];
    }
    if (ticket_sum <= 0.0) return PayoffVector(n, 0.0);
    const double u = rng.uniform01() * ticket_sum;
    double acc = 0.0;
    size_t winner = n - 1;
    for (size_t i = 0; i < n; ++i) {
        acc += tickets[i];
        if (u < acc) {
            winner = i;
            break;
        }
    }
    PayoffVector pay(n, 0.0);
    for (size_t i = 0; i < n; ++i)
        pay[i] = i == winner ? total_wager - g.wagers[i] : -g.wagers[i];
    return pay;
}

// --- Surrogate wagering ---------------------------------------------------

namespace {

std::vector<std::vector<Branch>> binary_branches(const GameInstance& g, int outcome,
                                                 const std::vector<ErrorRates>& rates) {
    std::vector<std::vector<Branch>> branches(static_cast<size_t>(g.num_agents()));
    for (size_t i = 0; i < branches.size(); ++i)
        for (int v = 0; v < 2; ++v) {
            const double p = rates[i].flip_prob(outcome, v);
            if (p > 0.0) branches[i].push_back({v, p});
        }
    return branches;
}

PayoffDistribution enumerate_surrogate(const GameInstance& g,
                                       const std::vector<std::vector<Branch>>& branches,
                                       const std::vector<std::vector<double>>& phi,
                                       const EnumerationCaps& caps,
                                       const std::vector<double>* anchors) {
    if (branch_product(branches) > caps.max_joint_realizations || branch_product(branches) < 0)
        throw cap_exceeded_error("surrogate enumeration beyond cap; use the sampled form");

    const size_t n = static_cast<size_t>(g.num_agents());
    std::vector<WeightedPayoff> support;
    std::vector<double> scores(n, 0.0);
    enumerate_joint(branches, [&](double prob, const std::vector<int>& values) {
        for (size_t i = 0; i < n; ++i) scores[i] = phi[i][static_cast<size_t>(values[i])];
        PayoffVector pay = wswm_from_scores(scores, g.wagers);
        if (anchors)
            for (size_t i = 0; i < n; ++i) pay[i] -= (*anchors)[i];
        support.push_back({prob, std::move(pay)});
    });
    return PayoffDistribution(std::move(support), g.wagers);
}

} // namespace

PayoffDistribution swm_distribution(const GameInstance& g, int outcome, const ScoringRule& rule,
                                    const std::vector<ErrorRates>& rates,
                                    const EnumerationCaps& caps) {
    g.validate();
    if (g.num_outcomes() != 2) throw dimension_error("binary surrogate wagering needs M = 2");
    if (rates.size() != static_cast<size_t>(g.num_agents()))
        throw dimension_error("one error-rate pair per agent required");

    std::vector<std::vector<double>> phi(static_cast<size_t>(g.num_agents()),
                                         std::vector<double>(2, 0.0));
    for (size_t i = 0; i < phi.size(); ++i)
        for (int v = 0; v < 2; ++v)
            phi[i][static_cast<size_t>(v)] =
                rates[i].flip_prob(outcome, v) > 0.0
                    ? surrogate_score_binary(rule, g.predictions[i], v, rates[i])
                    : 0.0;
    return enumerate_surrogate(g, binary_branches(g, outcome, rates), phi, caps, nullptr);
}

PayoffDistribution swm_distribution_multi(const GameInstance& g, int outcome,
                                          const ScoringRule& rule,
                                          const ConfusionMatrix& confusion,
                                          const EnumerationCaps& caps) {
    g.validate();
    const int m = g.num_outcomes();
    if (confusion.size() != m) throw dimension_error("confusion matrix size differs from M");

    const size_t n = static_cast<size_t>(g.num_agents());
    std::vector<std::vector<Branch>> branches(n);
    std::vector<std::vector<double>> phi(n);
    for (size_t i = 0; i < n; ++i) {
        phi[i] = surrogate_score_vector(rule, g.predictions[i], confusion);
        for (int v = 0; v < m; ++v) {
            const double p = confusion(outcome, v);
            if (p > 0.0) branches[i].push_back({v, p});
        }
    }
    return enumerate_surrogate(g, branches, phi, caps, nullptr);
}

std::vector<double> error_rate_scores(const GameInstance& g, const ScoringRule& rule) {
    g.validate();
    const int n = g.num_agents();
    if (n < 2) throw dimension_error("error-rate selection needs at least two agents");
    const double total = g.total_wager();
    std::vector<double> r(static_cast<size_t>(n), 0.5);
    if (total <= 0.0) return r;

    std::vector<double> s_worst(static_cast<size_t>(n)), s_best(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        double lo = rule(0, g.predictions[static_cast<size_t>(i)]);
        double hi = lo;
        for (int x = 1; x < g.num_outcomes(); ++x) {
            const double s = rule(x, g.predictions[static_cast<size_t>(i)]);
            lo = std::min(lo, s);
            hi = std::max(hi, s);
        }
        s_worst[static_cast<size_t>(i)] = lo;
        s_best[static_cast<size_t>(i)] = hi;
    }

    double weighted_spread = 0.0, weighted_level = 0.0;
    for (int j = 0; j < n; ++j) {
        const double wj = g.wagers[static_cast<size_t>(j)] / total;
        weighted_spread += wj * (s_worst[static_cast<size_t>(j)] - s_best[static_cast<size_t>(j)]);
        weighted_level += wj * (s_worst[static_cast<size_t>(j)] + s_best[static_cast<size_t>(j)]);
    }
    for (int i = 0; i < n; ++i) {
        const double wi = g.wagers[static_cast<size_t>(i)] / total;
        const double own_spread = s_worst[static_cast<size_t>(i)] - s_best[static_cast<size_t>(i)];
        const double numer = (1.0 - wi) * own_spread + (weighted_spread - wi * own_spread);
        const double denom = 2.0 * (2.0 + s_worst[static_cast<size_t>(i)] +
                                    s_best[static_cast<size_t>(i)] - weighted_level);
        if (std::fabs(denom) < 1e-12)
            throw algorithm_inconsistency_error("error-rate selection hit a zero denominator");
        r[static_cast<size_t>(i)] = 0.5 + numer / denom;
    }
    return r;
}

double select_error_rates(const GameInstance& g, const ScoringRule& rule) {
    const std::vector<double> r = error_rate_scores(g, rule);
    double lowest = r.front();
    for (double v : r) lowest = std::min(lowest, v);
    if (lowest >= 0.5 - kTol && lowest <= 0.5 + kTol) return 0.0;
    if (lowest < -kTol || lowest > 0.5 + kTol)
        throw algorithm_inconsistency_error("selection score left (0, 0.5]");
    return std::clamp(lowest, 0.0, 0.5);
}

double select_confusion_mass(const GameInstance& g, const ScoringRule& rule) {
    g.validate();
    const int n = g.num_agents();
    const int m = g.num_outcomes();
    if (n < 2) throw dimension_error("error-rate selection needs at least two agents");
    if (m <= 2) throw dimension_error("confusion-mass selection applies to M > 2");
    const double total = g.total_wager();
    if (total <= 0.0) return 0.0;

    double spread = 0.0;
    for (int i = 0; i < n; ++i) {
        double lo = rule(0, g.predictions[static_cast<size_t>(i)]);
        double hi = lo;
        for (int x = 1; x < m; ++x) {
            const double s = rule(x, g.predictions[static_cast<size_t>(i)]);
            lo = std::min(lo, s);
            hi = std::max(hi, s);
        }
        spread += g.wagers[static_cast<size_t>(i)] * (hi - lo);
    }
    if (spread <= kTol) return 0.0; // every weighted report is uninformative

    const auto feasible = [&](double eps) {
        if (eps <= 0.0) return true;
        const ConfusionMatrix c = uniform_confusion_mass(m, eps);
        std::vector<double> phi_min(static_cast<size_t>(n)), phi_max(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) {
            const std::vector<double> phi =
                surrogate_score_vector(rule, g.predictions[static_cast<size_t>(i)], c);
            phi_min[static_cast<size_t>(i)] = *std::min_element(phi.begin(), phi.end());
            phi_max[static_cast<size_t>(i)] = *std::max_element(phi.begin(), phi.end());
        }
        const std::vector<double> worst = worst_case_separable(phi_min, phi_max, g.wagers);
        for (int i = 0; i < n; ++i)
            if (worst[static_cast<size_t>(i)] < -g.wagers[static_cast<size_t>(i)] - 1e-12)
                return false;
        return true;
    };

    double lo = 0.0, hi = 1.0 / m - 1e-9;
    if (feasible(hi)) return hi;
    for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        (feasible(mid) ? lo : hi) = mid;
    }
    return lo;
}

PayoffDistribution swme_distribution(const GameInstance& g, int outcome, const ScoringRule& rule,
                                     const EnumerationCaps& caps) {
    if (g.num_outcomes() == 2) {
        const double e = select_error_rates(g, rule);
        const std::vector<ErrorRates> rates(static_cast<size_t>(g.num_agents()), ErrorRates(e, e));
        return swm_distribution(g, outcome, rule, rates, caps);
    }
    const double eps = select_confusion_mass(g, rule);
    return swm_distribution_multi(g, outcome, rule, uniform_confusion_mass(g.num_outcomes(), eps),
                                  caps);
}

PayoffVector sample_swme(const GameInstance& g, int outcome, const ScoringRule& rule,
                         RngStream& rng) {
    const size_t n = static_cast<size_t>(g.num_agents());
    std::vector<double> scores(n, 0.0);
    if (g.num_outcomes() == 2) {
        const double e = select_error_rates(g, rule);
        const ErrorRates rates(e, e);
        for (size_t i = 0; i < n; ++i) {
            const double u = rng.uniform01();
            const int xt = u < rates.flip_prob(outcome, 1) ? 1 : 0;
            scores[i] = e == 0.0 ? rule(outcome, g.predictions[i])
                                 : surrogate_score_binary(rule, g.predictions[i], xt, rates);
        }
    } else {
        const double eps = select_confusion_mass(g, rule);
        const ConfusionMatrix c = uniform_confusion_mass(g.num_outcomes(), eps);
        for (size_t i = 0; i < n; ++i) {
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
            scores[i] = eps == 0.0 ? rule(outcome, g.predictions[i])
                                   : surrogate_score_multi(rule, g.predictions[i], xt, c);
        }
    }
    return wswm_from_scores(scores, g.wagers);
}

std::vector<double> swme_worst_payoffs(const GameInstance& g, const ScoringRule& rule) {
    const size_t n = static_cast<size_t>(g.num_agents());
    if (g.num_outcomes() == 2) {
        const double e = select_error_rates(g, rule);
        if (e == 0.0) return det_worst_over_outcomes(g, rule);
        const ErrorRates rates(e, e);
        std::vector<double> phi_min(n), phi_max(n);
        for (size_t i = 0; i < n; ++i) {
            const double a = surrogate_score_binary(rule, g.predictions[i], 0, rates);
            const double b = surrogate_score_binary(rule, g.predictions[i], 1, rates);
            phi_min[i] = std::min(a, b);
            phi_max[i] = std::max(a, b);
        }
        return worst_case_separable(phi_min, phi_max, g.wagers);
    }
    const double eps = select_confusion_mass(g, rule);
    if (eps == 0.0) return det_worst_over_outcomes(g, rule);
    const ConfusionMatrix c = uniform_confusion_mass(g.num_outcomes(), eps);
    std::vector<double> phi_min(n), phi_max(n);
    for (size_t i = 0; i < n; ++i) {
        const std::vector<double> phi = surrogate_score_vector(rule, g.predictions[i], c);
        phi_min[i] = *std::min_element(phi.begin(), phi.end());
        phi_max[i] = *std::max_element(phi.begin(), phi.end());
    }
    return worst_case_separable(phi_min, phi_max, g.wagers);
}

// --- Random partition SWME -------------------------------------------------

namespace {

// Cartesian product of per-group distributions, payoffs scattered to the
// group members, all scaled by the partition weight.
void combine_partition(const std::vector<Group>& groups,
                       const std::vector<PayoffDistribution>& dists, double weight, size_t n,
                       std::size_t max_points, std::vector<WeightedPayoff>& out) {
    std::vector<WeightedPayoff> acc;
    acc.push_back({weight, PayoffVector(n, 0.0)});
    for (size_t gi = 0; gi < groups.size(); ++gi) {
        std::vector<WeightedPayoff> next;
        next.reserve(acc.size() * dists[gi].support().size());
        for (const auto& base : acc)
            for (const auto& point : dists[gi].support()) {
                WeightedPayoff merged = base;
                merged.prob *= point.prob;
                for (size_t k = 0; k < groups[gi].size(); ++k)
                    merged.payoffs[static_cast<size_t>(groups[gi][k])] = point.payoffs[k];
                next.push_back(std::move(merged));
            }
        acc = std::move(next);
        if (out.size() + acc.size() > max_points)
            throw cap_exceeded_error("partition product support beyond cap; use the sampled form");
    }
    for (auto& point : acc) out.push_back(std::move(point));
}

} // namespace

PayoffDistribution rp_swme_distribution(const GameInstance& g, int outcome,
                                        const ScoringRule& rule, const EnumerationCaps& caps) {
    g.validate();
    const size_t n = static_cast<size_t>(g.num_agents());
    if (n < 2) throw dimension_error("random partition needs at least two agents");
    const std::vector<Partition> partitions = enumerate_partitions(g.num_agents(), caps);
    const double weight = 1.0 / static_cast<double>(partitions.size());

    std::vector<WeightedPayoff> support;
    for (const Partition& partition : partitions) {
        std::vector<PayoffDistribution> dists;
        dists.reserve(partition.size());
        for (const Group& group : partition)
            dists.push_back(swme_distribution(sub_instance(g, group), outcome, rule, caps));
        combine_partition(partition, dists, weight, n, caps.max_support_points, support);
    }
    return PayoffDistribution(std::move(support), g.wagers);
}

PayoffVector sample_rp_swme(const GameInstance& g, int outcome, const ScoringRule& rule,
                            RngStream& rng, const EnumerationCaps& caps) {
    const size_t n = static_cast<size_t>(g.num_agents());
    // Draw order: one uniform per agent (ascending), then the partition.
    std::vector<double> us(n, 0.0);
    for (size_t i = 0; i < n; ++i) us[i] = rng.uniform01();
    const Partition partition = sample_partition(g.num_agents(), rng, caps);

    PayoffVector pay(n, 0.0);
    for (const Group& group : partition) {
        const GameInstance sub = sub_instance(g, group);
        std::vector<double> scores(group.size(), 0.0);
        if (g.num_outcomes() == 2) {
            const double e = select_error_rates(sub, rule);
            const ErrorRates rates(e, e);
            for (size_t k = 0; k < group.size(); ++k) {
                const int xt =
                    us[static_cast<size_t>(group[k])] < rates.flip_prob(outcome, 1) ? 1 : 0;
                scores[k] = e == 0.0 ? rule(outcome, sub.predictions[k])
                                     : surrogate_score_binary(rule, sub.predictions[k], xt, rates);
            }
        } else {
            const double eps = select_confusion_mass(sub, rule);
            const ConfusionMatrix c = uniform_confusion_mass(g.num_outcomes(), eps);
            for (size_t k = 0; k < group.size(); ++k) {
                double acc = 0.0;
                int xt = g.num_outcomes() - 1;
                for (int v = 0; v < g.num_outcomes(); ++v) {
                    acc += c(outcome, v);
                    if (us[static_cast<size_t>(group[k])] < acc) {
                        xt = v;
                        break;
                    }
                }
                scores[k] = eps == 0.0 ? rule(outcome, sub.predictions[k])
                                       : surrogate_score_multi(rule, sub.predictions[k], xt, c);
            }
        }
        const PayoffVector group_pay = wswm_from_scores(scores, sub.wagers);
        for (size_t k = 0; k < group.size(); ++k)
            pay[static_cast<size_t>(group[k])] = group_pay[k];
    }
    return pay;
}

namespace {

// Visits every group an agent can land in under some partition: all pairs
// (plus, for odd N >= 5, all triples); N in {2,3} has a single group.
template <typename Fn>
void for_each_candidate_group(int n, Fn&& fn) {
    if (n == 2) {
        fn(Group{0, 1});
        return;
    }
    if (n == 3) {
        fn(Group{0, 1, 2});
        return;
    }
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) fn(Group{a, b});
    if (n % 2 == 1)
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b)
                for (int c = b + 1; c < n; ++c) fn(Group{a, b, c});
}

} // namespace

std::vector<double> rp_swme_worst_payoffs(const GameInstance& g, const ScoringRule& rule) {
    g.validate();
    const int n = g.num_agents();
    if (n < 2) throw dimension_error("random partition needs at least two agents");
    std::vector<double> worst(static_cast<size_t>(n), std::numeric_limits<double>::infinity());
    for_each_candidate_group(n, [&](const Group& group) {
        const std::vector<double> w = swme_worst_payoffs(sub_instance(g, group), rule);
        for (size_t k = 0; k < group.size(); ++k) {
            double& slot = worst[static_cast<size_t>(group[k])];
            slot = std::min(slot, w[k]);
        }
    });
    return worst;
}

double rp_swme_expected_exchanged(const GameInstance& g, int outcome, const ScoringRule& rule,
                                  const EnumerationCaps& caps) {
    const double total = g.total_wager();
    if (total <= 0.0) throw dimension_error("exchange rate undefined for zero total wager");
    const std::vector<Partition> partitions = enumerate_partitions(g.num_agents(), caps);

    // Groups recur across partitions; memoize each group's expected sum of
    // positive payoffs.
    std::map<Group, double> group_exchanged;
    const auto group_value = [&](const Group& group) {
        const auto found = group_exchanged.find(group);
        if (found != group_exchanged.end()) return found->second;
        const PayoffDistribution d = swme_distribution(sub_instance(g, group), outcome, rule, caps);
        double expect = 0.0;
        for (const auto& point : d.support()) {
            double gains = 0.0;
            for (double p : point.payoffs)
                if (p > 0.0) gains += p;
            expect += point.prob * gains;
        }
        group_exchanged.emplace(group, expect);
        return expect;
    };

    double acc = 0.0;
    for (const Partition& partition : partitions) {
        double partition_sum = 0.0;
        for (const Group& group : partition) partition_sum += group_value(group);
        acc += partition_sum;
    }
    return acc / (static_cast<double>(partitions.size()) * total);
}

std::vector<double> swm_worst_payoffs(const GameInstance& g, const ScoringRule& rule,
                                      const std::vector<ErrorRates>& rates) {
    g.validate();
    if (g.num_outcomes() != 2) throw dimension_error("binary surrogate wagering needs M = 2");
    const size_t n = static_cast<size_t>(g.num_agents());
    if (rates.size() != n) throw dimension_error("one error-rate pair per agent required");

    std::vector<double> worst(n, std::numeric_limits<double>::infinity());
    std::vector<double> phi_min(n), phi_max(n);
    for (int x = 0; x < 2; ++x) {
        for (size_t i = 0; i < n; ++i) {
            double lo = std::numeric_limits<double>::infinity();
            double hi = -lo;
            for (int v = 0; v < 2; ++v) {
                if (rates[i].flip_prob(x, v) <= 0.0) continue;
                const double phi = surrogate_score_binary(rule, g.predictions[i], v, rates[i]);
                lo = std::min(lo, phi);
                hi = std::max(hi, phi);
            }
            phi_min[i] = lo;
            phi_max[i] = hi;
        }
        const std::vector<double> w = worst_case_separable(phi_min, phi_max, g.wagers);
        for (size_t i = 0; i < n; ++i) worst[i] = std::min(worst[i], w[i]);
    }
    return worst;
}

std::vector<double> swm_worst_payoffs_multi(const GameInstance& g, const ScoringRule& rule,
                                            const ConfusionMatrix& confusion) {
    g.validate();
    const int m = g.num_outcomes();
    if (confusion.size() != m) throw dimension_error("confusion matrix size differs from M");
    const size_t n = static_cast<size_t>(g.num_agents());

    std::vector<std::vector<double>> phi(n);
    for (size_t i = 0; i < n; ++i) phi[i] = surrogate_score_vector(rule, g.predictions[i], confusion);

    std::vector<double> worst(n, std::numeric_limits<double>::infinity());
    std::vector<double> phi_min(n), phi_max(n);
    for (int x = 0; x < m; ++x) {
        for (size_t i = 0; i < n; ++i) {
            double lo = std::numeric_limits<double>::infinity();
            double hi = -lo;
            for (int v = 0; v < m; ++v) {
                if (confusion(x, v) <= 0.0) continue;
                lo = std::min(lo, phi[i][static_cast<size_t>(v)]);
                hi = std::max(hi, phi[i][static_cast<size_t>(v)]);
            }
            phi_min[i] = lo;
            phi_max[i] = hi;
        }
        const std::vector<double> w = worst_case_separable(phi_min, phi_max, g.wagers);
        for (size_t i = 0; i < n; ++i) worst[i] = std::min(worst[i], w[i]);
    }
    return worst;
}

// --- Surrogate NAWM ---------------------------------------------------------

namespace {

std::vector<double> nawm_anchor_terms(const GameInstance& g, int outcome, const ScoringRule& rule,
                                      AverageMode mode) {
    const int n = g.num_agents();
    const double total = g.total_wager();
    std::vector<double> anchors(static_cast<size_t>(n), 0.0);
    if (total <= 0.0) return anchors;
    double weighted_score = 0.0;
    for (int j = 0; j < n; ++j)
        weighted_score +=
            g.wagers[static_cast<size_t>(j)] * rule(outcome, g.predictions[static_cast<size_t>(j)]);
    for (int i = 0; i < n; ++i) {
        const double w_i = g.wagers[static_cast<size_t>(i)];
        if (w_i == 0.0) continue;
        const double own = rule(outcome, g.predictions[static_cast<size_t>(i)]);
        const double anchor_score = rule(outcome, peer_average(g, i, mode));
        anchors[static_cast<size_t>(i)] =
            w_i / total * (anchor_score * (total - w_i) - (weighted_score - w_i * own));
    }
    return anchors;
}

} // namespace

PayoffDistribution surrogate_nawm_distribution(const GameInstance& g, int outcome,
                                               const ScoringRule& rule,
                                               const std::vector<ErrorRates>& rates,
                                               const EnumerationCaps& caps, AverageMode mode) {
    g.validate();
    if (g.num_agents() < 2) throw dimension_error("surrogate NAWM needs at least two agents");
    if (g.num_outcomes() != 2) throw dimension_error("surrogate NAWM implemented for M = 2");
    if (rates.size() != static_cast<size_t>(g.num_agents()))
        throw dimension_error("one error-rate pair per agent required");

    const std::vector<double> anchors = nawm_anchor_terms(g, outcome, rule, mode);
    std::vector<std::vector<double>> phi(static_cast<size_t>(g.num_agents()),
                                         std::vector<double>(2, 0.0));
    for (size_t i = 0; i < phi.size(); ++i)
        for (int v = 0; v < 2; ++v)
            phi[i][static_cast<size_t>(v)] =
                rates[i].flip_prob(outcome, v) > 0.0
                    ? surrogate_score_binary(rule, g.predictions[i], v, rates[i])
                    : 0.0;
    return enumerate_surrogate(g, binary_branches(g, outcome, rates), phi, caps, &anchors);
}

PayoffVector sample_surrogate_nawm(const GameInstance& g, int outcome, const ScoringRule& rule,
                                   const std::vector<ErrorRates>& rates, RngStream& rng,
                                   AverageMode mode) {
    const size_t n = static_cast<size_t>(g.num_agents());
    const std::vector<double> anchors = nawm_anchor_terms(g, outcome, rule, mode);
    std::vector<double> scores(n, 0.0);
    for (size_t i = 0; i < n; ++i) {
        const int xt = rng.uniform01() < rates[i].flip_prob(outcome, 1) ? 1 : 0;
        scores[i] = rates[i].noiseless() ? rule(outcome, g.predictions[i])
                                         : surrogate_score_binary(rule, g.predictions[i], xt, rates[i]);
    }
    PayoffVector pay = wswm_from_scores(scores, g.wagers);
    for (size_t i = 0; i < n; ++i) pay[i] -= anchors[i];
    return pay;
}

std::vector<double> surrogate_nawm_worst_payoffs(const GameInstance& g, const ScoringRule& rule,
                                                 const std::vector<ErrorRates>& rates,
                                                 AverageMode mode) {
    g.validate();
    if (g.num_agents() < 2) throw dimension_error("surrogate NAWM needs at least two agents");
    if (g.num_outcomes() != 2) throw dimension_error("surrogate NAWM implemented for M = 2");
    const size_t n = static_cast<size_t>(g.num_agents());

    std::vector<double> worst(n, std::numeric_limits<double>::infinity());
    std::vector<double> phi_min(n), phi_max(n);
    for (int x = 0; x < 2; ++x) {
        for (size_t i = 0; i < n; ++i) {
            double lo = std::numeric_limits<double>::infinity();
            double hi = -lo;
            for (int v = 0; v < 2; ++v) {
                if (rates[i].flip_prob(x, v) <= 0.0) continue;
                const double phi = surrogate_score_binary(rule, g.predictions[i], v, rates[i]);
                lo = std::min(lo, phi);
                hi = std::max(hi, phi);
            }
            phi_min[i] = lo;
            phi_max[i] = hi;
        }
        const std::vector<double> sep = worst_case_separable(phi_min, phi_max, g.wagers);
        const std::vector<double> anchors = nawm_anchor_terms(g, x, rule, mode);
        for (size_t i = 0; i < n; ++i) worst[i] = std::min(worst[i], sep[i] - anchors[i]);
    }
    return worst;
}

// --- Noisy ground truth -----------------------------------------------------

ErrorRates compose_noise(const ErrorRates& agent_flip, const ErrorRates& outcome_noise) {
    const double t0 = agent_flip.e0 * (1.0 - outcome_noise.e0) +
                      (1.0 - agent_flip.e1) * outcome_noise.e0;
    const double t1 = agent_flip.e1 * (1.0 - outcome_noise.e1) +
                      (1.0 - agent_flip.e0) * outcome_noise.e1;
    return ErrorRates(t0, t1); // constructor rejects a degenerate sum
}

std::optional<ErrorRates> solve_agent_flip(const ErrorRates& target,
                                           const ErrorRates& outcome_noise) {
    const double det = 1.0 - outcome_noise.e0 - outcome_noise.e1;
    const double b0 = target.e0 - outcome_noise.e0;
    const double b1 = target.e1 - outcome_noise.e1;
    double a0 = ((1.0 - outcome_noise.e1) * b0 + outcome_noise.e0 * b1) / det;
    double a1 = (outcome_noise.e1 * b0 + (1.0 - outcome_noise.e0) * b1) / det;
    const auto snap = [](double v) {
        if (std::fabs(v) < 1e-12) return 0.0;
        if (std::fabs(v - 1.0) < 1e-12) return 1.0;
        return v;
    };
    a0 = snap(a0);
    a1 = snap(a1);
    if (a0 < 0.0 || a0 > 1.0 || a1 < 0.0 || a1 > 1.0) return std::nullopt;
    return ErrorRates(a0, a1);
}

PayoffDistribution scale_payoffs(const PayoffDistribution& d) {
    const std::vector<double>& wagers = d.wagers();
    double scale = 1.0;
    for (const auto& point : d.support())
        for (size_t i = 0; i < wagers.size(); ++i) {
            if (wagers[i] == 0.0) {
                if (std::fabs(point.payoffs[i]) > kTol)
                    throw invalid_base_mechanism_error("nonzero payoff for a zero wager");
                continue;
            }
            scale = std::max(scale, -point.payoffs[i] / wagers[i]);
        }
    if (scale <= 1.0) return d;
    std::vector<WeightedPayoff> support = d.support();
    for (auto& point : support)
        for (double& pay : point.payoffs) pay /= scale;
    return PayoffDistribution(std::move(support), wagers);
}

namespace {

// How one group plays against a noisy outcome copy: either per-agent flips
// tuned so the composed rates hit the selection target, or direct scoring
// of the noisy copy rescaled to respect the wager constraint.
struct NoisyGroupPlan {
    double target = 0.0;
    std::optional<ErrorRates> flips;                  // tuned flip, common to the group
    std::vector<std::array<double, 2>> phi;           // feasible path, indexed by surrogate value
    std::vector<std::array<double, 2>> direct_payoff; // fallback path, indexed by noisy copy
};

NoisyGroupPlan plan_noisy_group(const GameInstance& sub, const ErrorRates& outcome_noise,
                                const ScoringRule& rule) {
    NoisyGroupPlan plan;
    plan.target = select_error_rates(sub, rule);
    const size_t n = sub.predictions.size();
    if (plan.target == 0.0) {
        plan.flips = outcome_noise.noiseless() ? std::optional<ErrorRates>(ErrorRates(0.0, 0.0))
                                               : std::nullopt;
    } else {
        plan.flips = solve_agent_flip(ErrorRates(plan.target, plan.target), outcome_noise);
    }

    if (plan.flips) {
        const ErrorRates rates(plan.target, plan.target);
        plan.phi.resize(n);
        for (size_t i = 0; i < n; ++i)
            for (int v = 0; v < 2; ++v)
                plan.phi[i][static_cast<size_t>(v)] =
                    plan.target == 0.0 ? rule(v, sub.predictions[i])
                                       : surrogate_score_binary(rule, sub.predictions[i], v, rates);
        return plan;
    }

    // Direct debiasing of the noisy copy; deterministic given the copy, so
    // the worst case spans both possible copies and fixes a common scale.
    std::array<PayoffVector, 2> raw;
    double scale = 1.0;
    for (int copy = 0; copy < 2; ++copy) {
        std::vector<double> scores(n, 0.0);
        for (size_t i = 0; i < n; ++i)
            scores[i] = surrogate_score_binary(rule, sub.predictions[i], copy, outcome_noise);
        raw[static_cast<size_t>(copy)] = wswm_from_scores(scores, sub.wagers);
        for (size_t i = 0; i < n; ++i)
            if (sub.wagers[i] > 0.0)
                scale = std::max(scale, -raw[static_cast<size_t>(copy)][i] / sub.wagers[i]);
    }
    plan.direct_payoff.resize(n);
    for (size_t i = 0; i < n; ++i)
        for (int copy = 0; copy < 2; ++copy)
            plan.direct_payoff[i][static_cast<size_t>(copy)] =
                raw[static_cast<size_t>(copy)][i] / scale;
    return plan;
}

PayoffDistribution noisy_group_distribution(const GameInstance& sub, const NoisyGroupPlan& plan,
                                            int noisy_outcome, const EnumerationCaps& caps) {
    const size_t n = sub.predictions.size();
    if (!plan.flips) {
        PayoffVector pay(n, 0.0);
        for (size_t i = 0; i < n; ++i)
            pay[i] = plan.direct_payoff[i][static_cast<size_t>(noisy_outcome)];
        return PayoffDistribution::point(std::move(pay), sub.wagers);
    }
    std::vector<std::vector<Branch>> branches(n);
    std::vector<std::vector<double>> phi(n, std::vector<double>(2, 0.0));
    for (size_t i = 0; i < n; ++i) {
        for (int v = 0; v < 2; ++v) {
            const double p = plan.flips->flip_prob(noisy_outcome, v);
            if (p > 0.0) branches[i].push_back({v, p});
            phi[i][static_cast<size_t>(v)] = plan.phi[i][static_cast<size_t>(v)];
        }
    }
    return enumerate_surrogate(sub, branches, phi, caps, nullptr);
}

} // namespace

PayoffDistribution noisy_swme_distribution(const GameInstance& g, const NoisyOutcomeModel& noisy,
                                           const ScoringRule& rule, const EnumerationCaps& caps) {
    g.validate();
    const size_t n = static_cast<size_t>(g.num_agents());
    if (n < 2) throw dimension_error("noisy surrogate wagering needs at least two agents");
    if (g.num_outcomes() != 2) throw dimension_error("noisy ground truth implemented for M = 2");
    if (noisy.noisy_outcome != 0 && noisy.noisy_outcome != 1)
        throw dimension_error("noisy outcome out of range");

    const std::vector<Partition> partitions = enumerate_partitions(g.num_agents(), caps);
    const double weight = 1.0 / static_cast<double>(partitions.size());
    std::vector<WeightedPayoff> support;
    for (const Partition& partition : partitions) {
        std::vector<PayoffDistribution> dists;
        dists.reserve(partition.size());
        for (const Group& group : partition) {
            const GameInstance sub = sub_instance(g, group);
            dists.push_back(noisy_group_distribution(sub, plan_noisy_group(sub, noisy.rates, rule),
                                                     noisy.noisy_outcome, caps));
        }
        combine_partition(partition, dists, weight, n, caps.max_support_points, support);
    }
    return PayoffDistribution(std::move(support), g.wagers);
}

PayoffDistribution noisy_swme_true_outcome_distribution(const GameInstance& g, int true_outcome,
                                                        const ErrorRates& outcome_noise,
                                                        const ScoringRule& rule,
                                                        const EnumerationCaps& caps) {
    std::vector<WeightedPayoff> support;
    for (int copy = 0; copy < 2; ++copy) {
        const double p = outcome_noise.flip_prob(true_outcome, copy);
        if (p <= 0.0) continue;
        const PayoffDistribution d =
            noisy_swme_distribution(g, {copy, outcome_noise}, rule, caps);
        for (const auto& point : d.support()) support.push_back({p * point.prob, point.payoffs});
    }
    return PayoffDistribution(std::move(support), g.wagers);
}

PayoffVector sample_noisy_swme(const GameInstance& g, int true_outcome,
                               const ErrorRates& outcome_noise, const ScoringRule& rule,
                               RngStream& rng, const EnumerationCaps& caps) {
    const size_t n = static_cast<size_t>(g.num_agents());
    // Draw order: the noisy copy, one uniform per agent (ascending), then
    // the partition.
    const int copy = rng.uniform01() < outcome_noise.flip_prob(true_outcome, 1) ? 1 : 0;
    std::vector<double> us(n, 0.0);
    for (size_t i = 0; i < n; ++i) us[i] = rng.uniform01();
    const Partition partition = sample_partition(g.num_agents(), rng, caps);

    PayoffVector pay(n, 0.0);
    for (const Group& group : partition) {
        const GameInstance sub = sub_instance(g, group);
        const NoisyGroupPlan plan = plan_noisy_group(sub, outcome_noise, rule);
        if (!plan.flips) {
            for (size_t k = 0; k < group.size(); ++k)
                pay[static_cast<size_t>(group[k])] =
                    plan.direct_payoff[k][static_cast<size_t>(copy)];
            continue;
        }
        std::vector<double> scores(group.size(), 0.0);
        for (size_t k = 0; k < group.size(); ++k) {
            const int xt =
                us[static_cast<size_t>(group[k])] < plan.flips->flip_prob(copy, 1) ? 1 : 0;
            scores[k] = plan.phi[k][static_cast<size_t>(xt)];
        }
        const PayoffVector group_pay = wswm_from_scores(scores, sub.wagers);
        for (size_t k = 0; k < group.size(); ++k)
            pay[static_cast<size_t>(group[k])] = group_pay[k];
    }
    return pay;
}

std::vector<double> noisy_swme_worst_payoffs(const GameInstance& g,
                                             const ErrorRates& outcome_noise,
                                             const ScoringRule& rule) {
    g.validate();
    const int n = g.num_agents();
    if (n < 2) throw dimension_error("noisy surrogate wagering needs at least two agents");
    if (g.num_outcomes() != 2) throw dimension_error("noisy ground truth implemented for M = 2");

    // Which noisy copies can occur under some true outcome.
    std::vector<int> copies;
    for (int copy = 0; copy < 2; ++copy)
        if (outcome_noise.flip_prob(0, copy) > 0.0 || outcome_noise.flip_prob(1, copy) > 0.0)
            copies.push_back(copy);

    std::vector<double> worst(static_cast<size_t>(n), std::numeric_limits<double>::infinity());
    for_each_candidate_group(n, [&](const Group& group) {
        const GameInstance sub = sub_instance(g, group);
        const NoisyGroupPlan plan = plan_noisy_group(sub, outcome_noise, rule);
        const size_t gn = group.size();
        std::vector<double> group_worst(gn, std::numeric_limits<double>::infinity());
        if (!plan.flips) {
            for (int copy : copies)
                for (size_t k = 0; k < gn; ++k)
                    group_worst[k] = std::min(group_worst[k],
                                              plan.direct_payoff[k][static_cast<size_t>(copy)]);
        } else {
            std::vector<double> phi_min(gn), phi_max(gn);
            for (int copy : copies) {
                for (size_t k = 0; k < gn; ++k) {
                    double lo = std::numeric_limits<double>::infinity();
                    double hi = -lo;
                    for (int v = 0; v < 2; ++v) {
                        if (plan.flips->flip_prob(copy, v) <= 0.0) continue;
                        lo = std::min(lo, plan.phi[k][static_cast<size_t>(v)]);
                        hi = std::max(hi, plan.phi[k][static_cast<size_t>(v)]);
                    }
                    phi_min[k] = lo;
                    phi_max[k] = hi;
                }
                const std::vector<double> sep = worst_case_separable(phi_min, phi_max, sub.wagers);
                for (size_t k = 0; k < gn; ++k) group_worst[k] = std::min(group_worst[k], sep[k]);
            }
        }
        for (size_t k = 0; k < gn; ++k) {
            double& slot = worst[static_cast<size_t>(group[k])];
            slot = std::min(slot, group_worst[k]);
        }
    });
    return worst;
}

} // namespace wager
