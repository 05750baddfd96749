#include "wager/scoring.hpp"

#include <algorithm>
#include <cmath>

namespace wager {

double brier_score(int outcome, const Prediction& report) {
    const int m = report.num_outcomes();
    if (outcome < 0 || outcome >= m) throw dimension_error("outcome index out of range");
    double sum_sq = 0.0;
    for (int k = 0; k < m; ++k) sum_sq += report[k] * report[k];
    return 1.0 - 0.5 * (sum_sq - 2.0 * report[outcome] + 1.0);
}

static double spherical_score(int outcome, const Prediction& report) {
    const int m = report.num_outcomes();
    if (outcome < 0 || outcome >= m) throw dimension_error("outcome index out of range");
    double norm_sq = 0.0;
    for (int k = 0; k < m; ++k) norm_sq += report[k] * report[k];
    if (norm_sq <= 0.0) return 0.0;
    return report[outcome] / std::sqrt(norm_sq);
}

ScoringRule ScoringRule::brier() { return ScoringRule("brier", brier_score); }

ScoringRule ScoringRule::spherical() { return ScoringRule("spherical", spherical_score); }

ScoringRule ScoringRule::custom(std::string name, Fn fn) {
    return ScoringRule(std::move(name), std::move(fn));
}

double ScoringRule::operator()(int outcome, const Prediction& report) const {
    return fn_(outcome, report);
}

double ScoringRule::expected(const Prediction& belief, const Prediction& report) const {
    double sum = 0.0;
    for (int x = 0; x < belief.num_outcomes(); ++x)
        if (belief[x] > 0.0) sum += belief[x] * fn_(x, report);
    return sum;
}

ErrorRates::ErrorRates(double e0_, double e1_) : e0(e0_), e1(e1_) {
    if (e0 < 0.0 || e0 > 1.0 || e1 < 0.0 || e1 > 1.0)
        throw degenerate_noise_error("error rate outside [0,1]");
    if (std::fabs(e0 + e1 - 1.0) <= kTol)
        throw degenerate_noise_error("error rates sum to 1; surrogate would carry no information");
}

double ErrorRates::flip_prob(int truth, int surrogate) const {
    if (truth == 1) return surrogate == 0 ? e1 : 1.0 - e1;
    return surrogate == 1 ? e0 : 1.0 - e0;
}

ConfusionMatrix::ConfusionMatrix(std::vector<std::vector<double>> rows) : rows_(std::move(rows)) {
    const size_t m = rows_.size();
    if (m < 2) throw dimension_error("confusion matrix needs M >= 2");
    for (const auto& row : rows_) {
        if (row.size() != m) throw dimension_error("confusion matrix not square");
        double sum = 0.0;
        for (double c : row) {
            if (c < -kTol || c > 1.0 + kTol) throw dimension_error("flip probability outside [0,1]");
            sum += c;
        }
        if (std::fabs(sum - 1.0) > kTol) throw dimension_error("confusion row does not sum to 1");
    }
}

std::vector<double> ConfusionMatrix::solve(const std::vector<double>& rhs) const {
    const int m = size();
    if (static_cast<int>(rhs.size()) != m) throw dimension_error("rhs length mismatch");

    // Gaussian elimination with partial pivoting; M stays single-digit here.
    std::vector<std::vector<double>> a(rows_);
    std::vector<double> b(rhs);
    for (int col = 0; col < m; ++col) {
        int pivot = col;
        for (int r = col + 1; r < m; ++r)
            if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
        if (std::fabs(a[pivot][col]) < 1e-12) throw rank_error("confusion matrix is singular");
        std::swap(a[pivot], a[col]);
        std::swap(b[pivot], b[col]);
        for (int r = col + 1; r < m; ++r) {
            const double f = a[r][col] / a[col][col];
            if (f == 0.0) continue;
            for (int c = col; c < m; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(static_cast<size_t>(m), 0.0);
    for (int r = m - 1; r >= 0; --r) {
        double acc = b[static_cast<size_t>(r)];
        for (int c = r + 1; c < m; ++c) acc -= a[r][c] * x[static_cast<size_t>(c)];
        x[static_cast<size_t>(r)] = acc / a[r][r];
    }

    double residual = 0.0;
    for (int r = 0; r < m; ++r) {
        double acc = -rhs[static_cast<size_t>(r)];
        for (int c = 0; c < m; ++c) acc += rows_[r][c] * x[static_cast<size_t>(c)];
        residual = std::max(residual, std::fabs(acc));
    }
    if (residual > 1e-6) throw rank_error("confusion matrix solve residual too large");
    return x;
}

std::vector<std::vector<double>> ConfusionMatrix::inverse() const {
    const int m = size();
    std::vector<std::vector<double>> inv(static_cast<size_t>(m),
                                         std::vector<double>(static_cast<size_t>(m), 0.0));
    std::vector<double> unit(static_cast<size_t>(m), 0.0);
    for (int col = 0; col < m; ++col) {
        std::fill(unit.begin(), unit.end(), 0.0);
        unit[static_cast<size_t>(col)] = 1.0;
        const std::vector<double> column = solve(unit);
        for (int r = 0; r < m; ++r) inv[r][static_cast<size_t>(col)] = column[static_cast<size_t>(r)];
    }
    return inv;
}

ConfusionMatrix uniform_confusion(int num_outcomes) {
    if (num_outcomes <= 2) throw dimension_error("uniform confusion requires M > 2");
    return uniform_confusion_mass(num_outcomes, 0.5 / (num_outcomes - 1));
}

ConfusionMatrix uniform_confusion_mass(int num_outcomes, double eps) {
    if (num_outcomes < 2) throw dimension_error("confusion matrix needs M >= 2");
    if (eps < 0.0 || eps >= 1.0 / num_outcomes - 1e-12)
        throw degenerate_noise_error("off-diagonal mass outside [0, 1/M)");
    std::vector<std::vector<double>> rows(static_cast<size_t>(num_outcomes),
                                          std::vector<double>(static_cast<size_t>(num_outcomes), eps));
    for (int j = 0; j < num_outcomes; ++j)
        rows[static_cast<size_t>(j)][static_cast<size_t>(j)] = 1.0 - (num_outcomes - 1) * eps;
    return ConfusionMatrix(std::move(rows));
}

double surrogate_score_binary(const ScoringRule& rule, const Prediction& report,
                              int surrogate_outcome, const ErrorRates& rates) {
    if (report.num_outcomes() != 2) throw dimension_error("binary surrogate needs M = 2");
    if (surrogate_outcome != 0 && surrogate_outcome != 1)
        throw dimension_error("surrogate outcome out of range");
    const double denom = 1.0 - rates.e0 - rates.e1;
    const double e_opposite = surrogate_outcome == 1 ? rates.e0 : rates.e1; // e_{1-xt}
    const double e_own = surrogate_outcome == 1 ? rates.e1 : rates.e0;      // e_{xt}
    return ((1.0 - e_opposite) * rule(surrogate_outcome, report) -
            e_own * rule(1 - surrogate_outcome, report)) /
           denom;
}

std::vector<double> surrogate_score_vector(const ScoringRule& rule, const Prediction& report,
                                           const ConfusionMatrix& confusion) {
    const int m = confusion.size();
    if (report.num_outcomes() != m)
        throw dimension_error("confusion matrix size differs from outcome count");
    std::vector<double> scores(static_cast<size_t>(m), 0.0);
    for (int x = 0; x < m; ++x) scores[static_cast<size_t>(x)] = rule(x, report);
    return confusion.solve(scores);
}

double surrogate_score_multi(const ScoringRule& rule, const Prediction& report,
                             int surrogate_outcome, const ConfusionMatrix& confusion) {
    if (surrogate_outcome < 0 || surrogate_outcome >= confusion.size())
        throw dimension_error("surrogate outcome out of range");
    return surrogate_score_vector(rule, report, confusion)[static_cast<size_t>(surrogate_outcome)];
}

double unbiasedness_oracle(const ScoringRule& rule, const Prediction& report, int true_outcome,
                           const ErrorRates& rates) {
    double sum = 0.0;
    for (int xt = 0; xt < 2; ++xt) {
        const double p = rates.flip_prob(true_outcome, xt);
        if (p > 0.0) sum += p * surrogate_score_binary(rule, report, xt, rates);
    }
    return sum;
}

double unbiasedness_oracle(const ScoringRule& rule, const Prediction& report, int true_outcome,
                           const ConfusionMatrix& confusion) {
    const std::vector<double> phi = surrogate_score_vector(rule, report, confusion);
    double sum = 0.0;
    for (int xt = 0; xt < confusion.size(); ++xt)
        sum += confusion(true_outcome, xt) * phi[static_cast<size_t>(xt)];
    return sum;
}

} // namespace wager
