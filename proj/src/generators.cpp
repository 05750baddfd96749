#include "wager/generators.hpp"

#include <cmath>

namespace wager {

namespace {

constexpr double kProbClip = 1e-9;

double logit(double p) { return std::log(p / (1.0 - p)); }

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double clip_prob(double p) {
    if (p < kProbClip) return kProbClip;
    if (p > 1.0 - kProbClip) return 1.0 - kProbClip;
    return p;
}

std::vector<double> uniform_simplex(int m, RngStream& rng) {
    // Exponential spacings: normalized i.i.d. exponentials are uniform on
    // the simplex.
    std::vector<double> v(static_cast<size_t>(m), 0.0);
    double sum = 0.0;
    for (double& x : v) {
        x = -std::log(rng.uniform01_open_low());
        sum += x;
    }
    for (double& x : v) x /= sum;
    return v;
}

} // namespace

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

PredictionModel PredictionModel::logit_normal(double alpha, double sigma2) {
    if (alpha <= 0.0 || sigma2 <= 0.0)
        throw dimension_error("logit-normal parameters must be positive");
    return {Kind::logit_normal, alpha, sigma2};
}

PredictionModel PredictionModel::parse(const std::string& name) {
    if (name == "uniform") return uniform();
    if (name == "logit" || name == "logit-normal" || name == "logit_normal")
        return logit_normal();
    if (name == "synthetic") return synthetic();
    throw dimension_error("unknown prediction model: " + name);
}

std::string PredictionModel::name() const {
    switch (kind) {
        case Kind::uniform: return "uniform";
        case Kind::logit_normal: return "logit-normal";
        case Kind::synthetic: return "synthetic";
    }
    return "unknown";
}

WagerModel WagerModel::pareto(double shape, double scale) {
    if (shape <= 0.0 || scale <= 0.0) throw dimension_error("pareto parameters must be positive");
    return {Kind::pareto, shape, scale};
}

WagerModel WagerModel::parse(const std::string& name) {
    if (name == "uniform") return uniform();
    if (name == "pareto") return pareto();
    throw dimension_error("unknown wager model: " + name);
}

std::string WagerModel::name() const {
    return kind == Kind::uniform ? "uniform" : "pareto";
}

GeneratedPredictions synthetic_from_factors(const std::vector<double>& factors) {
    const int n = static_cast<int>(factors.size());
    GeneratedPredictions out;
    double sum = 0.0;
    for (double u : factors) sum += u;
    const double q = normal_cdf(sum);
    out.happening_probs = {1.0 - q, q};
    out.predictions.reserve(factors.size());
    const double denom = std::sqrt(2.0 * n - 1.0);
    for (double u : factors) out.predictions.push_back(Prediction::binary(normal_cdf(u / denom)));
    return out;
}

GeneratedPredictions gen_predictions(const PredictionModel& model, int num_agents,
                                     int num_outcomes, RngStream& rng) {
    if (num_agents < 1) throw dimension_error("need at least one agent");
    if (num_outcomes < 2) throw dimension_error("need at least two outcomes");
    if (model.kind != PredictionModel::Kind::uniform && num_outcomes != 2)
        throw dimension_error(model.name() + " predictions are binary-only");

    GeneratedPredictions out;
    switch (model.kind) {
        case PredictionModel::Kind::uniform: {
            if (num_outcomes == 2) {
                const double q = rng.uniform01();
                out.happening_probs = {1.0 - q, q};
                for (int i = 0; i < num_agents; ++i)
                    out.predictions.push_back(Prediction::binary(rng.uniform01()));
            } else {
                out.happening_probs = uniform_simplex(num_outcomes, rng);
                for (int i = 0; i < num_agents; ++i)
                    out.predictions.push_back(Prediction(uniform_simplex(num_outcomes, rng)));
            }
            break;
        }
        case PredictionModel::Kind::logit_normal: {
            const double q = clip_prob(rng.uniform01());
            out.happening_probs = {1.0 - q, q};
            const double mean = logit(q) / model.alpha;
            const double sd = std::sqrt(model.sigma2);
            for (int i = 0; i < num_agents; ++i)
                out.predictions.push_back(Prediction::binary(sigmoid(mean + sd * rng.normal())));
            break;
        }
        case PredictionModel::Kind::synthetic: {
            std::vector<double> factors(static_cast<size_t>(num_agents), 0.0);
            for (double& u : factors) u = rng.normal();
            out = synthetic_from_factors(factors);
            break;
        }
    }
    return out;
}

std::vector<double> gen_wagers(const WagerModel& model, int num_agents, RngStream& rng) {
    std::vector<double> wagers(static_cast<size_t>(num_agents), 1.0);
    if (model.kind == WagerModel::Kind::pareto)
        for (double& w : wagers)
            w = model.scale * std::pow(rng.uniform01_open_low(), -1.0 / model.shape);
    return wagers;
}

GameInstance gen_instance(const PredictionModel& pm, const WagerModel& wm, int num_agents,
                          int num_outcomes, RngStream& rng) {
    GameInstance g;
    GeneratedPredictions gp = gen_predictions(pm, num_agents, num_outcomes, rng);
    g.predictions = std::move(gp.predictions);
    g.happening_probs = std::move(gp.happening_probs);
    g.wagers = gen_wagers(wm, num_agents, rng);
    return g;
}

} // namespace wager
