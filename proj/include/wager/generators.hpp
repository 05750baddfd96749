#ifndef WAGER_GENERATORS_HPP
#define WAGER_GENERATORS_HPP

#include "wager/rng.hpp"
#include "wager/types.hpp"

namespace wager {

struct PredictionModel {
    enum class Kind { uniform, logit_normal, synthetic };

    Kind kind = Kind::uniform;
    double alpha = 2.0;  // under-confidence exponent of the logit-normal model
    double sigma2 = 1.0; // logit-normal variance

    static PredictionModel uniform() { return {Kind::uniform, 0.0, 0.0}; }
    static PredictionModel logit_normal(double alpha = 2.0, double sigma2 = 1.0);
    static PredictionModel synthetic() { return {Kind::synthetic, 0.0, 0.0}; }
    static PredictionModel parse(const std::string& name);

    std::string name() const;
};

struct WagerModel {
    enum class Kind { uniform, pareto };

    Kind kind = Kind::uniform;
    double shape = 1.16;
    double scale = 1.0;

    static WagerModel uniform() { return {Kind::uniform, 0.0, 0.0}; }
    static WagerModel pareto(double shape = 1.16, double scale = 1.0);
    static WagerModel parse(const std::string& name);

    std::string name() const;
};

struct GeneratedPredictions {
    std::vector<double> happening_probs; // q
    std::vector<Prediction> predictions;
};

// Draw order is fixed (q first, then agents ascending) so instances are a
// pure function of (model, N, M, stream state).
GeneratedPredictions gen_predictions(const PredictionModel& model, int num_agents,
                                     int num_outcomes, RngStream& rng);

// The synthetic model evaluated on given latent factors; exposed so tests
// can pin the degenerate all-zero case.
GeneratedPredictions synthetic_from_factors(const std::vector<double>& factors);

std::vector<double> gen_wagers(const WagerModel& model, int num_agents, RngStream& rng);

// Convenience: a full instance (q, predictions, wagers), no realized outcome.
GameInstance gen_instance(const PredictionModel& pm, const WagerModel& wm, int num_agents,
                          int num_outcomes, RngStream& rng);

// Standard normal CDF.
double normal_cdf(double z);

} // namespace wager

#endif // WAGER_GENERATORS_HPP
