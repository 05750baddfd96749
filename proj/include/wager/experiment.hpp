#ifndef WAGER_EXPERIMENT_HPP
#define WAGER_EXPERIMENT_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "wager/generators.hpp"
#include "wager/metrics.hpp"
#include "wager/verifier.hpp"

namespace wager {

struct ExperimentConfig {
    std::vector<std::string> mechanisms;
    int n_min = 2;
    int n_max = 50;
    int n_step = 2;
    int instances = 1000; // per agent count
    std::string pred_model = "uniform";
    std::string wager_model = "uniform";
    int num_outcomes = 2;
    std::uint64_t seed = 1; // required; runs never seed from the clock
    int threads = 1;
    int sample_count = 200; // per-instance samples when enumeration is capped
    bool accuracy_vs_probability = false;
    EnumerationCaps caps;

    void validate() const;
};

// 12 significant digits, '.' decimal point, locale-independent.
std::string format_number(double v);

// One row per (mechanism, N): average individual risk and average money
// exchange rate over `instances` generated games. Byte-identical output for
// identical (config, seed) regardless of thread count.
std::string run_efficiency_sweep(const ExperimentConfig& config);

// One row per (mechanism, accuracy bin): sample std of wager-normalized
// payoff and the fraction of agents not losing money, pooled over the whole
// N range with one sampled realization per instance.
std::string run_variance_sweep(const ExperimentConfig& config);

struct VerifyConfig {
    std::vector<std::string> mechanisms = {"lws", "swme", "rp-swme"};
    std::uint64_t seed = 1;
    int instances = 25;   // generated instances per distribution-level check
    int sic_configs = 6;  // belief/opponent configurations per mechanism
    double grid_step = 0.01;
    EnumerationCaps caps;
};

struct VerifyRow {
    PropertyReport report;
    bool asserted = false; // required to hold for exit code 0
};

struct VerifyResult {
    std::vector<VerifyRow> rows;
    int exit_code = 0;

    std::string to_json() const;
    std::string to_text() const;
};

// Runs the property battery over generated instances; stubs (stub-corrupt,
// stub-midpay, stub-bonus) are accepted as mechanism names so the negative
// controls can be exercised end to end.
VerifyResult run_verify(const VerifyConfig& config);

// Properties the suite asserts (vs merely records) for a mechanism name.
std::vector<PropertyTag> asserted_properties(const std::string& mechanism);

} // namespace wager

#endif // WAGER_EXPERIMENT_HPP
