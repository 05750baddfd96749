// wagersim - wagering-mechanism simulator and property verifier.
//
// Subcommands:
//   efficiency  risk / money-exchange sweep over the number of agents (CSV)
//   variance    payoff variance and not-losing rate by prediction accuracy (CSV)
//   verify      property battery with machine-readable report
//   game        evaluate one game and print the payoff distribution

#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "wager/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPropertyFailure = 1;
constexpr int kExitConfigError = 2;

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::string token;
    std::istringstream in(text);
    while (std::getline(in, token, ',')) {
        if (!token.empty()) out.push_back(token);
    }
    return out;
}

std::vector<double> parse_doubles(const std::string& text) {
    std::vector<double> out;
    for (const auto& tok : split_list(text)) out.push_back(std::stod(tok));
    return out;
}

// Flat key=value config file; '#' starts a comment. CLI flags override.
std::map<std::string, std::string> read_config_file(const std::string& path) {
    std::map<std::string, std::string> kv;
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!key.empty()) kv[key] = value;
    }
    return kv;
}

struct CommonFlags {
    std::string config_path;
    std::string out_path;
    std::string mechanisms;
    uint64_t seed = 0;
    bool seed_set = false;
    int threads = 1;
    int sample_cap = 200;
    int instances = 0; // 0 = subcommand default
    int n_min = 2, n_max = 50, n_step = 2;
    std::string pred_model = "uniform";
    std::string wager_model = "uniform";
    int num_outcomes = 2;
    bool accuracy_vs_q = false;
    CLI::App* cmd = nullptr;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
    flags.cmd = cmd;
    cmd->add_option("--config", flags.config_path, "flat key=value config file");
    cmd->add_option("--out", flags.out_path, "output path (stdout if omitted)");
    cmd->add_option("--mechanisms", flags.mechanisms, "comma-separated mechanism list");
    cmd->add_option("--seed", flags.seed, "master seed (required; no wall-clock seeding)");
    cmd->add_option("--threads", flags.threads, "worker threads");
    cmd->add_option("--sample-cap", flags.sample_cap,
                    "samples per instance when enumeration is capped");
    cmd->add_option("--instances", flags.instances, "instances per agent count");
    cmd->add_option("--n-min", flags.n_min, "smallest number of agents");
    cmd->add_option("--n-max", flags.n_max, "largest number of agents");
    cmd->add_option("--n-step", flags.n_step, "agent-count step");
    cmd->add_option("--pred-model", flags.pred_model, "uniform | logit | synthetic");
    cmd->add_option("--wager-model", flags.wager_model, "uniform | pareto");
    cmd->add_option("--m", flags.num_outcomes, "number of outcomes");
    cmd->add_flag("--accuracy-vs-q", flags.accuracy_vs_q,
                  "bin accuracy against the happening probability instead of the outcome");
}

// Config-file keys fill anything not given on the command line.
void apply_config_file(CommonFlags& flags) {
    flags.seed_set = flags.cmd->count("--seed") > 0;
    if (flags.config_path.empty()) return;
    const auto kv = read_config_file(flags.config_path);
    const auto on_cli = [&](const char* name) { return flags.cmd->count(name) > 0; };
    const auto get = [&](const char* key) -> const std::string* {
        const auto it = kv.find(key);
        return it == kv.end() ? nullptr : &it->second;
    };
    for (const auto& [key, value] : kv) {
        static const std::set<std::string> known = {
            "mechanisms", "seed",        "threads", "instances",  "n_min", "n_max",
            "n_step",     "pred_model",  "wager_model", "m",      "out",   "sample_cap"};
        if (!known.count(key)) throw std::runtime_error("unknown config key: " + key);
        (void)value;
    }
    if (const auto* v = get("mechanisms"); v && !on_cli("--mechanisms")) flags.mechanisms = *v;
    if (const auto* v = get("seed"); v && !flags.seed_set) {
        flags.seed = std::stoull(*v);
        flags.seed_set = true;
    }
    if (const auto* v = get("threads"); v && !on_cli("--threads")) flags.threads = std::stoi(*v);
    if (const auto* v = get("instances"); v && !on_cli("--instances"))
        flags.instances = std::stoi(*v);
    if (const auto* v = get("n_min"); v && !on_cli("--n-min")) flags.n_min = std::stoi(*v);
    if (const auto* v = get("n_max"); v && !on_cli("--n-max")) flags.n_max = std::stoi(*v);
    if (const auto* v = get("n_step"); v && !on_cli("--n-step")) flags.n_step = std::stoi(*v);
    if (const auto* v = get("pred_model"); v && !on_cli("--pred-model")) flags.pred_model = *v;
    if (const auto* v = get("wager_model"); v && !on_cli("--wager-model")) flags.wager_model = *v;
    if (const auto* v = get("m"); v && !on_cli("--m")) flags.num_outcomes = std::stoi(*v);
    if (const auto* v = get("out"); v && !on_cli("--out")) flags.out_path = *v;
    if (const auto* v = get("sample_cap"); v && !on_cli("--sample-cap"))
        flags.sample_cap = std::stoi(*v);
}

wager::ExperimentConfig to_experiment_config(const CommonFlags& flags,
                                             const std::vector<std::string>& default_mechs,
                                             int default_instances) {
    if (!flags.seed_set) throw std::runtime_error("--seed is required");
    wager::ExperimentConfig cfg;
    cfg.mechanisms = flags.mechanisms.empty() ? default_mechs : split_list(flags.mechanisms);
    cfg.n_min = flags.n_min;
    cfg.n_max = flags.n_max;
    cfg.n_step = flags.n_step;
    cfg.instances = flags.instances > 0 ? flags.instances : default_instances;
    cfg.pred_model = flags.pred_model;
    cfg.wager_model = flags.wager_model;
    cfg.num_outcomes = flags.num_outcomes;
    cfg.seed = flags.seed;
    cfg.threads = flags.threads;
    cfg.sample_count = flags.sample_cap;
    cfg.accuracy_vs_probability = flags.accuracy_vs_q;
    return cfg;
}

void write_output(const std::string& out_path, const std::string& text) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + out_path);
    out << text;
}

int run_game(const std::string& reports, const std::string& wagers, int outcome,
             const std::string& mechanism, uint64_t seed, bool seed_set, int samples) {
    wager::GameInstance g;
    for (double p : parse_doubles(reports)) g.predictions.push_back(wager::Prediction::binary(p));
    g.wagers = parse_doubles(wagers);
    g.validate();

    const auto mech = wager::make_verify_mechanism(mechanism);
    const wager::EnumerationCaps caps;
    if (mech->enumerable(g, caps)) {
        const wager::PayoffDistribution d = mech->enumerate(g, outcome, caps);
        std::cout << "mechanism: " << mech->name() << "\nsupport (" << d.support().size()
                  << " points):\n";
        for (const auto& point : d.support()) {
            std::cout << "  p=" << wager::format_number(point.prob) << "  payoffs=[";
            for (size_t i = 0; i < point.payoffs.size(); ++i) {
                if (i) std::cout << ",";
                std::cout << wager::format_number(point.payoffs[i]);
            }
            std::cout << "]\n";
        }
        const auto stats = d.stats();
        std::cout << "per-agent expected / min / max:\n";
        for (size_t i = 0; i < stats.size(); ++i)
            std::cout << "  agent " << i << ": " << wager::format_number(stats[i].expected)
                      << " / " << wager::format_number(stats[i].min) << " / "
                      << wager::format_number(stats[i].max) << "\n";
        if (d.max_wager_shortfall() > wager::kTol)
            std::cout << "WARNING: wager constraint violated by "
                      << wager::format_number(d.max_wager_shortfall()) << "\n";
    } else {
        std::cout << "mechanism: " << mech->name()
                  << " (beyond enumeration caps; sampling instead)\n";
    }
    if (samples > 0) {
        if (!seed_set) throw std::runtime_error("--seed is required for sampling");
        wager::RngStream rng(seed);
        for (int s = 0; s < samples; ++s) {
            const wager::PayoffVector pay = mech->sample(g, outcome, rng, caps);
            std::cout << "sample " << s << ": [";
            for (size_t i = 0; i < pay.size(); ++i) {
                if (i) std::cout << ",";
                std::cout << wager::format_number(pay[i]);
            }
            std::cout << "]\n";
        }
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"wagering-mechanism simulator"};
    app.require_subcommand(1);

    CommonFlags eff_flags, var_flags, ver_flags;
    CLI::App* eff = app.add_subcommand("efficiency", "risk and money-exchange sweep");
    add_common_flags(eff, eff_flags);
    CLI::App* var = app.add_subcommand("variance", "payoff variance by prediction accuracy");
    add_common_flags(var, var_flags);
    CLI::App* ver = app.add_subcommand("verify", "run the property battery");
    add_common_flags(ver, ver_flags);
    int ver_sic_configs = 6;
    ver->add_option("--sic-configs", ver_sic_configs, "incentive configurations per mechanism");
    bool ver_json = false;
    ver->add_flag("--json", ver_json, "emit the JSON report to --out/stdout");

    CLI::App* game = app.add_subcommand("game", "evaluate a single game");
    std::string game_reports, game_wagers, game_mechanism = "wswm";
    int game_outcome = 1, game_samples = 0;
    uint64_t game_seed = 0;
    bool game_seed_set = false;
    game->add_option("--reports", game_reports, "comma-separated P(outcome=1) per agent")
        ->required();
    game->add_option("--wagers", game_wagers, "comma-separated wagers")->required();
    game->add_option("--outcome", game_outcome, "realized outcome (0 or 1)");
    game->add_option("--mechanism", game_mechanism, "mechanism name");
    game->add_option("--samples", game_samples, "print this many sampled realizations");
    game->add_option("--seed", game_seed, "seed for sampled realizations");

    CLI11_PARSE(app, argc, argv);

    try {
        if (eff->parsed()) {
            apply_config_file(eff_flags);
            const auto cfg = to_experiment_config(
                eff_flags, {"wswm", "nawm", "lws", "swme", "rp-swme"}, 1000);
            write_output(eff_flags.out_path, wager::run_efficiency_sweep(cfg));
            return kExitOk;
        }
        if (var->parsed()) {
            apply_config_file(var_flags);
            const auto cfg = to_experiment_config(var_flags, {"rp-swme", "lws"}, 10000);
            write_output(var_flags.out_path, wager::run_variance_sweep(cfg));
            return kExitOk;
        }
        if (ver->parsed()) {
            apply_config_file(ver_flags);
            if (!ver_flags.seed_set) throw std::runtime_error("--seed is required");
            wager::VerifyConfig cfg;
            if (!ver_flags.mechanisms.empty()) cfg.mechanisms = split_list(ver_flags.mechanisms);
            cfg.seed = ver_flags.seed;
            if (ver_flags.instances > 0) cfg.instances = ver_flags.instances;
            cfg.sic_configs = ver_sic_configs;
            const wager::VerifyResult result = wager::run_verify(cfg);
            std::cerr << result.to_text();
            if (ver_json || !ver_flags.out_path.empty())
                write_output(ver_flags.out_path, result.to_json());
            return result.exit_code == 0 ? kExitOk : kExitPropertyFailure;
        }
        if (game->parsed()) {
            game_seed_set = game->count("--seed") > 0;
            return run_game(game_reports, game_wagers, game_outcome, game_mechanism, game_seed,
                            game_seed_set, game_samples);
        }
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitConfigError;
    }
    return kExitConfigError;
}
