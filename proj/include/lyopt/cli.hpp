#pragma once

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lyopt/bench.hpp"
#include "lyopt/calibration.hpp"
#include "lyopt/chain_io.hpp"
#include "lyopt/errors.hpp"
#include "lyopt/lyapunov.hpp"
#include "lyopt/models.hpp"
#include "lyopt/pricing.hpp"
#include "lyopt/version.hpp"

// Subcommand implementations shared by the command-line tool and the
// end-to-end tests. Exit-code contract: 0 success, 1 computation error,
// 2 input error.

namespace lyopt::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitComputationError = 1;
inline constexpr int kExitInputError = 2;

inline bool is_input_error(const Error& e) {
    return dynamic_cast<const IoError*>(&e) != nullptr ||
           dynamic_cast<const FormatError*>(&e) != nullptr ||
           dynamic_cast<const InvalidInputError*>(&e) != nullptr ||
           dynamic_cast<const InvalidParameterError*>(&e) != nullptr;
}

/// Every run that writes files also records how it was produced, next to the
/// output: `<output>.manifest.json`.
inline void write_manifest(const std::string& output_path, const std::string& subcommand,
                           const nlohmann::json& details) {
    nlohmann::json manifest;
    manifest["subcommand"] = subcommand;
    manifest["tool_version"] = kVersion;
    manifest["details"] = details;
    std::ofstream out(output_path + ".manifest.json", std::ios::binary);
    if (!out) throw IoError("cannot write manifest next to '" + output_path + "'");
    out << manifest.dump(2) << "\n";
}

inline nlohmann::json model_to_json(const Model& model) {
    nlohmann::json j;
    j["kind"] = to_string(kind_of(model));
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, GbmParams>) {
                j["sigma"] = p.sigma;
            } else if constexpr (std::is_same_v<T, OuParams>) {
                j["lambda"] = p.lambda;
                j["sigma"] = p.sigma;
                j["level"] = p.level;
            } else if constexpr (std::is_same_v<T, LmrGwParams>) {
                j["lambda"] = p.lambda;
                j["sigma1"] = p.sigma1;
                j["sigma2"] = p.sigma2;
                j["mu"] = p.mu;
            } else {
                j["kappa"] = p.kappa;
                j["sigma_chi"] = p.sigma_chi;
                j["sigma_xi"] = p.sigma_xi;
                j["rho"] = p.rho;
                j["mu_xi"] = p.mu_xi;
            }
        },
        model);
    return j;
}

struct PriceCommand {
    std::string input;
    std::string output;  ///< empty: write to stdout
    Model model;
    VarianceMethod method = VarianceMethod::Analytical;
    PricingConfig pricing;
};

inline int run_price(const PriceCommand& cmd, std::ostream& out = std::cout,
                     std::ostream& err = std::cerr) {
    try {
        std::vector<ParseDiagnostic> diagnostics;
        const OptionChainFile chain = parse_chain(cmd.input, &diagnostics);
        for (const auto& d : diagnostics)
            err << cmd.input << ":" << d.line << ": " << d.message << "\n";

        const detail::MaturityGroups groups = detail::group_by_maturity(chain.quotes);
        std::vector<double> variances(groups.maturities.size());
        for (std::size_t i = 0; i < groups.maturities.size(); ++i)
            variances[i] = model_variance(cmd.model, groups.maturities[i], cmd.method);

        std::string body;
        body += std::string(kChainCsvHeader) + ",model_price\n";
        for (std::size_t i = 0; i < chain.quotes.size(); ++i) {
            const auto& q = chain.quotes[i];
            const double price =
                black_price(q, variances[groups.group_of_quote[i]], cmd.pricing);
            body += q.id + ',' + to_string(q.kind) + ',' + format_double(q.strike) + ',' +
                    format_double(q.maturity) + ',' + format_double(q.underlying_price) + ',' +
                    format_double(q.market_price) + ',' + format_double(price) + "\n";
        }

        if (cmd.output.empty()) {
            out << body;
        } else {
            std::ofstream file(cmd.output, std::ios::binary);
            if (!file) throw IoError("cannot open '" + cmd.output + "' for writing");
            file << body;
            nlohmann::json details;
            details["input"] = cmd.input;
            details["output"] = cmd.output;
            details["model"] = model_to_json(cmd.model);
            details["method"] = to_string(cmd.method);
            details["risk_free_rate"] = cmd.pricing.risk_free_rate;
            write_manifest(cmd.output, "price", details);
        }
        return kExitOk;
    } catch (const Error& e) {
        err << "price: " << e.what() << "\n";
        return is_input_error(e) ? kExitInputError : kExitComputationError;
    }
}

struct CalibrateCommand {
    std::string input;
    std::string output_prefix;  ///< writes <prefix>.json, <prefix>_surface.csv
    ModelKind kind = ModelKind::LmrGw;
    CalibrationConfig config;
    PricingConfig pricing;
    bool group_by_underlying = false;  ///< fit one parameter set per underlying price
};

inline nlohmann::json calibration_result_to_json(const CalibrationResult& result,
                                                 const FitReport& test_report,
                                                 std::size_t train_size, std::size_t test_size,
                                                 const CalibrationConfig& cfg) {
    nlohmann::json j;
    j["model"] = to_string(result.model);
    j["method"] = to_string(result.method);
    j["seed"] = cfg.rng_seed;
    j["train_fraction"] = cfg.train_fraction;
    j["restarts"] = cfg.restarts;
    j["converged"] = result.converged;
    j["iterations"] = result.iterations;
    j["final_loss"] = result.final_loss;
    j["parameters"] = model_to_json(result.parameters);
    j["train_size"] = train_size;
    j["test_size"] = test_size;
    j["train_rmse"] = result.train_rmse;
    j["test_rmse"] = std::isnan(test_report.rmse) ? nlohmann::json() : nlohmann::json(test_report.rmse);
    j["warnings"] = result.warnings;
    auto fit_rows = nlohmann::json::array();
    for (const auto& f : result.per_quote_fit) {
        nlohmann::json row;
        row["id"] = f.id;
        row["market_price"] = f.market_price;
        row["fitted_price"] = f.fitted_price;
        row["abs_error"] = f.abs_error;
        row["rel_error"] = f.rel_error;
        fit_rows.push_back(row);
    }
    j["per_quote_fit"] = fit_rows;
    auto test_rows = nlohmann::json::array();
    for (const auto& f : test_report.rows) {
        nlohmann::json row;
        row["id"] = f.id;
        row["market_price"] = f.market_price;
        row["fitted_price"] = f.fitted_price;
        row["abs_error"] = f.abs_error;
        row["rel_error"] = f.rel_error;
        test_rows.push_back(row);
    }
    j["per_test_quote_fit"] = test_rows;
    return j;
}

inline int run_calibrate(const CalibrateCommand& cmd, std::ostream& out = std::cout,
                         std::ostream& err = std::cerr) {
    try {
        cmd.config.validate();
        std::vector<ParseDiagnostic> diagnostics;
        const OptionChainFile chain = parse_chain(cmd.input, &diagnostics);
        for (const auto& d : diagnostics)
            err << cmd.input << ":" << d.line << ": " << d.message << "\n";

        // Grouping: the whole chain by default, or one fit per underlying
        // (quotes sharing an underlying price belong to the same future).
        std::map<std::string, std::vector<OptionQuote>> groups;
        if (cmd.group_by_underlying) {
            for (const auto& q : chain.quotes)
                groups[format_double(q.underlying_price)].push_back(q);
        } else {
            groups["chain"] = chain.quotes;
        }

        nlohmann::json results = nlohmann::json::array();
        std::vector<SurfacePoint> surface;
        int failures = 0;
        for (const auto& [label, quotes] : groups) {
            nlohmann::json entry;
            entry["group"] = label;
            try {
                const auto [train, test] =
                    train_test_split(quotes, cmd.config.train_fraction, cmd.config.rng_seed);
                const CalibrationResult result = calibrate(train, cmd.kind, cmd.config, cmd.pricing);
                const FitReport report = evaluate_fit(result, test, cmd.config.method, cmd.pricing);
                for (const auto& w : result.warnings) err << "calibrate: " << w << "\n";
                entry["result"] = calibration_result_to_json(result, report, train.size(),
                                                             test.size(), cmd.config);
                surface.insert(surface.end(), report.surface.begin(), report.surface.end());
            } catch (const Error& e) {
                entry["error"] = e.what();
                ++failures;
                err << "calibrate: group '" << label << "': " << e.what() << "\n";
            }
            results.push_back(entry);
        }

        if (!cmd.group_by_underlying && results.front().contains("error"))
            throw Error(results.front()["error"].get<std::string>());
        const nlohmann::json doc = cmd.group_by_underlying ? nlohmann::json{{"groups", results}}
                                                           : results.front()["result"];

        const std::string json_path = cmd.output_prefix + ".json";
        std::ofstream file(json_path, std::ios::binary);
        if (!file) throw IoError("cannot open '" + json_path + "' for writing");
        file << doc.dump(2) << "\n";
        file.close();

        if (!surface.empty()) export_surface(surface, cmd.output_prefix + "_surface.csv");

        nlohmann::json details;
        details["input"] = cmd.input;
        details["output"] = json_path;
        details["model"] = to_string(cmd.kind);
        details["method"] = to_string(cmd.config.method);
        details["seed"] = cmd.config.rng_seed;
        details["train_fraction"] = cmd.config.train_fraction;
        details["restarts"] = cmd.config.restarts;
        details["max_iterations"] = cmd.config.max_iterations;
        details["loss_tolerance"] = cmd.config.loss_tolerance;
        details["group_by"] = cmd.group_by_underlying ? "underlying" : "chain";
        write_manifest(cmd.output_prefix, "calibrate", details);

        out << "calibration written to " << json_path << "\n";
        if (cmd.group_by_underlying && failures == static_cast<int>(groups.size()))
            return kExitComputationError;
        return kExitOk;
    } catch (const Error& e) {
        err << "calibrate: " << e.what() << "\n";
        return is_input_error(e) ? kExitInputError : kExitComputationError;
    }
}

struct BenchCommand {
    std::string mode = "variance";  ///< "variance" or "calibration"
    std::string output;             ///< CSV path; empty writes no CSV
    LmrGwParams params{2.0, 0.5, 0.2, 0.0};
    std::vector<long> m_values = {1, 10, 100, 1000, 3000};
    int repetitions = 10;
    // calibration mode:
    std::vector<std::string> inputs;  ///< chain files; empty generates synthetic chains
    int synthetic_chains = 5;
    int synthetic_quotes = 100;
    int synthetic_maturities = 20;
    std::uint64_t seed = 0;
    CalibrationConfig calibration_config;
};

inline int run_bench(const BenchCommand& cmd, std::ostream& out = std::cout,
                     std::ostream& err = std::cerr) {
    try {
        BenchReport report;
        if (cmd.mode == "variance") {
            report = bench_variance(cmd.params, cmd.m_values, cmd.repetitions);
        } else if (cmd.mode == "calibration") {
            std::vector<OptionChainFile> chains;
            if (!cmd.inputs.empty()) {
                for (const auto& path : cmd.inputs) chains.push_back(parse_chain(path));
            } else {
                for (int c = 0; c < cmd.synthetic_chains; ++c) {
                    SyntheticChainConfig scfg;
                    scfg.n_quotes = cmd.synthetic_quotes;
                    scfg.rng_seed = cmd.seed + static_cast<std::uint64_t>(c);
                    scfg.noise_sd = 0.003;
                    scfg.maturities.clear();
                    for (int m = 1; m <= cmd.synthetic_maturities; ++m)
                        scfg.maturities.push_back(m / 12.0);
                    chains.push_back(generate_synthetic_chain(Model{cmd.params}, scfg));
                }
            }
            CalibrationConfig cfg = cmd.calibration_config;
            cfg.rng_seed = cmd.seed;
            report = bench_calibration(chains, ModelKind::LmrGw, cfg);
        } else {
            throw InvalidInputError("bench: unknown mode '" + cmd.mode + "'");
        }

        out << render_table(report);
        if (!cmd.output.empty()) {
            write_bench_csv(report, cmd.output);
            nlohmann::json details;
            details["mode"] = cmd.mode;
            details["output"] = cmd.output;
            details["repetitions"] = report.repetitions;
            details["seed"] = cmd.seed;
            write_manifest(cmd.output, "bench", details);
        }
        return kExitOk;
    } catch (const Error& e) {
        err << "bench: " << e.what() << "\n";
        return is_input_error(e) ? kExitInputError : kExitComputationError;
    }
}

struct GenerateCommand {
    std::string output;
    Model model;
    SyntheticChainConfig chain;
    PricingConfig pricing;
};

inline int run_generate(const GenerateCommand& cmd, std::ostream& out = std::cout,
                        std::ostream& err = std::cerr) {
    try {
        if (cmd.output.empty()) throw InvalidInputError("generate: output path required");
        const OptionChainFile chain = generate_synthetic_chain(cmd.model, cmd.chain, cmd.pricing);
        write_chain(chain, cmd.output);

        nlohmann::json details;
        details["output"] = cmd.output;
        details["model"] = model_to_json(cmd.model);
        details["n_quotes"] = cmd.chain.n_quotes;
        details["noise_sd"] = cmd.chain.noise_sd;
        details["seed"] = cmd.chain.rng_seed;
        details["base_price"] = cmd.chain.base_price;
        write_manifest(cmd.output, "generate", details);

        out << "chain with " << chain.quotes.size() << " quotes written to " << cmd.output << "\n";
        return kExitOk;
    } catch (const Error& e) {
        err << "generate: " << e.what() << "\n";
        return is_input_error(e) ? kExitInputError : kExitComputationError;
    }
}

}  // namespace lyopt::cli
