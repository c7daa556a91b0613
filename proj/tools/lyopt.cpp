// Command-line front end: price option chains, calibrate models against
// them, benchmark the analytical-vs-numerical variance routes and generate
// synthetic fixtures. See README.md for the file formats.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lyopt/cli.hpp"
#include "lyopt/version.hpp"

namespace {

struct ModelFlags {
    std::string kind = "lmrgw";
    double lambda = 2.0;
    double sigma1 = 0.5;
    double sigma2 = 0.2;
    double mu = 0.0;
    double sigma = 0.3;
    double level = 0.0;
    double kappa = 1.5;
    double sigma_chi = 0.3;
    double sigma_xi = 0.15;
    double rho = 0.0;
    double mu_xi = 0.0;
};

void add_model_flags(CLI::App& app, ModelFlags& flags) {
    app.add_option("--model", flags.kind, "Model kind: gbm|ou|lmrgw|schwartz")
        ->check(CLI::IsMember({"gbm", "ou", "lmrgw", "schwartz"}));
    app.add_option("--lambda", flags.lambda, "Mean-reversion speed (ou, lmrgw)");
    app.add_option("--sigma1", flags.sigma1, "Short-term volatility (lmrgw)");
    app.add_option("--sigma2", flags.sigma2, "Long-term volatility (lmrgw)");
    app.add_option("--mu", flags.mu, "Long-term drift (lmrgw, unused by pricing)");
    app.add_option("--sigma", flags.sigma, "Volatility (gbm, ou)");
    app.add_option("--level", flags.level, "Reversion level (ou, unused by pricing)");
    app.add_option("--kappa", flags.kappa, "Mean-reversion speed (schwartz)");
    app.add_option("--sigma-chi", flags.sigma_chi, "Short-term volatility (schwartz)");
    app.add_option("--sigma-xi", flags.sigma_xi, "Equilibrium volatility (schwartz)");
    app.add_option("--rho", flags.rho, "Noise correlation (schwartz)");
    app.add_option("--mu-xi", flags.mu_xi, "Equilibrium drift (schwartz, unused by pricing)");
}

lyopt::Model build_model(const ModelFlags& f) {
    switch (lyopt::parse_model_kind(f.kind)) {
        case lyopt::ModelKind::Gbm:
            return lyopt::GbmParams{f.sigma};
        case lyopt::ModelKind::Ou:
            return lyopt::OuParams{f.lambda, f.sigma, f.level};
        case lyopt::ModelKind::LmrGw:
            return lyopt::LmrGwParams{f.lambda, f.sigma1, f.sigma2, f.mu};
        case lyopt::ModelKind::Schwartz:
            return lyopt::SchwartzParams{f.kappa, f.sigma_chi, f.sigma_xi, f.rho, f.mu_xi};
    }
    throw lyopt::InvalidInputError("unknown model kind");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-factor commodity option pricing and market calibration"};
    app.set_version_flag("--version", std::string(lyopt::kVersion));
    app.require_subcommand(1);

    // price
    auto* price = app.add_subcommand("price", "Price an option chain under a model");
    ModelFlags price_model;
    lyopt::cli::PriceCommand price_cmd;
    std::string price_method = "analytical";
    price->add_option("--input", price_cmd.input, "Chain CSV")->required();
    price->add_option("--output", price_cmd.output, "Output CSV (default: stdout)");
    price->add_option("--method", price_method, "Variance route: analytical|numerical")
        ->check(CLI::IsMember({"analytical", "numerical"}));
    price->add_option("--rate", price_cmd.pricing.risk_free_rate, "Risk-free rate (default 0)");
    add_model_flags(*price, price_model);

    // calibrate
    auto* calibrate = app.add_subcommand("calibrate", "Fit model parameters to an option chain");
    ModelFlags calib_model;
    lyopt::cli::CalibrateCommand calib_cmd;
    std::string calib_method = "analytical";
    std::string group_by = "chain";
    calibrate->add_option("--input", calib_cmd.input, "Chain CSV")->required();
    calibrate->add_option("--output", calib_cmd.output_prefix,
                          "Output prefix; writes <prefix>.json and <prefix>_surface.csv")
        ->required();
    calibrate->add_option("--method", calib_method, "Variance route: analytical|numerical")
        ->check(CLI::IsMember({"analytical", "numerical"}));
    calibrate->add_option("--seed", calib_cmd.config.rng_seed, "RNG seed (default 0)");
    calibrate->add_option("--train-fraction", calib_cmd.config.train_fraction,
                          "Fraction of quotes used for fitting (default 0.7)");
    calibrate->add_option("--restarts", calib_cmd.config.restarts, "Optimizer restarts (default 3)");
    calibrate->add_option("--max-iterations", calib_cmd.config.max_iterations,
                          "Optimizer iteration cap (default 2000)");
    calibrate->add_option("--loss-tolerance", calib_cmd.config.loss_tolerance,
                          "Relative loss tolerance (default 1e-10)");
    calibrate->add_option("--group-by", group_by, "Fit per 'chain' or per 'underlying'")
        ->check(CLI::IsMember({"chain", "underlying"}));
    calibrate->add_option("--rate", calib_cmd.pricing.risk_free_rate, "Risk-free rate (default 0)");
    add_model_flags(*calibrate, calib_model);

    // bench
    auto* bench = app.add_subcommand("bench", "Time analytical vs numerical variance evaluation");
    ModelFlags bench_model;
    lyopt::cli::BenchCommand bench_cmd;
    bench->add_option("--mode", bench_cmd.mode, "variance|calibration")
        ->check(CLI::IsMember({"variance", "calibration"}));
    bench->add_option("--output", bench_cmd.output, "CSV report path");
    bench->add_option("--evaluations", bench_cmd.m_values,
                      "Grid sizes M for variance mode (default 1 10 100 1000 3000)");
    bench->add_option("--repetitions", bench_cmd.repetitions, "Timed passes per row (default 10)");
    bench->add_option("--input", bench_cmd.inputs, "Chain CSVs for calibration mode");
    bench->add_option("--chains", bench_cmd.synthetic_chains,
                      "Synthetic chain count for calibration mode (default 5)");
    bench->add_option("--quotes", bench_cmd.synthetic_quotes,
                      "Quotes per synthetic chain (default 100)");
    bench->add_option("--maturities", bench_cmd.synthetic_maturities,
                      "Monthly maturities per synthetic chain (default 20)");
    bench->add_option("--seed", bench_cmd.seed, "RNG seed (default 0)");
    add_model_flags(*bench, bench_model);

    // generate
    auto* generate = app.add_subcommand("generate", "Write a synthetic option chain");
    ModelFlags gen_model;
    lyopt::cli::GenerateCommand gen_cmd;
    int gen_maturities = 12;
    double moneyness_min = 0.8, moneyness_max = 1.2;
    int moneyness_steps = 9;
    generate->add_option("--output", gen_cmd.output, "Chain CSV path")->required();
    generate->add_option("--quotes", gen_cmd.chain.n_quotes, "Quote count (default 500)");
    generate->add_option("--maturities", gen_maturities, "Monthly maturity count (default 12)");
    generate->add_option("--moneyness-min", moneyness_min, "Lowest K/S0 (default 0.8)");
    generate->add_option("--moneyness-max", moneyness_max, "Highest K/S0 (default 1.2)");
    generate->add_option("--moneyness-steps", moneyness_steps, "Moneyness grid size (default 9)");
    generate->add_option("--noise-sd", gen_cmd.chain.noise_sd,
                         "Price noise, fraction of the underlying (default 0)");
    generate->add_option("--seed", gen_cmd.chain.rng_seed, "RNG seed (default 0)");
    generate->add_option("--base-price", gen_cmd.chain.base_price, "Underlying level (default 100)");
    generate->add_option("--trade-date", gen_cmd.chain.trade_date, "ISO date stamp");
    generate->add_option("--label", gen_cmd.chain.market_label, "Market label");
    add_model_flags(*generate, gen_model);

    CLI11_PARSE(app, argc, argv);

    try {
        if (price->parsed()) {
            price_cmd.model = build_model(price_model);
            price_cmd.method = lyopt::parse_variance_method(price_method);
            return lyopt::cli::run_price(price_cmd);
        }
        if (calibrate->parsed()) {
            calib_cmd.kind = lyopt::parse_model_kind(calib_model.kind);
            calib_cmd.config.method = lyopt::parse_variance_method(calib_method);
            calib_cmd.group_by_underlying = (group_by == "underlying");
            return lyopt::cli::run_calibrate(calib_cmd);
        }
        if (bench->parsed()) {
            bench_cmd.params = lyopt::LmrGwParams{bench_model.lambda, bench_model.sigma1,
                                                  bench_model.sigma2, bench_model.mu};
            return lyopt::cli::run_bench(bench_cmd);
        }
        if (generate->parsed()) {
            gen_cmd.model = build_model(gen_model);
            gen_cmd.chain.maturities.clear();
            for (int m = 1; m <= gen_maturities; ++m) gen_cmd.chain.maturities.push_back(m / 12.0);
            gen_cmd.chain.moneyness_grid.clear();
            for (int i = 0; i < moneyness_steps; ++i) {
                const double frac = moneyness_steps == 1 ? 0.0
                                                         : static_cast<double>(i) /
                                                               static_cast<double>(moneyness_steps - 1);
                gen_cmd.chain.moneyness_grid.push_back(moneyness_min +
                                                       frac * (moneyness_max - moneyness_min));
            }
            return lyopt::cli::run_generate(gen_cmd);
        }
    } catch (const lyopt::Error& e) {
        std::cerr << "lyopt: " << e.what() << "\n";
        return lyopt::cli::is_input_error(e) ? lyopt::cli::kExitInputError
                                             : lyopt::cli::kExitComputationError;
    }
    return lyopt::cli::kExitOk;
}
