// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Each check pins its tolerances in code; thresholds for the
// timing criteria are ratios, since absolute seconds are hardware-bound.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lyopt/bench.hpp"
#include "lyopt/calibration.hpp"
#include "lyopt/chain_io.hpp"
#include "lyopt/cli.hpp"
#include "lyopt/lyapunov.hpp"
#include "lyopt/matrix.hpp"
#include "lyopt/models.hpp"
#include "lyopt/pricing.hpp"
#include "lyopt/rng.hpp"

using namespace lyopt;

namespace {

int failures = 0;

void report(int criterion, bool pass, const std::string& label, const std::string& detail) {
    std::printf("criterion %d: %s  %s (%s)\n", criterion, pass ? "PASS" : "FAIL", label.c_str(),
                detail.c_str());
    if (!pass) ++failures;
}

double seconds_since(const std::chrono::steady_clock::time_point& start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Matrix random_psd2(Rng& rng) {
    Matrix l(2, 2);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) l(i, j) = rng.uniform(-0.5, 0.5);
    return l * l.transpose();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// --- criterion 1: analytical vs numerical covariance over random draws ----

void criterion_1() {
    const auto start = std::chrono::steady_clock::now();
    Rng rng(20240001);
    std::vector<double> times;
    for (int i = 0; i < 13; ++i) times.push_back(1e-4 * std::pow(10.0 / 1e-4, i / 12.0));

    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const LmrGwParams p{rng.uniform(0.1, 20.0), rng.uniform(0.01, 2.0),
                            rng.uniform(0.01, 2.0)};
        const Matrix p0 = random_psd2(rng);
        const LinearSde sde = lmrgw_to_sde(p, p0);
        for (double t : times) {
            const Matrix a = lmrgw_covariance_analytical(p, p0, t).cov;
            const Matrix n = lyapunov_numerical(sde, t).cov;
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j)
                    worst = std::max(worst, std::fabs(a(i, j) - n(i, j)) /
                                                std::max(1.0, std::fabs(a(i, j))));
        }
    }
    const double elapsed = seconds_since(start);
    char detail[160];
    std::snprintf(detail, sizeof(detail),
                  "worst entrywise |Pa-Pn|/max(1,|P|) = %.3e vs 1e-10; %.1f s vs 30 s budget",
                  worst, elapsed);
    report(1, worst <= 1e-10 && elapsed <= 30.0,
           "analytical-numerical equivalence, 1000 random draws x 13 horizons", detail);
}

// --- criterion 2: per-quote price discrepancy on a 500-quote chain --------

void criterion_2() {
    SyntheticChainConfig cfg;
    cfg.n_quotes = 500;
    cfg.noise_sd = 0.005;
    cfg.rng_seed = 2;
    const Model model = LmrGwParams{2.0, 0.5, 0.2};
    const OptionChainFile chain = generate_synthetic_chain(model, cfg);

    double worst = 0.0;
    for (const auto& q : chain.quotes) {
        const double a = price_with_model(q, model, VarianceMethod::Analytical);
        const double n = price_with_model(q, model, VarianceMethod::Numerical);
        worst = std::max(worst, std::fabs(a - n) / std::max(std::fabs(a), 1e-30));
    }
    char detail[120];
    std::snprintf(detail, sizeof(detail), "worst relative price difference = %.3e vs 1e-10", worst);
    report(2, worst <= 1e-10, "analytical vs numerical pricing of a 500-quote chain", detail);
}

// --- criterion 3: speedup thresholds ---------------------------------------

void criterion_3() {
    const auto start = std::chrono::steady_clock::now();
    const LmrGwParams params{2.0, 0.5, 0.2};

    const BenchReport variance = bench_variance(params, {1, 100, 1000, 3000}, 5);
    std::printf("%s", render_table(variance).c_str());
    double worst_speedup = std::numeric_limits<double>::infinity();
    for (const auto& row : variance.rows)
        if (row.evaluations >= 1000) worst_speedup = std::min(worst_speedup, row.speedup);

    std::vector<OptionChainFile> chains;
    for (int c = 0; c < 5; ++c) {
        SyntheticChainConfig cfg;
        cfg.n_quotes = 100;
        cfg.noise_sd = 0.003;
        cfg.rng_seed = 300 + static_cast<std::uint64_t>(c);
        cfg.maturities.clear();
        for (int m = 1; m <= 20; ++m) cfg.maturities.push_back(m / 12.0);
        chains.push_back(generate_synthetic_chain(Model{params}, cfg));
    }
    CalibrationConfig ccfg;
    ccfg.rng_seed = 3;
    const BenchReport calib = bench_calibration(chains, ModelKind::LmrGw, ccfg);
    double total_ana = 0.0, total_num = 0.0;
    for (const auto& row : calib.rows) {
        total_ana += row.analytical_s;
        total_num += row.numerical_s;
    }
    const double calib_speedup = total_num / total_ana;
    const double elapsed = seconds_since(start);

    char detail[220];
    std::snprintf(detail, sizeof(detail),
                  "variance speedup >= %.1f for M >= 1000 (need >= 5); calibration speedup %.1f "
                  "on 5 chains x 100 quotes (need >= 3); %.1f s vs 300 s budget",
                  worst_speedup, calib_speedup, elapsed);
    report(3, worst_speedup >= 5.0 && calib_speedup >= 3.0 && elapsed <= 300.0,
           "analytical route speedup over the numerical route", detail);
}

// --- criterion 4: Schwartz closed form vs numerical solver ----------------

void criterion_4() {
    Rng rng(20240004);
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const SchwartzParams p{rng.uniform(0.1, 5.0), rng.uniform(0.05, 1.5),
                               rng.uniform(0.05, 1.5), rng.uniform(-0.9, 0.9)};
        const double t = rng.uniform(0.05, 5.0);
        const LinearSde sde = schwartz_to_sde(p);
        const double closed = schwartz_variance(p, t);
        const double numerical = output_variance(sde, lyapunov_numerical(sde, t));
        worst = std::max(worst, std::fabs(closed - numerical) / std::max(std::fabs(closed), 1e-30));
    }
    char detail[120];
    std::snprintf(detail, sizeof(detail), "worst relative difference = %.3e vs 1e-12", worst);
    report(4, worst <= 1e-12,
           "Schwartz closed-form variance vs block-exponential solver, 200 draws", detail);
}

// --- criterion 5: oracle triangle -------------------------------------------

void criterion_5() {
    Rng rng(20240005);
    double worst_simpson = 0.0, worst_rk4 = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        LinearSde sde;
        if (rng.below(2) == 0) {
            const LmrGwParams p{rng.uniform(0.2, 5.0), rng.uniform(0.05, 1.0),
                                rng.uniform(0.05, 1.0)};
            sde = lmrgw_to_sde(p, random_psd2(rng));
        } else {
            const SchwartzParams p{rng.uniform(0.2, 5.0), rng.uniform(0.05, 1.0),
                                   rng.uniform(0.05, 1.0), rng.uniform(-0.9, 0.9)};
            sde = schwartz_to_sde(p);
            sde.initial_cov = random_psd2(rng);
        }
        const double t = rng.uniform(0.1, 1.5);
        const Matrix reference = lyapunov_numerical(sde, t).cov;
        const Matrix simpson = lagrange_covariance(sde, t, 2001).cov;
        const Matrix rk4 =
            integrate_lyapunov_ode(sde.drift, sde.diffusion_term(), sde.initial_cov, t, 100000);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                const double scale = std::max(1.0, std::fabs(reference(i, j)));
                worst_simpson =
                    std::max(worst_simpson, std::fabs(simpson(i, j) - reference(i, j)) / scale);
                worst_rk4 = std::max(worst_rk4, std::fabs(rk4(i, j) - reference(i, j)) / scale);
            }
    }
    char detail[160];
    std::snprintf(detail, sizeof(detail),
                  "Simpson(2001) worst = %.3e, RK4(1e5) worst = %.3e vs 1e-8", worst_simpson,
                  worst_rk4);
    report(5, worst_simpson <= 1e-8 && worst_rk4 <= 1e-8,
           "quadrature and RK4 oracles vs block-exponential solver, 50 systems", detail);
}

// --- criterion 6: round-trip calibration ------------------------------------

void criterion_6() {
    const auto start = std::chrono::steady_clock::now();
    const LmrGwParams truth{2.0, 0.5, 0.2};

    auto recover = [&](double noise_sd, std::uint64_t seed) {
        SyntheticChainConfig cfg;
        cfg.n_quotes = 100;
        cfg.noise_sd = noise_sd;
        cfg.rng_seed = seed;
        const OptionChainFile chain = generate_synthetic_chain(Model{truth}, cfg);
        CalibrationConfig ccfg;
        ccfg.rng_seed = seed;
        const CalibrationResult fit = calibrate(chain.quotes, ModelKind::LmrGw, ccfg);
        const auto& p = std::get<LmrGwParams>(fit.parameters);
        return std::max({std::fabs(p.lambda / truth.lambda - 1.0),
                         std::fabs(p.sigma1 / truth.sigma1 - 1.0),
                         std::fabs(p.sigma2 / truth.sigma2 - 1.0)});
    };

    const double clean_err = recover(0.0, 18);
    const double noisy_err = recover(0.005, 18);
    const double elapsed = seconds_since(start);

    char detail[200];
    std::snprintf(detail, sizeof(detail),
                  "noiseless worst error %.3e vs 1%%; noisy (sd = 0.5%% of S0) worst error %.3e "
                  "vs 10%%; %.1f s vs 120 s budget",
                  clean_err, noisy_err, elapsed);
    report(6, clean_err <= 0.01 && noisy_err <= 0.10 && elapsed <= 120.0,
           "parameter recovery from a synthetic chain (100 quotes, 12 maturities)", detail);
}

// --- criterion 7: pricing property suite ------------------------------------

void criterion_7() {
    Rng rng(20240007);
    bool pass = true;
    std::string what = "all properties hold";
    auto fail = [&](const std::string& msg) {
        pass = false;
        what = msg;
    };

    // Put-call parity <= 1e-12.
    for (int trial = 0; trial < 200 && pass; ++trial) {
        OptionQuote q;
        q.id = "p";
        q.strike = rng.uniform(50.0, 150.0);
        q.maturity = rng.uniform(0.05, 3.0);
        q.underlying_price = rng.uniform(50.0, 150.0);
        const double variance = rng.uniform(1e-4, 1.0);
        q.kind = OptionType::Call;
        const double call = black_price(q, variance);
        q.kind = OptionType::Put;
        const double put = black_price(q, variance);
        if (std::fabs(call - put - (q.underlying_price - q.strike)) > 1e-12)
            fail("put-call parity breached");
    }

    // Monotonicity in strike and in total variance.
    for (int trial = 0; trial < 50 && pass; ++trial) {
        OptionQuote q;
        q.id = "m";
        q.maturity = rng.uniform(0.1, 2.0);
        q.underlying_price = rng.uniform(60.0, 140.0);
        const double variance = rng.uniform(1e-3, 0.6);
        double prev_call = std::numeric_limits<double>::infinity(), prev_put = -1.0;
        for (double m = 0.5; m <= 1.5; m += 0.05) {
            q.strike = m * q.underlying_price;
            q.kind = OptionType::Call;
            const double call = black_price(q, variance);
            q.kind = OptionType::Put;
            const double put = black_price(q, variance);
            if (call > prev_call + 1e-12 || put < prev_put - 1e-12)
                fail("monotonicity in strike breached");
            prev_call = call;
            prev_put = put;
        }
        q.strike = q.underlying_price;
        q.kind = OptionType::Call;
        double prev = 0.0;
        for (double p = 1e-4; p <= 1.0; p *= 1.7) {
            const double price = black_price(q, p);
            if (price < prev) fail("monotonicity in variance breached");
            prev = price;
        }
    }

    // Implied-vol round trip over sigma in [0.01, 3].
    for (double sigma = 0.01; sigma <= 3.0 && pass; sigma *= 1.6) {
        OptionQuote q;
        q.id = "iv";
        q.maturity = rng.uniform(0.25, 2.0);
        q.underlying_price = 100.0;
        q.strike = rng.uniform(95.0, 105.0);
        q.kind = OptionType::Call;
        const double price = black_price(q, sigma * sigma * q.maturity);
        if (std::fabs(implied_vol(q, price) - sigma) > 1e-8)
            fail("implied-vol round trip off at sigma = " + std::to_string(sigma));
    }

    // Zero-variance limit returns the intrinsic value.
    {
        OptionQuote q;
        q.id = "z";
        q.kind = OptionType::Call;
        q.strike = 80.0;
        q.maturity = 1.0;
        q.underlying_price = 100.0;
        if (black_price(q, 0.0) != 20.0) fail("zero-variance limit is not intrinsic");
    }

    // OU reduction of the two-factor model, sigma2 = 0.
    {
        const LmrGwParams reduced{1.7, 0.45, 0.0};
        const OuParams ou{1.7, 0.45};
        for (double t : {0.01, 0.1, 0.5, 1.0, 2.0, 5.0}) {
            const double p11 = lmrgw_covariance_analytical(reduced, Matrix(2, 2), t).cov(0, 0);
            if (std::fabs(p11 - ou_variance(ou, 0.0, t)) > 1e-14)
                fail("OU reduction off at t = " + std::to_string(t));
        }
    }

    report(7, pass, "pricing property suite", what);
}

// --- criterion 8: determinism and split proportions -------------------------

void criterion_8() {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "lyopt_acceptance";
    fs::create_directories(dir);

    SyntheticChainConfig cfg;
    cfg.n_quotes = 100;
    cfg.noise_sd = 0.004;
    cfg.rng_seed = 8;
    const OptionChainFile chain = generate_synthetic_chain(Model{LmrGwParams{2.0, 0.5, 0.2}}, cfg);
    const fs::path chain_path = dir / "chain.csv";
    write_chain(chain, chain_path.string());

    cli::CalibrateCommand cmd;
    cmd.input = chain_path.string();
    cmd.kind = ModelKind::LmrGw;
    cmd.config.rng_seed = 4242;

    std::ostringstream out, err;
    cmd.output_prefix = (dir / "run1").string();
    const int rc1 = cli::run_calibrate(cmd, out, err);
    cmd.output_prefix = (dir / "run2").string();
    const int rc2 = cli::run_calibrate(cmd, out, err);

    const bool identical =
        rc1 == 0 && rc2 == 0 &&
        read_file((dir / "run1.json").string()) == read_file((dir / "run2.json").string()) &&
        read_file((dir / "run1_surface.csv").string()) ==
            read_file((dir / "run2_surface.csv").string());

    const auto [train, test] = train_test_split(chain.quotes, 0.7, 4242);
    std::set<std::string> ids;
    for (const auto& q : train) ids.insert(q.id);
    for (const auto& q : test) ids.insert(q.id);
    const bool partition = train.size() == 70 && test.size() == 30 && ids.size() == 100;

    char detail[160];
    std::snprintf(detail, sizeof(detail), "outputs byte-identical: %s; split 70/30 partition: %s",
                  identical ? "yes" : "no", partition ? "yes" : "no");
    report(8, identical && partition, "seeded calibrate runs and train/test split", detail);
}

}  // namespace

int main() {
    std::printf("acceptance suite, tool version %s\n", kVersion);
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    if (failures == 0)
        std::printf("all criteria passed\n");
    else
        std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
