#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "lyopt/errors.hpp"
#include "lyopt/lyapunov.hpp"
#include "lyopt/models.hpp"
#include "lyopt/nelder_mead.hpp"
#include "lyopt/pricing.hpp"
#include "lyopt/rng.hpp"

namespace lyopt {

struct CalibrationConfig {
    VarianceMethod method = VarianceMethod::Analytical;
    std::vector<double> initial_guess;  ///< natural parameters; empty means "use the heuristic"
    int max_iterations = 2000;
    double loss_tolerance = 1e-10;      ///< relative spread tolerance on the simplex values
    int restarts = 3;                   ///< best-of-N runs from jittered starting points
    std::uint64_t rng_seed = 0;
    double train_fraction = 0.7;

    void validate() const {
        if (!(train_fraction > 0.0 && train_fraction <= 1.0))
            throw InvalidInputError("CalibrationConfig: train fraction must be in (0, 1]");
        if (restarts < 1) throw InvalidInputError("CalibrationConfig: restarts must be >= 1");
        if (max_iterations < 1) throw InvalidInputError("CalibrationConfig: max iterations must be >= 1");
        if (!(loss_tolerance > 0.0)) throw InvalidInputError("CalibrationConfig: loss tolerance must be > 0");
    }
};

struct QuoteFit {
    std::string id;
    double market_price = 0.0;
    double fitted_price = 0.0;
    double abs_error = 0.0;
    double rel_error = 0.0;
};

struct CalibrationResult {
    ModelKind model = ModelKind::LmrGw;
    VarianceMethod method = VarianceMethod::Analytical;
    Model parameters;                     ///< fitted parameter set
    double final_loss = 0.0;              ///< sum of squared price errors on the input quotes
    int iterations = 0;                   ///< iterations used by the winning restart
    bool converged = false;
    std::vector<QuoteFit> per_quote_fit;  ///< one row per input quote, ordered by id
    std::vector<std::string> warnings;    ///< e.g. dropped bad ticks
    double train_rmse = std::numeric_limits<double>::quiet_NaN();
    double test_rmse = std::numeric_limits<double>::quiet_NaN();
};

/// One point of the implied-volatility surface comparison.
struct SurfacePoint {
    double maturity = 0.0;
    double moneyness = 0.0;  ///< K / S0
    double model_iv = 0.0;
    double market_iv = 0.0;
};

struct FitReport {
    double rmse = std::numeric_limits<double>::quiet_NaN();
    std::vector<QuoteFit> rows;
    std::vector<SurfacePoint> surface;
};

namespace detail {

/// Quotes grouped by exact maturity so each loss evaluation computes the
/// model variance once per distinct maturity instead of once per quote.
/// Options within one delivery period share their maturity, so this is where
/// most of the evaluation cost disappears.
struct MaturityGroups {
    std::vector<double> maturities;  ///< unique, ascending
    std::vector<int> group_of_quote;
};

inline MaturityGroups group_by_maturity(const std::vector<OptionQuote>& quotes) {
    MaturityGroups g;
    g.maturities.reserve(quotes.size());
    for (const auto& q : quotes) g.maturities.push_back(q.maturity);
    std::sort(g.maturities.begin(), g.maturities.end());
    g.maturities.erase(std::unique(g.maturities.begin(), g.maturities.end()), g.maturities.end());
    g.group_of_quote.reserve(quotes.size());
    for (const auto& q : quotes) {
        const auto it = std::lower_bound(g.maturities.begin(), g.maturities.end(), q.maturity);
        g.group_of_quote.push_back(static_cast<int>(it - g.maturities.begin()));
    }
    return g;
}

inline double loss_grouped(const Model& params, const std::vector<OptionQuote>& quotes,
                           const MaturityGroups& groups, VarianceMethod method,
                           const PricingConfig& pricing) {
    std::vector<double> variances(groups.maturities.size());
    for (std::size_t i = 0; i < groups.maturities.size(); ++i)
        variances[i] = model_variance(params, groups.maturities[i], method);
    double acc = 0.0;
    for (std::size_t i = 0; i < quotes.size(); ++i) {
        const double fitted = black_price(quotes[i], variances[groups.group_of_quote[i]], pricing);
        const double r = quotes[i].market_price - fitted;
        acc += r * r;
    }
    return acc;
}

/// Map between natural parameters and the unconstrained optimisation space:
/// log for positive quantities, atanh for the Schwartz correlation. This
/// keeps the least-squares problem formally unconstrained while every trial
/// remains a valid parameter set.
inline int free_parameter_count(ModelKind kind) {
    switch (kind) {
        case ModelKind::Gbm: return 1;
        case ModelKind::Ou: return 2;
        case ModelKind::LmrGw: return 3;
        case ModelKind::Schwartz: return 4;
    }
    return 0;
}

inline std::vector<double> pack_parameters(ModelKind kind, const std::vector<double>& natural) {
    if (static_cast<int>(natural.size()) != free_parameter_count(kind))
        throw InvalidInputError("pack_parameters: wrong parameter count");
    auto safe_log = [](double v) { return std::log(std::max(v, 1e-8)); };
    std::vector<double> u(natural.size());
    for (std::size_t i = 0; i < natural.size(); ++i) u[i] = safe_log(natural[i]);
    if (kind == ModelKind::Schwartz) u[3] = std::atanh(std::clamp(natural[3], -0.999999, 0.999999));
    return u;
}

inline Model unpack_parameters(ModelKind kind, const std::vector<double>& u) {
    switch (kind) {
        case ModelKind::Gbm:
            return GbmParams{std::exp(u[0])};
        case ModelKind::Ou:
            return OuParams{std::exp(u[0]), std::exp(u[1]), 0.0};
        case ModelKind::LmrGw:
            return LmrGwParams{std::exp(u[0]), std::exp(u[1]), std::exp(u[2]), 0.0};
        case ModelKind::Schwartz:
            return SchwartzParams{std::exp(u[0]), std::exp(u[1]), std::exp(u[2]), std::tanh(u[3]), 0.0};
    }
    throw InvalidInputError("unpack_parameters: unknown model kind");
}

/// At-the-money implied volatility at the shortest and longest maturities.
/// The term-structure endpoints roughly identify the short- and long-term
/// factors, which is all an initial guess needs.
inline std::pair<double, double> atm_vol_endpoints(const std::vector<OptionQuote>& quotes,
                                                   const PricingConfig& pricing) {
    auto atm_vol_at = [&](double maturity) {
        const OptionQuote* best = nullptr;
        double best_dist = std::numeric_limits<double>::infinity();
        for (const auto& q : quotes) {
            if (q.maturity != maturity) continue;
            const double dist = std::fabs(q.strike / q.underlying_price - 1.0);
            if (dist < best_dist) {
                best_dist = dist;
                best = &q;
            }
        }
        double vol = 0.3;
        if (best) {
            try {
                vol = implied_vol(*best, best->market_price, pricing);
            } catch (const Error&) {
            }
        }
        return std::max(vol, 1e-3);
    };
    double t_min = quotes.front().maturity;
    double t_max = t_min;
    for (const auto& q : quotes) {
        t_min = std::min(t_min, q.maturity);
        t_max = std::max(t_max, q.maturity);
    }
    return {atm_vol_at(t_min), atm_vol_at(t_max)};
}

inline std::vector<double> default_initial_guess(ModelKind kind,
                                                 const std::vector<OptionQuote>& quotes,
                                                 const PricingConfig& pricing) {
    const auto [vol_short, vol_long] = atm_vol_endpoints(quotes, pricing);
    switch (kind) {
        case ModelKind::Gbm: return {vol_short};
        case ModelKind::Ou: return {1.0, vol_short};
        case ModelKind::LmrGw: return {1.0, vol_short, vol_long};
        case ModelKind::Schwartz: return {1.0, vol_short, vol_long, 0.0};
    }
    return {};
}

}  // namespace detail

/// Least-squares loss: sum over quotes of (market price - model price)^2.
/// The model variance is computed once per distinct maturity. Residuals are
/// accumulated in input order.
inline double loss(const Model& params, const std::vector<OptionQuote>& quotes,
                   VarianceMethod method, const PricingConfig& pricing = {}) {
    if (quotes.empty()) throw InvalidInputError("loss: no quotes");
    validate_model(params);
    return detail::loss_grouped(params, quotes, detail::group_by_maturity(quotes), method, pricing);
}

/// Random partition of a quote list into train and test sets. Deterministic
/// per seed; each part keeps the input's relative order.
inline std::pair<std::vector<OptionQuote>, std::vector<OptionQuote>> train_test_split(
    const std::vector<OptionQuote>& quotes, double train_fraction, std::uint64_t rng_seed) {
    if (quotes.empty()) throw InvalidInputError("train_test_split: no quotes");
    if (!(train_fraction > 0.0 && train_fraction <= 1.0))
        throw InvalidInputError("train_test_split: fraction must be in (0, 1]");

    const std::size_t n = quotes.size();
    const std::size_t k = static_cast<std::size_t>(
        std::min<long long>(static_cast<long long>(n), std::llround(train_fraction * static_cast<double>(n))));

    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    Rng rng = Rng::stream(rng_seed, /*stream_id=*/1);
    for (std::size_t i = n - 1; i > 0; --i)
        std::swap(idx[i], idx[rng.below(i + 1)]);

    std::vector<bool> in_train(n, false);
    for (std::size_t i = 0; i < k; ++i) in_train[idx[i]] = true;

    std::pair<std::vector<OptionQuote>, std::vector<OptionQuote>> out;
    for (std::size_t i = 0; i < n; ++i)
        (in_train[i] ? out.first : out.second).push_back(quotes[i]);
    return out;
}

/// Fit model parameters to a quote list by Nelder-Mead least squares on
/// log-transformed parameters, best of `restarts` runs from jittered starting
/// points. Deterministic per (quotes, config, seed). Quotes whose market
/// price violates the no-arbitrage bounds are dropped with a warning rather
/// than allowed to dominate the squared loss. The working quote order is
/// canonicalised by id, so the fit is invariant to reordering the input.
inline CalibrationResult calibrate(std::vector<OptionQuote> quotes, ModelKind kind,
                                   const CalibrationConfig& cfg, const PricingConfig& pricing = {}) {
    cfg.validate();
    pricing.validate();
    if (quotes.empty()) throw InvalidInputError("calibrate: no quotes");
    for (const auto& q : quotes) q.validate();

    std::sort(quotes.begin(), quotes.end(),
              [](const OptionQuote& a, const OptionQuote& b) { return a.id < b.id; });

    CalibrationResult result;
    result.model = kind;
    result.method = cfg.method;

    // Drop bad ticks (prices below intrinsic; above-upper-bound prices are
    // already rejected by OptionQuote validation).
    {
        std::vector<OptionQuote> kept;
        kept.reserve(quotes.size());
        for (const auto& q : quotes) {
            const double discount = std::exp(-pricing.risk_free_rate * q.maturity);
            const double bound_tol = 1e-9 * std::max(1.0, q.underlying_price);
            if (q.market_price < discount * intrinsic_value(q) - bound_tol) {
                result.warnings.push_back("dropped quote '" + q.id +
                                          "': market price below intrinsic value");
                continue;
            }
            kept.push_back(q);
        }
        quotes = std::move(kept);
    }

    const int n_free = detail::free_parameter_count(kind);
    std::size_t distinct_maturities = detail::group_by_maturity(quotes).maturities.size();
    const std::size_t needed_maturities = n_free > 1 ? 2 : 1;
    if (static_cast<int>(quotes.size()) < n_free || distinct_maturities < needed_maturities)
        throw UnderdeterminedError(
            "calibrate: need at least " + std::to_string(n_free) + " quotes over " +
            std::to_string(needed_maturities) + " distinct maturities for model '" +
            to_string(kind) + "'");

    const detail::MaturityGroups groups = detail::group_by_maturity(quotes);

    std::vector<double> guess = cfg.initial_guess.empty()
                                    ? detail::default_initial_guess(kind, quotes, pricing)
                                    : cfg.initial_guess;
    const std::vector<double> u0 = detail::pack_parameters(kind, guess);

    auto objective = [&](const std::vector<double>& u) {
        const Model trial = detail::unpack_parameters(kind, u);
        double value;
        try {
            value = detail::loss_grouped(trial, quotes, groups, cfg.method, pricing);
        } catch (const Error&) {
            return std::numeric_limits<double>::infinity();
        }
        return std::isfinite(value) ? value : std::numeric_limits<double>::infinity();
    };

    NelderMeadOptions nm_opts;
    nm_opts.max_iterations = cfg.max_iterations;
    nm_opts.f_tol_rel = cfg.loss_tolerance;

    Rng jitter_rng = Rng::stream(cfg.rng_seed, /*stream_id=*/2);
    NelderMeadResult best;
    best.best_value = std::numeric_limits<double>::infinity();
    for (int r = 0; r < cfg.restarts; ++r) {
        std::vector<double> u_start = u0;
        if (r > 0)
            for (double& u : u_start) u += 0.35 * jitter_rng.normal();
        const NelderMeadResult run = nelder_mead_minimize(objective, u_start, nm_opts);
        if (run.best_value < best.best_value) best = run;
    }
    if (!std::isfinite(best.best_value))
        throw Error("calibrate: no restart produced a finite loss");

    result.parameters = detail::unpack_parameters(kind, best.best_point);
    result.final_loss = best.best_value;
    result.iterations = best.iterations;
    result.converged = best.converged;

    std::vector<double> variances(groups.maturities.size());
    for (std::size_t i = 0; i < groups.maturities.size(); ++i)
        variances[i] = model_variance(result.parameters, groups.maturities[i], cfg.method);
    double sq_sum = 0.0;
    result.per_quote_fit.reserve(quotes.size());
    for (std::size_t i = 0; i < quotes.size(); ++i) {
        const auto& q = quotes[i];
        const double fitted = black_price(q, variances[groups.group_of_quote[i]], pricing);
        QuoteFit fit;
        fit.id = q.id;
        fit.market_price = q.market_price;
        fit.fitted_price = fitted;
        fit.abs_error = std::fabs(fitted - q.market_price);
        fit.rel_error = fit.abs_error / std::max(std::fabs(q.market_price), 1e-12);
        sq_sum += fit.abs_error * fit.abs_error;
        result.per_quote_fit.push_back(std::move(fit));
    }
    result.train_rmse = std::sqrt(sq_sum / static_cast<double>(quotes.size()));
    return result;
}

/// Price held-out quotes with a fitted parameter set: RMSE, per-quote errors
/// and the implied-volatility surface comparison points. An empty test set
/// yields an empty report.
inline FitReport evaluate_fit(const CalibrationResult& result,
                              const std::vector<OptionQuote>& test_quotes, VarianceMethod method,
                              const PricingConfig& pricing = {}) {
    FitReport report;
    if (test_quotes.empty()) return report;

    const detail::MaturityGroups groups = detail::group_by_maturity(test_quotes);
    std::vector<double> variances(groups.maturities.size());
    for (std::size_t i = 0; i < groups.maturities.size(); ++i)
        variances[i] = model_variance(result.parameters, groups.maturities[i], method);

    double sq_sum = 0.0;
    report.rows.reserve(test_quotes.size());
    for (std::size_t i = 0; i < test_quotes.size(); ++i) {
        const auto& q = test_quotes[i];
        const double fitted = black_price(q, variances[groups.group_of_quote[i]], pricing);
        QuoteFit fit;
        fit.id = q.id;
        fit.market_price = q.market_price;
        fit.fitted_price = fitted;
        fit.abs_error = std::fabs(fitted - q.market_price);
        fit.rel_error = fit.abs_error / std::max(std::fabs(q.market_price), 1e-12);
        sq_sum += fit.abs_error * fit.abs_error;
        report.rows.push_back(std::move(fit));

        try {
            SurfacePoint pt;
            pt.maturity = q.maturity;
            pt.moneyness = q.strike / q.underlying_price;
            pt.model_iv = implied_vol(q, fitted, pricing);
            pt.market_iv = implied_vol(q, q.market_price, pricing);
            report.surface.push_back(pt);
        } catch (const Error&) {
            // Quotes whose price pins the no-arbitrage boundary have no
            // implied volatility; they stay in the error report only.
        }
    }
    report.rmse = std::sqrt(sq_sum / static_cast<double>(test_quotes.size()));
    return report;
}

}  // namespace lyopt
