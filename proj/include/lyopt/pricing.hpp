#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "lyopt/errors.hpp"
#include "lyopt/lyapunov.hpp"
#include "lyopt/models.hpp"

namespace lyopt {

enum class OptionType { Call, Put };

inline std::string to_string(OptionType t) { return t == OptionType::Call ? "call" : "put"; }

inline OptionType parse_option_type(const std::string& name) {
    if (name == "call") return OptionType::Call;
    if (name == "put") return OptionType::Put;
    throw InvalidInputError("unknown option type: " + name);
}

/// One listed European option on a future.
struct OptionQuote {
    std::string id;
    OptionType kind = OptionType::Call;
    double strike = 0.0;            ///< K, currency per unit
    double maturity = 0.0;          ///< T, years
    double underlying_price = 0.0;  ///< S0, price of the future at trade time
    double market_price = 0.0;

    void validate() const {
        if (id.empty()) throw InvalidInputError("OptionQuote: empty id");
        if (!(strike > 0.0) || !std::isfinite(strike))
            throw InvalidInputError("OptionQuote '" + id + "': strike must be > 0");
        if (!(maturity > 0.0) || !std::isfinite(maturity))
            throw InvalidInputError("OptionQuote '" + id + "': maturity must be > 0");
        if (!(underlying_price > 0.0) || !std::isfinite(underlying_price))
            throw InvalidInputError("OptionQuote '" + id + "': underlying price must be > 0");
        if (!(market_price >= 0.0) || !std::isfinite(market_price))
            throw InvalidInputError("OptionQuote '" + id + "': market price must be >= 0");
        // No-arbitrage upper bounds at r = 0: c <= S0, p <= K.
        if (kind == OptionType::Call && market_price > underlying_price)
            throw InvalidInputError("OptionQuote '" + id + "': call price above underlying");
        if (kind == OptionType::Put && market_price > strike)
            throw InvalidInputError("OptionQuote '" + id + "': put price above strike");
    }
};

struct PricingConfig {
    double risk_free_rate = 0.0;   ///< r; the energy-desk convention is r = 0
    double variance_floor = 1e-12; ///< below this total variance, price at intrinsic

    void validate() const {
        if (!(variance_floor > 0.0)) throw InvalidInputError("PricingConfig: variance floor must be > 0");
        if (!std::isfinite(risk_free_rate)) throw InvalidInputError("PricingConfig: rate must be finite");
    }
};

/// Standard normal CDF via the complementary error function; absolute error
/// is a few ulp across the whole real line.
inline double std_normal_cdf(double x) {
    if (!std::isfinite(x)) throw InvalidInputError("std_normal_cdf: non-finite argument");
    return 0.5 * std::erfc(-x * 0x1.6a09e667f3bcdp-1);  // x / sqrt(2)
}

/// Undiscounted exercise value.
inline double intrinsic_value(const OptionQuote& q) {
    return q.kind == OptionType::Call ? std::max(q.underlying_price - q.strike, 0.0)
                                      : std::max(q.strike - q.underlying_price, 0.0);
}

/// Black price of a European option on a future, taking the total variance of
/// the log price at maturity as input:
///   d1 = [ln(S0/K) + p/2] / sqrt(p),  d2 = d1 - sqrt(p),
///   call = e^{-rT} (S0 N(d1) - K N(d2)),  put = e^{-rT} (K N(-d2) - S0 N(-d1)).
/// A total variance below the configured floor prices at the discounted
/// intrinsic value, which is the pointwise limit of the formula and keeps
/// degenerate calibration trials finite.
inline double black_price(const OptionQuote& q, double total_variance,
                          const PricingConfig& cfg = {}) {
    cfg.validate();
    if (!(q.strike > 0.0) || !(q.underlying_price > 0.0) || !(q.maturity > 0.0))
        throw InvalidInputError("black_price: quote fields must be positive");
    if (std::isnan(total_variance) || total_variance < 0.0)
        throw NegativeVarianceError("black_price: total variance must be >= 0");

    const double discount = std::exp(-cfg.risk_free_rate * q.maturity);
    if (total_variance < cfg.variance_floor) return discount * intrinsic_value(q);

    const double sp = std::sqrt(total_variance);
    const double d1 = (std::log(q.underlying_price / q.strike) + 0.5 * total_variance) / sp;
    const double d2 = d1 - sp;
    if (q.kind == OptionType::Call)
        return discount * (q.underlying_price * std_normal_cdf(d1) - q.strike * std_normal_cdf(d2));
    return discount * (q.strike * std_normal_cdf(-d2) - q.underlying_price * std_normal_cdf(-d1));
}

/// Price a quote under a catalog model: evaluate the model's log-price
/// variance at the quote maturity by the chosen route, then apply the Black
/// formula.
inline double price_with_model(const OptionQuote& q, const Model& model, VarianceMethod method,
                               const PricingConfig& cfg = {}, const Matrix* initial_cov = nullptr) {
    return black_price(q, model_variance(model, q.maturity, method, initial_cov), cfg);
}

/// GBM volatility that reproduces an observed price through the Black
/// formula: bisection on [1e-8, 10] followed by safeguarded Newton polish.
/// The observed price must sit within the no-arbitrage bounds.
inline double implied_vol(const OptionQuote& q, double observed_price,
                          const PricingConfig& cfg = {}) {
    cfg.validate();
    if (!std::isfinite(observed_price)) throw InvalidInputError("implied_vol: non-finite price");

    const double discount = std::exp(-cfg.risk_free_rate * q.maturity);
    const double lower = discount * intrinsic_value(q);
    const double upper = discount * (q.kind == OptionType::Call ? q.underlying_price : q.strike);
    const double bound_tol = 1e-12 * std::max(1.0, upper);
    if (observed_price < lower - bound_tol || observed_price > upper + bound_tol)
        throw NoSolutionError("implied_vol: price outside no-arbitrage bounds");

    const double sqrt_t = std::sqrt(q.maturity);
    auto price_at = [&](double sigma) {
        return black_price(q, sigma * sigma * q.maturity, cfg) - observed_price;
    };

    double lo = 1e-8;
    double hi = 10.0;
    const double f_lo = price_at(lo);
    if (f_lo >= 0.0) return lo;  // at or below the minimum-volatility price
    if (price_at(hi) < 0.0)
        throw NoSolutionError("implied_vol: no volatility in [1e-8, 10] matches the price");

    for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, lo); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (price_at(mid) < 0.0)
            lo = mid;
        else
            hi = mid;
    }

    double sigma = 0.5 * (lo + hi);
    for (int it = 0; it < 8; ++it) {
        const double f = price_at(sigma);
        if (std::fabs(f) <= 1e-10) break;
        const double sp = sigma * sqrt_t;
        const double d1 = (std::log(q.underlying_price / q.strike) + 0.5 * sp * sp) / sp;
        const double vega = discount * q.underlying_price * sqrt_t *
                            std::exp(-0.5 * d1 * d1) * 0x1.9884533d43651p-2;  // 1/sqrt(2 pi)
        if (!(vega > 0.0)) break;
        const double next = sigma - f / vega;
        if (!(next > lo && next < hi)) break;  // keep the bisection bracket authoritative
        sigma = next;
    }
    return sigma;
}

}  // namespace lyopt
