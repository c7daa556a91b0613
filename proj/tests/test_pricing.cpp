#include <catch2/catch.hpp>

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "lyopt/pricing.hpp"
#include "lyopt/rng.hpp"

using lyopt::OptionQuote;
using lyopt::OptionType;

namespace {

OptionQuote make_quote(OptionType kind, double strike, double maturity, double underlying,
                       double market = 0.0) {
    OptionQuote q;
    q.id = "t";
    q.kind = kind;
    q.strike = strike;
    q.maturity = maturity;
    q.underlying_price = underlying;
    q.market_price = market;
    return q;
}

// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on the
// Legendre polynomial. Test-only quadrature oracle machinery.
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::fabs(dx) < 1e-15) break;
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
}

double integrate(double lo, double hi, int n, const std::function<double(double)>& f) {
    std::vector<double> x, w;
    gauss_legendre(n, x, w);
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += w[i] * f(mid + half * x[i]);
    return acc * half;
}

double normal_density(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

// Oracle: expected discounted payoff of a European option on a lognormal
// terminal price with total log variance p, by direct quadrature over the
// standard normal density.
double payoff_quadrature(const OptionQuote& q, double total_variance, double rate) {
    const double sp = std::sqrt(total_variance);
    auto payoff = [&](double z) {
        const double s = q.underlying_price * std::exp(-0.5 * total_variance + sp * z);
        return q.kind == OptionType::Call ? std::max(s - q.strike, 0.0)
                                          : std::max(q.strike - s, 0.0);
    };
    // Integrate only over the exercise region so the integrand stays smooth.
    const double z_exercise =
        (std::log(q.strike / q.underlying_price) + 0.5 * total_variance) / sp;
    const double lo = q.kind == OptionType::Call ? std::max(z_exercise, -14.0) : -14.0;
    const double hi = q.kind == OptionType::Call ? 14.0 : std::min(z_exercise, 14.0);
    const double value =
        integrate(lo, hi, 200, [&](double z) { return payoff(z) * normal_density(z); });
    return std::exp(-rate * q.maturity) * value;
}

}  // namespace

TEST_CASE("standard normal cdf basics") {
    CHECK(lyopt::std_normal_cdf(0.0) == 0.5);
    for (double x : {0.1, 1.0, 3.0})
        CHECK(lyopt::std_normal_cdf(x) + lyopt::std_normal_cdf(-x) == Approx(1.0).margin(1e-15));

    // Quadrature oracle: Phi(1) = 1/2 + integral over [0, 1] of the density.
    const double oracle = 0.5 + integrate(0.0, 1.0, 40, normal_density);
    CHECK(oracle == Approx(0.841344746068543).margin(1e-13));
    CHECK(lyopt::std_normal_cdf(1.0) == Approx(0.841344746068543).margin(1e-12));
}

TEST_CASE("black price reaches the intrinsic value in the zero-variance limit") {
    const OptionQuote call = make_quote(OptionType::Call, 80.0, 1.0, 100.0);
    CHECK(lyopt::black_price(call, 0.0) == 20.0);
    CHECK(lyopt::black_price(call, 1e-14) == 20.0);

    const OptionQuote put = make_quote(OptionType::Put, 120.0, 0.5, 100.0);
    CHECK(lyopt::black_price(put, 0.0) == 20.0);

    const OptionQuote otm = make_quote(OptionType::Call, 120.0, 0.5, 100.0);
    CHECK(lyopt::black_price(otm, 0.0) == 0.0);
}

TEST_CASE("black price matches the payoff quadrature oracle") {
    const double atm = lyopt::black_price(make_quote(OptionType::Call, 100.0, 1.0, 100.0), 0.04);
    CHECK(atm == Approx(100.0 * (2.0 * lyopt::std_normal_cdf(0.1) - 1.0)).epsilon(1e-14));
    CHECK(atm == Approx(7.9656).margin(1e-3));

    lyopt::Rng rng(31);
    for (int trial = 0; trial < 12; ++trial) {
        const OptionQuote q = make_quote(trial % 2 == 0 ? OptionType::Call : OptionType::Put,
                                         rng.uniform(70.0, 130.0), rng.uniform(0.1, 2.0),
                                         rng.uniform(80.0, 120.0));
        const double variance = rng.uniform(0.005, 0.5);
        const double direct = lyopt::black_price(q, variance);
        const double oracle = payoff_quadrature(q, variance, 0.0);
        REQUIRE(direct == Approx(oracle).margin(1e-9));
    }
}

TEST_CASE("black price rejects negative variance") {
    const OptionQuote q = make_quote(OptionType::Call, 100.0, 1.0, 100.0);
    CHECK_THROWS_AS(lyopt::black_price(q, -1e-3), lyopt::NegativeVarianceError);
}

TEST_CASE("put-call parity holds across random quotes") {
    lyopt::Rng rng(32);
    for (int trial = 0; trial < 50; ++trial) {
        lyopt::PricingConfig cfg;
        cfg.risk_free_rate = trial % 2 == 0 ? 0.0 : 0.03;
        const double strike = rng.uniform(50.0, 150.0);
        const double maturity = rng.uniform(0.05, 3.0);
        const double underlying = rng.uniform(50.0, 150.0);
        const double variance = rng.uniform(1e-4, 1.0);

        const double call = lyopt::black_price(
            make_quote(OptionType::Call, strike, maturity, underlying), variance, cfg);
        const double put = lyopt::black_price(
            make_quote(OptionType::Put, strike, maturity, underlying), variance, cfg);
        const double forward = std::exp(-cfg.risk_free_rate * maturity) * (underlying - strike);
        REQUIRE(std::fabs(call - put - forward) <= 1e-12);
    }
}

TEST_CASE("black price monotonicity and bounds") {
    lyopt::Rng rng(33);
    for (int trial = 0; trial < 20; ++trial) {
        const double underlying = rng.uniform(60.0, 140.0);
        const double maturity = rng.uniform(0.1, 2.0);
        const double variance = rng.uniform(0.001, 0.6);

        double previous_call = std::numeric_limits<double>::infinity();
        double previous_put = -1.0;
        for (double strike = 0.5 * underlying; strike <= 1.5 * underlying;
             strike += 0.1 * underlying) {
            const double call = lyopt::black_price(
                make_quote(OptionType::Call, strike, maturity, underlying), variance);
            const double put = lyopt::black_price(
                make_quote(OptionType::Put, strike, maturity, underlying), variance);
            REQUIRE(call <= previous_call + 1e-12);  // nonincreasing in K
            REQUIRE(put >= previous_put - 1e-12);    // nondecreasing in K
            REQUIRE((call >= 0.0 && call <= underlying));
            REQUIRE((put >= 0.0 && put <= strike));
            previous_call = call;
            previous_put = put;
        }

        const OptionQuote q = make_quote(OptionType::Call, underlying, maturity, underlying);
        double previous = 0.0;
        for (double p = 1e-4; p < 1.0; p *= 2.0) {
            const double price = lyopt::black_price(q, p);
            REQUIRE(price >= previous);  // nondecreasing in total variance
            previous = price;
        }
    }
}

TEST_CASE("model pricing: gbm is the textbook base case") {
    const OptionQuote q = make_quote(OptionType::Call, 100.0, 1.0, 100.0);
    const lyopt::Model gbm = lyopt::GbmParams{0.2};
    const double via_model = lyopt::price_with_model(q, gbm, lyopt::VarianceMethod::Analytical);
    CHECK(via_model == lyopt::black_price(q, 0.04));
}

TEST_CASE("model pricing: analytical and numerical routes agree") {
    lyopt::Rng rng(34);
    for (int trial = 0; trial < 40; ++trial) {
        const lyopt::Model model = lyopt::LmrGwParams{
            rng.uniform(0.2, 8.0), rng.uniform(0.05, 1.2), rng.uniform(0.05, 1.2)};
        const OptionQuote q = make_quote(trial % 2 == 0 ? OptionType::Call : OptionType::Put,
                                         rng.uniform(70.0, 130.0), rng.uniform(1.0 / 12.0, 2.0),
                                         100.0);
        const double a = lyopt::price_with_model(q, model, lyopt::VarianceMethod::Analytical);
        const double n = lyopt::price_with_model(q, model, lyopt::VarianceMethod::Numerical);
        REQUIRE(std::fabs(a - n) <= 1e-10 * std::max(1.0, std::fabs(a)));
    }
}

TEST_CASE("model pricing is nondecreasing in the short-term volatility") {
    const OptionQuote q = make_quote(OptionType::Call, 105.0, 0.5, 100.0);
    double previous = 0.0;
    for (double sigma1 = 0.1; sigma1 <= 1.2; sigma1 += 0.1) {
        const lyopt::Model model = lyopt::LmrGwParams{2.0, sigma1, 0.2};
        const double price = lyopt::price_with_model(q, model, lyopt::VarianceMethod::Analytical);
        REQUIRE(price >= previous);
        previous = price;
    }
}

TEST_CASE("implied volatility round trip") {
    lyopt::Rng rng(35);
    for (double sigma : {0.01, 0.05, 0.3, 1.0, 2.0, 3.0}) {
        for (int trial = 0; trial < 5; ++trial) {
            const OptionQuote q = make_quote(trial % 2 == 0 ? OptionType::Call : OptionType::Put,
                                             rng.uniform(95.0, 105.0), rng.uniform(0.25, 2.0),
                                             100.0);
            const double price = lyopt::black_price(q, sigma * sigma * q.maturity);
            const double recovered = lyopt::implied_vol(q, price);
            REQUIRE(std::fabs(recovered - sigma) <= 1e-8);
        }
    }
}

TEST_CASE("implied volatility boundary behaviour") {
    const OptionQuote q = make_quote(OptionType::Call, 80.0, 1.0, 100.0);
    // Exactly intrinsic pins the lower bracket.
    CHECK(lyopt::implied_vol(q, 20.0) == 1e-8);
    // A price a hair above stays solvable and small; no crash near the edge.
    const double vol = lyopt::implied_vol(q, 20.0 + 1e-13);
    CHECK(vol > 0.0);
    CHECK(vol < 0.1);
    CHECK(lyopt::black_price(q, vol * vol * q.maturity) == Approx(20.0 + 1e-13).margin(1e-10));

    CHECK_THROWS_AS(lyopt::implied_vol(q, 19.0), lyopt::NoSolutionError);   // below intrinsic
    CHECK_THROWS_AS(lyopt::implied_vol(q, 101.0), lyopt::NoSolutionError);  // above underlying
}

TEST_CASE("implied volatility term structure shows the Samuelson shape") {
    // Short-term factor dominating the long-term one: implied volatility
    // must decay as maturity grows.
    const lyopt::Model model = lyopt::LmrGwParams{3.0, 0.6, 0.1};
    double previous = std::numeric_limits<double>::infinity();
    for (int month = 1; month <= 12; ++month) {
        const OptionQuote q = make_quote(OptionType::Call, 100.0, month / 12.0, 100.0);
        const double price = lyopt::price_with_model(q, model, lyopt::VarianceMethod::Analytical);
        const double vol = lyopt::implied_vol(q, price);
        REQUIRE(vol < previous);
        previous = vol;
    }
}

TEST_CASE("quote validation enforces the no-arbitrage bounds") {
    CHECK_THROWS_AS(make_quote(OptionType::Call, 100.0, 1.0, 100.0, 101.0).validate(),
                    lyopt::InvalidInputError);
    CHECK_THROWS_AS(make_quote(OptionType::Put, 100.0, 1.0, 120.0, 100.5).validate(),
                    lyopt::InvalidInputError);
    CHECK_THROWS_AS(make_quote(OptionType::Call, -5.0, 1.0, 100.0).validate(),
                    lyopt::InvalidInputError);
    CHECK_NOTHROW(make_quote(OptionType::Call, 100.0, 1.0, 100.0, 7.5).validate());
}
