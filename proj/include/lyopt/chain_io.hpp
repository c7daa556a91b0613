#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <string>
#include <system_error>
#include <unordered_set>
#include <vector>

#include "lyopt/calibration.hpp"
#include "lyopt/errors.hpp"
#include "lyopt/lyapunov.hpp"
#include "lyopt/models.hpp"
#include "lyopt/pricing.hpp"
#include "lyopt/rng.hpp"

namespace lyopt {

/// One day of option quotes on one market.
struct OptionChainFile {
    std::string trade_date = "2020-01-01";  ///< ISO-8601
    std::string market_label = "synthetic";
    std::vector<OptionQuote> quotes;
};

struct ParseDiagnostic {
    int line = 0;  ///< 1-based line number in the file
    std::string message;
};

inline constexpr const char* kChainCsvHeader =
    "quote_id,option_type,strike,maturity_years,underlying_price,market_price";
inline constexpr const char* kSurfaceCsvHeader =
    "maturity_years,moneyness,model_implied_vol,market_implied_vol";

/// Shortest decimal representation that round-trips to the same double, so
/// written files preserve every numeric field exactly.
inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace detail {

/// Days since 1970-01-01 for a proleptic Gregorian date (Howard Hinnant's
/// civil-days algorithm).
inline long days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                         static_cast<unsigned>(d) - 1u;
    const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
    return static_cast<long>(era) * 146097L + static_cast<long>(doe) - 719468L;
}

inline long parse_iso_date(const std::string& iso) {
    int y = 0, m = 0, d = 0;
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-' ||
        std::sscanf(iso.c_str(), "%4d-%2d-%2d", &y, &m, &d) != 3 || m < 1 || m > 12 || d < 1 ||
        d > 31)
        throw InvalidInputError("not an ISO-8601 date: '" + iso + "'");
    return days_from_civil(y, m, d);
}

}  // namespace detail

/// ACT/365 year fraction between two ISO-8601 dates, e.g. from a trade date
/// to the start of a delivery month. Every maturity in this library is such
/// a year fraction.
inline double year_fraction_act365(const std::string& from_date, const std::string& to_date) {
    return static_cast<double>(detail::parse_iso_date(to_date) -
                               detail::parse_iso_date(from_date)) /
           365.0;
}

namespace detail {

inline double parse_double_field(const std::string& field, const char* name) {
    double value = 0.0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    const auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc() || res.ptr != end)
        throw InvalidInputError(std::string("field '") + name + "' is not a number: '" + field + "'");
    return value;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

inline std::string strip_cr(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

}  // namespace detail

/// Parse a chain CSV. Rows that violate the quote invariants are skipped and
/// reported through `diagnostics` (if given); a missing or wrong header is a
/// format error, and a file with zero valid rows is an empty-chain error.
inline OptionChainFile parse_chain(const std::string& path,
                                   std::vector<ParseDiagnostic>* diagnostics = nullptr) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("parse_chain: cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line))
        throw FormatError("parse_chain: '" + path + "' is empty (missing header)");
    if (detail::strip_cr(line) != kChainCsvHeader)
        throw FormatError("parse_chain: '" + path + "' has an unexpected header; expected '" +
                          std::string(kChainCsvHeader) + "'");

    OptionChainFile chain;
    chain.market_label = path;
    std::unordered_set<std::string> seen_ids;
    int line_no = 1;
    auto report = [&](int row, const std::string& message) {
        if (diagnostics) diagnostics->push_back({row, message});
    };

    while (std::getline(in, line)) {
        ++line_no;
        line = detail::strip_cr(line);
        if (line.empty()) continue;
        const std::vector<std::string> fields = detail::split_csv_line(line);
        if (fields.size() != 6) {
            report(line_no, "expected 6 fields, found " + std::to_string(fields.size()));
            continue;
        }
        try {
            OptionQuote q;
            q.id = fields[0];
            q.kind = parse_option_type(fields[1]);
            q.strike = detail::parse_double_field(fields[2], "strike");
            q.maturity = detail::parse_double_field(fields[3], "maturity_years");
            q.underlying_price = detail::parse_double_field(fields[4], "underlying_price");
            q.market_price = detail::parse_double_field(fields[5], "market_price");
            q.validate();
            if (!seen_ids.insert(q.id).second) {
                report(line_no, "duplicate quote id '" + q.id + "'");
                continue;
            }
            chain.quotes.push_back(std::move(q));
        } catch (const Error& e) {
            report(line_no, e.what());
        }
    }
    if (chain.quotes.empty())
        throw EmptyChainError("parse_chain: '" + path + "' contains no valid quotes");
    return chain;
}

inline void write_chain(const OptionChainFile& chain, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("write_chain: cannot open '" + path + "' for writing");
    out << kChainCsvHeader << "\n";
    for (const auto& q : chain.quotes) {
        out << q.id << ',' << to_string(q.kind) << ',' << format_double(q.strike) << ','
            << format_double(q.maturity) << ',' << format_double(q.underlying_price) << ','
            << format_double(q.market_price) << "\n";
    }
    if (!out) throw IoError("write_chain: write to '" + path + "' failed");
}

struct SyntheticChainConfig {
    int n_quotes = 500;
    std::vector<double> maturities;      ///< years; defaults to 12 monthly maturities
    std::vector<double> moneyness_grid;  ///< K/S0; defaults to 0.8..1.2 step 0.05
    double noise_sd = 0.0;               ///< price noise, as a fraction of the underlying price
    std::uint64_t rng_seed = 0;
    double base_price = 100.0;
    std::string trade_date = "2020-01-01";
    std::string market_label = "synthetic";
};

/// Synthetic option chain priced under a catalog model, sized like one
/// trading day of a liquid energy market: a few hundred quotes spread over
/// monthly delivery periods and a moneyness ladder. Gaussian price noise is
/// truncated at the no-arbitrage bounds. Deterministic per seed; the
/// underlying curve carries a mild deterministic seasonal wiggle per
/// maturity. Out-of-the-money strikes get the market-style type convention
/// (calls above the underlying, puts below).
inline OptionChainFile generate_synthetic_chain(const Model& model, SyntheticChainConfig cfg,
                                                const PricingConfig& pricing = {}) {
    validate_model(model);
    if (cfg.n_quotes < 1) throw InvalidInputError("generate_synthetic_chain: need at least one quote");
    if (!(cfg.noise_sd >= 0.0)) throw InvalidInputError("generate_synthetic_chain: noise sd must be >= 0");
    if (cfg.maturities.empty())
        for (int m = 1; m <= 12; ++m) cfg.maturities.push_back(m / 12.0);
    if (cfg.moneyness_grid.empty())
        for (int i = 0; i <= 8; ++i) cfg.moneyness_grid.push_back(0.8 + 0.05 * i);
    for (double t : cfg.maturities)
        if (!(t > 0.0)) throw InvalidInputError("generate_synthetic_chain: maturities must be > 0");
    for (double m : cfg.moneyness_grid)
        if (!(m > 0.0)) throw InvalidInputError("generate_synthetic_chain: moneyness must be > 0");

    // Model variance once per maturity; noise is the only per-quote source of randomness.
    std::vector<double> variances(cfg.maturities.size());
    std::vector<double> underlying(cfg.maturities.size());
    for (std::size_t j = 0; j < cfg.maturities.size(); ++j) {
        variances[j] = model_variance(model, cfg.maturities[j], VarianceMethod::Analytical);
        underlying[j] =
            cfg.base_price * (1.0 + 0.05 * std::sin(2.0 * std::numbers::pi * cfg.maturities[j]));
    }

    Rng rng = Rng::stream(cfg.rng_seed, /*stream_id=*/3);
    OptionChainFile chain;
    chain.trade_date = cfg.trade_date;
    chain.market_label = cfg.market_label;
    chain.quotes.reserve(cfg.n_quotes);

    const std::size_t cells = cfg.maturities.size() * cfg.moneyness_grid.size();
    for (int i = 0; i < cfg.n_quotes; ++i) {
        const std::size_t cell = static_cast<std::size_t>(i) % cells;
        const std::size_t mat_idx = cell / cfg.moneyness_grid.size();
        const double moneyness = cfg.moneyness_grid[cell % cfg.moneyness_grid.size()];

        OptionQuote q;
        char id[16];
        std::snprintf(id, sizeof(id), "q%05d", i + 1);
        q.id = id;
        q.maturity = cfg.maturities[mat_idx];
        q.underlying_price = underlying[mat_idx];
        q.strike = moneyness * q.underlying_price;
        q.kind = moneyness >= 1.0 ? OptionType::Call : OptionType::Put;

        double price = black_price(q, variances[mat_idx], pricing);
        if (cfg.noise_sd > 0.0) price += cfg.noise_sd * q.underlying_price * rng.normal();

        const double discount = std::exp(-pricing.risk_free_rate * q.maturity);
        const double lo = discount * intrinsic_value(q);
        const double hi = discount * (q.kind == OptionType::Call ? q.underlying_price : q.strike);
        q.market_price = std::clamp(price, lo, hi);
        q.validate();
        chain.quotes.push_back(std::move(q));
    }
    return chain;
}

/// Write implied-volatility surface points for external plotting.
inline void export_surface(const std::vector<SurfacePoint>& points, const std::string& path) {
    if (points.empty()) throw InvalidInputError("export_surface: no points");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("export_surface: cannot open '" + path + "' for writing");
    out << kSurfaceCsvHeader << "\n";
    for (const auto& p : points) {
        out << format_double(p.maturity) << ',' << format_double(p.moneyness) << ','
            << format_double(p.model_iv) << ',' << format_double(p.market_iv) << "\n";
    }
    if (!out) throw IoError("export_surface: write to '" + path + "' failed");
}

}  // namespace lyopt
