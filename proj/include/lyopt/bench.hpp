#pragma once

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "lyopt/calibration.hpp"
#include "lyopt/chain_io.hpp"
#include "lyopt/errors.hpp"
#include "lyopt/lyapunov.hpp"
#include "lyopt/models.hpp"

namespace lyopt {

struct BenchRow {
    long evaluations = 0;
    double analytical_s = 0.0;
    double numerical_s = 0.0;
    double speedup = 0.0;     ///< numerical_s / analytical_s
    bool reliable = true;     ///< false when loop overhead exceeds 1% of the analytical time
    std::string error;        ///< per-chain calibration failure, if any
};

struct BenchReport {
    std::vector<BenchRow> rows;
    int repetitions = 1;
    std::string aggregation = "median";
    double overhead_s = 0.0;  ///< empty-loop baseline for the largest grid
};

namespace detail {

/// Keep a computed value alive so the timed loops cannot be elided.
inline void do_not_optimize(double& value) {
    asm volatile("" : "+r,m"(value) : : "memory");
}

inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

template <typename F>
double time_once(F&& body) {
    const auto start = std::chrono::steady_clock::now();
    body();
    const auto stop = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(stop - start).count();
}

}  // namespace detail

/// Time the analytical closed form against the block-exponential numerical
/// solver for the LMR-GW variance, evaluated point by point on a uniform grid
/// spanning a 30-day window. Single-threaded; one warm-up pass per grid size
/// is discarded and the median over `repetitions` timed passes is reported.
inline BenchReport bench_variance(const LmrGwParams& params, const std::vector<long>& m_values,
                                  int repetitions = 10) {
    params.validate();
    if (m_values.empty()) throw InvalidInputError("bench_variance: no grid sizes");
    for (long m : m_values)
        if (m < 1) throw InvalidInputError("bench_variance: grid sizes must be >= 1");
    if (repetitions < 1) throw InvalidInputError("bench_variance: repetitions must be >= 1");

    const double window_years = 30.0 / 365.0;
    const Matrix p0(2, 2);
    const LinearSde sde = lmrgw_to_sde(params, p0);

    BenchReport report;
    report.repetitions = repetitions;

    for (long m : m_values) {
        std::vector<double> times(m);
        for (long i = 0; i < m; ++i)
            times[i] = window_years * static_cast<double>(i + 1) / static_cast<double>(m);

        auto analytical_pass = [&]() {
            double sink = 0.0;
            for (double t : times) sink += lmrgw_covariance_analytical(params, p0, t).cov(0, 0);
            detail::do_not_optimize(sink);
        };
        auto numerical_pass = [&]() {
            double sink = 0.0;
            for (double t : times) sink += lyapunov_numerical(sde, t).cov(0, 0);
            detail::do_not_optimize(sink);
        };
        auto empty_pass = [&]() {
            double sink = 0.0;
            for (double t : times) sink += t;
            detail::do_not_optimize(sink);
        };

        analytical_pass();  // warm-up
        numerical_pass();

        std::vector<double> t_ana(repetitions), t_num(repetitions), t_empty(repetitions);
        for (int r = 0; r < repetitions; ++r) {
            t_ana[r] = detail::time_once(analytical_pass);
            t_num[r] = detail::time_once(numerical_pass);
            t_empty[r] = detail::time_once(empty_pass);
        }

        BenchRow row;
        row.evaluations = m;
        row.analytical_s = detail::median(t_ana);
        row.numerical_s = detail::median(t_num);
        row.speedup = row.numerical_s / row.analytical_s;
        const double overhead = detail::median(t_empty);
        row.reliable = overhead <= 0.01 * row.analytical_s;
        report.overhead_s = overhead;
        report.rows.push_back(row);
    }
    return report;
}

/// Calibrate every chain twice, once per variance route, with identical seeds
/// and settings, and report the wall-clock ratio per chain. This mirrors the
/// daily routine the speedup matters for: same data, same optimizer, only the
/// variance evaluation changes.
inline BenchReport bench_calibration(const std::vector<OptionChainFile>& chains, ModelKind kind,
                                     const CalibrationConfig& base_cfg = {},
                                     const PricingConfig& pricing = {}) {
    if (chains.empty()) throw InvalidInputError("bench_calibration: no chains");

    BenchReport report;
    report.repetitions = 1;
    report.aggregation = "total";

    for (const auto& chain : chains) {
        CalibrationConfig cfg_ana = base_cfg;
        cfg_ana.method = VarianceMethod::Analytical;
        CalibrationConfig cfg_num = base_cfg;
        cfg_num.method = VarianceMethod::Numerical;

        BenchRow row;
        row.evaluations = static_cast<long>(chain.quotes.size());
        try {
            row.analytical_s =
                detail::time_once([&]() { (void)calibrate(chain.quotes, kind, cfg_ana, pricing); });
            row.numerical_s =
                detail::time_once([&]() { (void)calibrate(chain.quotes, kind, cfg_num, pricing); });
            row.speedup = row.numerical_s / row.analytical_s;
        } catch (const Error& e) {
            // A chain that cannot be calibrated is recorded, not fatal.
            row.error = e.what();
            row.reliable = false;
        }
        report.rows.push_back(row);
    }
    return report;
}

/// Fixed-width table in the shape of the published timing studies; rows whose
/// timing is smaller than the measurable overhead are marked unreliable.
inline std::string render_table(const BenchReport& report) {
    std::string out;
    char line[128];
    std::snprintf(line, sizeof(line), "%12s %14s %14s %10s\n", "Evaluations", "Analytical [s]",
                  "Numerical [s]", "Speedup");
    out += line;
    for (const auto& row : report.rows) {
        if (!row.error.empty()) {
            std::snprintf(line, sizeof(line), "%12ld   failed: %s\n", row.evaluations,
                          row.error.c_str());
            out += line;
            continue;
        }
        std::snprintf(line, sizeof(line), "%12ld %14.6f %14.6f %9.2f%s\n", row.evaluations,
                      row.analytical_s, row.numerical_s, row.speedup, row.reliable ? "" : " *");
        out += line;
    }
    if (std::any_of(report.rows.begin(), report.rows.end(),
                    [](const BenchRow& r) { return !r.reliable; }))
        out += "* loop overhead above 1% of the analytical time; row unreliable\n";
    std::snprintf(line, sizeof(line), "(%s of %d repetition%s)\n", report.aggregation.c_str(),
                  report.repetitions, report.repetitions == 1 ? "" : "s");
    out += line;
    return out;
}

inline void write_bench_csv(const BenchReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("write_bench_csv: cannot open '" + path + "' for writing");
    out << "evaluations,analytical_s,numerical_s,speedup\n";
    for (const auto& row : report.rows) {
        if (!row.error.empty()) continue;
        out << row.evaluations << ',' << format_double(row.analytical_s) << ','
            << format_double(row.numerical_s) << ',' << format_double(row.speedup) << "\n";
    }
    if (!out) throw IoError("write_bench_csv: write to '" + path + "' failed");
}

}  // namespace lyopt
