#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "lyopt/errors.hpp"

namespace lyopt {

struct NelderMeadOptions {
    int max_iterations = 2000;
    double f_tol_rel = 1e-10;   ///< stop when the simplex value spread is this small relative to the best value
    double x_tol = 1e-10;       ///< stop when all vertices collapse to this distance (inf-norm)
    double initial_step = 0.25; ///< per-coordinate offset used to build the starting simplex
};

struct NelderMeadResult {
    std::vector<double> best_point;
    double best_value = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Downhill simplex minimisation (Nelder & Mead 1965) with the standard
/// reflection/expansion/contraction/shrink coefficients. Fully deterministic:
/// ties in the vertex ordering are broken by insertion order, so two runs on
/// the same inputs produce bit-identical iterates.
inline NelderMeadResult nelder_mead_minimize(
    const std::function<double(const std::vector<double>&)>& objective,
    const std::vector<double>& start, const NelderMeadOptions& opts = {}) {
    const int dim = static_cast<int>(start.size());
    if (dim < 1) throw InvalidInputError("nelder_mead_minimize: empty start point");

    constexpr double alpha = 1.0;  // reflection
    constexpr double gamma = 2.0;  // expansion
    constexpr double beta = 0.5;   // contraction
    constexpr double delta = 0.5;  // shrink

    std::vector<std::vector<double>> x(dim + 1, start);
    for (int i = 0; i < dim; ++i) x[i + 1][i] += opts.initial_step;
    std::vector<double> fx(dim + 1);
    for (int i = 0; i <= dim; ++i) fx[i] = objective(x[i]);

    std::vector<int> order(dim + 1);
    auto sort_vertices = [&]() {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return fx[a] < fx[b]; });
    };

    NelderMeadResult result;
    int iter = 0;
    for (; iter < opts.max_iterations; ++iter) {
        sort_vertices();
        const int best = order[0];
        const int worst = order[dim];
        const int second_worst = order[dim - 1];

        const double spread = fx[worst] - fx[best];
        double size = 0.0;
        for (int i = 0; i <= dim; ++i) {
            if (i == best) continue;
            for (int j = 0; j < dim; ++j)
                size = std::max(size, std::fabs(x[i][j] - x[best][j]));
        }
        if (spread <= opts.f_tol_rel * std::max(std::fabs(fx[best]), 1e-30) || size <= opts.x_tol) {
            result.converged = true;
            break;
        }

        std::vector<double> centroid(dim, 0.0);
        for (int i = 0; i <= dim; ++i) {
            if (i == worst) continue;
            for (int j = 0; j < dim; ++j) centroid[j] += x[i][j];
        }
        for (double& c : centroid) c /= dim;

        auto blend = [&](const std::vector<double>& towards, double coeff) {
            std::vector<double> p(dim);
            for (int j = 0; j < dim; ++j) p[j] = centroid[j] + coeff * (towards[j] - centroid[j]);
            return p;
        };

        const std::vector<double> reflected = blend(x[worst], -alpha);
        const double f_reflected = objective(reflected);

        if (f_reflected < fx[best]) {
            const std::vector<double> expanded = blend(x[worst], -alpha * gamma);
            const double f_expanded = objective(expanded);
            if (f_expanded < f_reflected) {
                x[worst] = expanded;
                fx[worst] = f_expanded;
            } else {
                x[worst] = reflected;
                fx[worst] = f_reflected;
            }
        } else if (f_reflected < fx[second_worst]) {
            x[worst] = reflected;
            fx[worst] = f_reflected;
        } else {
            const bool outside = f_reflected < fx[worst];
            const std::vector<double> contracted =
                outside ? blend(reflected, beta) : blend(x[worst], beta);
            const double f_contracted = objective(contracted);
            if (f_contracted < (outside ? f_reflected : fx[worst])) {
                x[worst] = contracted;
                fx[worst] = f_contracted;
            } else {
                for (int i = 0; i <= dim; ++i) {
                    if (i == best) continue;
                    for (int j = 0; j < dim; ++j)
                        x[i][j] = x[best][j] + delta * (x[i][j] - x[best][j]);
                    fx[i] = objective(x[i]);
                }
            }
        }
    }

    sort_vertices();
    result.best_point = x[order[0]];
    result.best_value = fx[order[0]];
    result.iterations = iter;
    return result;
}

}  // namespace lyopt
