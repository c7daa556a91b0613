#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "lyopt/errors.hpp"
#include "lyopt/matrix.hpp"
#include "lyopt/models.hpp"

namespace lyopt {

/// State covariance P(t) of a linear stochastic system at one time point.
struct StateCovariance {
    double time = 0.0;
    Matrix cov;
};

enum class VarianceMethod { Analytical, Numerical };

inline std::string to_string(VarianceMethod m) {
    return m == VarianceMethod::Analytical ? "analytical" : "numerical";
}

inline VarianceMethod parse_variance_method(const std::string& name) {
    if (name == "analytical") return VarianceMethod::Analytical;
    if (name == "numerical") return VarianceMethod::Numerical;
    throw InvalidInputError("unknown variance method: " + name);
}

/// Closed-form covariance of the LMR-GW model. All three distinct entries
/// are elementary functions of time, so one evaluation costs a handful of
/// scalar exponentials, which is what makes the analytical calibration path
/// fast. P(0) returns the initial covariance exactly.
inline StateCovariance lmrgw_covariance_analytical(const LmrGwParams& p, const Matrix& initial_cov,
                                                   double t) {
    p.validate();
    if (!(t >= 0.0)) throw InvalidInputError("lmrgw_covariance_analytical: time must be >= 0");
    if (initial_cov.rows() != 2 || initial_cov.cols() != 2)
        throw InvalidInputError("lmrgw_covariance_analytical: P0 must be 2 x 2");

    const double p11 = initial_cov(0, 0);
    const double p12 = initial_cov(0, 1);
    const double p22 = initial_cov(1, 1);

    if (t == 0.0) return {0.0, symmetrized(initial_cov)};

    const double lam = p.lambda;
    const double s1 = p.sigma1 * p.sigma1;
    const double s2 = p.sigma2 * p.sigma2;
    const double e1 = std::exp(-lam * t);
    const double e2 = std::exp(-2.0 * lam * t);

    const double c2 = p11 - 2.0 * p12 + p22 - (s1 + s2) / (2.0 * lam);
    const double c1 = p12 - p22 + s2 / lam;

    Matrix cov(2, 2);
    cov(0, 0) = c2 * e2 + 2.0 * c1 * e1 + s2 * t + (s1 - 3.0 * s2) / (2.0 * lam) + p22;
    cov(0, 1) = c1 * e1 + s2 * t + p22 - s2 / lam;
    cov(1, 0) = cov(0, 1);
    cov(1, 1) = s2 * t + p22;
    return {t, cov};
}

/// Closed-form covariance of the Schwartz two-factor model, extended with the
/// homogeneous propagation of a nonzero initial covariance (e^{At} is
/// diagonal for this drift, so the extra terms are elementary).
inline StateCovariance schwartz_covariance_analytical(const SchwartzParams& p,
                                                      const Matrix& initial_cov, double t) {
    p.validate();
    if (!(t >= 0.0)) throw InvalidInputError("schwartz_covariance_analytical: time must be >= 0");
    if (initial_cov.rows() != 2 || initial_cov.cols() != 2)
        throw InvalidInputError("schwartz_covariance_analytical: P0 must be 2 x 2");

    if (t == 0.0) return {0.0, symmetrized(initial_cov)};

    const double k = p.kappa;
    const double ek = std::exp(-k * t);
    const double one_minus_ek = -std::expm1(-k * t);
    const double one_minus_e2k = -std::expm1(-2.0 * k * t);

    Matrix cov(2, 2);
    cov(0, 0) = p.sigma_chi * p.sigma_chi * one_minus_e2k / (2.0 * k) + initial_cov(0, 0) * ek * ek;
    cov(0, 1) = p.rho * p.sigma_chi * p.sigma_xi * one_minus_ek / k + initial_cov(0, 1) * ek;
    cov(1, 0) = cov(0, 1);
    cov(1, 1) = p.sigma_xi * p.sigma_xi * t + initial_cov(1, 1);
    return {t, cov};
}

/// General-purpose covariance solver. Exponentiates the doubled block system
///   [[A, B S B^T], [0, -A^T]] t
/// once, so that the upper-right block carries the Gramian integral, then
/// recovers P(t) = (F11 P0 + F12) F22^{-1} with a linear solve instead of an
/// explicit inverse. Works for any model order; costs one matrix exponential
/// per requested time point.
inline StateCovariance lyapunov_numerical(const LinearSde& sde, double t) {
    sde.validate();
    if (!(t >= 0.0)) throw InvalidInputError("lyapunov_numerical: time must be >= 0");

    const int n = sde.order();
    const Matrix q = sde.diffusion_term();
    const Matrix& a = sde.drift;

    Matrix block(2 * n, 2 * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            block(i, j) = a(i, j) * t;
            block(i, n + j) = q(i, j) * t;
            block(n + i, n + j) = -a(j, i) * t;
        }
    }

    const Matrix f = mat_exp(block);
    Matrix f11(n, n), f12(n, n), f22(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            f11(i, j) = f(i, j);
            f12(i, j) = f(i, n + j);
            f22(i, j) = f(n + i, n + j);
        }
    }

    const Matrix z = f11 * sde.initial_cov + f12;
    Matrix p;
    try {
        // P F22 = Z  <=>  F22^T P^T = Z^T; F22 is a matrix exponential and
        // hence invertible for finite inputs.
        p = solve_linear(f22.transpose(), z.transpose()).transpose();
    } catch (const SingularMatrixError& e) {
        throw Error(std::string("lyapunov_numerical: internal error: ") + e.what());
    }
    return {t, symmetrized(p)};
}

/// Direct evaluation of the Lagrange-formula solution
///   P(t) = e^{At} P0 e^{A^T t} + integral_0^t e^{Au} B S B^T e^{A^T u} du
/// with composite Simpson quadrature for the Gramian. Third independent
/// route, used for cross-checks; not a hot path. quad_points is rounded up
/// to the next odd count when necessary.
inline StateCovariance lagrange_covariance(const LinearSde& sde, double t, int quad_points) {
    sde.validate();
    if (!(t >= 0.0)) throw InvalidInputError("lagrange_covariance: time must be >= 0");
    if (quad_points < 2) throw InvalidInputError("lagrange_covariance: need at least 2 quad points");

    if (t == 0.0) return {0.0, symmetrized(sde.initial_cov)};

    const int nodes = (quad_points % 2 == 0) ? quad_points + 1 : quad_points;
    const double h = t / static_cast<double>(nodes - 1);
    const Matrix q = sde.diffusion_term();

    Matrix gramian(sde.order(), sde.order());
    for (int i = 0; i < nodes; ++i) {
        const double u = h * static_cast<double>(i);
        const Matrix e = mat_exp(sde.drift * u);
        const Matrix term = e * q * e.transpose();
        const double w = (i == 0 || i == nodes - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        gramian += w * term;
    }
    gramian *= h / 3.0;

    const Matrix et = mat_exp(sde.drift * t);
    return {t, symmetrized(et * sde.initial_cov * et.transpose() + gramian)};
}

/// Variance of the scalar output y = C x given the state covariance:
/// C P C^T. Tiny negative values are round-off and clamp to zero; anything
/// below -1e-12 means a bug upstream and is reported as such.
inline double output_variance(const LinearSde& sde, const StateCovariance& state) {
    const int n = sde.order();
    if (state.cov.rows() != n || state.cov.cols() != n)
        throw InvalidInputError("output_variance: covariance order mismatch");
    double v = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) v += sde.output(0, i) * state.cov(i, j) * sde.output(0, j);
    if (v < 0.0) {
        if (v < -1e-12) throw NegativeVarianceError("output_variance: variance " + std::to_string(v));
        v = 0.0;
    }
    return v;
}

/// Closed-form output variance of the Schwartz model from zero initial
/// covariance: sc^2/(2k)(1-e^{-2kt}) + 2 rho sc sx / k (1-e^{-kt}) + sx^2 t.
inline double schwartz_variance(const SchwartzParams& p, double t) {
    p.validate();
    if (!(t >= 0.0)) throw InvalidInputError("schwartz_variance: time must be >= 0");
    const StateCovariance c = schwartz_covariance_analytical(p, Matrix(2, 2), t);
    double v = c.cov(0, 0) + 2.0 * c.cov(0, 1) + c.cov(1, 1);
    if (v < 0.0) {
        if (v < -1e-12) throw NegativeVarianceError("schwartz_variance: variance " + std::to_string(v));
        v = 0.0;
    }
    return v;
}

/// Log-price variance of any catalog model at time t, by either route.
/// The analytical route uses the closed forms; the numerical route builds the
/// state-space form and runs the block-exponential solver. Both agree to
/// round-off, which the test suite and the benchmark lean on.
inline double model_variance(const Model& model, double t, VarianceMethod method,
                             const Matrix* initial_cov = nullptr) {
    if (method == VarianceMethod::Numerical) {
        const LinearSde sde = model_to_sde(model, initial_cov);
        return output_variance(sde, lyapunov_numerical(sde, t));
    }
    const int n = state_dimension(kind_of(model));
    Matrix p0 = initial_cov ? *initial_cov : Matrix(n, n);
    if (p0.rows() != n || p0.cols() != n)
        throw InvalidInputError("model_variance: initial covariance has wrong order");
    return std::visit(
        [&](const auto& params) -> double {
            using T = std::decay_t<decltype(params)>;
            if constexpr (std::is_same_v<T, GbmParams>) {
                return gbm_variance(params, t) + p0(0, 0);
            } else if constexpr (std::is_same_v<T, OuParams>) {
                return ou_variance(params, p0(0, 0), t);
            } else if constexpr (std::is_same_v<T, LmrGwParams>) {
                return lmrgw_covariance_analytical(params, p0, t).cov(0, 0);
            } else {
                const StateCovariance c = schwartz_covariance_analytical(params, p0, t);
                double v = c.cov(0, 0) + 2.0 * c.cov(0, 1) + c.cov(1, 1);
                if (v < -1e-12)
                    throw NegativeVarianceError("model_variance: variance " + std::to_string(v));
                return std::max(v, 0.0);
            }
        },
        model);
}

/// Batch evaluation over a nondecreasing grid of times; one independent
/// solve per point, results in grid order.
inline std::vector<double> model_variances(const Model& model, const std::vector<double>& times,
                                           VarianceMethod method,
                                           const Matrix* initial_cov = nullptr) {
    if (!std::is_sorted(times.begin(), times.end()))
        throw InvalidInputError("model_variances: times must be sorted ascending");
    std::vector<double> out;
    out.reserve(times.size());
    for (double t : times) out.push_back(model_variance(model, t, method, initial_cov));
    return out;
}

}  // namespace lyopt
