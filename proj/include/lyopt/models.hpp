#pragma once

#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "lyopt/errors.hpp"
#include "lyopt/matrix.hpp"

namespace lyopt {

/// Geometric Brownian Motion on the log price.
struct GbmParams {
    double sigma = 0.0;  ///< volatility, 1/sqrt(years)

    void validate() const {
        if (!(sigma >= 0.0) || !std::isfinite(sigma))
            throw InvalidParameterError("GbmParams: sigma must be >= 0");
    }
};

/// Ornstein-Uhlenbeck process on the log price.
struct OuParams {
    double lambda = 0.0;  ///< mean-reversion speed, 1/years
    double sigma = 0.0;   ///< volatility, 1/sqrt(years)
    double level = 0.0;   ///< reversion level (does not affect the variance)

    void validate() const {
        if (!(lambda > 0.0) || !std::isfinite(lambda))
            throw InvalidParameterError("OuParams: lambda must be > 0");
        if (!(sigma >= 0.0) || !std::isfinite(sigma))
            throw InvalidParameterError("OuParams: sigma must be >= 0");
        if (!std::isfinite(level)) throw InvalidParameterError("OuParams: level must be finite");
    }
};

/// Two-factor model coupling an Ornstein-Uhlenbeck short-term factor to a
/// drifting Brownian long-term factor ("log-price mean-reverting to a
/// generalised Wiener process").
struct LmrGwParams {
    double lambda = 0.0;  ///< mean-reversion speed, 1/years
    double sigma1 = 0.0;  ///< short-term volatility, 1/sqrt(years)
    double sigma2 = 0.0;  ///< long-term volatility, 1/sqrt(years)
    double mu = 0.0;      ///< long-term drift; carried but irrelevant to the variance

    void validate() const {
        if (!(lambda > 0.0) || !std::isfinite(lambda))
            throw InvalidParameterError("LmrGwParams: lambda must be > 0");
        if (!(sigma1 >= 0.0) || !(sigma2 >= 0.0) || !std::isfinite(sigma1) || !std::isfinite(sigma2))
            throw InvalidParameterError("LmrGwParams: volatilities must be >= 0");
        if (sigma1 == 0.0 && sigma2 == 0.0)
            throw InvalidParameterError("LmrGwParams: at least one volatility must be > 0");
        if (!std::isfinite(mu)) throw InvalidParameterError("LmrGwParams: mu must be finite");
    }
};

/// Schwartz-Smith style two-factor model: mean-reverting short-term deviation
/// plus Brownian equilibrium level, with correlated noises.
struct SchwartzParams {
    double kappa = 0.0;      ///< mean-reversion speed of the short-term factor, 1/years
    double sigma_chi = 0.0;  ///< short-term volatility
    double sigma_xi = 0.0;   ///< equilibrium volatility
    double rho = 0.0;        ///< noise correlation in [-1, 1]
    double mu_xi = 0.0;      ///< equilibrium drift; irrelevant to the variance

    void validate() const {
        if (!(kappa > 0.0) || !std::isfinite(kappa))
            throw InvalidParameterError("SchwartzParams: kappa must be > 0");
        if (!(sigma_chi >= 0.0) || !(sigma_xi >= 0.0) || !std::isfinite(sigma_chi) ||
            !std::isfinite(sigma_xi))
            throw InvalidParameterError("SchwartzParams: volatilities must be >= 0");
        if (!(std::fabs(rho) <= 1.0))
            throw InvalidParameterError("SchwartzParams: |rho| must be <= 1");
        if (!std::isfinite(mu_xi)) throw InvalidParameterError("SchwartzParams: mu_xi must be finite");
    }
};

/// State-space description dx = A x dt + B dw, y = C x, with noise
/// correlation E[dw dw^T] = S dt, initial mean x0 and covariance P0.
/// Any linear model fits this form; the catalog functions below populate it
/// for the concrete models.
struct LinearSde {
    Matrix drift;                     ///< A, n x n
    Matrix diffusion;                 ///< B, n x m
    Matrix output;                    ///< C, 1 x n
    Matrix noise_corr;                ///< S, m x m, unit diagonal, PSD
    std::vector<double> initial_mean; ///< x0, length n
    Matrix initial_cov;               ///< P0, n x n, symmetric PSD

    int order() const { return drift.rows(); }
    int noise_dim() const { return diffusion.cols(); }

    /// The constant diffusion term B S B^T of the Lyapunov equation.
    Matrix diffusion_term() const { return diffusion * noise_corr * diffusion.transpose(); }

    void validate() const {
        const int n = drift.rows();
        const int m = diffusion.cols();
        if (!drift.is_square() || n < 1) throw InvalidInputError("LinearSde: A must be square");
        if (diffusion.rows() != n) throw InvalidInputError("LinearSde: B row count must match A");
        if (output.rows() != 1 || output.cols() != n)
            throw InvalidInputError("LinearSde: C must be 1 x n");
        if (noise_corr.rows() != m || noise_corr.cols() != m)
            throw InvalidInputError("LinearSde: S must be m x m");
        if (static_cast<int>(initial_mean.size()) != n)
            throw InvalidInputError("LinearSde: x0 length must match A");
        if (initial_cov.rows() != n || initial_cov.cols() != n)
            throw InvalidInputError("LinearSde: P0 must be n x n");
        if (!drift.is_finite() || !diffusion.is_finite() || !output.is_finite() ||
            !noise_corr.is_finite() || !initial_cov.is_finite())
            throw InvalidInputError("LinearSde: non-finite entries");

        const double sym_tol = 1e-12 * std::max(1.0, noise_corr.max_abs());
        for (int i = 0; i < m; ++i) {
            if (std::fabs(noise_corr(i, i) - 1.0) > 1e-12)
                throw InvalidInputError("LinearSde: S must have unit diagonal");
            for (int j = i + 1; j < m; ++j)
                if (std::fabs(noise_corr(i, j) - noise_corr(j, i)) > sym_tol)
                    throw InvalidInputError("LinearSde: S must be symmetric");
        }
        // PSD up to round-off; rho = +/-1 sits exactly on the boundary.
        if (min_eigenvalue(noise_corr) < -1e-12 * m)
            throw InvalidInputError("LinearSde: S must be positive semidefinite");

        const double p0_tol = 1e-12 * std::max(1.0, initial_cov.max_abs());
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (std::fabs(initial_cov(i, j) - initial_cov(j, i)) > p0_tol)
                    throw InvalidInputError("LinearSde: P0 must be symmetric");
        if (min_eigenvalue(initial_cov) < -1e-12 * std::max(1.0, std::fabs(initial_cov.trace())))
            throw InvalidInputError("LinearSde: P0 must be positive semidefinite");
    }
};

/// LMR-GW in state-space form: x1 is the log price reverting to x2 at speed
/// lambda, x2 drifts freely. A = [[-l, l], [0, 0]], B = diag(s1, s2), output
/// picks the first state.
inline LinearSde lmrgw_to_sde(const LmrGwParams& p, const Matrix& initial_cov) {
    p.validate();
    LinearSde sde;
    sde.drift = Matrix{{-p.lambda, p.lambda}, {0.0, 0.0}};
    sde.diffusion = Matrix::diagonal({p.sigma1, p.sigma2});
    sde.output = Matrix{{1.0, 0.0}};
    sde.noise_corr = Matrix::identity(2);
    sde.initial_mean = {0.0, 0.0};
    sde.initial_cov = initial_cov;
    sde.validate();
    return sde;
}

inline LinearSde lmrgw_to_sde(const LmrGwParams& p) { return lmrgw_to_sde(p, Matrix(2, 2)); }

/// Schwartz two-factor model in state-space form: short-term deviation chi
/// reverting at kappa, equilibrium level xi drifting, log price = chi + xi.
inline LinearSde schwartz_to_sde(const SchwartzParams& p) {
    p.validate();
    LinearSde sde;
    sde.drift = Matrix{{-p.kappa, 0.0}, {0.0, 0.0}};
    sde.diffusion = Matrix::diagonal({p.sigma_chi, p.sigma_xi});
    sde.output = Matrix{{1.0, 1.0}};
    sde.noise_corr = Matrix{{1.0, p.rho}, {p.rho, 1.0}};
    sde.initial_mean = {0.0, 0.0};
    sde.initial_cov = Matrix(2, 2);
    sde.validate();
    return sde;
}

inline LinearSde ou_to_sde(const OuParams& p, double initial_var = 0.0) {
    p.validate();
    if (!(initial_var >= 0.0)) throw InvalidInputError("ou_to_sde: initial variance must be >= 0");
    LinearSde sde;
    sde.drift = Matrix{{-p.lambda}};
    sde.diffusion = Matrix{{p.sigma}};
    sde.output = Matrix{{1.0}};
    sde.noise_corr = Matrix{{1.0}};
    sde.initial_mean = {p.level};
    sde.initial_cov = Matrix{{initial_var}};
    return sde;
}

inline LinearSde gbm_to_sde(const GbmParams& p, double initial_var = 0.0) {
    p.validate();
    if (!(initial_var >= 0.0)) throw InvalidInputError("gbm_to_sde: initial variance must be >= 0");
    LinearSde sde;
    sde.drift = Matrix{{0.0}};
    sde.diffusion = Matrix{{p.sigma}};
    sde.output = Matrix{{1.0}};
    sde.noise_corr = Matrix{{1.0}};
    sde.initial_mean = {0.0};
    sde.initial_cov = Matrix{{initial_var}};
    return sde;
}

/// Log-price variance of a GBM at time t: sigma^2 t.
inline double gbm_variance(const GbmParams& p, double t) {
    p.validate();
    if (!(t >= 0.0)) throw InvalidInputError("gbm_variance: time must be >= 0");
    return p.sigma * p.sigma * t;
}

/// Log-price variance of an OU process at time t, starting from variance
/// initial_var: sigma^2/(2 lambda) (1 - e^{-2 lambda t}) + initial_var e^{-2 lambda t}.
inline double ou_variance(const OuParams& p, double initial_var, double t) {
    p.validate();
    if (!(t >= 0.0)) throw InvalidInputError("ou_variance: time must be >= 0");
    if (!(initial_var >= 0.0)) throw InvalidInputError("ou_variance: initial variance must be >= 0");
    const double decay = std::exp(-2.0 * p.lambda * t);
    return p.sigma * p.sigma * (-std::expm1(-2.0 * p.lambda * t)) / (2.0 * p.lambda) +
           initial_var * decay;
}

enum class ModelKind { Gbm, Ou, LmrGw, Schwartz };

using Model = std::variant<GbmParams, OuParams, LmrGwParams, SchwartzParams>;

inline ModelKind kind_of(const Model& m) {
    return static_cast<ModelKind>(m.index());
}

inline int state_dimension(ModelKind kind) {
    return (kind == ModelKind::Gbm || kind == ModelKind::Ou) ? 1 : 2;
}

inline std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::Gbm: return "gbm";
        case ModelKind::Ou: return "ou";
        case ModelKind::LmrGw: return "lmrgw";
        case ModelKind::Schwartz: return "schwartz";
    }
    return "unknown";
}

inline ModelKind parse_model_kind(const std::string& name) {
    if (name == "gbm") return ModelKind::Gbm;
    if (name == "ou") return ModelKind::Ou;
    if (name == "lmrgw") return ModelKind::LmrGw;
    if (name == "schwartz") return ModelKind::Schwartz;
    throw InvalidInputError("unknown model kind: " + name);
}

inline void validate_model(const Model& m) {
    std::visit([](const auto& p) { p.validate(); }, m);
}

/// State-space form of any catalog model. For single-factor models the
/// initial covariance, when supplied, must be 1 x 1.
inline LinearSde model_to_sde(const Model& m, const Matrix* initial_cov = nullptr) {
    const int n = state_dimension(kind_of(m));
    Matrix p0 = initial_cov ? *initial_cov : Matrix(n, n);
    if (p0.rows() != n || p0.cols() != n)
        throw InvalidInputError("model_to_sde: initial covariance has wrong order");
    return std::visit(
        [&](const auto& params) -> LinearSde {
            using T = std::decay_t<decltype(params)>;
            if constexpr (std::is_same_v<T, GbmParams>) return gbm_to_sde(params, p0(0, 0));
            else if constexpr (std::is_same_v<T, OuParams>) return ou_to_sde(params, p0(0, 0));
            else if constexpr (std::is_same_v<T, LmrGwParams>) return lmrgw_to_sde(params, p0);
            else {
                LinearSde sde = schwartz_to_sde(params);
                sde.initial_cov = p0;
                sde.validate();
                return sde;
            }
        },
        m);
}

}  // namespace lyopt
