#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <vector>

#include "lyopt/errors.hpp"

namespace lyopt {

/// Dense row-major matrix of doubles. Every matrix in this library is tiny:
/// order <= 8 covers the doubled block systems of models up to four factors.
class Matrix {
public:
    Matrix() = default;

    Matrix(int rows, int cols) : rows_(rows), cols_(cols) {
        if (rows < 1 || cols < 1) throw InvalidInputError("Matrix: dimensions must be positive");
        data_.assign(static_cast<std::size_t>(rows) * cols, 0.0);
    }

    Matrix(std::initializer_list<std::initializer_list<double>> rows) {
        rows_ = static_cast<int>(rows.size());
        if (rows_ == 0) throw InvalidInputError("Matrix: empty initializer");
        cols_ = static_cast<int>(rows.begin()->size());
        if (cols_ == 0) throw InvalidInputError("Matrix: empty initializer row");
        data_.reserve(static_cast<std::size_t>(rows_) * cols_);
        for (const auto& row : rows) {
            if (static_cast<int>(row.size()) != cols_)
                throw InvalidInputError("Matrix: ragged initializer");
            data_.insert(data_.end(), row.begin(), row.end());
        }
    }

    static Matrix identity(int n) {
        Matrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static Matrix diagonal(std::initializer_list<double> entries) {
        Matrix m(static_cast<int>(entries.size()), static_cast<int>(entries.size()));
        int i = 0;
        for (double v : entries) {
            m(i, i) = v;
            ++i;
        }
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool is_square() const { return rows_ > 0 && rows_ == cols_; }

    double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
    double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * cols_ + j]; }

    Matrix transpose() const {
        Matrix t(cols_, rows_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    /// Maximum absolute column sum (induced 1-norm).
    double norm_one() const {
        double best = 0.0;
        for (int j = 0; j < cols_; ++j) {
            double s = 0.0;
            for (int i = 0; i < rows_; ++i) s += std::fabs((*this)(i, j));
            best = std::max(best, s);
        }
        return best;
    }

    double max_abs() const {
        double best = 0.0;
        for (double v : data_) best = std::max(best, std::fabs(v));
        return best;
    }

    double trace() const {
        double s = 0.0;
        for (int i = 0; i < std::min(rows_, cols_); ++i) s += (*this)(i, i);
        return s;
    }

    bool is_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    /// Multiply every entry by 2^k exactly.
    void scale_pow2(int k) {
        for (double& v : data_) v = std::ldexp(v, k);
    }

    Matrix& operator+=(const Matrix& o) {
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        return *this;
    }

    Matrix& operator-=(const Matrix& o) {
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
        return *this;
    }

    Matrix& operator*=(double s) {
        for (double& v : data_) v *= s;
        return *this;
    }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

inline void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw InvalidInputError(std::string(op) + ": shape mismatch");
}

inline Matrix operator+(Matrix a, const Matrix& b) {
    require_same_shape(a, b, "operator+");
    a += b;
    return a;
}

inline Matrix operator-(Matrix a, const Matrix& b) {
    require_same_shape(a, b, "operator-");
    a -= b;
    return a;
}

inline Matrix operator*(Matrix a, double s) {
    a *= s;
    return a;
}

inline Matrix operator*(double s, Matrix a) {
    a *= s;
    return a;
}

inline Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw InvalidInputError("operator*: inner dimension mismatch");
    Matrix c(a.rows(), b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (int j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

inline Matrix symmetrized(const Matrix& m) {
    Matrix s(m.rows(), m.cols());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) s(i, j) = 0.5 * (m(i, j) + m(j, i));
    return s;
}

/// Solve m * X = rhs by LU factorisation with partial pivoting. The systems
/// here come from matrix exponentials (always invertible), so an exact or
/// subnormal pivot is treated as numerically singular.
inline Matrix solve_linear(const Matrix& m, const Matrix& rhs) {
    if (!m.is_square()) throw InvalidInputError("solve_linear: matrix must be square");
    if (m.rows() != rhs.rows()) throw InvalidInputError("solve_linear: rhs row mismatch");
    if (!m.is_finite() || !rhs.is_finite())
        throw InvalidInputError("solve_linear: non-finite entries");

    const int n = m.rows();
    const int k = rhs.cols();
    Matrix lu = m;
    Matrix x = rhs;

    for (int col = 0; col < n; ++col) {
        int pivot_row = col;
        double pivot = std::fabs(lu(col, col));
        for (int r = col + 1; r < n; ++r) {
            const double v = std::fabs(lu(r, col));
            if (v > pivot) {
                pivot = v;
                pivot_row = r;
            }
        }
        if (pivot < std::numeric_limits<double>::min())
            throw SingularMatrixError("solve_linear: matrix is numerically singular");
        if (pivot_row != col) {
            for (int c = 0; c < n; ++c) std::swap(lu(col, c), lu(pivot_row, c));
            for (int c = 0; c < k; ++c) std::swap(x(col, c), x(pivot_row, c));
        }
        for (int r = col + 1; r < n; ++r) {
            const double factor = lu(r, col) / lu(col, col);
            if (factor == 0.0) continue;
            for (int c = col + 1; c < n; ++c) lu(r, c) -= factor * lu(col, c);
            for (int c = 0; c < k; ++c) x(r, c) -= factor * x(col, c);
        }
    }
    for (int col = n - 1; col >= 0; --col) {
        for (int c = 0; c < k; ++c) {
            double v = x(col, c);
            for (int j = col + 1; j < n; ++j) v -= lu(col, j) * x(j, c);
            x(col, c) = v / lu(col, col);
        }
    }
    return x;
}

/// Matrix exponential by scaling and squaring with a degree-13 Pade
/// approximant; the squaring count comes from the 1-norm of the input.
/// See Higham, "The scaling and squaring method for the matrix exponential
/// revisited", SIAM J. Matrix Anal. Appl. 26(4), 2005.
inline Matrix mat_exp(const Matrix& m) {
    if (!m.is_square()) throw InvalidInputError("mat_exp: matrix must be square");
    if (!m.is_finite()) throw InvalidInputError("mat_exp: non-finite entries");

    // Largest 1-norm for which the degree-13 approximant is accurate to
    // double precision.
    constexpr double theta13 = 5.371920351148152;
    static constexpr double b[14] = {
        64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
        129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
        1323241920.0,        40840800.0,          960960.0,           16380.0,
        182.0,               1.0};

    const int n = m.rows();
    Matrix a = m;
    int squarings = 0;
    const double norm = m.norm_one();
    if (norm > theta13) {
        squarings = static_cast<int>(std::ceil(std::log2(norm / theta13)));
        a.scale_pow2(-squarings);
    }

    const Matrix a2 = a * a;
    const Matrix a4 = a2 * a2;
    const Matrix a6 = a4 * a2;
    const Matrix eye = Matrix::identity(n);

    Matrix u = b[13] * a6 + b[11] * a4 + b[9] * a2;
    u = a6 * u;
    u += b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * eye;
    u = a * u;

    Matrix v = b[12] * a6 + b[10] * a4 + b[8] * a2;
    v = a6 * v;
    v += b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * eye;

    Matrix f = solve_linear(v - u, v + u);
    for (int i = 0; i < squarings; ++i) f = f * f;
    return f;
}

/// Fourth-order Runge-Kutta integration of dP/dt = A P + P A^T + Q from
/// P(0) = P0. Test oracle only: slow but independent of the matrix
/// exponential machinery used by the production solvers. The iterate is
/// re-symmetrised after every step.
inline Matrix integrate_lyapunov_ode(const Matrix& A, const Matrix& Q, const Matrix& P0,
                                     double t, long steps) {
    if (!A.is_square() || !Q.is_square() || !P0.is_square())
        throw InvalidInputError("integrate_lyapunov_ode: matrices must be square");
    if (A.rows() != Q.rows() || A.rows() != P0.rows())
        throw InvalidInputError("integrate_lyapunov_ode: dimension mismatch");
    if (!A.is_finite() || !Q.is_finite() || !P0.is_finite())
        throw InvalidInputError("integrate_lyapunov_ode: non-finite entries");
    if (!(t >= 0.0)) throw InvalidInputError("integrate_lyapunov_ode: time must be >= 0");
    if (steps < 1) throw InvalidInputError("integrate_lyapunov_ode: steps must be >= 1");

    if (t == 0.0) return symmetrized(P0);

    const Matrix At = A.transpose();
    const double h = t / static_cast<double>(steps);
    auto rhs = [&](const Matrix& p) { return A * p + p * At + Q; };

    Matrix p = symmetrized(P0);
    for (long s = 0; s < steps; ++s) {
        const Matrix k1 = rhs(p);
        const Matrix k2 = rhs(p + (0.5 * h) * k1);
        const Matrix k3 = rhs(p + (0.5 * h) * k2);
        const Matrix k4 = rhs(p + h * k3);
        p += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        p = symmetrized(p);
    }
    return p;
}

/// Eigenvalues of a symmetric matrix by the cyclic Jacobi method, ascending.
/// Plenty for the PSD checks on covariance matrices of order <= 8.
inline std::vector<double> symmetric_eigenvalues(const Matrix& m) {
    if (!m.is_square()) throw InvalidInputError("symmetric_eigenvalues: matrix must be square");
    const int n = m.rows();
    Matrix a = symmetrized(m);

    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
        if (off <= std::numeric_limits<double>::min()) break;

        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = std::copysign(1.0, theta) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int i = 0; i < n; ++i) {
                    const double aip = a(i, p);
                    const double aiq = a(i, q);
                    a(i, p) = c * aip - s * aiq;
                    a(i, q) = s * aip + c * aiq;
                }
                for (int i = 0; i < n; ++i) {
                    const double api = a(p, i);
                    const double aqi = a(q, i);
                    a(p, i) = c * api - s * aqi;
                    a(q, i) = s * api + c * aqi;
                }
            }
        }
    }

    std::vector<double> eig(n);
    for (int i = 0; i < n; ++i) eig[i] = a(i, i);
    std::sort(eig.begin(), eig.end());
    return eig;
}

inline double min_eigenvalue(const Matrix& symmetric) {
    return symmetric_eigenvalues(symmetric).front();
}

}  // namespace lyopt
