/*
 * Copyright 2026 The wishart_edge Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "log_signed.hpp"
#include "matrix.hpp"

namespace wishart_edge {

template <typename Real>
using LogMatrix = Matrix<LogSigned<Real>>;

template <typename Real>
LogMatrix<Real> to_log_matrix(const Matrix<Real>& m) {
    LogMatrix<Real> out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = LogSigned<Real>::from_value(m(i, j));
    return out;
}

namespace detail {

template <typename Real>
Real neg_inf() {
    return -std::numeric_limits<Real>::infinity();
}

template <typename Real>
Real entry_log(const LogSigned<Real>& v) {
    return v.is_zero() ? neg_inf<Real>() : v.log_abs;
}

template <typename Real>
Real scaled_entry(const LogSigned<Real>& v, Real shift) {
    using std::exp;
    if (v.is_zero()) return Real(0);
    return Real(v.sign) * exp(v.log_abs - shift);
}

}  // namespace detail

/// Determinant of a square matrix of log-signed entries.
///
/// Each row's largest log-magnitude is factored out, then each column's, and
/// LU with partial pivoting runs on the equilibrated values. The factored
/// magnitudes are re-added in log space, so entries spanning 10^+-300 are fine.
template <typename Real>
LogSigned<Real> log_det(const LogMatrix<Real>& m) {
    using std::abs;
    using std::log;
    if (!m.square()) throw ContractError("log_det: matrix is not square");
    const std::size_t n = m.rows();
    if (n == 0) return LogSigned<Real>::one();

    std::vector<Real> row_shift(n, detail::neg_inf<Real>());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j)
            row_shift[i] = std::max(row_shift[i], detail::entry_log(m(i, j)));
        if (row_shift[i] == detail::neg_inf<Real>()) return LogSigned<Real>::zero();
    }
    std::vector<Real> col_shift(n, detail::neg_inf<Real>());
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i)
            col_shift[j] = std::max(col_shift[j], detail::entry_log(m(i, j)) - row_shift[i]);
        if (col_shift[j] == detail::neg_inf<Real>()) return LogSigned<Real>::zero();
    }

    Matrix<Real> a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            a(i, j) = detail::scaled_entry(m(i, j), row_shift[i] + col_shift[j]);

    // columns now peak at 1; a pivot at rounding level means exact singularity
    const Real singular_tol = Real(4 * n) * std::numeric_limits<Real>::epsilon();
    int sign = 1;
    Real log_abs = Real(0);
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        Real best = abs(a(k, k));
        for (std::size_t i = k + 1; i < n; ++i)
            if (abs(a(i, k)) > best) {
                best = abs(a(i, k));
                piv = i;
            }
        if (best <= singular_tol) return LogSigned<Real>::zero();
        if (piv != k) {
            a.swap_rows(piv, k);
            sign = -sign;
        }
        const Real pivot = a(k, k);
        if (pivot < Real(0)) sign = -sign;
        log_abs += log(abs(pivot));
        for (std::size_t i = k + 1; i < n; ++i) {
            const Real f = a(i, k) / pivot;
            if (f == Real(0)) continue;
            for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
        }
    }
    for (std::size_t i = 0; i < n; ++i) log_abs += row_shift[i] + col_shift[i];
    return {sign, log_abs};
}

template <typename Real>
LogSigned<Real> log_det(const Matrix<Real>& m) {
    return log_det<Real>(to_log_matrix(m));
}

/// Relative tolerance for the antisymmetry check in pfaffian().
inline constexpr double kAntisymmetryTolerance = 1e-10;

/// Pfaffian of an even-dimensional antisymmetric matrix by Parlett-Reid
/// tridiagonalization: skew-symmetric Gaussian elimination with pivoting,
/// accumulating the super-diagonal pivots and the permutation sign.
///
/// Row/column i is scaled by the same factor exp(-s_i) before elimination
/// (congruence keeps antisymmetry); pf(M) = pf(DMD) / det(D).
template <typename Real>
LogSigned<Real> pfaffian(const LogMatrix<Real>& m) {
    using std::abs;
    using std::exp;
    using std::log;
    if (!m.square()) throw ContractError("pfaffian: matrix is not square");
    const std::size_t n = m.rows();
    if (n % 2 != 0) throw ContractError("pfaffian: odd dimension " + std::to_string(n));
    if (n == 0) return LogSigned<Real>::one();

    Real max_log = detail::neg_inf<Real>();
    for (const auto& v : m.data()) max_log = std::max(max_log, detail::entry_log(v));
    if (max_log == detail::neg_inf<Real>()) return LogSigned<Real>::zero();
    const Real tol_log = max_log + Real(std::log(kAntisymmetryTolerance));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            const auto defect = m(i, j) + m(j, i);
            if (!defect.is_zero() && defect.log_abs > tol_log) {
                std::ostringstream msg;
                msg << "pfaffian: matrix is not antisymmetric at (" << i << ", " << j << ")";
                throw ContractError(msg.str());
            }
        }

    // symmetric equilibration: aim for max_j (L_ij - s_i - s_j) = 0 on every row
    std::vector<Real> s(n);
    for (std::size_t i = 0; i < n; ++i) {
        Real r = detail::neg_inf<Real>();
        for (std::size_t j = 0; j < n; ++j) r = std::max(r, detail::entry_log(m(i, j)));
        if (r == detail::neg_inf<Real>()) return LogSigned<Real>::zero();
        s[i] = r / Real(2);
    }
    for (int pass = 0; pass < 4; ++pass)
        for (std::size_t i = 0; i < n; ++i) {
            Real r = detail::neg_inf<Real>();
            for (std::size_t j = 0; j < n; ++j)
                if (j != i) r = std::max(r, detail::entry_log(m(i, j)) - s[j]);
            s[i] = (s[i] + r) / Real(2);
        }

    Matrix<Real> a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            a(i, j) = i == j ? Real(0) : detail::scaled_entry(m(i, j), s[i] + s[j]);

    int sign = 1;
    Real log_abs = Real(0);
    std::vector<Real> tau(n);
    for (std::size_t k = 0; k + 1 < n; k += 2) {
        std::size_t kp = k + 1;
        for (std::size_t i = k + 2; i < n; ++i)
            if (abs(a(i, k)) > abs(a(kp, k))) kp = i;
        if (kp != k + 1) {
            a.swap_rows(k + 1, kp);
            a.swap_cols(k + 1, kp);
            sign = -sign;
        }
        const Real pivot = a(k, k + 1);
        if (pivot == Real(0)) return LogSigned<Real>::zero();
        if (pivot < Real(0)) sign = -sign;
        log_abs += log(abs(pivot));
        if (k + 2 < n) {
            for (std::size_t i = k + 2; i < n; ++i) tau[i] = a(k, i) / pivot;
            for (std::size_t i = k + 2; i < n; ++i) {
                const Real ti = tau[i];
                const Real ci = a(i, k + 1);
                for (std::size_t j = k + 2; j < n; ++j) a(i, j) += ti * a(j, k + 1) - tau[j] * ci;
            }
        }
    }
    for (const Real& si : s) log_abs += si;
    return {sign, log_abs};
}

template <typename Real>
LogSigned<Real> pfaffian(const Matrix<Real>& m) {
    return pfaffian<Real>(to_log_matrix(m));
}

/// Lower-triangular A with A A^dagger = C.
template <typename Scalar>
Matrix<Scalar> cholesky(const Matrix<Scalar>& c) {
    using std::sqrt;
    if (!c.square()) throw ContractError("cholesky: matrix is not square");
    const std::size_t n = c.rows();
    Matrix<Scalar> l(n, n, Scalar{});
    for (std::size_t j = 0; j < n; ++j) {
        double diag = real_part(c(j, j));
        for (std::size_t k = 0; k < j; ++k) diag -= std::norm(l(j, k));
        if (!(diag > 0.0)) throw DomainError("cholesky: not positive definite");
        const double ljj = sqrt(diag);
        l(j, j) = Scalar(ljj);
        for (std::size_t i = j + 1; i < n; ++i) {
            Scalar v = c(i, j);
            for (std::size_t k = 0; k < j; ++k) v -= l(i, k) * conj_if(l(j, k));
            l(i, j) = v / ljj;
        }
    }
    return l;
}

namespace detail {

/// Householder reduction of a Hermitian (or real symmetric) matrix to a real
/// symmetric tridiagonal with the same eigenvalues. Only the lower triangle of
/// `a` is read and it is overwritten. Off-diagonals come back as magnitudes,
/// which is sufficient for eigenvalues (a diagonal unitary fixes the phases).
template <typename Scalar>
void householder_tridiagonalize(Matrix<Scalar>& a, std::vector<double>& d, std::vector<double>& e) {
    const std::size_t n = a.rows();
    d.assign(n, 0.0);
    e.assign(n, 0.0);
    std::vector<Scalar> u(n), p(n);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const std::size_t m0 = k + 1;
        double xnorm2 = 0.0;
        for (std::size_t i = m0; i < n; ++i) xnorm2 += std::norm(a(i, k));
        const double xnorm = std::sqrt(xnorm2);
        d[k] = real_part(a(k, k));
        if (xnorm == 0.0) {
            e[k] = 0.0;
            continue;
        }
        const Scalar x0 = a(m0, k);
        const double ax0 = std::abs(x0);
        const Scalar phase = ax0 == 0.0 ? Scalar(1) : x0 / ax0;
        // u = x + phase*|x| e1, H = I - u u^dagger / h with h = u^dagger u / 2
        for (std::size_t i = m0; i < n; ++i) u[i] = a(i, k);
        u[m0] += phase * xnorm;
        const double h = xnorm2 + ax0 * xnorm;
        e[k] = xnorm;

        // p = A22 u / h using the lower triangle
        for (std::size_t i = m0; i < n; ++i) p[i] = Scalar{};
        for (std::size_t i = m0; i < n; ++i) {
            Scalar acc{};
            const Scalar ui = u[i];
            const Scalar* row = &a(i, 0);
            for (std::size_t j = m0; j < i; ++j) {
                acc += mul(row[j], u[j]);
                p[j] += mul_conj(ui, row[j]);
            }
            p[i] += acc + mul(row[i], ui);
        }
        double K = 0.0;
        for (std::size_t i = m0; i < n; ++i) {
            p[i] /= h;
            K += real_part(mul_conj(p[i], u[i]));
        }
        K /= 2.0 * h;
        for (std::size_t i = m0; i < n; ++i) p[i] -= K * u[i];
        // A22 -= q u^dagger + u q^dagger (lower triangle), q stored in p
        for (std::size_t i = m0; i < n; ++i) {
            const Scalar qi = p[i];
            const Scalar ui = u[i];
            Scalar* row = &a(i, 0);
            for (std::size_t j = m0; j <= i; ++j) row[j] -= mul_conj(qi, u[j]) + mul_conj(ui, p[j]);
        }
    }
    d[n - 1] = real_part(a(n - 1, n - 1));
}

/// Eigenvalues of the symmetric tridiagonal (d, e) by implicit-shift QL.
/// e[i] couples d[i] and d[i+1]. Results are written to d in no particular order.
inline void tridiagonal_ql(std::vector<double>& d, std::vector<double>& e) {
    const std::size_t n = d.size();
    if (n == 0) return;
    e[n - 1] = 0.0;
    const std::size_t max_iter = 30 * std::max<std::size_t>(n, 1);
    std::size_t total_iter = 0;
    for (std::size_t l = 0; l < n; ++l) {
        for (;;) {
            std::size_t m = l;
            for (; m + 1 < n; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= std::numeric_limits<double>::epsilon() * dd) break;
            }
            if (m == l) break;
            if (++total_iter > max_iter) {
                std::ostringstream msg;
                msg << "smallest_eigenvalue: QL iteration did not converge after " << max_iter
                    << " sweeps (dim " << n << ", stuck at index " << l << ", |e| = " << std::abs(e[l])
                    << ")";
                throw NumericError(msg.str());
            }
            double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            double r = std::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
            double s = 1.0, c = 1.0, p = 0.0;
            bool underflow = false;
            for (std::size_t i = m; i-- > l;) {
                double f = s * e[i];
                const double b = c * e[i];
                r = std::hypot(f, g);
                e[i + 1] = r;
                if (r == 0.0) {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if (underflow) continue;
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
}

}  // namespace detail

/// All eigenvalues of a Hermitian / real symmetric matrix, ascending.
/// Householder tridiagonalization followed by implicit-shift QL.
template <typename Scalar>
std::vector<double> hermitian_eigenvalues(Matrix<Scalar> a) {
    if (!a.square()) throw ContractError("hermitian_eigenvalues: matrix is not square");
    std::vector<double> d, e;
    detail::householder_tridiagonalize(a, d, e);
    // shift so e[i] couples d[i], d[i+1]
    std::vector<double> off(d.size(), 0.0);
    for (std::size_t i = 0; i + 1 < d.size(); ++i) off[i] = e[i];
    detail::tridiagonal_ql(d, off);
    std::sort(d.begin(), d.end());
    return d;
}

template <typename Scalar>
double smallest_eigenvalue(const Matrix<Scalar>& a) {
    if (a.rows() == 0) throw ContractError("smallest_eigenvalue: empty matrix");
    return hermitian_eigenvalues(a).front();
}

}  // namespace wishart_edge
