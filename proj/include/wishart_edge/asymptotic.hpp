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

#include <cmath>
#include <string>

#include "errors.hpp"
#include "linalg.hpp"
#include "log_signed.hpp"
#include "special_functions.hpp"
#include "symfun.hpp"

namespace wishart_edge {

/// Hard-edge parameters: beta, gamma and kappa' = 2 (gamma + 1) / beta.
/// kappa' is an integer for both beta = 1 (2gamma + 2) and beta = 2 (gamma + 1),
/// so every Bessel order in the kernels is an integer.
struct MicroParams {
    int beta = 2;
    int gamma = 0;
    int kappa_prime = 1;

    static MicroParams make(int beta, int gamma) {
        if (beta != 1 && beta != 2) throw DomainError("beta must be 1 or 2, got " + std::to_string(beta));
        if (gamma < 0) throw DomainError("gamma must be non-negative");
        return {beta, gamma, 2 * (gamma + 1) / beta};
    }

    int kernel_dim() const { return beta == 2 ? gamma : 2 * gamma; }
};

/// u = 4 p eta t with eta = tr(Lambda^{-1}) / p.
struct LocalScale {
    double eta = 1.0;
    int p = 1;

    double u_of_t(double t) const { return 4.0 * p * eta * t; }
    double t_of_u(double u) const { return u / (4.0 * p * eta); }
    /// dt/du, the factor that maps P_min(t) to the microscopic density.
    double jacobian() const { return 1.0 / (4.0 * p * eta); }
};

template <typename Real>
LocalScale local_scale(const CorrelationSpectrum<Real>& spectrum, int p) {
    if (spectrum.p() != p)
        throw ContractError("local_scale: spectrum has " + std::to_string(spectrum.p()) +
                            " eigenvalues, expected " + std::to_string(p));
    return {static_cast<double>(spectrum.trace_inv) / p, p};
}

namespace detail {

inline int micro_weight(const MicroParams& mp, int i, int j) {
    if (mp.beta == 2) return (i % 2 == 1) ? 1 : -1;
    return j - i;
}

}  // namespace detail

/// q_ij L^{(l)}_ij(u) = q_ij (sqrt(u/4))^{i+j-kappa'} I_{kappa' + delta_{il} - i - j}(sqrt u)
/// for u > 0 (1-based i, j; l = 0 for the plain kernel).
template <typename Real = double>
LogSigned<Real> micro_kernel_entry(const MicroParams& mp, int l, int i, int j, Real u) {
    using std::log;
    using std::sqrt;
    if (!(u > Real(0))) throw DomainError("micro kernel: u must be positive");
    const int q = detail::micro_weight(mp, i, j);
    if (q == 0) return LogSigned<Real>::zero();
    const Real s = sqrt(u);
    const int order = mp.kappa_prime + (i == l ? 1 : 0) - i - j;
    LogSigned<Real> v = log_bessel_i<Real>(order, s);
    if (v.is_zero()) return v;
    v.log_abs += Real(i + j - mp.kappa_prime) * log(s / Real(2)) + log(Real(std::abs(q)));
    v.sign *= q > 0 ? 1 : -1;
    return v;
}

/// Microscopic-limit gap probability and density of the smallest eigenvalue
/// on the local scale u.
///
/// The u -> 0 normalization is analytic: I_m(2z) ~ z^m / m! makes every entry
/// with i + j <= kappa' tend to q_ij / (kappa' - i - j)! and the rest to zero.
template <typename Real = double>
class MicroGapModel {
public:
    explicit MicroGapModel(const MicroParams& mp) : mp_(mp) {
        using std::log;
        const int dim = mp_.kernel_dim();
        LogMatrix<Real> m(dim, dim);
        for (int i = 1; i <= dim; ++i)
            for (int j = 1; j <= dim; ++j) {
                const int order = mp_.kappa_prime - i - j;
                const int q = detail::micro_weight(mp_, i, j);
                if (order < 0 || q == 0) continue;
                m(i - 1, j - 1) = LogSigned<Real>{q, log(Real(std::abs(q))) - log_factorial<Real>(order)};
            }
        normalization_ = assemble(m);
        if (normalization_.is_zero()) throw NumericError("micro kernel: singular u = 0 limit");
    }

    const MicroParams& params() const { return mp_; }
    LogSigned<Real> normalization() const { return normalization_; }

    Real gap(Real u) const {
        using std::exp;
        if (u < Real(0)) throw DomainError("micro_gap: u must be non-negative");
        const Real damp = -Real(mp_.beta) * u / Real(8);
        if (u == Real(0)) return Real(1);
        if (mp_.gamma == 0) return exp(damp);
        LogSigned<Real> r = assemble(kernel(u, 0)) / normalization_;
        r.log_abs += damp;
        return r.value();
    }

    /// -d/du of gap(u).
    Real pmin(Real u) const {
        using std::sqrt;
        if (!(u > Real(0))) throw DomainError("micro_pmin: u must be positive");
        const Real b = Real(mp_.beta);
        const Real e_u = gap(u);
        if (mp_.gamma == 0) return b * e_u / Real(8);

        const int dim = mp_.kernel_dim();
        const LogMatrix<Real> base = kernel(u, 0);
        LogSigned<Real> sum = LogSigned<Real>::zero();
        for (int l = 1; l <= dim; ++l) {
            LogMatrix<Real> g = base;
            for (int j = 1; j <= dim; ++j) g(l - 1, j - 1) = micro_kernel_entry<Real>(mp_, l, l, j, u);
            sum += log_det<Real>(g);
        }
        // d L_ij / du = L^{(i)}_ij / (2 sqrt u)
        LogSigned<Real> second = mp_.beta == 2 ? sum / normalization_
                                               : sum / (pfaffian<Real>(base) * normalization_);
        second.log_abs += -b * u / Real(8);
        const Real denom = mp_.beta == 2 ? Real(2) * sqrt(u) : Real(4) * sqrt(u);
        return b * e_u / Real(8) - second.value() / denom;
    }

private:
    LogMatrix<Real> kernel(Real u, int l) const {
        const int dim = mp_.kernel_dim();
        LogMatrix<Real> m(dim, dim);
        for (int i = 1; i <= dim; ++i)
            for (int j = 1; j <= dim; ++j) m(i - 1, j - 1) = micro_kernel_entry<Real>(mp_, l, i, j, u);
        return m;
    }

    LogSigned<Real> assemble(const LogMatrix<Real>& m) const {
        if (m.rows() == 0) return LogSigned<Real>::one();
        return mp_.beta == 2 ? log_det<Real>(m) : pfaffian<Real>(m);
    }

    MicroParams mp_;
    LogSigned<Real> normalization_;
};

template <typename Real = double>
Real micro_gap(const MicroParams& mp, Real u) {
    return MicroGapModel<Real>(mp).gap(u);
}

template <typename Real = double>
Real micro_pmin(const MicroParams& mp, Real u) {
    return MicroGapModel<Real>(mp).pmin(u);
}

}  // namespace wishart_edge
