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
#include <limits>
#include <string>
#include <type_traits>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"
#include "log_signed.hpp"
#include "special_functions.hpp"
#include "symfun.hpp"

namespace wishart_edge {

/// Identifies a Wishart ensemble: Dyson index beta (1 real, 2 complex), p
/// variates, n >= p samples. gamma = beta (n - p + 1) / 2 - 1 fixes the size of
/// the dual kernel: gamma x gamma determinant for beta = 2, 2gamma x 2gamma
/// Pfaffian for beta = 1. For beta = 1 and even n - p, gamma is half-integer
/// and no exact kernel is available; the ensemble can still be simulated.
struct EnsembleParams {
    int beta = 2;
    int p = 1;
    int n = 1;

    static EnsembleParams make(int beta, int p, int n) {
        if (beta != 1 && beta != 2) throw DomainError("beta must be 1 or 2, got " + std::to_string(beta));
        if (p < 1) throw DomainError("p must be positive");
        if (n < p) throw DomainError("n must satisfy n >= p");
        return {beta, p, n};
    }

    bool has_integer_gamma() const { return beta == 2 || (n - p) % 2 == 1; }

    /// Twice gamma, always an integer.
    int twice_gamma() const { return beta * (n - p + 1) - 2; }

    int gamma() const {
        if (!has_integer_gamma())
            throw UnsupportedError("half-integer gamma requires the supermatrix model (out of scope)");
        return twice_gamma() / 2;
    }

    int kernel_dim() const { return beta == 2 ? gamma() : 2 * gamma(); }

    friend bool operator==(const EnsembleParams&, const EnsembleParams&) = default;
};

/// Which t-exponent convention the kernel uses. Both yield the same gap probability.
enum class KernelVariant {
    hubbard_stratonovich,  ///< t^{p-k}
    superbosonization,     ///< t^{alpha-k}
};

struct KernelSpec {
    KernelVariant variant = KernelVariant::hubbard_stratonovich;
    /// 0: plain kernel. l >= 1: row l replaced by its term-wise t-derivative (G^{(l)}).
    int derivative_row = 0;
};

namespace detail {

template <typename Real>
Real log_sum_exp(const std::vector<Real>& logs) {
    using std::exp;
    using std::log;
    if (logs.empty()) return -std::numeric_limits<Real>::infinity();
    const Real top = *std::max_element(logs.begin(), logs.end());
    Real acc = Real(0);
    for (const Real& l : logs) acc += exp(l - top);
    return top + log(acc);
}

/// Evaluates kernel entries for one (params, spectrum, t), caching ln t and
/// the factorial table shared by every entry.
template <typename Real>
class KernelTerms {
public:
    KernelTerms(const EnsembleParams& params, const CorrelationSpectrum<Real>& spectrum, Real t,
                KernelVariant variant)
        : params_(params), spectrum_(spectrum), t_(t), variant_(variant), gamma_(params.gamma()) {
        using std::log;
        if (spectrum.p() != params.p)
            throw ContractError("kernel: spectrum has " + std::to_string(spectrum.p()) +
                                " eigenvalues, params.p = " + std::to_string(params.p));
        if (t < Real(0)) throw DomainError("kernel: t must be non-negative");
        log_t_ = t > Real(0) ? log(t) : Real(0);
        const int max_alpha = params.p + 2 * gamma_ + 2;
        log_fact_.resize(max_alpha + 1);
        for (int m = 0; m <= max_alpha; ++m) log_fact_[m] = log_factorial<Real>(m);
    }

    int alpha(int i, int j) const {
        return params_.beta == 2 ? params_.p + gamma_ + 1 - i - j : params_.p + 2 * gamma_ + 2 - i - j;
    }

    int prefactor(int i, int j) const {
        const int parity = ((i + j) % 2 == 0) ? 1 : -1;
        if (params_.beta == 2) return (i % 2 == 1) ? 1 : -1;  // (-1)^{i+1}
        return (j - i) * parity;
    }

    LogSigned<Real> entry(int i, int j, bool differentiated) const {
        using std::log;
        const int a = alpha(i, j);
        if (heaviside(a) == 0) return LogSigned<Real>::zero();
        const int pref = prefactor(i, j);
        if (pref == 0) return LogSigned<Real>::zero();

        const int p = params_.p;
        const bool sb = variant_ == KernelVariant::superbosonization;
        int k_max = std::min(p, a);
        if (differentiated) k_max = sb ? std::min(p, a - 1) : std::min(p - 1, a);

        std::vector<Real> logs;
        logs.reserve(static_cast<std::size_t>(std::max(k_max + 1, 0)));
        for (int k = 0; k <= k_max; ++k) {
            const int base_exponent = sb ? a - k : p - k;
            const int exponent = differentiated ? base_exponent - 1 : base_exponent;
            Real term = spectrum_.e[k].log_abs - log_fact_[a - k];
            if (differentiated) term += log(Real(base_exponent));
            if (exponent > 0) {
                if (t_ == Real(0)) continue;
                term += Real(exponent) * log_t_;
            }
            logs.push_back(term);
        }
        if (logs.empty()) return LogSigned<Real>::zero();
        return {pref > 0 ? 1 : -1, log(Real(std::abs(pref))) + log_sum_exp(logs)};
    }

private:
    const EnsembleParams& params_;
    const CorrelationSpectrum<Real>& spectrum_;
    Real t_;
    Real log_t_ = Real(0);
    KernelVariant variant_;
    int gamma_;
    std::vector<Real> log_fact_;
};

}  // namespace detail

/// One entry (1-based i, j) of the exact determinant (beta = 2) or Pfaffian
/// (beta = 1) kernel:
///
///   Theta(alpha) q_ij sum_{k=0}^{min(p, alpha)} e_k(Lambda) t^{p-k} / (alpha-k)!
///
/// with alpha = p + gamma + 1 - i - j, q_ij = (-1)^{i+1} for beta = 2 and
/// alpha = p + 2gamma + 2 - i - j, q_ij = (j - i)(-1)^{i+j} for beta = 1.
/// The superbosonization variant uses t^{alpha-k}. When spec.derivative_row == i
/// the row is replaced by its term-wise t-derivative.
template <typename Real>
LogSigned<Real> kernel_entry(const EnsembleParams& params, const KernelSpec& spec,
                             const CorrelationSpectrum<Real>& spectrum, int i, int j, Real t) {
    const int dim = params.kernel_dim();
    if (i < 1 || j < 1 || i > dim || j > dim)
        throw ContractError("kernel_entry: index (" + std::to_string(i) + ", " + std::to_string(j) +
                            ") outside 1.." + std::to_string(dim));
    if (spec.derivative_row < 0 || spec.derivative_row > dim)
        throw ContractError("kernel_entry: derivative_row outside 0.." + std::to_string(dim));
    detail::KernelTerms<Real> terms(params, spectrum, t, spec.variant);
    return terms.entry(i, j, spec.derivative_row == i);
}

namespace detail {

/// Arithmetic used inside the exact model. The kernel determinants are
/// Hankel-like and lose a few digits to cancellation, so double inputs are
/// evaluated in extended precision.
template <typename Real>
struct working_precision {
    using type = Real;
};
template <>
struct working_precision<double> {
    using type = long double;
};

template <typename To, typename From>
CorrelationSpectrum<To> convert_spectrum(const CorrelationSpectrum<From>& s) {
    if constexpr (std::is_same_v<To, From>) {
        return s;
    } else {
        std::vector<To> lam(s.lambdas.begin(), s.lambdas.end());
        return build_spectrum<To>(lam);
    }
}

}  // namespace detail

/// Exact gap probability E_p(t) and smallest-eigenvalue density P_min(t) for a
/// fixed ensemble and spectrum.
///
/// E is self-normalized: the determinant/Pfaffian is divided by the same
/// assembly at t = 0, which absorbs det^gamma(Lambda) and the Pfaffian's sign.
template <typename Real = double>
class ExactGapModel {
    using Work = typename detail::working_precision<Real>::type;

public:
    ExactGapModel(const EnsembleParams& params, CorrelationSpectrum<Real> spectrum,
                  KernelVariant variant = KernelVariant::hubbard_stratonovich)
        : params_(params), spectrum_(std::move(spectrum)), variant_(variant) {
        (void)params_.gamma();  // rejects half-integer gamma up front
        if (spectrum_.p() != params_.p)
            throw ContractError("spectrum size " + std::to_string(spectrum_.p()) + " != p = " +
                                std::to_string(params_.p));
        work_ = detail::convert_spectrum<Work>(spectrum_);
        // The SB Pfaffian at t = 0 vanishes (it is t^gamma times the HS one), so
        // both variants share the HS normalization for beta = 1.
        const bool use_hs = params_.beta == 1 || variant_ == KernelVariant::hubbard_stratonovich;
        normalization_ = assemble(Work(0), use_hs ? KernelVariant::hubbard_stratonovich : variant_);
        if (normalization_.is_zero()) throw NumericError("exact kernel: singular t = 0 assembly");
    }

    const EnsembleParams& params() const { return params_; }
    const CorrelationSpectrum<Real>& spectrum() const { return spectrum_; }
    LogSigned<Real> normalization() const { return narrow(normalization_); }

    /// ln E(t) with the sign of the assembled ratio; sign 0 if E vanishes identically.
    LogSigned<Real> log_gap(Real t) const {
        if (t < Real(0)) throw DomainError("gap_exact: t must be non-negative");
        return narrow(log_gap_work(Work(t)));
    }

    Real gap(Real t) const { return log_gap(t).value(); }

    /// -dE/dt via the G^{(l)} kernels (row l differentiated).
    Real pmin(Real t) const {
        if (!(t > Real(0))) throw DomainError("pmin_exact: t must be positive");
        const Work tw = Work(t);
        const Work c = work_.trace_inv;
        const int gamma = params_.gamma();
        const Work e_t = log_gap_work(tw).value();
        if (gamma == 0) return Real(params_.beta == 2 ? c * e_t : c * e_t / Work(2));

        const int dim = params_.kernel_dim();
        detail::KernelTerms<Work> terms(params_, work_, tw, KernelVariant::hubbard_stratonovich);
        LogMatrix<Work> base(dim, dim);
        LogMatrix<Work> drow(dim, dim);
        for (int i = 1; i <= dim; ++i)
            for (int j = 1; j <= dim; ++j) {
                base(i - 1, j - 1) = terms.entry(i, j, false);
                drow(i - 1, j - 1) = terms.entry(i, j, true);
            }
        LogSigned<Work> sum = LogSigned<Work>::zero();
        for (int l = 0; l < dim; ++l) {
            LogMatrix<Work> g = base;
            for (int j = 0; j < dim; ++j) g(l, j) = drow(l, j);
            sum += log_det<Work>(g);
        }
        if (params_.beta == 2) {
            LogSigned<Work> second = sum / normalization_;
            second.log_abs += -tw * c;
            return Real(c * e_t - second.value());
        }
        // d pf / dt = (d det / dt) / (2 pf)
        LogSigned<Work> second = sum / (pfaffian<Work>(base) * normalization_);
        second.log_abs += -tw * c / Work(2);
        return Real(c * e_t / Work(2) - second.value() / Work(2));
    }

private:
    static LogSigned<Real> narrow(const LogSigned<Work>& v) { return {v.sign, Real(v.log_abs)}; }

    LogSigned<Work> log_gap_work(Work t) const {
        const Work expo = -Work(params_.beta) * t * work_.trace_inv / Work(2);
        if (params_.gamma() == 0 || t == Work(0)) return LogSigned<Work>::from_log(expo);
        LogSigned<Work> a = assemble(t, variant_);
        if (params_.beta == 1 && variant_ == KernelVariant::superbosonization) {
            using std::log;
            a.log_abs -= Work(params_.gamma()) * log(t);
        }
        LogSigned<Work> r = a / normalization_;
        r.log_abs += expo;
        return r;
    }

    LogSigned<Work> assemble(Work t, KernelVariant variant) const {
        const int dim = params_.kernel_dim();
        if (dim == 0) return LogSigned<Work>::one();
        detail::KernelTerms<Work> terms(params_, work_, t, variant);
        LogMatrix<Work> m(dim, dim);
        for (int i = 1; i <= dim; ++i)
            for (int j = 1; j <= dim; ++j) m(i - 1, j - 1) = terms.entry(i, j, false);
        return params_.beta == 2 ? log_det<Work>(m) : pfaffian<Work>(m);
    }

    EnsembleParams params_;
    CorrelationSpectrum<Real> spectrum_;
    CorrelationSpectrum<Work> work_;
    KernelVariant variant_;
    LogSigned<Work> normalization_;
};

template <typename Real>
Real gap_exact(const EnsembleParams& params, const CorrelationSpectrum<Real>& spectrum, Real t,
               KernelVariant variant = KernelVariant::hubbard_stratonovich) {
    return ExactGapModel<Real>(params, spectrum, variant).gap(t);
}

template <typename Real>
Real pmin_exact(const EnsembleParams& params, const CorrelationSpectrum<Real>& spectrum, Real t) {
    return ExactGapModel<Real>(params, spectrum).pmin(t);
}

}  // namespace wishart_edge
