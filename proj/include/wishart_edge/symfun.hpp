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
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "log_signed.hpp"

namespace wishart_edge {

/// Eigenvalues Lambda_1..Lambda_p of the empirical correlation matrix together
/// with the invariants every kernel needs. Immutable after build_spectrum().
template <typename Real = double>
struct CorrelationSpectrum {
    std::vector<Real> lambdas;
    /// e[k] = k-th elementary symmetric polynomial of lambdas, k = 0..p.
    std::vector<LogSigned<Real>> e;
    /// tr Lambda^{-1}
    Real trace_inv = Real(0);
    /// sum_k ln Lambda_k = ln det Lambda
    Real log_det = Real(0);

    int p() const { return static_cast<int>(lambdas.size()); }
};

/// Builds the spectrum and its invariants. The elementary symmetric polynomials
/// follow e_k^{(m)} = e_k^{(m-1)} + Lambda_m e_{k-1}^{(m-1)}; all terms are
/// positive, so the log-domain accumulation never cancels.
template <typename Real = double>
CorrelationSpectrum<Real> build_spectrum(std::span<const Real> lambdas) {
    using std::isfinite;
    using std::log;
    if (lambdas.empty()) throw DomainError("build_spectrum: empty spectrum");
    CorrelationSpectrum<Real> s;
    s.lambdas.assign(lambdas.begin(), lambdas.end());
    for (const Real& l : s.lambdas) {
        if (!(l > Real(0)) || !isfinite(l)) throw DomainError("C must be positive definite");
    }
    const std::size_t p = s.lambdas.size();
    s.e.assign(p + 1, LogSigned<Real>::zero());
    s.e[0] = LogSigned<Real>::one();
    for (std::size_t m = 0; m < p; ++m) {
        const Real log_lambda = log(s.lambdas[m]);
        for (std::size_t k = m + 1; k >= 1; --k) {
            s.e[k] += LogSigned<Real>{1, s.e[k - 1].log_abs + log_lambda};
        }
        s.trace_inv += Real(1) / s.lambdas[m];
        s.log_det += log_lambda;
    }
    return s;
}

template <typename Real = double>
CorrelationSpectrum<Real> build_spectrum(const std::vector<Real>& lambdas) {
    return build_spectrum<Real>(std::span<const Real>(lambdas));
}

}  // namespace wishart_edge
