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
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <string>
#include <type_traits>

#include "errors.hpp"
#include "log_signed.hpp"

namespace wishart_edge {

/// ln(m!). Exact integer product up to 20! (fits in 64 bits), log-gamma beyond.
template <typename Real = double>
Real log_factorial(int m) {
    using std::log;
    if (m < 0) throw DomainError("log_factorial: negative argument " + std::to_string(m));
    if (m <= 20) {
        std::uint64_t prod = 1;
        for (int k = 2; k <= m; ++k) prod *= static_cast<std::uint64_t>(k);
        return log(Real(prod));
    }
    if constexpr (std::is_floating_point_v<Real>) {
        return std::lgamma(Real(m) + Real(1));
    } else {
        // ln m! = ln (m-1)! + ln m, started from the exact 20!
        Real acc = log_factorial<Real>(20);
        for (int k = 21; k <= m; ++k) acc += log(Real(k));
        return acc;
    }
}

/// Step function on integers with the convention heaviside(0) = 1.
constexpr int heaviside(int x) { return x >= 0 ? 1 : 0; }

namespace detail {

template <typename Real>
Real bessel_series_tolerance() {
    return std::min(Real(1e-17), Real(std::numeric_limits<Real>::epsilon()));
}

inline void check_bessel_order(int order) {
    if (std::abs(order) > 200)
        throw ContractError("bessel_i: |order| > 200 (" + std::to_string(order) + ")");
}

}  // namespace detail

/// I_order(x) in log-signed form, from the ascending series
///   sum_m (x/2)^{2m+|order|} / (m! (m+|order|)!)
/// truncated once a term drops below 1e-17 of the partial sum.
/// Negative orders map onto |order| before anything is computed.
template <typename Real = double>
LogSigned<Real> log_bessel_i(int order, Real x) {
    using std::log;
    detail::check_bessel_order(order);
    if (x < Real(0)) throw DomainError("bessel_i: negative argument");
    const int nu = std::abs(order);
    if (x == Real(0)) return nu == 0 ? LogSigned<Real>::one() : LogSigned<Real>::zero();

    const Real half = x / Real(2);
    const Real q = half * half;
    const Real tol = detail::bessel_series_tolerance<Real>();
    Real term = Real(1);
    Real sum = Real(1);
    for (int m = 1; m < 2000; ++m) {
        term *= q / (Real(m) * Real(m + nu));
        sum += term;
        if (term < tol * sum) break;
    }
    return LogSigned<Real>::from_log(Real(nu) * log(half) - log_factorial<Real>(nu) + log(sum));
}

/// Modified Bessel function of the first kind, integer order.
template <typename Real = double>
Real bessel_i(int order, Real x) {
    return log_bessel_i<Real>(order, x).value();
}

}  // namespace wishart_edge
