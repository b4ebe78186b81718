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
#include <limits>
#include <ostream>

namespace wishart_edge {

/// A real number stored as sign * exp(log_abs).
///
/// Kernel entries of the exact gap formulas involve e_k(Lambda) t^{p-k} / (alpha-k)!
/// which overflow double precision long before p = 200. Every kernel entry and
/// every determinant or Pfaffian built from them is carried in this form.
///
/// sign == 0 encodes an exact zero; log_abs is then meaningless.
template <typename Real = double>
struct LogSigned {
    int sign = 0;
    Real log_abs = Real(0);

    constexpr LogSigned() = default;
    constexpr LogSigned(int s, Real l) : sign(s == 0 ? 0 : (s > 0 ? 1 : -1)), log_abs(l) {}

    static LogSigned zero() { return {}; }
    static LogSigned one() { return {1, Real(0)}; }

    static LogSigned from_log(Real log_value) { return {1, log_value}; }

    static LogSigned from_value(Real value) {
        using std::abs;
        using std::log;
        if (value == Real(0)) return {};
        return {value > Real(0) ? 1 : -1, log(abs(value))};
    }

    bool is_zero() const { return sign == 0; }

    /// exp(log_abs) with the sign applied; under/overflows like std::exp.
    Real value() const {
        using std::exp;
        if (sign == 0) return Real(0);
        return Real(sign) * exp(log_abs);
    }

    LogSigned operator-() const { return {-sign, log_abs}; }

    friend LogSigned operator*(const LogSigned& a, const LogSigned& b) {
        if (a.sign == 0 || b.sign == 0) return {};
        return {a.sign * b.sign, a.log_abs + b.log_abs};
    }

    friend LogSigned operator/(const LogSigned& a, const LogSigned& b) {
        if (b.sign == 0) return {a.sign == 0 ? 0 : a.sign, std::numeric_limits<Real>::infinity()};
        if (a.sign == 0) return {};
        return {a.sign * b.sign, a.log_abs - b.log_abs};
    }

    // log-sum-exp with sign resolution
    friend LogSigned operator+(const LogSigned& a, const LogSigned& b) {
        using std::exp;
        using std::expm1;
        using std::log;
        using std::log1p;
        if (a.sign == 0) return b;
        if (b.sign == 0) return a;
        const LogSigned& hi = a.log_abs >= b.log_abs ? a : b;
        const LogSigned& lo = a.log_abs >= b.log_abs ? b : a;
        const Real d = lo.log_abs - hi.log_abs;
        if (hi.sign == lo.sign) return {hi.sign, hi.log_abs + log1p(exp(d))};
        if (d == Real(0)) return {};
        return {hi.sign, hi.log_abs + log(-expm1(d))};
    }

    friend LogSigned operator-(const LogSigned& a, const LogSigned& b) { return a + (-b); }

    LogSigned& operator+=(const LogSigned& o) { return *this = *this + o; }
    LogSigned& operator*=(const LogSigned& o) { return *this = *this * o; }

    /// x^k for integer k >= 0 (any sign of x).
    LogSigned pow(int k) const {
        if (k == 0) return one();
        if (sign == 0) return {};
        return {(k % 2 == 0) ? 1 : sign, log_abs * Real(k)};
    }

    friend std::ostream& operator<<(std::ostream& os, const LogSigned& v) {
        return os << "(" << v.sign << ", " << v.log_abs << ")";
    }
};

using LogSignedValue = LogSigned<double>;

}  // namespace wishart_edge
