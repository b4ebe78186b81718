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
#include <complex>
#include <cstdint>
#include <random>

#include "wishart_edge/matrix.hpp"

namespace wishart_edge::testing {

inline RealMatrix random_antisymmetric(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    RealMatrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            a(i, j) = g(rng);
            a(j, i) = -a(i, j);
        }
    return a;
}

/// Haar-ish orthogonal / unitary matrix by Gram-Schmidt on a Gaussian matrix.
template <typename Scalar>
Matrix<Scalar> random_unitary(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Matrix<Scalar> q(n, n);
    for (auto& x : q.data()) {
        if constexpr (is_complex<Scalar>::value) x = Scalar(g(rng), g(rng));
        else x = g(rng);
    }
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < j; ++k) {
            Scalar dot{};
            for (std::size_t i = 0; i < n; ++i) dot += conj_if(q(i, k)) * q(i, j);
            for (std::size_t i = 0; i < n; ++i) q(i, j) -= dot * q(i, k);
        }
        double nrm = 0;
        for (std::size_t i = 0; i < n; ++i) nrm += std::norm(q(i, j));
        for (std::size_t i = 0; i < n; ++i) q(i, j) /= std::sqrt(nrm);
    }
    return q;
}

/// Q diag(lam) Q^dagger with exact Hermitian symmetry.
template <typename Scalar>
Matrix<Scalar> rotated_spectrum(const std::vector<double>& lam, std::mt19937_64& rng) {
    const auto q = random_unitary<Scalar>(lam.size(), rng);
    Matrix<Scalar> d(lam.size(), lam.size());
    for (std::size_t i = 0; i < lam.size(); ++i) d(i, i) = lam[i];
    auto c = multiply(multiply(q, d), adjoint(q));
    for (std::size_t i = 0; i < c.rows(); ++i)
        for (std::size_t j = 0; j < i; ++j) c(j, i) = conj_if(c(i, j));
    return c;
}

/// Number of eigenvalues of symmetric `a` below x, read off the sign changes of
/// the leading principal minors of a - x (Sylvester's law of inertia).
inline int count_below(const RealMatrix& a, double x) {
    const std::size_t n = a.rows();
    RealMatrix m = a;
    for (std::size_t i = 0; i < n; ++i) m(i, i) -= x;
    int negative = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const double piv = m(k, k);  // ratio of consecutive leading minors
        if (piv < 0) ++negative;
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = m(i, k) / piv;
            for (std::size_t j = k + 1; j < n; ++j) m(i, j) -= f * m(k, j);
        }
    }
    return negative;
}

/// k-th smallest root (0-based) of det(a - x) on [lo, hi] by bisection.
inline double kth_root_by_bisection(const RealMatrix& a, int k, double lo, double hi) {
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (count_below(a, mid) > k ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

inline double gershgorin_bound(const RealMatrix& a) {
    double bound = 0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double r = 0;
        for (std::size_t j = 0; j < a.cols(); ++j) r += std::abs(a(i, j));
        bound = std::max(bound, r);
    }
    return bound;
}

template <typename Scalar>
double relative_frobenius(const Matrix<Scalar>& a, const Matrix<Scalar>& b) {
    double num = 0, den = 0;
    for (std::size_t k = 0; k < a.data().size(); ++k) {
        num += std::norm(a.data()[k] - b.data()[k]);
        den += std::norm(b.data()[k]);
    }
    return std::sqrt(num / den);
}

}  // namespace wishart_edge::testing
