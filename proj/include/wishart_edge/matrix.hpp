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
#include <cstddef>
#include <limits>
#include <span>
#include <type_traits>
#include <vector>

#include "errors.hpp"

namespace wishart_edge {

/// Dense row-major matrix. Owns its storage; copies are deep.
template <typename T>
class Matrix {
public:
    using value_type = T;

    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, const T& fill = T{})
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n, T{});
        for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
        return m;
    }

    static Matrix diagonal(std::span<const double> diag) {
        Matrix m(diag.size(), diag.size(), T{});
        for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = T(diag[i]);
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }

    T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<T> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const T> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    std::span<T> data() { return data_; }
    std::span<const T> data() const { return data_; }

    void swap_rows(std::size_t a, std::size_t b) {
        if (a == b) return;
        std::swap_ranges(data_.begin() + a * cols_, data_.begin() + (a + 1) * cols_,
                         data_.begin() + b * cols_);
    }

    void swap_cols(std::size_t a, std::size_t b) {
        if (a == b) return;
        for (std::size_t i = 0; i < rows_; ++i) std::swap((*this)(i, a), (*this)(i, b));
    }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

using RealMatrix = Matrix<double>;
using ComplexMatrix = Matrix<std::complex<double>>;

template <typename T>
struct is_complex : std::false_type {};
template <typename T>
struct is_complex<std::complex<T>> : std::true_type {};

inline double conj_if(double x) { return x; }
inline std::complex<double> conj_if(std::complex<double> x) { return std::conj(x); }

inline double real_part(double x) { return x; }
inline double real_part(std::complex<double> x) { return x.real(); }

/// Plain product without the C99 Annex G inf/nan recovery that std::complex
/// operator* performs; inputs in this library are always finite.
inline double mul(double a, double b) { return a * b; }
inline std::complex<double> mul(std::complex<double> a, std::complex<double> b) {
    return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

/// a * conj(b).
inline double mul_conj(double a, double b) { return a * b; }
inline std::complex<double> mul_conj(std::complex<double> a, std::complex<double> b) {
    return {a.real() * b.real() + a.imag() * b.imag(), a.imag() * b.real() - a.real() * b.imag()};
}

template <typename Scalar>
Matrix<Scalar> multiply(const Matrix<Scalar>& a, const Matrix<Scalar>& b) {
    if (a.cols() != b.rows()) throw ContractError("multiply: inner dimensions differ");
    Matrix<Scalar> c(a.rows(), b.cols(), Scalar{});
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const Scalar aik = a(i, k);
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += mul(aik, b(k, j));
        }
    return c;
}

/// M^dagger (transpose for real scalars).
template <typename Scalar>
Matrix<Scalar> adjoint(const Matrix<Scalar>& a) {
    Matrix<Scalar> t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = conj_if(a(i, j));
    return t;
}

/// Largest |a_ij - conj(a_ji)| relative to the largest |a_ij|; 0 for an empty or zero matrix.
template <typename Scalar>
double hermitian_defect(const Matrix<Scalar>& a) {
    if (!a.square()) return std::numeric_limits<double>::infinity();
    double scale = 0.0;
    double defect = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            scale = std::max(scale, std::abs(a(i, j)));
            defect = std::max(defect, std::abs(a(i, j) - conj_if(a(j, i))));
        }
    return scale == 0.0 ? 0.0 : defect / scale;
}

}  // namespace wishart_edge
