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
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <numeric>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "exact_kernels.hpp"
#include "linalg.hpp"
#include "matrix.hpp"
#include "random.hpp"

namespace wishart_edge {

/// Worker count for sampling loops. WISHART_EDGE_THREADS, when set, overrides
/// `requested`; 0 means one worker per hardware thread.
inline unsigned resolve_thread_count(unsigned requested = 0) {
    if (const char* env = std::getenv("WISHART_EDGE_THREADS"); env != nullptr && *env != '\0') {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 0) requested = static_cast<unsigned>(v);
    }
    if (requested == 0) requested = std::max(1u, std::thread::hardware_concurrency());
    return requested;
}

/// Runs body(i) for i in [0, count) on `threads` workers over contiguous chunks.
/// body must write only to slots owned by i.
inline void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body) {
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    const std::size_t chunk = (count + threads - 1) / threads;
    for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
            try {
                const std::size_t lo = w * chunk;
                const std::size_t hi = std::min(count, lo + chunk);
                for (std::size_t i = lo; i < hi; ++i) body(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

/// Covariance of the columns of W: either its eigenvalues (C = diag(Lambda),
/// enough for every invariant observable) or a full real / Hermitian matrix.
using CorrelationSource = std::variant<std::vector<double>, RealMatrix, ComplexMatrix>;

struct McConfig {
    EnsembleParams params;
    CorrelationSource correlation;
    std::size_t samples = 1;
    std::uint64_t seed = 0;
    unsigned threads = 0;
};

struct McRun {
    McConfig config;
    /// Smallest eigenvalue of W W^dagger per sample, ascending.
    std::vector<double> draws;
    double wall_time = 0.0;

    /// Empirical P(lambda_min <= t).
    double ecdf(double t) const {
        const auto it = std::upper_bound(draws.begin(), draws.end(), t);
        return static_cast<double>(it - draws.begin()) / static_cast<double>(draws.size());
    }
    /// Empirical gap probability P(lambda_min > t).
    double survival(double t) const { return 1.0 - ecdf(t); }
};

namespace detail {

template <typename Scalar>
Scalar gaussian_entry(GaussianStream& g) {
    if constexpr (is_complex<Scalar>::value) {
        const double re = g.next();
        const double im = g.next();
        return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
    } else {
        return g.next();
    }
}

/// p x cols Gaussian matrix with column covariance C: i.i.d. entries with
/// E|x|^2 = 1, rows then mixed by the Cholesky factor (or scaled by sqrt Lambda).
template <typename Scalar>
Matrix<Scalar> colored_gaussian(GaussianStream& g, std::size_t p, std::size_t cols,
                                const std::vector<double>& sqrt_lambda, const Matrix<Scalar>* factor) {
    Matrix<Scalar> w(p, cols);
    for (auto& x : w.data()) x = gaussian_entry<Scalar>(g);
    if (factor == nullptr) {
        for (std::size_t i = 0; i < p; ++i)
            for (auto& x : w.row(i)) x *= sqrt_lambda[i];
        return w;
    }
    return multiply(*factor, w);
}

/// Lower triangle of W W^dagger (the upper part is left at zero).
template <typename Scalar>
Matrix<Scalar> gram_lower(const Matrix<Scalar>& w) {
    const std::size_t p = w.rows();
    const std::size_t n = w.cols();
    Matrix<Scalar> a(p, p, Scalar{});
    for (std::size_t i = 0; i < p; ++i) {
        const Scalar* wi = &w(i, 0);
        for (std::size_t j = 0; j <= i; ++j) {
            const Scalar* wj = &w(j, 0);
            Scalar acc{};
            for (std::size_t k = 0; k < n; ++k) acc += mul_conj(wi[k], wj[k]);
            a(i, j) = acc;
        }
    }
    return a;
}

template <typename Scalar>
Matrix<Scalar> gram_full(const Matrix<Scalar>& w) {
    Matrix<Scalar> a = gram_lower(w);
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = i + 1; j < a.cols(); ++j) a(i, j) = conj_if(a(j, i));
    return a;
}

/// Real determinant of a Hermitian matrix (LU with partial pivoting) in log-signed form.
template <typename Scalar>
LogSignedValue hermitian_det(Matrix<Scalar> a) {
    const std::size_t n = a.rows();
    Scalar det = Scalar(1);
    double log_scale = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
        if (a(piv, k) == Scalar{}) return LogSignedValue::zero();
        if (piv != k) {
            a.swap_rows(piv, k);
            det = -det;
        }
        const double mag = std::abs(a(k, k));
        log_scale += std::log(mag);
        det *= a(k, k) / mag;
        for (std::size_t i = k + 1; i < n; ++i) {
            const Scalar f = a(i, k) / a(k, k);
            for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
        }
    }
    return {real_part(det) > 0.0 ? 1 : -1, log_scale};
}

template <typename Scalar>
Matrix<Scalar> shifted(Matrix<Scalar> a, double z) {
    for (std::size_t i = 0; i < a.rows(); ++i) a(i, i) += Scalar(z);
    return a;
}

struct Sampler {
    const McConfig& config;
    std::vector<double> sqrt_lambda;
    RealMatrix real_factor;
    ComplexMatrix complex_factor;
    bool diagonal = true;

    explicit Sampler(const McConfig& c) : config(c) {
        const auto p = static_cast<std::size_t>(c.params.p);
        if (const auto* lambdas = std::get_if<std::vector<double>>(&c.correlation)) {
            if (lambdas->size() != p) throw ContractError("McConfig: spectrum size differs from p");
            for (double l : *lambdas) {
                if (!(l > 0.0) || !std::isfinite(l)) throw DomainError("C must be positive definite");
                sqrt_lambda.push_back(std::sqrt(l));
            }
        } else if (const auto* rc = std::get_if<RealMatrix>(&c.correlation)) {
            if (rc->rows() != p || !rc->square()) throw ContractError("McConfig: C must be p x p");
            real_factor = cholesky(*rc);
            complex_factor = ComplexMatrix(p, p);
            for (std::size_t i = 0; i < p; ++i)
                for (std::size_t j = 0; j < p; ++j) complex_factor(i, j) = real_factor(i, j);
            diagonal = false;
        } else {
            const auto& cc = std::get<ComplexMatrix>(c.correlation);
            if (cc.rows() != p || !cc.square()) throw ContractError("McConfig: C must be p x p");
            if (c.params.beta == 1) throw DomainError("beta = 1 requires a real correlation matrix");
            complex_factor = cholesky(cc);
            diagonal = false;
        }
    }

    template <typename Scalar>
    Matrix<Scalar> draw(GaussianStream& g, std::size_t cols) const {
        const auto p = static_cast<std::size_t>(config.params.p);
        if constexpr (is_complex<Scalar>::value) {
            return colored_gaussian<Scalar>(g, p, cols, sqrt_lambda, diagonal ? nullptr : &complex_factor);
        } else {
            return colored_gaussian<Scalar>(g, p, cols, sqrt_lambda, diagonal ? nullptr : &real_factor);
        }
    }
};

template <typename Scalar>
double smallest_draw(const Sampler& sampler, std::uint64_t seed, std::size_t s) {
    GaussianStream g(seed, s);
    const auto w = sampler.draw<Scalar>(g, static_cast<std::size_t>(sampler.config.params.n));
    const auto a = gram_lower(w);
    double lo = smallest_eigenvalue(a);
    if (lo < 0.0) {
        double scale = 0.0;
        for (std::size_t i = 0; i < a.rows(); ++i) scale += real_part(a(i, i));
        if (lo < -1e-12 * std::max(1.0, scale))
            throw NumericError("sample_smallest: negative eigenvalue " + std::to_string(lo));
        lo = 0.0;
    }
    return lo;
}

}  // namespace detail

/// W W^dagger for sample s of `config` (Scalar must be complex iff beta = 2).
/// Same stream as sample_smallest, so its smallest eigenvalue is that draw.
template <typename Scalar>
Matrix<Scalar> sample_gram(const McConfig& config, std::size_t s) {
    if (is_complex<Scalar>::value != (config.params.beta == 2))
        throw ContractError("sample_gram: scalar type does not match beta");
    const detail::Sampler sampler(config);
    GaussianStream g(config.seed, s);
    return detail::gram_full(sampler.draw<Scalar>(g, static_cast<std::size_t>(config.params.n)));
}

/// Direct Monte Carlo of the smallest eigenvalue of W W^dagger, W p x n with
/// columns ~ N(0, C). Sample s uses the Philox stream (seed, s), so the result is
/// bit-identical for any thread count.
inline McRun sample_smallest(const McConfig& config) {
    if (config.samples < 1) throw ContractError("sample_smallest: samples must be >= 1");
    const auto start = std::chrono::steady_clock::now();
    const detail::Sampler sampler(config);
    McRun run{config, std::vector<double>(config.samples), 0.0};
    const bool complex = config.params.beta == 2;
    parallel_for(config.samples, resolve_thread_count(config.threads), [&](std::size_t s) {
        run.draws[s] = complex ? detail::smallest_draw<std::complex<double>>(sampler, config.seed, s)
                               : detail::smallest_draw<double>(sampler, config.seed, s);
    });
    std::sort(run.draws.begin(), run.draws.end());
    run.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return run;
}

/// A Monte Carlo ratio estimate with its delta-method standard error.
struct McEstimate {
    double value = 0.0;
    double stderr_ = 0.0;
};

namespace detail {

/// mean(num) / mean(den) from log-signed per-sample values; the common scale
/// cancels, and the standard error is sqrt(var(num - R den) / N) / mean(den).
inline McEstimate ratio_estimate(const std::vector<LogSignedValue>& num, const std::vector<LogSignedValue>& den) {
    double shift = -std::numeric_limits<double>::infinity();
    for (const auto* v : {&num, &den})
        for (const auto& x : *v)
            if (!x.is_zero()) shift = std::max(shift, x.log_abs);
    const std::size_t n = num.size();
    std::vector<double> a(n), b(n);
    double sa = 0.0, sb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = num[i].is_zero() ? 0.0 : num[i].sign * std::exp(num[i].log_abs - shift);
        b[i] = den[i].is_zero() ? 0.0 : den[i].sign * std::exp(den[i].log_abs - shift);
        sa += a[i];
        sb += b[i];
    }
    const double r = sa / sb;
    const double mean_b = sb / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - r * b[i];
        ss += d * d;
    }
    const double var = n > 1 ? ss / static_cast<double>(n - 1) : 0.0;
    return {r, std::sqrt(var / static_cast<double>(n)) / std::abs(mean_b)};
}

}  // namespace detail

/// Gap probability from the dual p x (p + 2 - beta) Wishart model:
///   E(t) = exp(-beta t tr Lambda^{-1} / 2) <det^gamma(Wb Wb^dagger + t)> / <det^gamma(Wb Wb^dagger)>.
/// The ratio normalization makes E(0) = 1 exactly. Test oracle for p <= 6.
inline McEstimate gap_dual_mc(const EnsembleParams& params, const std::vector<double>& lambdas, double t,
                              std::size_t samples, std::uint64_t seed, unsigned threads = 0) {
    if (t < 0.0) throw DomainError("gap_dual_mc: t must be non-negative");
    if (params.p > 6) throw ContractError("gap_dual_mc: p must be <= 6 for the dual oracle");
    if (samples < 2) throw ContractError("gap_dual_mc: need at least 2 samples");
    const int gamma = params.gamma();
    const int nbar = params.p + 2 - params.beta;
    McConfig cfg{EnsembleParams{params.beta, params.p, nbar}, lambdas, samples, seed, threads};
    const detail::Sampler sampler(cfg);
    std::vector<LogSignedValue> num(samples), den(samples);
    const bool complex = params.beta == 2;
    auto one = [&]<typename Scalar>(std::size_t s) {
        GaussianStream g(seed, s);
        const auto a = detail::gram_full(sampler.draw<Scalar>(g, static_cast<std::size_t>(nbar)));
        den[s] = detail::hermitian_det(a).pow(gamma);
        num[s] = t == 0.0 ? den[s] : detail::hermitian_det(detail::shifted(a, t)).pow(gamma);
    };
    parallel_for(samples, resolve_thread_count(threads), [&](std::size_t s) {
        if (complex)
            one.template operator()<std::complex<double>>(s);
        else
            one.template operator()<double>(s);
    });
    double trace_inv = 0.0;
    for (double l : lambdas) trace_inv += 1.0 / l;
    McEstimate r = detail::ratio_estimate(num, den);
    const double damp = std::exp(-params.beta * t * trace_inv / 2.0);
    return {damp * r.value, damp * r.stderr_};
}

struct DualityResult {
    double lhs = 0.0;
    double rhs = 0.0;
    double lhs_stderr = 0.0;
    double rhs_stderr = 0.0;
    double pooled_stderr = 0.0;
};

/// Two-sided Monte Carlo check of
///   <det^m(W W^dagger + z) / det^l(W W^dagger)>_{p x n}  ~  <det^m(Wh Wh^dagger + z)>_{p x nh}
/// with nh = n - 2l / beta, both sides normalized by their z = 0 value. The same
/// Philox streams feed both sides, so l = 0 reproduces the left side exactly.
inline DualityResult duality_check(int beta, int p, int n, int l, int m, double z, const std::vector<double>& lambdas,
                                   std::size_t samples, std::uint64_t seed, unsigned threads = 0) {
    if (p > 3) throw ContractError("duality_check: p must be <= 3");
    if (l < 0 || m < 0) throw ContractError("duality_check: l and m must be non-negative");
    if ((2 * l) % beta != 0) throw ContractError("duality_check: 2l/beta must be an integer");
    const int nhat = n - 2 * l / beta;
    if (nhat < p) throw ContractError("duality_check: n - 2l/beta must be >= p");
    if (samples < 2) throw ContractError("duality_check: need at least 2 samples");
    const EnsembleParams full = EnsembleParams::make(beta, p, n);
    const EnsembleParams reduced = EnsembleParams::make(beta, p, nhat);

    auto side = [&](const EnsembleParams& ps, int det_power_den) {
        McConfig cfg{ps, lambdas, samples, seed, threads};
        const detail::Sampler sampler(cfg);
        std::vector<LogSignedValue> num(samples), den(samples);
        auto one = [&]<typename Scalar>(std::size_t s) {
            GaussianStream g(seed, s);
            const auto a = detail::gram_full(sampler.draw<Scalar>(g, static_cast<std::size_t>(ps.n)));
            const LogSignedValue d0 = detail::hermitian_det(a);
            const LogSignedValue dz = z == 0.0 ? d0 : detail::hermitian_det(detail::shifted(a, z));
            const LogSignedValue inv = d0.pow(det_power_den);
            num[s] = dz.pow(m) / inv;
            den[s] = d0.pow(m) / inv;
        };
        parallel_for(samples, resolve_thread_count(threads), [&](std::size_t s) {
            if (beta == 2)
                one.template operator()<std::complex<double>>(s);
            else
                one.template operator()<double>(s);
        });
        return detail::ratio_estimate(num, den);
    };
    const McEstimate left = side(full, l);
    const McEstimate right = side(reduced, 0);
    return {left.value, right.value, left.stderr_, right.stderr_,
            std::sqrt(left.stderr_ * left.stderr_ + right.stderr_ * right.stderr_)};
}

/// sup_t |S_emp(t) - S_model(t)| over the order statistics of `sorted_draws`,
/// checking both sides of every jump of the empirical survival function.
inline double ks_distance(const std::vector<double>& sorted_draws, const std::function<double(double)>& model_survival) {
    if (sorted_draws.empty()) throw ContractError("ks_distance: no draws");
    const double n = static_cast<double>(sorted_draws.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted_draws.size(); ++i) {
        const double s = model_survival(sorted_draws[i]);
        const double before = 1.0 - static_cast<double>(i) / n;
        const double after = 1.0 - static_cast<double>(i + 1) / n;
        d = std::max({d, std::abs(before - s), std::abs(after - s)});
    }
    return d;
}

inline double ks_distance(const McRun& run, const std::function<double(double)>& model_survival) {
    return ks_distance(run.draws, model_survival);
}

/// Two-sample Kolmogorov-Smirnov statistic of two ascending samples.
inline double ks_two_sample(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) throw ContractError("ks_two_sample: empty sample");
    std::size_t i = 0, j = 0;
    double d = 0.0;
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

}  // namespace wishart_edge
