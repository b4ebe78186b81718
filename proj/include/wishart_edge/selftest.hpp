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

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "asymptotic.hpp"
#include "cli_io.hpp"
#include "exact_kernels.hpp"
#include "linalg.hpp"
#include "montecarlo.hpp"
#include "special_functions.hpp"
#include "symfun.hpp"

namespace wishart_edge {

struct CheckResult {
    std::string module;
    std::string name;
    bool pass = false;
    std::string detail;
};

/// Eigenvalues used for the exact-vs-sampling comparisons at p = 10.
inline const std::vector<double>& reference_spectrum() {
    static const std::vector<double> s{0.6, 1.2, 6.7, 9.3, 10.5, 15.5, 17.2, 20.25, 30.1, 35.4};
    return s;
}

/// Adaptive Gauss-Kronrod over [0, upper] on doubling subintervals.
inline double integrate_density(const std::function<double(double)>& f, double upper) {
    using boost::math::quadrature::gauss_kronrod;
    double total = 0.0;
    double lo = 0.0;
    for (double hi = upper / 64.0; lo < upper; hi = std::min(upper, hi * 2.0)) {
        total += gauss_kronrod<double, 61>::integrate(f, lo, hi, 8, 1e-11);
        lo = hi;
    }
    return total;
}

/// First t on a doubling ladder where the survival falls below `floor`.
inline double tail_cutoff(const std::function<double(double)>& survival, double start, double floor = 1e-13) {
    double t = start;
    while (survival(t) > floor) t *= 2.0;
    return t;
}

namespace detail {

inline std::string fmt(double x) {
    char b[32];
    std::snprintf(b, sizeof b, "%.3g", x);
    return b;
}

}  // namespace detail

/// Fast invariant suite over every module (a few seconds at desk scale).
inline std::vector<CheckResult> run_selftest() {
    std::vector<CheckResult> out;
    auto check = [&](std::string module, std::string name, const std::function<std::pair<bool, std::string>()>& fn) {
        CheckResult r{std::move(module), std::move(name), false, {}};
        try {
            auto [ok, d] = fn();
            r.pass = ok;
            r.detail = std::move(d);
        } catch (const std::exception& e) {
            r.detail = std::string("threw: ") + e.what();
        }
        out.push_back(std::move(r));
    };
    std::mt19937_64 rng(20260415);
    std::normal_distribution<double> normal;

    check("special_functions", "log_factorial increments", [] {
        double worst = 0.0;
        for (int m = 1; m <= 170; ++m)
            worst = std::max(worst, std::abs(log_factorial<double>(m) - log_factorial<double>(m - 1) - std::log(m)));
        return std::pair{worst <= 1e-12, "max error " + detail::fmt(worst)};
    });
    check("special_functions", "bessel recurrence and reflection", [] {
        double worst = 0.0;
        bool reflect = true;
        for (int m = 1; m <= 20; ++m)
            for (double x = 0.5; x <= 20.0; x += 0.5) {
                const double lhs = bessel_i(m - 1, x) - bessel_i(m + 1, x);
                const double rhs = 2.0 * m / x * bessel_i(m, x);
                worst = std::max(worst, std::abs(lhs - rhs) / std::abs(rhs));
                reflect = reflect && bessel_i(-m, x) == bessel_i(m, x);
            }
        return std::pair{reflect && worst <= 1e-10, "max relative error " + detail::fmt(worst)};
    });

    check("linalg", "pf^2 = det (dims 2..12)", [&] {
        double worst = 0.0;
        for (int n = 2; n <= 12; n += 2) {
            RealMatrix a(n, n);
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j) {
                    a(i, j) = normal(rng);
                    a(j, i) = -a(i, j);
                }
            const auto pf = pfaffian(a);
            const auto det = log_det(a);
            worst = std::max(worst, std::abs(2.0 * pf.log_abs - det.log_abs) + (det.sign == 1 ? 0.0 : 1.0));
        }
        return std::pair{worst <= 1e-9, "max log mismatch " + detail::fmt(worst)};
    });
    check("linalg", "eigenvalues of Q D Q^T", [&] {
        double worst = 0.0;
        for (int n : {3, 8, 20}) {
            RealMatrix g(n, n);
            for (auto& x : g.data()) x = normal(rng);
            // Q from Gram-Schmidt on g's columns
            RealMatrix q = g;
            for (int j = 0; j < n; ++j) {
                for (int k = 0; k < j; ++k) {
                    double dot = 0.0;
                    for (int i = 0; i < n; ++i) dot += q(i, j) * q(i, k);
                    for (int i = 0; i < n; ++i) q(i, j) -= dot * q(i, k);
                }
                double nrm = 0.0;
                for (int i = 0; i < n; ++i) nrm += q(i, j) * q(i, j);
                for (int i = 0; i < n; ++i) q(i, j) /= std::sqrt(nrm);
            }
            std::vector<double> d(n);
            for (int i = 0; i < n; ++i) d[i] = 0.5 + i;
            const RealMatrix m = multiply(multiply(q, RealMatrix::diagonal(d)), adjoint(q));
            worst = std::max(worst, std::abs(smallest_eigenvalue(m) - 0.5));
        }
        return std::pair{worst <= 1e-9, "max error " + detail::fmt(worst)};
    });
    check("linalg", "cholesky reconstruction", [&] {
        RealMatrix g(6, 6);
        for (auto& x : g.data()) x = normal(rng);
        RealMatrix c = multiply(g, adjoint(g));
        for (int i = 0; i < 6; ++i) c(i, i) += 1.0;
        const RealMatrix l = cholesky(c);
        const RealMatrix back = multiply(l, adjoint(l));
        double num = 0.0, den = 0.0;
        for (std::size_t k = 0; k < c.data().size(); ++k) {
            num += std::pow(back.data()[k] - c.data()[k], 2);
            den += std::pow(c.data()[k], 2);
        }
        const double rel = std::sqrt(num / den);
        return std::pair{rel <= 1e-12, "relative Frobenius error " + detail::fmt(rel)};
    });

    check("symfun", "e_k against subset products", [] {
        const auto& lam = reference_spectrum();
        const auto s = build_spectrum(lam);
        std::vector<double> brute(lam.size() + 1, 0.0);
        for (unsigned mask = 0; mask < (1u << lam.size()); ++mask) {
            double prod = 1.0;
            for (std::size_t i = 0; i < lam.size(); ++i)
                if (mask & (1u << i)) prod *= lam[i];
            brute[static_cast<std::size_t>(std::popcount(mask))] += prod;
        }
        double worst = 0.0;
        for (std::size_t k = 0; k < brute.size(); ++k)
            worst = std::max(worst, std::abs(s.e[k].value() - brute[k]) / brute[k]);
        return std::pair{worst <= 1e-12, "max relative error " + detail::fmt(worst)};
    });

    check("exact_kernels", "single-eigenvalue closed forms", [] {
        double worst = 0.0;
        const double lam = 1.7;
        const auto sp = build_spectrum(std::vector<double>{lam});
        const ExactGapModel<double> b2n2(EnsembleParams::make(2, 1, 2), sp), b2n3(EnsembleParams::make(2, 1, 3), sp),
            b1n2(EnsembleParams::make(1, 1, 2), sp), b1n4(EnsembleParams::make(1, 1, 4), sp);
        for (double t = 0.0; t <= 20.0 * lam; t += lam / 4.0) {
            const double x = t / lam;
            const auto rel = [](double a, double b) { return std::abs(a - b) / std::abs(b); };
            worst = std::max({worst, rel(b2n2.gap(t), std::exp(-x) * (1 + x)),
                              rel(b2n3.gap(t), std::exp(-x) * (1 + x + x * x / 2)),
                              rel(b1n2.gap(t), std::exp(-x / 2)),
                              rel(b1n4.gap(t), std::exp(-x / 2) * (1 + x / 2))});
        }
        return std::pair{worst <= 1e-10, "max relative error " + detail::fmt(worst)};
    });
    check("exact_kernels", "HS and SB kernels agree", [&] {
        double worst = 0.0;
        std::uniform_real_distribution<double> unif(0.3, 5.0);
        for (int beta : {1, 2})
            for (int gamma = 1; gamma <= 3; ++gamma) {
                const int p = 6;
                const int n = beta == 2 ? p + gamma : p + 2 * gamma + 1;
                std::vector<double> lam(p);
                for (auto& l : lam) l = unif(rng);
                const auto sp = build_spectrum(lam);
                const ExactGapModel<double> hs(EnsembleParams::make(beta, p, n), sp, KernelVariant::hubbard_stratonovich);
                const ExactGapModel<double> sb(EnsembleParams::make(beta, p, n), sp, KernelVariant::superbosonization);
                for (double t = 0.05; t < 5.0; t += 0.25) {
                    const auto a = hs.log_gap(t), b = sb.log_gap(t);
                    worst = std::max(worst, std::abs(a.log_abs - b.log_abs) + (a.sign == b.sign ? 0.0 : 1.0));
                }
            }
        return std::pair{worst <= 1e-10, "max log mismatch " + detail::fmt(worst)};
    });
    check("exact_kernels", "density is -dE/dt", [] {
        double worst = 0.0;
        const auto sp = build_spectrum(reference_spectrum());
        for (int beta : {1, 2}) {
            const ExactGapModel<double> m(EnsembleParams::make(beta, 10, 15), sp);
            for (double t = 0.2; t <= 6.0; t += 0.4) {
                const double h = 1e-4 * t;
                const double fd = -(m.gap(t + h) - m.gap(t - h)) / (2 * h);
                const double pm = m.pmin(t);
                if (pm > 1e-4) worst = std::max(worst, std::abs(fd - pm) / pm);
            }
        }
        return std::pair{worst <= 1e-5, "max relative error " + detail::fmt(worst)};
    });
    check("exact_kernels", "density integrates to one", [] {
        const auto sp = build_spectrum(reference_spectrum());
        double worst = 0.0;
        for (int beta : {1, 2}) {
            const ExactGapModel<double> m(EnsembleParams::make(beta, 10, 13), sp);
            const double upper = tail_cutoff([&](double t) { return m.gap(t); }, 1.0);
            worst = std::max(worst, std::abs(integrate_density([&](double t) { return m.pmin(t); }, upper) - 1.0));
        }
        return std::pair{worst <= 1e-6, "max deviation " + detail::fmt(worst)};
    });

    check("asymptotic", "micro density integrates to one", [] {
        double worst = 0.0;
        for (int beta : {1, 2})
            for (int gamma : {0, 1, 2}) {
                const MicroGapModel<double> m(MicroParams::make(beta, gamma));
                const double upper = tail_cutoff([&](double u) { return m.gap(u); }, 8.0);
                worst = std::max(worst, std::abs(integrate_density([&](double u) { return m.pmin(u); }, upper) - 1.0));
            }
        return std::pair{worst <= 1e-6, "max deviation " + detail::fmt(worst)};
    });
    check("asymptotic", "micro gap monotone in [0, 1]", [] {
        bool ok = true;
        for (int beta : {1, 2})
            for (int gamma : {1, 2, 3}) {
                const MicroGapModel<double> m(MicroParams::make(beta, gamma));
                double prev = 1.0;
                for (double u = 0.0; u <= 60.0; u += 0.25) {
                    const double g = m.gap(u);
                    ok = ok && g <= prev + 1e-12 && g >= 0.0 && g <= 1.0;
                    prev = g;
                }
            }
        return std::pair{ok, std::string(ok ? "" : "violation found")};
    });

    check("montecarlo", "chi-square(4) sampler", [] {
        const McRun run = sample_smallest({EnsembleParams::make(1, 1, 4), std::vector<double>{1.0}, 100000, 7, 0});
        const double d = ks_distance(run, [](double t) { return std::exp(-t / 2) * (1 + t / 2); });
        return std::pair{d <= 0.006, "KS " + detail::fmt(d)};
    });
    check("montecarlo", "deterministic across thread counts", [] {
        McConfig a{EnsembleParams::make(2, 4, 6), std::vector<double>{1, 2, 3, 4}, 2000, 11, 1};
        McConfig b = a;
        b.threads = 3;
        return std::pair{sample_smallest(a).draws == sample_smallest(b).draws, std::string()};
    });
    check("montecarlo", "dual estimator matches exact", [] {
        const auto params = EnsembleParams::make(2, 2, 3);
        const std::vector<double> lam{1.0, 2.0};
        const McEstimate est = gap_dual_mc(params, lam, 0.5, 200000, 5);
        const double exact = gap_exact(params, build_spectrum(lam), 0.5);
        const double z = std::abs(est.value - exact) / est.stderr_;
        return std::pair{z <= 3.0 && gap_dual_mc(params, lam, 0.0, 100, 5).value == 1.0,
                         detail::fmt(z) + " standard errors"};
    });
    check("montecarlo", "duality at l = 0 is exact", [] {
        const DualityResult r = duality_check(2, 2, 4, 0, 1, 0.7, {1.0, 2.0}, 5000, 9);
        return std::pair{r.lhs == r.rhs, std::string()};
    });

    check("cli_io", "JSON curve round trip", [] {
        Curve c{CurveKind::micro_gap, ScaleKind::microscopic_u, {{0.0, 1.0}, {0.1, 0.987654321012345678}}, {{"beta", 2}}};
        const std::string once = format_curve(c, CurveFormat::json);
        return std::pair{format_curve(parse_curve_json(once), CurveFormat::json) == once, std::string()};
    });
    check("cli_io", "range syntax", [] {
        const auto g = parse_range("0:60:400");
        return std::pair{g.size() == 400 && g.front() == 0.0 && g.back() == 60.0, std::string()};
    });
    return out;
}

}  // namespace wishart_edge
