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

#include <cmath>
#include <complex>
#include <cstdlib>
#include <random>

#include "catch_amalgamated.hpp"

#include "wishart_edge/exact_kernels.hpp"
#include "wishart_edge/montecarlo.hpp"

#include "../support/oracles.hpp"

using namespace wishart_edge;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const std::vector<double> kReferenceSpectrum{0.6, 1.2, 6.7, 9.3, 10.5, 15.5, 17.2, 20.25, 30.1, 35.4};

template <typename Scalar>
Matrix<Scalar> rotated(const std::vector<double>& lam, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return testing::rotated_spectrum<Scalar>(lam, rng);
}

}  // namespace

TEST_CASE("chi-square(4) oracle for beta = 1, p = 1", "[montecarlo]") {
    const McRun run = sample_smallest({EnsembleParams::make(1, 1, 4), std::vector<double>{1.0}, 100000, 7, 0});
    CHECK(run.draws.size() == 100000);
    CHECK(std::is_sorted(run.draws.begin(), run.draws.end()));
    CHECK(run.draws.front() >= 0.0);
    CHECK(ks_distance(run, [](double t) { return std::exp(-t / 2) * (1 + t / 2); }) <= 0.006);
}

TEST_CASE("beta = 2, p = 1 oracle", "[montecarlo]") {
    // n = 3: lambda_min / lambda is Gamma(3, 1)
    const double lam = 2.0;
    const McRun run = sample_smallest({EnsembleParams::make(2, 1, 3), std::vector<double>{lam}, 100000, 3, 0});
    const double d = ks_distance(run, [&](double t) {
        const double x = t / lam;
        return std::exp(-x) * (1 + x + x * x / 2);
    });
    CHECK(d <= 0.006);
}

TEST_CASE("sampling is deterministic for any thread count", "[montecarlo]") {
    McConfig cfg{EnsembleParams::make(2, 5, 8), std::vector<double>{1, 2, 3, 4, 5}, 3000, 99, 1};
    const McRun a = sample_smallest(cfg);
    const McRun b = sample_smallest(cfg);
    cfg.threads = 4;
    const McRun c = sample_smallest(cfg);
    CHECK(a.draws == b.draws);
    CHECK(a.draws == c.draws);
    cfg.seed = 100;
    CHECK(sample_smallest(cfg).draws != a.draws);
}

TEST_CASE("thread count resolution honours the environment", "[montecarlo]") {
    ::setenv("WISHART_EDGE_THREADS", "3", 1);
    CHECK(resolve_thread_count(0) == 3);
    CHECK(resolve_thread_count(7) == 3);
    ::setenv("WISHART_EDGE_THREADS", "0", 1);
    CHECK(resolve_thread_count(5) >= 1);
    ::unsetenv("WISHART_EDGE_THREADS");
    CHECK(resolve_thread_count(5) == 5);
    CHECK(resolve_thread_count(0) >= 1);
}

TEST_CASE("direct sampling matches the exact gap probability", "[montecarlo]") {
    const auto sp = build_spectrum(kReferenceSpectrum);
    const auto params = EnsembleParams::make(2, 10, 13);
    const McRun run = sample_smallest({params, kReferenceSpectrum, 50000, 1, 0});
    const ExactGapModel<double> m(params, sp);
    CHECK(ks_distance(run, [&](double t) { return m.gap(t); }) <= 0.01);
}

TEST_CASE("colored sampling reproduces the correlation matrix", "[montecarlo]") {
    const std::vector<double> lam{0.5, 1.0, 3.0};
    for (int beta : {1, 2}) {
        McConfig cfg{EnsembleParams::make(beta, 3, 5), lam, 1, 4, 1};
        const std::size_t samples = 100000;
        std::vector<double> mean(9, 0.0);
        for (std::size_t s = 0; s < samples; ++s) {
            if (beta == 2) {
                const auto a = sample_gram<std::complex<double>>(cfg, s);
                for (std::size_t k = 0; k < 9; ++k) mean[k] += a.data()[k].real() / 5.0;
            } else {
                const auto a = sample_gram<double>(cfg, s);
                for (std::size_t k = 0; k < 9; ++k) mean[k] += a.data()[k] / 5.0;
            }
        }
        const double tol = 5.0 / std::sqrt(double(samples)) * 3.0;
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j)
                CHECK_THAT(mean[i * 3 + j] / samples, WithinAbs(i == j ? lam[i] : 0.0, tol));
    }
}

TEST_CASE("full correlation matrix gives the same statistics as its spectrum", "[montecarlo]") {
    const std::vector<double> lam{0.4, 1.0, 2.5, 6.0};
    const std::size_t n = 50000;
    {
        const auto params = EnsembleParams::make(1, 4, 7);
        const McRun diag = sample_smallest({params, lam, n, 21, 0});
        const McRun full = sample_smallest({params, rotated<double>(lam, 5), n, 22, 0});
        CHECK(ks_two_sample(diag.draws, full.draws) <= 0.01);
    }
    {
        const auto params = EnsembleParams::make(2, 4, 6);
        const McRun diag = sample_smallest({params, lam, n, 23, 0});
        const McRun full = sample_smallest({params, rotated<std::complex<double>>(lam, 6), n, 24, 0});
        CHECK(ks_two_sample(diag.draws, full.draws) <= 0.01);
    }
}

TEST_CASE("sampler configuration errors", "[montecarlo]") {
    CHECK_THROWS_AS(sample_smallest({EnsembleParams::make(2, 2, 3), std::vector<double>{1.0}, 10, 0, 0}), ContractError);
    CHECK_THROWS_AS(sample_smallest({EnsembleParams::make(2, 2, 3), std::vector<double>{1.0, -1.0}, 10, 0, 0}),
                    DomainError);
    CHECK_THROWS_AS(sample_smallest({EnsembleParams::make(2, 1, 3), std::vector<double>{1.0}, 0, 0, 0}), ContractError);
    RealMatrix indefinite(2, 2, 1.0);
    indefinite(0, 1) = indefinite(1, 0) = 2.0;
    CHECK_THROWS_AS(sample_smallest({EnsembleParams::make(1, 2, 3), indefinite, 10, 0, 0}), DomainError);
    CHECK_THROWS_AS(sample_smallest({EnsembleParams::make(1, 2, 3), ComplexMatrix::identity(2), 10, 0, 0}), DomainError);
}

TEST_CASE("dual small-W estimator", "[montecarlo]") {
    const auto p2 = EnsembleParams::make(2, 2, 3);
    CHECK(gap_dual_mc(p2, {1.0, 2.0}, 0.0, 100, 1).value == 1.0);
    {
        const std::vector<double> lam{1.0, 2.0};
        const McEstimate est = gap_dual_mc(p2, lam, 0.5, 2000000, 17);
        const double exact = gap_exact(p2, build_spectrum(lam), 0.5);
        CHECK(std::abs(est.value - exact) <= 3.0 * est.stderr_);
    }
    {
        const auto p1 = EnsembleParams::make(1, 2, 5);
        const std::vector<double> lam{1.0, 1.0};
        const McEstimate est = gap_dual_mc(p1, lam, 0.3, 2000000, 18);
        const double exact = gap_exact(p1, build_spectrum(lam), 0.3);
        CHECK(std::abs(est.value - exact) <= 3.0 * est.stderr_);
    }
    CHECK_THROWS_AS(gap_dual_mc(EnsembleParams::make(2, 7, 8), std::vector<double>(7, 1.0), 0.1, 10, 0), ContractError);
    CHECK_THROWS_AS(gap_dual_mc(p2, {1.0, 2.0}, -0.1, 10, 0), DomainError);
}

TEST_CASE("duality check", "[montecarlo]") {
    const DualityResult same = duality_check(2, 2, 4, 0, 1, 0.7, {1.0, 2.0}, 20000, 1);
    CHECK(same.lhs == same.rhs);
    const DualityResult flat = duality_check(2, 2, 4, 1, 1, 0.0, {1.0, 2.0}, 20000, 1);
    CHECK(flat.lhs == 1.0);
    CHECK(flat.rhs == 1.0);
    const DualityResult r = duality_check(2, 2, 4, 1, 1, 0.7, {1.0, 2.0}, 500000, 2);
    CHECK(std::abs(r.lhs - r.rhs) <= 4.0 * r.pooled_stderr);
    CHECK_THROWS_AS(duality_check(2, 2, 3, 2, 1, 0.7, {1.0, 2.0}, 100, 1), ContractError);
    CHECK_THROWS_AS(duality_check(1, 2, 3, 1, 1, 0.7, {1.0, 2.0}, 100, 1), ContractError);
    CHECK_THROWS_AS(duality_check(2, 4, 6, 1, 1, 0.7, {1, 2, 3, 4}, 100, 1), ContractError);
}

TEST_CASE("ks_distance edge cases", "[montecarlo]") {
    const McRun run = sample_smallest({EnsembleParams::make(2, 2, 4), std::vector<double>{1.0, 3.0}, 5000, 8, 0});
    const double n = double(run.draws.size());
    // the empirical survival just after each draw
    auto empirical = [&](double t) { return run.survival(t); };
    CHECK(ks_distance(run, empirical) <= 1.0 / n + 1e-15);
    const std::vector<double> concentrated(1000, 1.0);
    CHECK_THAT(ks_distance(concentrated, [](double) { return 0.5; }), WithinAbs(0.5, 1e-12));
    CHECK_THROWS_AS(ks_distance(std::vector<double>{}, [](double) { return 0.5; }), ContractError);
    CHECK(run.ecdf(-1.0) == 0.0);
    CHECK(run.ecdf(1e9) == 1.0);
}

TEST_CASE("two-sample KS statistic", "[montecarlo]") {
    const std::vector<double> a{1, 2, 3, 4}, b{1, 2, 3, 4}, c{5, 6, 7, 8};
    CHECK(ks_two_sample(a, b) == 0.0);
    CHECK(ks_two_sample(a, c) == 1.0);
    const std::vector<double> d{2.5};
    CHECK_THAT(ks_two_sample(a, d), WithinAbs(0.5, 1e-15));
}
