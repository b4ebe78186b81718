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
#include <random>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "catch_amalgamated.hpp"

#include "wishart_edge/asymptotic.hpp"
#include "wishart_edge/exact_kernels.hpp"
#include "wishart_edge/selftest.hpp"

using namespace wishart_edge;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("MicroParams", "[asymptotic]") {
    CHECK(MicroParams::make(2, 2).kappa_prime == 3);
    CHECK(MicroParams::make(1, 2).kappa_prime == 6);
    CHECK(MicroParams::make(1, 2).kernel_dim() == 4);
    CHECK_THROWS_AS(MicroParams::make(4, 1), DomainError);
    CHECK_THROWS_AS(MicroParams::make(2, -1), DomainError);
}

TEST_CASE("local scale", "[asymptotic]") {
    const auto ones = build_spectrum(std::vector<double>(10, 1.0));
    const LocalScale a = local_scale(ones, 10);
    CHECK(a.eta == 1.0);
    CHECK_THAT(a.u_of_t(0.25), WithinRel(10.0, 1e-15));

    const LocalScale b = local_scale(build_spectrum(std::vector<double>{1, 2, 4}), 3);
    CHECK_THAT(b.eta, WithinRel(0.5833333333333334, 1e-15));

    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 100.0);
    for (int i = 0; i < 100; ++i) {
        const double x = u(rng);
        CHECK_THAT(b.u_of_t(b.t_of_u(x)), WithinRel(x, 1e-15));
    }
    CHECK_THROWS_AS(local_scale(ones, 9), ContractError);
}

TEST_CASE("micro_gap normalization and gamma = 0", "[asymptotic]") {
    for (int beta : {1, 2})
        for (int gamma = 0; gamma <= 4; ++gamma) CHECK(micro_gap(MicroParams::make(beta, gamma), 0.0) == 1.0);
    for (double u : {0.5, 3.0, 20.0}) {
        CHECK_THAT(micro_gap(MicroParams::make(2, 0), u), WithinRel(std::exp(-u / 4), 1e-15));
        CHECK_THAT(micro_gap(MicroParams::make(1, 0), u), WithinRel(std::exp(-u / 8), 1e-15));
        CHECK_THAT(micro_pmin(MicroParams::make(2, 0), u), WithinRel(std::exp(-u / 4) / 4, 1e-15));
    }
    CHECK_THROWS_AS(micro_gap(MicroParams::make(2, 1), -1.0), DomainError);
    CHECK_THROWS_AS(micro_pmin(MicroParams::make(2, 1), 0.0), DomainError);
}

TEST_CASE("micro_gap matches the Toeplitz Bessel determinant for beta = 2", "[asymptotic]") {
    // independent form e^{-u/4} det[I_{j-k}(sqrt u)]_{gamma x gamma}
    for (int gamma = 1; gamma <= 4; ++gamma)
        for (double u : {0.2, 1.0, 4.0, 12.0, 30.0}) {
            RealMatrix m(gamma, gamma);
            for (int j = 0; j < gamma; ++j)
                for (int k = 0; k < gamma; ++k) m(j, k) = bessel_i(j - k, std::sqrt(u));
            const double expect = std::exp(-u / 4) * log_det(m).value();
            INFO("gamma = " << gamma << " u = " << u);
            CHECK_THAT(micro_gap(MicroParams::make(2, gamma), u), WithinRel(expect, 1e-11));
        }
}

TEST_CASE("micro_gap is the large-p limit of the exact gap", "[asymptotic]") {
    const int p = 400;
    const auto sp = build_spectrum(std::vector<double>(p, 1.0));
    const double u = 4.0;
    const double t = u / (4.0 * p);
    CHECK_THAT(micro_gap(MicroParams::make(2, 1), u), WithinRel(gap_exact(EnsembleParams::make(2, p, p + 1), sp, t), 0.01));
    // real case, gamma = 1 needs n - p = 3
    CHECK_THAT(micro_gap(MicroParams::make(1, 1), u), WithinRel(gap_exact(EnsembleParams::make(1, p, p + 3), sp, t), 0.01));
    CHECK_THAT(micro_gap(MicroParams::make(1, 2), 10.0),
               WithinRel(gap_exact(EnsembleParams::make(1, p, p + 5), sp, 10.0 / (4.0 * p)), 0.01));
}

TEST_CASE("micro density is -d/du of the micro gap", "[asymptotic]") {
    using mp = boost::multiprecision::cpp_bin_float_50;
    for (int beta : {1, 2})
        for (int gamma : {1, 2, 3}) {
            const MicroGapModel<mp> m(MicroParams::make(beta, gamma));
            for (double ud : {0.3, 1.0, 3.0, 8.0, 20.0, 45.0}) {
                const mp u = ud, h = mp(1e-5) * u;
                const mp fd = -(m.gap(u + h) - m.gap(u - h)) / (2 * h);
                const mp pm = m.pmin(u);
                if (pm <= mp(1e-8)) continue;
                INFO("beta = " << beta << " gamma = " << gamma << " u = " << ud);
                CHECK(static_cast<double>(abs(fd - pm) / pm) <= 1e-6);
            }
        }
}

TEST_CASE("micro_pmin integrates to one", "[asymptotic]") {
    for (int beta : {1, 2})
        for (int gamma = 0; gamma <= 3; ++gamma) {
            const MicroGapModel<double> m(MicroParams::make(beta, gamma));
            const double upper = tail_cutoff([&](double u) { return m.gap(u); }, 8.0, 1e-12);
            INFO("beta = " << beta << " gamma = " << gamma);
            CHECK_THAT(integrate_density([&](double u) { return m.pmin(u); }, upper), WithinAbs(1.0, 1e-6));
        }
}

TEST_CASE("micro_gap is non-increasing and within [0, 1]", "[asymptotic]") {
    for (int beta : {1, 2})
        for (int gamma = 1; gamma <= 4; ++gamma) {
            const MicroGapModel<double> m(MicroParams::make(beta, gamma));
            double prev = 1.0;
            for (double u = 0.0; u <= 100.0; u += 0.2) {
                const double g = m.gap(u);
                CHECK(g >= 0.0);
                CHECK(g <= prev + 1e-13);
                prev = g;
            }
        }
}

TEST_CASE("L^(l) differs from L^(0) only in row l", "[asymptotic]") {
    const MicroParams mp = MicroParams::make(1, 2);
    const double u = 2.7;
    for (int l = 1; l <= mp.kernel_dim(); ++l)
        for (int i = 1; i <= mp.kernel_dim(); ++i)
            for (int j = 1; j <= mp.kernel_dim(); ++j) {
                const auto a = micro_kernel_entry(mp, l, i, j, u);
                const auto b = micro_kernel_entry(mp, 0, i, j, u);
                if (i != l) {
                    CHECK(a.sign == b.sign);
                    CHECK(a.log_abs == b.log_abs);
                } else if (j != i) {
                    // Bessel order shifted by one
                    const int order = mp.kappa_prime + 1 - i - j;
                    const double expect = (j - i) * std::pow(std::sqrt(u) / 2, i + j - mp.kappa_prime) * bessel_i(order, std::sqrt(u));
                    CHECK_THAT(a.value(), WithinRel(expect, 1e-13));
                }
            }
}

TEST_CASE("density scale factor links exact and micro densities", "[asymptotic]") {
    std::vector<double> lam(400);
    for (std::size_t i = 0; i < lam.size(); ++i) lam[i] = 0.5 + 1.5 * i / 399.0;
    const auto sp = build_spectrum(lam);
    const ExactGapModel<double> exact(EnsembleParams::make(2, 400, 402), sp);
    const LocalScale ls = local_scale(sp, 400);
    const MicroGapModel<double> micro(MicroParams::make(2, 2));
    for (double u : {2.0, 6.0, 12.0}) {
        const double t = ls.t_of_u(u);
        CHECK_THAT(exact.pmin(t) * ls.jacobian(), WithinRel(micro.pmin(u), 0.02));
    }
}
