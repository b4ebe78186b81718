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

#include <cstdint>
#include <exception>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "asymptotic.hpp"
#include "cli_io.hpp"
#include "errors.hpp"
#include "exact_kernels.hpp"
#include "montecarlo.hpp"
#include "selftest.hpp"

namespace wishart_edge {

namespace cli_detail {

struct Options {
    int beta = 2;
    int p = 0;
    int n = 0;
    int gamma = 0;
    std::string lambda;
    std::string spectrum_file;
    std::string matrix_file;
    std::string grid;
    std::string variant = "hs";
    std::string quantity = "gap";
    std::string scale = "raw";
    std::string format = "csv";
    std::string out;
    std::size_t samples = 50000;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    double ks_tol = 0.01;
};

inline CorrelationSpectrum<double> load_spectrum(const Options& o) {
    if (!o.lambda.empty() && !o.spectrum_file.empty())
        throw ContractError("give either --lambda or --spectrum-file, not both");
    if (!o.spectrum_file.empty()) {
        return build_spectrum(
            spectrum_values_from_text(read_text_file(o.spectrum_file), "'" + o.spectrum_file + "'"));
    }
    if (!o.lambda.empty()) return build_spectrum(parse_number_list(o.lambda, "--lambda"));
    // Unspecified: the uncorrelated ensemble C = 1.
    if (o.p < 1) throw ContractError("--p is required when no spectrum is given");
    return build_spectrum(std::vector<double>(static_cast<std::size_t>(o.p), 1.0));
}

inline EnsembleParams resolve_params(const Options& o, const CorrelationSpectrum<double>& s) {
    const int p = o.p > 0 ? o.p : s.p();
    if (p != s.p())
        throw ContractError("--p " + std::to_string(o.p) + " does not match the " + std::to_string(s.p()) +
                            " eigenvalues given");
    if (o.n < 1) throw ContractError("--n is required");
    return EnsembleParams::make(o.beta, p, o.n);
}

inline CurveFormat parse_format(const std::string& f) {
    if (f == "csv") return CurveFormat::csv;
    if (f == "json") return CurveFormat::json;
    throw ContractError("unknown format '" + f + "'");
}

inline nlohmann::json params_meta(const EnsembleParams& p, const CorrelationSpectrum<double>& s) {
    return {{"beta", p.beta},
            {"p", p.p},
            {"n", p.n},
            {"gamma", p.has_integer_gamma() ? nlohmann::json(p.gamma()) : nlohmann::json(nullptr)},
            {"spectrum_hash", spectrum_hash(s.lambdas)},
            {"tool_version", std::string(kToolVersion)}};
}

/// -dE/dt at the origin: the density vanishes there unless gamma = 0.
inline double exact_pmin_at_origin(const EnsembleParams& p, const CorrelationSpectrum<double>& s) {
    return p.gamma() == 0 ? p.beta * s.trace_inv / 2.0 : 0.0;
}

inline std::vector<std::pair<double, double>> evaluate(const std::vector<double>& grid, unsigned threads,
                                                       const std::function<double(double)>& f) {
    std::vector<std::pair<double, double>> pts(grid.size());
    parallel_for(grid.size(), resolve_thread_count(threads), [&](std::size_t i) { pts[i] = {grid[i], f(grid[i])}; });
    return pts;
}

inline int run_exact(const Options& o, bool density, std::ostream& out) {
    const auto spectrum = load_spectrum(o);
    const auto params = resolve_params(o, spectrum);
    KernelVariant variant;
    if (o.variant == "hs")
        variant = KernelVariant::hubbard_stratonovich;
    else if (o.variant == "sb")
        variant = KernelVariant::superbosonization;
    else
        throw ContractError("unknown --variant '" + o.variant + "' (hs or sb)");
    const ExactGapModel<double> model(params, spectrum, variant);
    const auto grid = parse_range(o.grid);
    for (double t : grid)
        if (t < 0.0) throw DomainError("t must be non-negative, got " + format_number(t));
    Curve c{density ? CurveKind::pmin_exact : CurveKind::gap_exact, ScaleKind::raw_t, {}, params_meta(params, spectrum)};
    c.meta["variant"] = o.variant;
    c.points = evaluate(grid, o.threads, [&](double t) {
        if (!density) return model.gap(t);
        return t == 0.0 ? exact_pmin_at_origin(params, spectrum) : model.pmin(t);
    });
    write_curve(c, parse_format(o.format), o.out, out);
    return 0;
}

inline int run_micro(const Options& o, std::ostream& out) {
    const MicroParams mp = MicroParams::make(o.beta, o.gamma);
    const MicroGapModel<double> model(mp);
    bool density;
    if (o.quantity == "gap")
        density = false;
    else if (o.quantity == "pmin")
        density = true;
    else
        throw ContractError("unknown --quantity '" + o.quantity + "' (gap or pmin)");
    const auto grid = parse_range(o.grid);
    for (double u : grid)
        if (u < 0.0) throw DomainError("u must be non-negative, got " + format_number(u));
    Curve c{density ? CurveKind::micro_pmin : CurveKind::micro_gap, ScaleKind::microscopic_u, {},
            {{"beta", mp.beta}, {"gamma", mp.gamma}, {"tool_version", std::string(kToolVersion)}}};
    c.points = evaluate(grid, o.threads, [&](double u) {
        if (!density) return model.gap(u);
        if (u == 0.0) return mp.gamma == 0 ? mp.beta / 8.0 : 0.0;
        return model.pmin(u);
    });
    write_curve(c, parse_format(o.format), o.out, out);
    return 0;
}

inline McRun run_sampler(const Options& o, EnsembleParams& params, CorrelationSpectrum<double>& spectrum) {
    spectrum = load_spectrum(o);
    params = resolve_params(o, spectrum);
    if (o.samples < 1) throw ContractError("--samples must be >= 1");
    return sample_smallest({params, spectrum.lambdas, o.samples, o.seed, o.threads});
}

inline int run_simulate(const Options& o, std::ostream& out) {
    EnsembleParams params{};
    CorrelationSpectrum<double> spectrum;
    const McRun run = run_sampler(o, params, spectrum);
    Curve c{CurveKind::mc_ecdf, ScaleKind::raw_t, {}, params_meta(params, spectrum)};
    c.meta["seed"] = o.seed;
    c.meta["samples"] = o.samples;
    if (!o.grid.empty()) {
        for (double t : parse_range(o.grid)) c.points.emplace_back(t, run.ecdf(t));
    } else {
        // one point per distinct draw, carrying the ECDF just after it
        for (std::size_t i = 0; i < run.draws.size(); ++i) {
            if (i + 1 < run.draws.size() && run.draws[i + 1] == run.draws[i]) continue;
            c.points.emplace_back(run.draws[i], static_cast<double>(i + 1) / static_cast<double>(run.draws.size()));
        }
    }
    write_curve(c, parse_format(o.format), o.out, out);
    return 0;
}

inline int run_compare(const Options& o, std::ostream& out) {
    EnsembleParams params{};
    CorrelationSpectrum<double> spectrum;
    McRun run = run_sampler(o, params, spectrum);
    double ks = 0.0;
    if (o.scale == "raw") {
        const ExactGapModel<double> model(params, spectrum);
        ks = ks_distance(run, [&](double t) { return model.gap(t); });
    } else if (o.scale == "micro") {
        const MicroGapModel<double> model(MicroParams::make(params.beta, params.gamma()));
        const LocalScale ls = local_scale(spectrum, params.p);
        for (double& d : run.draws) d = ls.u_of_t(d);
        ks = ks_distance(run, [&](double u) { return model.gap(u); });
    } else {
        throw ContractError("unknown --scale '" + o.scale + "' (raw or micro)");
    }
    const bool pass = ks <= o.ks_tol;
    nlohmann::json report = params_meta(params, spectrum);
    report["seed"] = o.seed;
    report["samples"] = o.samples;
    report["scale"] = o.scale;
    report["ks_distance"] = ks;
    report["ks_tolerance"] = o.ks_tol;
    report["pass"] = pass;
    const std::string text = o.format == "json" ? report.dump() + "\n"
                                                : "compare: ks_distance=" + format_number(ks) +
                                                      " tolerance=" + format_number(o.ks_tol) +
                                                      (pass ? " PASS\n" : " FAIL\n");
    if (o.out.empty() || o.out == "-") {
        out << text;
    } else {
        std::ofstream f(o.out, std::ios::binary | std::ios::trunc);
        if (!(f << text)) throw ContractError("cannot write '" + o.out + "'");
    }
    return pass ? 0 : 2;
}

inline int run_spectrum(const Options& o, std::ostream& out) {
    Options copy = o;
    if (!o.matrix_file.empty()) {
        if (!o.spectrum_file.empty() || !o.lambda.empty())
            throw ContractError("give only one of --matrix, --spectrum-file, --lambda");
        copy.spectrum_file = o.matrix_file;
    }
    const auto s = load_spectrum(copy);
    std::vector<double> sorted = s.lambdas;
    std::sort(sorted.begin(), sorted.end());
    nlohmann::json j = {{"eigenvalues", sorted},
                        {"p", s.p()},
                        {"trace_inv", s.trace_inv},
                        {"eta", s.trace_inv / s.p()},
                        {"log_det", s.log_det},
                        {"condition_number", sorted.back() / sorted.front()},
                        {"spectrum_hash", spectrum_hash(s.lambdas)}};
    out << j.dump(2) << "\n";
    return 0;
}

inline int run_selftest_command(std::ostream& out) {
    int failures = 0;
    for (const auto& r : run_selftest()) {
        failures += r.pass ? 0 : 1;
        out << (r.pass ? "PASS " : "FAIL ") << r.module << ": " << r.name;
        if (!r.detail.empty()) out << " (" << r.detail << ")";
        out << "\n";
    }
    out << (failures == 0 ? "selftest: all checks passed\n" : "selftest: " + std::to_string(failures) + " failed\n");
    return failures == 0 ? 0 : 2;
}

}  // namespace cli_detail

/// Entry point of the command-line tool. Exit codes: 0 success, 1 usage or
/// domain error, 2 failed acceptance check (compare, selftest).
inline int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    using cli_detail::Options;
    Options o;
    CLI::App app{"Smallest-eigenvalue statistics of correlated Wishart ensembles", "wishart_edge"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kToolVersion));

    // Required options are checked after parsing so that an unknown flag is
    // reported by name rather than masked by a missing-option error.
    auto add_ensemble = [&](CLI::App* sub) {
        sub->add_option("--beta", o.beta, "Dyson index (1 real, 2 complex)")->check(CLI::IsMember({1, 2}));
        sub->add_option("--p", o.p, "number of variates (defaults to the spectrum length)");
        sub->add_option("--n", o.n, "number of observations (required)");
        sub->add_option("--lambda", o.lambda, "inline eigenvalues of C, e.g. 1,2,3");
        sub->add_option("--spectrum-file", o.spectrum_file, "file with eigenvalues or a full symmetric matrix");
        sub->add_option("--threads", o.threads, "worker threads (0 = auto; WISHART_EDGE_THREADS overrides)");
    };
    auto add_output = [&](CLI::App* sub) {
        sub->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--out", o.out, "output path (default stdout)");
    };

    auto* gap = app.add_subcommand("gap-exact", "exact gap probability E(t)");
    add_ensemble(gap);
    gap->add_option("--t", o.grid, "grid a:b:N (required)");
    gap->add_option("--variant", o.variant, "kernel variant hs or sb")->check(CLI::IsMember({"hs", "sb"}));
    add_output(gap);

    auto* pmin = app.add_subcommand("pmin-exact", "exact smallest-eigenvalue density");
    add_ensemble(pmin);
    pmin->add_option("--t", o.grid, "grid a:b:N (required)");
    add_output(pmin);

    auto* micro = app.add_subcommand("micro", "microscopic-limit gap probability or density");
    micro->add_option("--beta", o.beta, "Dyson index")->check(CLI::IsMember({1, 2}));
    micro->add_option("--gamma", o.gamma, "dual dimension parameter (required)")->check(CLI::NonNegativeNumber);
    micro->add_option("--u", o.grid, "grid a:b:N (required)");
    micro->add_option("--quantity", o.quantity, "gap or pmin")->check(CLI::IsMember({"gap", "pmin"}));
    micro->add_option("--threads", o.threads, "worker threads");
    add_output(micro);

    auto* sim = app.add_subcommand("simulate", "Monte Carlo ECDF of the smallest eigenvalue");
    add_ensemble(sim);
    sim->add_option("--samples", o.samples, "number of matrices");
    sim->add_option("--seed", o.seed, "64-bit seed (default 0)");
    sim->add_option("--t", o.grid, "evaluate the ECDF on grid a:b:N instead of at the draws");
    add_output(sim);

    auto* cmp = app.add_subcommand("compare", "KS distance between sampling and the exact or micro gap");
    add_ensemble(cmp);
    cmp->add_option("--samples", o.samples, "number of matrices");
    cmp->add_option("--seed", o.seed, "64-bit seed (default 0)");
    cmp->add_option("--ks-tol", o.ks_tol, "pass threshold on the KS distance");
    cmp->add_option("--scale", o.scale, "raw (exact E) or micro (draws mapped to u)")
        ->check(CLI::IsMember({"raw", "micro"}));
    cmp->add_option("--format", o.format, "report format: text or json")->check(CLI::IsMember({"text", "json"}));
    cmp->add_option("--out", o.out, "report path (default stdout)");
    o.format = "csv";

    auto* st = app.add_subcommand("selftest", "run the invariant suite of every module");

    auto* spectrum_cmd = app.add_subcommand("spectrum", "eigenvalues and condition number of C");
    spectrum_cmd->add_option("--matrix", o.matrix_file, "file with a full symmetric/Hermitian matrix");
    spectrum_cmd->add_option("--spectrum-file", o.spectrum_file, "file with eigenvalues");
    spectrum_cmd->add_option("--lambda", o.lambda, "inline eigenvalues");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << kToolVersion << "\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        auto require = [](const CLI::App* sub, const char* name) {
            if (sub->count(name) == 0) throw ContractError(std::string(name) + " is required");
        };
        for (auto* sub : {gap, pmin}) {
            if (!*sub) continue;
            require(sub, "--n");
            require(sub, "--t");
        }
        for (auto* sub : {sim, cmp})
            if (*sub) require(sub, "--n");
        if (*micro) {
            require(micro, "--gamma");
            require(micro, "--u");
        }
        if (*gap) return cli_detail::run_exact(o, false, out);
        if (*pmin) return cli_detail::run_exact(o, true, out);
        if (*micro) return cli_detail::run_micro(o, out);
        if (*sim) return cli_detail::run_simulate(o, out);
        if (*cmp) {
            if (o.format == "csv") o.format = "text";
            return cli_detail::run_compare(o, out);
        }
        if (*st) return cli_detail::run_selftest_command(out);
        if (*spectrum_cmd) return cli_detail::run_spectrum(o, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

}  // namespace wishart_edge
