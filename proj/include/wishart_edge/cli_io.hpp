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

#include <charconv>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "errors.hpp"
#include "linalg.hpp"
#include "matrix.hpp"
#include "symfun.hpp"

namespace wishart_edge {

inline constexpr std::string_view kToolVersion = "1.0.0";

enum class CurveKind { gap_exact, pmin_exact, micro_gap, micro_pmin, mc_ecdf };
enum class ScaleKind { raw_t, microscopic_u };
enum class CurveFormat { csv, json };

inline std::string_view to_string(CurveKind k) {
    switch (k) {
        case CurveKind::gap_exact: return "gap_exact";
        case CurveKind::pmin_exact: return "pmin_exact";
        case CurveKind::micro_gap: return "micro_gap";
        case CurveKind::micro_pmin: return "micro_pmin";
        case CurveKind::mc_ecdf: return "mc_ecdf";
    }
    return "unknown";
}

inline std::string_view to_string(ScaleKind s) { return s == ScaleKind::raw_t ? "raw_t" : "microscopic_u"; }

inline CurveKind curve_kind_from_string(std::string_view s) {
    for (CurveKind k : {CurveKind::gap_exact, CurveKind::pmin_exact, CurveKind::micro_gap, CurveKind::micro_pmin,
                        CurveKind::mc_ecdf})
        if (to_string(k) == s) return k;
    throw ContractError("unknown curve kind '" + std::string(s) + "'");
}

inline ScaleKind scale_kind_from_string(std::string_view s) {
    if (s == "raw_t") return ScaleKind::raw_t;
    if (s == "microscopic_u") return ScaleKind::microscopic_u;
    throw ContractError("unknown scale kind '" + std::string(s) + "'");
}

/// A sampled curve: strictly increasing abscissas, finite values.
struct Curve {
    CurveKind kind = CurveKind::gap_exact;
    ScaleKind scale = ScaleKind::raw_t;
    std::vector<std::pair<double, double>> points;
    nlohmann::json meta = nlohmann::json::object();

    void validate() const {
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (!std::isfinite(points[i].first) || !std::isfinite(points[i].second))
                throw NumericError("curve point " + std::to_string(i) + " is not finite");
            if (i > 0 && !(points[i].first > points[i - 1].first))
                throw ContractError("curve abscissas must be strictly increasing (point " + std::to_string(i) + ")");
        }
    }
};

/// 17 significant digits: enough to round-trip any double.
inline std::string format_number(double x) {
    char buf[40];
    const int len = std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf, static_cast<std::size_t>(len));
}

inline std::string format_curve(const Curve& curve, CurveFormat format) {
    curve.validate();
    std::string s;
    if (format == CurveFormat::csv) {
        s = "abscissa,value\n";
        for (const auto& [a, v] : curve.points) s += format_number(a) + "," + format_number(v) + "\n";
        return s;
    }
    // meta goes through nlohmann (sorted keys); points are written by hand so
    // that they carry exactly 17 significant digits like the CSV output.
    s = "{\"meta\":" + curve.meta.dump() + ",\"kind\":\"" + std::string(to_string(curve.kind)) +
        "\",\"scale\":\"" + std::string(to_string(curve.scale)) + "\",\"points\":[";
    for (std::size_t i = 0; i < curve.points.size(); ++i) {
        if (i > 0) s += ",";
        s += "[" + format_number(curve.points[i].first) + "," + format_number(curve.points[i].second) + "]";
    }
    s += "]}\n";
    return s;
}

inline void write_curve(const Curve& curve, CurveFormat format, std::ostream& out) {
    out << format_curve(curve, format);
    if (!out) throw ContractError("failed to write curve");
}

/// Writes to `destination`; "-" or empty means `fallback` (stdout in the CLI).
inline void write_curve(const Curve& curve, CurveFormat format, const std::string& destination,
                        std::ostream& fallback) {
    if (destination.empty() || destination == "-") return write_curve(curve, format, fallback);
    const std::string text = format_curve(curve, format);
    std::ofstream f(destination, std::ios::binary | std::ios::trunc);
    if (!f) throw ContractError("cannot open '" + destination + "' for writing");
    f << text;
    if (!f.flush()) throw ContractError("failed to write '" + destination + "'");
}

inline Curve parse_curve_json(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ContractError(std::string("malformed curve JSON: ") + e.what());
    }
    Curve c;
    try {
        c.kind = curve_kind_from_string(j.at("kind").get<std::string>());
        c.scale = scale_kind_from_string(j.at("scale").get<std::string>());
        c.meta = j.at("meta");
        for (const auto& p : j.at("points")) c.points.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    } catch (const nlohmann::json::exception& e) {
        throw ContractError(std::string("malformed curve JSON: ") + e.what());
    }
    c.validate();
    return c;
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ContractError("cannot open '" + path + "'");
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline double parse_double(std::string_view token, std::string_view origin) {
    token = trim(token);
    if (!token.empty() && token.front() == '+') token.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (token.empty() || ec != std::errc{} || ptr != token.data() + token.size() || !std::isfinite(v))
        throw ContractError("malformed number '" + std::string(token) + "' in " + std::string(origin));
    return v;
}

/// Real or complex token: "1.5", "2-0.5i", "0.3j", "-i".
inline std::complex<double> parse_scalar(std::string_view token, std::string_view origin) {
    token = trim(token);
    if (token.empty() || (token.back() != 'i' && token.back() != 'j')) return parse_double(token, origin);
    const std::string_view body = token.substr(0, token.size() - 1);
    // split at the last sign that is not part of an exponent
    std::size_t split = std::string_view::npos;
    for (std::size_t k = body.size(); k-- > 1;)
        if ((body[k] == '+' || body[k] == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') {
            split = k;
            break;
        }
    auto imag_of = [&](std::string_view s) {
        if (s.empty() || s == "+") return 1.0;
        if (s == "-") return -1.0;
        try {
            return parse_double(s, origin);
        } catch (const ContractError&) {
            throw ContractError("malformed number '" + std::string(token) + "' in " + std::string(origin));
        }
    };
    if (split == std::string_view::npos) return {0.0, imag_of(body)};
    double re = 0.0;
    try {
        re = parse_double(body.substr(0, split), origin);
    } catch (const ContractError&) {
        throw ContractError("malformed number '" + std::string(token) + "' in " + std::string(origin));
    }
    return {re, imag_of(body.substr(split))};
}

/// Rows of tokens separated by commas and/or whitespace; '#' starts a comment.
inline std::vector<std::vector<std::string>> tokenize_rows(std::string_view text) {
    std::vector<std::vector<std::string>> rows;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t end = std::min(text.find('\n', pos), text.size());
        std::string_view line = text.substr(pos, end - pos);
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        std::vector<std::string> row;
        std::string cur;
        for (char ch : line) {
            if (ch == ',' || ch == ' ' || ch == '\t' || ch == '\r') {
                if (!cur.empty()) row.push_back(std::move(cur));
                cur.clear();
            } else {
                cur += ch;
            }
        }
        if (!cur.empty()) row.push_back(std::move(cur));
        if (!row.empty()) rows.push_back(std::move(row));
        pos = end + 1;
    }
    return rows;
}

}  // namespace detail

/// `a:b:N` -> N points evenly spaced on [a, b], endpoints included. A bare
/// number is a one-point grid.
inline std::vector<double> parse_range(std::string_view text) {
    const std::string origin = "range '" + std::string(text) + "'";
    const auto c1 = text.find(':');
    if (c1 == std::string_view::npos) return {detail::parse_double(text, origin)};
    const auto c2 = text.find(':', c1 + 1);
    if (c2 == std::string_view::npos || text.find(':', c2 + 1) != std::string_view::npos)
        throw ContractError("malformed " + origin + ", expected a:b:N");
    const double a = detail::parse_double(text.substr(0, c1), origin);
    const double b = detail::parse_double(text.substr(c1 + 1, c2 - c1 - 1), origin);
    const std::string_view ntok = detail::trim(text.substr(c2 + 1));
    long n = 0;
    const auto [ptr, ec] = std::from_chars(ntok.data(), ntok.data() + ntok.size(), n);
    if (ntok.empty() || ec != std::errc{} || ptr != ntok.data() + ntok.size() || n < 1)
        throw ContractError("malformed point count '" + std::string(ntok) + "' in " + origin);
    if (n == 1) return {a};
    if (!(b > a)) throw ContractError("empty " + origin + ": need a < b");
    std::vector<double> grid(static_cast<std::size_t>(n));
    for (long k = 0; k < n; ++k) grid[static_cast<std::size_t>(k)] = a + (b - a) * static_cast<double>(k) / static_cast<double>(n - 1);
    grid.back() = b;
    return grid;
}

/// Comma/whitespace separated eigenvalue list.
inline std::vector<double> parse_number_list(std::string_view text, std::string_view origin = "inline list") {
    std::vector<double> out;
    for (const auto& row : detail::tokenize_rows(text))
        for (const auto& tok : row) out.push_back(detail::parse_double(tok, origin));
    if (out.empty()) throw ContractError("no values in " + std::string(origin));
    return out;
}

inline constexpr double kMatrixSymmetryTolerance = 1e-10;

/// Eigenvalues of a symmetric / Hermitian matrix given as whitespace-separated
/// rows. Complex entries use the a+bi notation.
inline std::vector<double> matrix_spectrum_from_rows(const std::vector<std::vector<std::string>>& rows,
                                                     std::string_view origin) {
    const std::size_t n = rows.size();
    ComplexMatrix m(n, n);
    bool complex = false;
    for (std::size_t i = 0; i < n; ++i) {
        if (rows[i].size() != n)
            throw ContractError("row " + std::to_string(i + 1) + " of " + std::string(origin) + " has " +
                                std::to_string(rows[i].size()) + " entries, expected " + std::to_string(n));
        for (std::size_t j = 0; j < n; ++j) {
            m(i, j) = detail::parse_scalar(rows[i][j], origin);
            complex = complex || m(i, j).imag() != 0.0;
        }
    }
    if (hermitian_defect(m) > kMatrixSymmetryTolerance)
        throw DomainError("matrix in " + std::string(origin) + " is not symmetric/Hermitian");
    std::vector<double> eig;
    if (complex) {
        eig = hermitian_eigenvalues(m);
    } else {
        RealMatrix r(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) r(i, j) = m(i, j).real();
        eig = hermitian_eigenvalues(r);
    }
    for (double v : eig)
        if (!(v > 0.0)) throw DomainError("C must be positive definite");
    return eig;
}

/// Spectrum text: a square block of several rows is read as a full matrix and
/// diagonalized, anything else as a flat eigenvalue list.
inline std::vector<double> spectrum_values_from_text(std::string_view text, std::string_view origin) {
    const auto rows = detail::tokenize_rows(text);
    if (rows.empty()) throw ContractError("no values in " + std::string(origin));
    const bool matrix = rows.size() > 1 && rows.front().size() > 1;
    if (matrix) return matrix_spectrum_from_rows(rows, origin);
    std::vector<double> out;
    for (const auto& row : rows)
        for (const auto& tok : row) out.push_back(detail::parse_double(tok, origin));
    return out;
}

/// `arg` names an existing file (list or matrix) or is an inline list like "1,2,3".
inline CorrelationSpectrum<double> read_spectrum(const std::string& arg) {
    std::error_code ec;
    if (std::filesystem::is_regular_file(arg, ec))
        return build_spectrum(spectrum_values_from_text(read_text_file(arg), "'" + arg + "'"));
    return build_spectrum(parse_number_list(arg));
}

/// FNV-1a over the 17-digit rendering of the eigenvalues.
inline std::string spectrum_hash(const std::vector<double>& lambdas) {
    std::uint64_t h = 1469598103934665603ull;
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        const std::string s = (i ? "," : "") + format_number(lambdas[i]);
        for (unsigned char ch : s) {
            h ^= ch;
            h *= 1099511628211ull;
        }
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace wishart_edge
