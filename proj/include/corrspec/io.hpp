#pragma once

// CSV panel ingestion and plot-ready file emission.
//
// Panel layout: header row of tickers with a leading timestamp column,
// one row per observation. A returns file is identical minus one row.

#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "corrspec/density.hpp"
#include "corrspec/linalg.hpp"

namespace corrspec {

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

inline std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline double parse_cell(const std::string& cell, std::size_t line_no, const std::string& column) {
    const std::string t = trim(cell);
    if (t.empty())
        throw std::runtime_error("csv: missing value at line " + std::to_string(line_no) +
                                 ", column '" + column + "' (gapped series rejected)");
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(t, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos != t.size())
        throw std::runtime_error("csv: non-numeric cell '" + t + "' at line " +
                                 std::to_string(line_no) + ", column '" + column + "'");
    return v;
}

} // namespace detail

// Parse a price panel into one PriceSeries per ticker column.
inline std::vector<PriceSeries> ingest_prices(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("csv: cannot open '" + path.string() + "'");

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("csv: empty file '" + path.string() + "'");
    auto header = detail::split_csv_line(line);
    if (header.size() < 2)
        throw std::runtime_error("csv: header must have a timestamp column and at least one ticker");

    std::vector<std::string> tickers(header.begin() + 1, header.end());
    std::set<std::string> seen;
    for (auto& t : tickers) {
        t = detail::trim(t);
        if (t.empty()) throw std::runtime_error("csv: empty ticker in header");
        if (!seen.insert(t).second) throw std::runtime_error("csv: duplicate ticker '" + t + "'");
    }

    std::vector<PriceSeries> series(tickers.size());
    for (std::size_t i = 0; i < tickers.size(); ++i) series[i].ticker = tickers[i];

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != header.size())
            throw std::runtime_error("csv: malformed row at line " + std::to_string(line_no) +
                                     " (expected " + std::to_string(header.size()) + " cells, got " +
                                     std::to_string(cells.size()) + ")");
        const std::string ts = detail::trim(cells[0]);
        for (std::size_t i = 0; i < tickers.size(); ++i) {
            series[i].prices.push_back(detail::parse_cell(cells[i + 1], line_no, tickers[i]));
            series[i].timestamps.push_back(ts);
        }
    }
    if (!series.empty() && series[0].prices.size() < 2)
        throw std::runtime_error("csv: need at least 2 observation rows");
    return series;
}

inline ReturnMatrix returns_from_prices(const std::vector<PriceSeries>& series) {
    if (series.empty()) throw std::invalid_argument("returns_from_prices: no series");
    const auto t = static_cast<Eigen::Index>(series[0].prices.size()) - 1;
    ReturnMatrix r;
    r.data.resize(static_cast<Eigen::Index>(series.size()), t);
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto ret = log_returns(series[i]);
        if (static_cast<Eigen::Index>(ret.size()) != t)
            throw std::runtime_error("returns_from_prices: misaligned series '" +
                                     series[i].ticker + "'");
        for (Eigen::Index j = 0; j < t; ++j)
            r.data(static_cast<Eigen::Index>(i), j) = ret[static_cast<std::size_t>(j)];
    }
    return r;
}

// Parse a returns panel (same layout as prices, one fewer row) directly.
inline std::pair<ReturnMatrix, std::vector<std::string>>
ingest_returns(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("csv: cannot open '" + path.string() + "'");

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("csv: empty file '" + path.string() + "'");
    auto header = detail::split_csv_line(line);
    if (header.size() < 2)
        throw std::runtime_error("csv: header must have a timestamp column and at least one ticker");
    std::vector<std::string> tickers(header.begin() + 1, header.end());
    std::set<std::string> seen;
    for (auto& t : tickers) {
        t = detail::trim(t);
        if (!seen.insert(t).second) throw std::runtime_error("csv: duplicate ticker '" + t + "'");
    }

    std::vector<std::vector<double>> columns(tickers.size());
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != header.size())
            throw std::runtime_error("csv: malformed row at line " + std::to_string(line_no));
        for (std::size_t i = 0; i < tickers.size(); ++i)
            columns[i].push_back(detail::parse_cell(cells[i + 1], line_no, tickers[i]));
    }
    if (columns.empty() || columns[0].empty())
        throw std::runtime_error("csv: no observation rows");

    ReturnMatrix r;
    r.data.resize(static_cast<Eigen::Index>(columns.size()),
                  static_cast<Eigen::Index>(columns[0].size()));
    for (std::size_t i = 0; i < columns.size(); ++i)
        for (std::size_t j = 0; j < columns[i].size(); ++j)
            r.data(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = columns[i][j];
    return {r, tickers};
}

// Plot CSVs carry 9 significant digits.
inline std::string fmt_csv(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

inline void write_density_csv(const std::filesystem::path& path, const DensityCurve& curve) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << "lambda,rho\n";
    for (std::size_t i = 0; i < curve.lambda.size(); ++i)
        out << fmt_csv(curve.lambda[i]) << ',' << fmt_csv(curve.rho[i]) << '\n';
}

inline void write_eigs_csv(const std::filesystem::path& path, const std::vector<double>& eigs) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    for (double v : eigs) out << fmt_csv(v) << '\n';
}

inline std::vector<double> read_values_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    std::vector<double> values;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = detail::trim(line);
        if (t.empty() || t == "value") continue;
        values.push_back(detail::parse_cell(t, line_no, "value"));
    }
    return values;
}

} // namespace corrspec
