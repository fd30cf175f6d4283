#pragma once

// Return preprocessing and Pearson correlation estimation.
//
// Conventions: returns are stored as an N x T matrix (one row per asset).
// The Pearson estimator uses the 1/T normalization; standardization uses
// the T-1 denominator for the sample standard deviation.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace corrspec {

struct PriceSeries {
    std::string ticker;
    std::vector<double> prices;        // T+1 entries, strictly positive
    std::vector<std::string> timestamps; // optional, empty or size T+1
};

struct ReturnMatrix {
    Eigen::MatrixXd data;              // N x T, row i = asset i
    bool standardized = false;

    Eigen::Index n_assets() const { return data.rows(); }
    Eigen::Index n_obs() const { return data.cols(); }
};

struct CorrelationEstimate {
    Eigen::MatrixXd matrix;            // N x N symmetric
    double rect_ratio = 0.0;           // q = N/T used to build it

    Eigen::Index dim() const { return matrix.rows(); }
};

inline std::vector<double> log_returns(const PriceSeries& series) {
    if (series.prices.size() < 2)
        throw std::invalid_argument("log_returns: need at least 2 prices for '" + series.ticker + "'");
    for (std::size_t i = 0; i < series.prices.size(); ++i) {
        if (!(series.prices[i] > 0.0))
            throw std::domain_error("log_returns: non-positive price at index " + std::to_string(i) +
                                    " for '" + series.ticker + "'");
    }
    std::vector<double> out(series.prices.size() - 1);
    for (std::size_t i = 0; i + 1 < series.prices.size(); ++i)
        out[i] = std::log(series.prices[i + 1] / series.prices[i]);
    return out;
}

// Per-row: subtract sample mean, divide by sample sd (T-1 denominator).
inline ReturnMatrix standardize(const ReturnMatrix& r) {
    const auto n = r.n_assets();
    const auto t = r.n_obs();
    if (t < 2) throw std::invalid_argument("standardize: need T >= 2");

    ReturnMatrix out;
    out.data.resize(n, t);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double mean = r.data.row(i).mean();
        const double ss = (r.data.row(i).array() - mean).square().sum();
        const double sd = std::sqrt(ss / static_cast<double>(t - 1));
        if (!(sd > 0.0))
            throw std::domain_error("standardize: degenerate (zero-variance) series in row " +
                                    std::to_string(i));
        out.data.row(i) = (r.data.row(i).array() - mean) / sd;
    }
    out.standardized = true;
    return out;
}

// c = R R^T / T (large-T convention).
inline CorrelationEstimate pearson_estimator(const ReturnMatrix& r) {
    const auto t = r.n_obs();
    if (t < 2) throw std::invalid_argument("pearson_estimator: need T >= 2");
    CorrelationEstimate c;
    c.matrix.noalias() = r.data * r.data.transpose() / static_cast<double>(t);
    // symmetrize away rounding asymmetry from the GEMM
    c.matrix = 0.5 * (c.matrix + c.matrix.transpose()).eval();
    c.rect_ratio = static_cast<double>(r.n_assets()) / static_cast<double>(t);
    return c;
}

} // namespace corrspec
