#pragma once

// Sampled spectral density with support-edge bookkeeping, plus histogram
// construction shared by the simulation and solver paths.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace corrspec {

struct DensityCurve {
    std::vector<double> lambda;
    std::vector<double> rho;
    double mass = 0.0;                                  // trapezoid integral
    std::vector<std::pair<double, double>> edges;       // detected support intervals

    double first_moment() const {
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < lambda.size(); ++i) {
            const double w = lambda[i + 1] - lambda[i];
            acc += 0.5 * w * (lambda[i] * rho[i] + lambda[i + 1] * rho[i + 1]);
        }
        return acc;
    }
};

inline double trapezoid_mass(const std::vector<double>& x, const std::vector<double>& y) {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i)
        acc += 0.5 * (x[i + 1] - x[i]) * (y[i] + y[i + 1]);
    return acc;
}

// Detect contiguous intervals where rho exceeds a cutoff, with hysteresis:
// open at cutoff_hi, close when density falls back below cutoff_lo.
inline std::vector<std::pair<double, double>>
detect_support_edges(const std::vector<double>& lambda, const std::vector<double>& rho,
                     double cutoff_lo = 1e-4, double cutoff_hi = 2e-4) {
    std::vector<std::pair<double, double>> edges;
    bool inside = false;
    double left = 0.0;
    for (std::size_t i = 0; i < lambda.size(); ++i) {
        if (!inside && rho[i] >= cutoff_hi) {
            // walk back to the last point below the low cutoff
            std::size_t j = i;
            while (j > 0 && rho[j - 1] >= cutoff_lo) --j;
            left = lambda[j];
            inside = true;
        } else if (inside && rho[i] < cutoff_lo) {
            edges.emplace_back(left, lambda[i]);
            inside = false;
        }
    }
    if (inside) edges.emplace_back(left, lambda.back());
    return edges;
}

// Histogram normalized to unit mass: sum(density * bin_width) == 1.
inline DensityCurve histogram(const std::vector<double>& values, std::size_t bin_count,
                              double lo, double hi) {
    if (values.empty()) throw std::invalid_argument("histogram: empty input");
    if (bin_count < 1) throw std::invalid_argument("histogram: bin_count must be >= 1");
    if (!(hi > lo)) throw std::invalid_argument("histogram: degenerate range");

    const double width = (hi - lo) / static_cast<double>(bin_count);
    std::vector<double> counts(bin_count, 0.0);
    std::size_t in_range = 0;
    for (double v : values) {
        if (v < lo || v > hi) continue;
        auto bin = static_cast<std::size_t>((v - lo) / width);
        if (bin >= bin_count) bin = bin_count - 1;   // right edge lands in last bin
        counts[bin] += 1.0;
        ++in_range;
    }
    if (in_range == 0) throw std::invalid_argument("histogram: no values inside range");

    DensityCurve curve;
    curve.lambda.resize(bin_count);
    curve.rho.resize(bin_count);
    const double norm = 1.0 / (static_cast<double>(in_range) * width);
    for (std::size_t b = 0; b < bin_count; ++b) {
        curve.lambda[b] = lo + (static_cast<double>(b) + 0.5) * width;
        curve.rho[b] = counts[b] * norm;
    }
    curve.mass = 1.0;   // exact by construction: sum(rho) * width == 1
    curve.edges = detect_support_edges(curve.lambda, curve.rho);
    return curve;
}

} // namespace corrspec
