#pragma once

// Goodness-of-fit battery: Kolmogorov-Smirnov against arbitrary CDFs,
// Jarque-Bera, Lilliefors, and normal moment fitting.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "corrspec/density.hpp"

namespace corrspec {

struct TestReport {
    std::string test_name;
    double statistic = 0.0;
    std::map<double, double> critical_values;   // alpha -> CV
    std::map<double, bool> reject;              // alpha -> reject H0?
    std::size_t sample_size = 0;

    bool reject_at(double alpha) const { return reject.at(alpha); }

    void decide() {
        for (const auto& [alpha, cv] : critical_values) reject[alpha] = statistic > cv;
    }
};

// Numerical CDF on an ascending grid; evaluated by linear interpolation.
struct CdfTable {
    std::vector<double> x;
    std::vector<double> f;

    double operator()(double v) const {
        if (v <= x.front()) return 0.0;
        if (v >= x.back()) return 1.0;
        const auto it = std::upper_bound(x.begin(), x.end(), v);
        const auto i = static_cast<std::size_t>(it - x.begin());
        const double t = (v - x[i - 1]) / (x[i] - x[i - 1]);
        return f[i - 1] + t * (f[i] - f[i - 1]);
    }
};

inline CdfTable cdf_from_density(const DensityCurve& curve) {
    if (std::abs(curve.mass - 1.0) > 2e-3)
        throw std::invalid_argument("cdf_from_density: curve mass " + std::to_string(curve.mass) +
                                    " deviates from 1 by more than 2e-3");
    CdfTable cdf;
    cdf.x = curve.lambda;
    cdf.f.assign(curve.lambda.size(), 0.0);
    double acc = 0.0;
    for (std::size_t i = 1; i < curve.lambda.size(); ++i) {
        acc += 0.5 * (curve.lambda[i] - curve.lambda[i - 1]) * (curve.rho[i] + curve.rho[i - 1]);
        cdf.f[i] = acc;
    }
    for (auto& v : cdf.f) v /= acc;   // renormalize to end exactly at 1
    return cdf;
}

namespace detail {

// D_n = sup |F_n - F| with both one-sided deviations at every jump.
inline double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
    std::sort(sample.begin(), sample.end());
    const auto n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        if (std::isnan(sample[i])) throw std::invalid_argument("ks: NaN in sample");
        const double fx = cdf(sample[i]);
        d = std::max(d, fx - static_cast<double>(i) / n);
        d = std::max(d, static_cast<double>(i + 1) / n - fx);
    }
    return d;
}

inline double normal_cdf(double x, double mean, double sd) {
    return 0.5 * std::erfc(-(x - mean) / (sd * std::sqrt(2.0)));
}

} // namespace detail

inline TestReport ks_test(const std::vector<double>& sample,
                          const std::function<double(double)>& cdf) {
    if (sample.size() < 10) throw std::invalid_argument("ks_test: need n >= 10");
    TestReport rep;
    rep.test_name = "kolmogorov-smirnov";
    rep.sample_size = sample.size();
    rep.statistic = detail::ks_statistic(sample, cdf);
    const double sqrt_n = std::sqrt(static_cast<double>(sample.size()));
    rep.critical_values = {{0.10, 1.224 / sqrt_n}, {0.05, 1.358 / sqrt_n}, {0.01, 1.628 / sqrt_n}};
    rep.decide();
    return rep;
}

inline TestReport ks_test(const std::vector<double>& sample, const CdfTable& cdf) {
    return ks_test(sample, std::function<double(double)>(
                               [&cdf](double v) { return cdf(v); }));
}

inline std::pair<double, double> normal_fit(const std::vector<double>& sample) {
    if (sample.size() < 2) throw std::invalid_argument("normal_fit: need n >= 2");
    const auto n = static_cast<double>(sample.size());
    double mean = 0.0;
    for (double v : sample) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : sample) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / (n - 1.0))};
}

inline TestReport jarque_bera(const std::vector<double>& sample) {
    if (sample.size() < 20) throw std::invalid_argument("jarque_bera: need n >= 20");
    const auto n = static_cast<double>(sample.size());
    double mean = 0.0;
    for (double v : sample) mean += v;
    mean /= n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : sample) {
        const double d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    if (!(m2 > 0.0)) throw std::domain_error("jarque_bera: zero variance");
    const double skew = m3 / std::pow(m2, 1.5);
    const double kurt = m4 / (m2 * m2);
    TestReport rep;
    rep.test_name = "jarque-bera";
    rep.sample_size = sample.size();
    rep.statistic = n * (skew * skew / 6.0 + (kurt - 3.0) * (kurt - 3.0) / 24.0);
    rep.critical_values = {{0.10, 4.605}, {0.05, 5.992}, {0.01, 9.210}};   // chi^2(2) quantiles
    rep.decide();
    return rep;
}

// KS statistic against a normal CDF with estimated mean and sd; asymptotic
// critical values c(alpha)/sqrt(n) with c = 0.805 / 0.886 / 1.031.
inline TestReport lilliefors(const std::vector<double>& sample) {
    if (sample.size() < 20) throw std::invalid_argument("lilliefors: need n >= 20");
    const auto [mean, sd] = normal_fit(sample);
    if (!(sd > 0.0)) throw std::domain_error("lilliefors: zero variance");
    TestReport rep;
    rep.test_name = "lilliefors";
    rep.sample_size = sample.size();
    rep.statistic = detail::ks_statistic(
        sample, [mean = mean, sd = sd](double x) { return detail::normal_cdf(x, mean, sd); });
    const double sqrt_n = std::sqrt(static_cast<double>(sample.size()));
    rep.critical_values = {{0.10, 0.805 / sqrt_n}, {0.05, 0.886 / sqrt_n}, {0.01, 1.031 / sqrt_n}};
    rep.decide();
    return rep;
}

} // namespace corrspec
