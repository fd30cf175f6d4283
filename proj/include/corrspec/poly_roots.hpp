#pragma once

// All-roots complex polynomial solver (Aberth-Ehrlich iteration with
// Newton corrections). Coefficients are given in ascending powers.

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace corrspec {

using Complex = std::complex<double>;

namespace detail {

inline Complex horner(const std::vector<Complex>& coeff, Complex x) {
    Complex acc = coeff.back();
    for (std::size_t i = coeff.size() - 1; i-- > 0;) acc = acc * x + coeff[i];
    return acc;
}

inline Complex horner_derivative(const std::vector<Complex>& coeff, Complex x) {
    const std::size_t n = coeff.size() - 1;
    Complex acc = static_cast<double>(n) * coeff[n];
    for (std::size_t i = n - 1; i >= 1; --i) acc = acc * x + static_cast<double>(i) * coeff[i];
    return acc;
}

} // namespace detail

// Returns all deg roots of sum_k coeff[k] x^k. Leading coefficient must be
// nonzero. Trailing zero coefficients yield roots at the origin.
inline std::vector<Complex> polynomial_roots(std::vector<Complex> coeff,
                                             double tol = 1e-14, int max_iter = 200) {
    while (coeff.size() > 1 && std::abs(coeff.back()) == 0.0) coeff.pop_back();
    const std::size_t deg = coeff.size() - 1;
    if (deg == 0) return {};
    if (std::abs(coeff.back()) == 0.0)
        throw std::invalid_argument("polynomial_roots: zero polynomial");

    std::vector<Complex> roots;
    // strip roots at the origin
    std::size_t zeros = 0;
    while (zeros < deg && std::abs(coeff[zeros]) == 0.0) ++zeros;
    for (std::size_t i = 0; i < zeros; ++i) roots.emplace_back(0.0, 0.0);
    if (zeros > 0) coeff.erase(coeff.begin(), coeff.begin() + static_cast<std::ptrdiff_t>(zeros));
    const std::size_t m = coeff.size() - 1;
    if (m == 0) return roots;
    if (m == 1) {
        roots.push_back(-coeff[0] / coeff[1]);
        return roots;
    }

    // initial guesses on a circle sized by the Cauchy bound, slightly
    // perturbed in angle to break symmetry
    double radius = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        radius = std::max(radius, std::pow(std::abs(coeff[i] / coeff[m]), 1.0 / double(m - i)));
    radius = 2.0 * std::max(radius, 1e-12);
    std::vector<Complex> z(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double angle = 2.0 * M_PI * (static_cast<double>(k) + 0.35) / static_cast<double>(m) + 0.5;
        z[k] = radius * Complex(std::cos(angle), std::sin(angle));
    }

    const double scale = std::abs(coeff[m]);
    for (int iter = 0; iter < max_iter; ++iter) {
        double max_step = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            const Complex p = detail::horner(coeff, z[k]);
            const Complex dp = detail::horner_derivative(coeff, z[k]);
            if (std::abs(p) <= scale * 1e-300) continue;
            Complex newton = (std::abs(dp) > 0.0) ? p / dp : Complex(1e-8, 1e-8);
            Complex repulsion(0.0, 0.0);
            for (std::size_t j = 0; j < m; ++j)
                if (j != k) repulsion += 1.0 / (z[k] - z[j]);
            const Complex denom = 1.0 - newton * repulsion;
            const Complex step = (std::abs(denom) > 1e-300) ? newton / denom : newton;
            z[k] -= step;
            max_step = std::max(max_step, std::abs(step) / std::max(1.0, std::abs(z[k])));
        }
        if (max_step < tol) break;
    }

    roots.insert(roots.end(), z.begin(), z.end());
    return roots;
}

} // namespace corrspec
