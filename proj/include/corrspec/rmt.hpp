#pragma once

// Marcenko-Pastur density and the thermodynamic-limit solver that maps a
// degenerate true spectrum {Lambda_i, w_i} to the noise-dressed density of
// its Pearson estimator.
//
// The sample moment generating function m(z) satisfies
//   m = sum_i w_i Lambda_i (1 + q m) / (z - Lambda_i (1 + q m)),
// a degree-(L+1) polynomial equation in m once denominators are cleared.
// All roots are found with Aberth-Ehrlich; the physical branch is the one
// with Im(m) < 0 in the upper half-plane that connects continuously to the
// m ~ (sum w_i Lambda_i)/z asymptote at large |z|.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "corrspec/density.hpp"
#include "corrspec/factor_model.hpp"
#include "corrspec/poly_roots.hpp"
#include "corrspec/rng.hpp"

namespace corrspec {

struct MPParams {
    double q = 0.25;
    double sigma = 1.0;
};

inline std::pair<double, double> mp_edges(const MPParams& p) {
    if (!(p.q > 0.0) || !(p.sigma > 0.0))
        throw std::invalid_argument("mp_edges: q and sigma must be positive");
    const double s2 = p.sigma * p.sigma;
    const double sq = std::sqrt(p.q);
    return {s2 * (1.0 - sq) * (1.0 - sq), s2 * (1.0 + sq) * (1.0 + sq)};
}

inline double mp_density(double lambda, const MPParams& p) {
    if (!(lambda > 0.0)) throw std::domain_error("mp_density: lambda must be positive");
    const auto [lo, hi] = mp_edges(p);
    if (lambda <= lo || lambda >= hi) return 0.0;
    const double s2 = p.sigma * p.sigma;
    return std::sqrt((hi - lambda) * (lambda - lo)) / (2.0 * std::numbers::pi * p.q * s2 * lambda);
}

// L distinct positive eigenvalues with weights summing to one.
struct DegenerateSpectrum {
    std::vector<std::pair<double, double>> entries;   // (Lambda_i, w_i)

    std::size_t count() const { return entries.size(); }

    double weighted_moment(int k) const {
        double acc = 0.0;
        for (const auto& [lam, w] : entries) acc += w * std::pow(lam, k);
        return acc;
    }

    void validate() const {
        if (entries.empty()) throw std::invalid_argument("DegenerateSpectrum: empty");
        double wsum = 0.0;
        for (std::size_t i = 0; i < entries.size(); ++i) {
            if (!(entries[i].first > 0.0))
                throw std::invalid_argument("DegenerateSpectrum: eigenvalues must be positive");
            if (!(entries[i].second > 0.0) || entries[i].second > 1.0 + 1e-12)
                throw std::invalid_argument("DegenerateSpectrum: weights must lie in (0,1]");
            for (std::size_t j = i + 1; j < entries.size(); ++j)
                if (entries[i].first == entries[j].first)
                    throw std::invalid_argument("DegenerateSpectrum: eigenvalues must be distinct");
            wsum += entries[i].second;
        }
        if (std::abs(wsum - 1.0) > 1e-12)
            throw std::invalid_argument("DegenerateSpectrum: weights must sum to 1");
    }
};

// Drop isolated (multiplicity-1) eigenvalues and renormalize the remaining
// weights. Zero modes are dropped the same way.
inline DegenerateSpectrum to_degenerate(const AnalyticSpectrum& spec) {
    DegenerateSpectrum out;
    double kept = 0.0;
    for (const auto& [lam, n] : spec.entries) {
        if (n <= 1 || lam <= 0.0) continue;
        const double w = static_cast<double>(n) / static_cast<double>(spec.total);
        out.entries.emplace_back(lam, w);
        kept += w;
    }
    if (out.entries.empty())
        throw std::invalid_argument("to_degenerate: no degenerate positive eigenvalues");
    for (auto& e : out.entries) e.second /= kept;
    out.validate();
    return out;
}

inline Complex moment_gen_C(const DegenerateSpectrum& spec, Complex z_big) {
    Complex acc(0.0, 0.0);
    for (const auto& [lam, w] : spec.entries) {
        const Complex denom = z_big - lam;
        if (std::abs(denom) == 0.0)
            throw std::domain_error("moment_gen_C: argument hits eigenvalue pole");
        acc += w * lam / denom;
    }
    return acc;
}

inline Complex green_from_mgf(Complex mgf, Complex z_big) {
    if (std::abs(z_big) == 0.0) throw std::domain_error("green_from_mgf: Z = 0");
    return (mgf + 1.0) / z_big;
}

inline Complex conformal_map(Complex z, Complex m, double q) {
    const Complex denom = 1.0 + q * m;
    if (std::abs(denom) < 1e-300)
        throw std::domain_error("conformal_map: degenerate denominator 1 + q m");
    return z / denom;
}

struct BranchSelectionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

// Coefficients (ascending in m) of the polynomial obtained by clearing the
// denominators of the self-consistency equation at fixed z.
inline std::vector<Complex> branch_polynomial(const DegenerateSpectrum& spec, double q, Complex z) {
    const std::size_t L = spec.count();
    // linear factors f_i(m) = (z - Lambda_i) - q Lambda_i m
    std::vector<std::pair<Complex, Complex>> f(L);   // (constant, slope)
    for (std::size_t i = 0; i < L; ++i)
        f[i] = {z - spec.entries[i].first, Complex(-q * spec.entries[i].first, 0.0)};

    auto product_excluding = [&](std::size_t skip) {
        std::vector<Complex> p{Complex(1.0, 0.0)};
        for (std::size_t i = 0; i < L; ++i) {
            if (i == skip) continue;
            std::vector<Complex> next(p.size() + 1, Complex(0.0, 0.0));
            for (std::size_t k = 0; k < p.size(); ++k) {
                next[k] += p[k] * f[i].first;
                next[k + 1] += p[k] * f[i].second;
            }
            p = std::move(next);
        }
        return p;
    };

    const std::vector<Complex> full = product_excluding(L);   // product of all factors
    std::vector<Complex> poly(L + 2, Complex(0.0, 0.0));
    for (std::size_t k = 0; k < full.size(); ++k) poly[k + 1] += full[k];   // m * prod f_i

    for (std::size_t i = 0; i < L; ++i) {
        const double wl = spec.entries[i].second * spec.entries[i].first;
        const std::vector<Complex> rest = product_excluding(i);
        // subtract w_i Lambda_i (1 + q m) * prod_{j != i} f_j
        for (std::size_t k = 0; k < rest.size(); ++k) {
            poly[k] -= wl * rest[k];
            poly[k + 1] -= wl * q * rest[k];
        }
    }
    return poly;
}

} // namespace detail

// Solve the branch equation at a single z in the upper half-plane.
inline Complex solve_mc(const DegenerateSpectrum& spec, double q, Complex z,
                        std::optional<Complex> prev = std::nullopt) {
    spec.validate();
    if (!(q > 0.0)) throw std::invalid_argument("solve_mc: q must be positive");
    if (!(z.imag() > 0.0)) throw std::invalid_argument("solve_mc: need Im(z) > 0");

    const auto poly = detail::branch_polynomial(spec, q, z);
    const auto roots = polynomial_roots(poly);
    if (roots.size() != spec.count() + 1)
        throw BranchSelectionError("solve_mc: expected " + std::to_string(spec.count() + 1) +
                                   " roots, got " + std::to_string(roots.size()));

    const double imag_tol = 1e-9;
    std::vector<Complex> admissible;
    for (const auto& r : roots)
        if (r.imag() <= imag_tol) admissible.push_back(r);
    if (admissible.empty()) {
        std::ostringstream oss;
        oss << "solve_mc: no admissible root at z = (" << z.real() << ", " << z.imag() << "); roots:";
        for (const auto& r : roots) oss << " (" << r.real() << "," << r.imag() << ")";
        throw BranchSelectionError(oss.str());
    }

    const Complex target = prev ? *prev : spec.weighted_moment(1) / z;
    Complex best = admissible.front();
    double best_dist = std::abs(best - target);
    for (const auto& r : admissible) {
        const double d = std::abs(r - target);
        if (d < best_dist) {
            best = r;
            best_dist = d;
        }
    }
    return best;
}

struct SolverConfig {
    double epsilon = 1e-6;
    std::vector<double> grid;          // strictly increasing, all positive; empty = auto
    double branch_seed_z = 1e8;        // large real anchor for branch threading
    std::size_t auto_grid_points = 2000;
};

// Grid covering the dressed support of every eigenvalue with margin.
inline std::vector<double> default_solver_grid(const DegenerateSpectrum& spec, double q,
                                               std::size_t points = 2000) {
    double lam_min = spec.entries.front().first;
    double lam_max = lam_min;
    for (const auto& [lam, w] : spec.entries) {
        lam_min = std::min(lam_min, lam);
        lam_max = std::max(lam_max, lam);
    }
    const double sq = std::sqrt(q);
    const double lo = std::max(1e-4, 0.5 * lam_min * (1.0 - sq) * (1.0 - sq));
    const double hi = 1.25 * lam_max * (1.0 + sq) * (1.0 + sq);
    std::vector<double> grid(points);
    for (std::size_t i = 0; i < points; ++i)
        grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    return grid;
}

// Sweep the grid with continuity threading from a large-|z| anchor and
// convert Im m into a density via rho(lambda) = -Im m / (pi lambda).
inline DensityCurve density_from_spectrum(const DegenerateSpectrum& spec, double q,
                                          const SolverConfig& cfg = {}) {
    spec.validate();
    if (!(q > 0.0)) throw std::invalid_argument("density_from_spectrum: q must be positive");
    if (!(cfg.epsilon > 0.0)) throw std::invalid_argument("density_from_spectrum: epsilon must be positive");

    std::vector<double> grid =
        cfg.grid.empty() ? default_solver_grid(spec, q, cfg.auto_grid_points) : cfg.grid;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0))
            throw std::invalid_argument("density_from_spectrum: grid must be positive");
        if (i > 0 && !(grid[i] > grid[i - 1]))
            throw std::invalid_argument("density_from_spectrum: grid must be strictly increasing");
    }

    const double eps = cfg.epsilon;

    // thread the physical branch from the asymptotic anchor down to the
    // right end of the grid
    Complex m = spec.weighted_moment(1) / Complex(cfg.branch_seed_z, eps);
    const double right = grid.back();
    const int anchor_steps = 80;
    const double ratio = cfg.branch_seed_z / right;
    for (int k = 0; k <= anchor_steps; ++k) {
        const double x = right * std::pow(ratio, 1.0 - static_cast<double>(k) / anchor_steps);
        m = solve_mc(spec, q, Complex(x, eps), m);
    }

    DensityCurve curve;
    curve.lambda = grid;
    curve.rho.assign(grid.size(), 0.0);
    for (std::size_t i = grid.size(); i-- > 0;) {
        const double lam = grid[i];
        try {
            m = solve_mc(spec, q, Complex(lam, eps), m);
        } catch (const BranchSelectionError& e) {
            throw BranchSelectionError("density_from_spectrum: failure at lambda = " +
                                       std::to_string(lam) + ": " + e.what());
        }
        // self-check: the chosen root must satisfy m = M_C(Z) at Z = z/(1+qm)
        const Complex z_big = conformal_map(Complex(lam, eps), m, q);
        if (std::abs(moment_gen_C(spec, z_big) - m) > 1e-8 * (1.0 + std::abs(m)))
            throw BranchSelectionError("density_from_spectrum: conformal self-check failed at lambda = " +
                                       std::to_string(lam));
        curve.rho[i] = std::max(0.0, -m.imag() / (std::numbers::pi * lam));
    }

    curve.mass = trapezoid_mass(curve.lambda, curve.rho);
    curve.edges = detect_support_edges(curve.lambda, curve.rho);
    return curve;
}

struct MPFit {
    MPParams params;
    double residual = 0.0;
    bool converged = false;
};

namespace detail {

// Nelder-Mead on R^2 with a 200-iteration cap.
template <typename F>
inline std::pair<std::array<double, 2>, double> nelder_mead_2d(F&& f, std::array<double, 2> start,
                                                               double step, int max_iter = 200) {
    using Point = std::array<double, 2>;
    std::array<Point, 3> simplex{start, Point{start[0] + step, start[1]},
                                 Point{start[0], start[1] + step}};
    std::array<double, 3> value{f(simplex[0]), f(simplex[1]), f(simplex[2])};

    auto order = [&] {
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2 - i; ++j)
                if (value[j + 1] < value[j]) {
                    std::swap(value[j], value[j + 1]);
                    std::swap(simplex[j], simplex[j + 1]);
                }
    };
    order();

    for (int iter = 0; iter < max_iter; ++iter) {
        if (std::abs(value[2] - value[0]) < 1e-12 * (1.0 + std::abs(value[0]))) break;
        const Point centroid{0.5 * (simplex[0][0] + simplex[1][0]),
                             0.5 * (simplex[0][1] + simplex[1][1])};
        auto affine = [&](double t) {
            return Point{centroid[0] + t * (simplex[2][0] - centroid[0]),
                         centroid[1] + t * (simplex[2][1] - centroid[1])};
        };
        const Point refl = affine(-1.0);
        const double fr = f(refl);
        if (fr < value[0]) {
            const Point exp_pt = affine(-2.0);
            const double fe = f(exp_pt);
            if (fe < fr) {
                simplex[2] = exp_pt;
                value[2] = fe;
            } else {
                simplex[2] = refl;
                value[2] = fr;
            }
        } else if (fr < value[1]) {
            simplex[2] = refl;
            value[2] = fr;
        } else {
            const Point contr = affine(fr < value[2] ? -0.5 : 0.5);
            const double fc = f(contr);
            if (fc < std::min(fr, value[2])) {
                simplex[2] = contr;
                value[2] = fc;
            } else {
                for (int i = 1; i < 3; ++i) {
                    simplex[i] = {0.5 * (simplex[i][0] + simplex[0][0]),
                                  0.5 * (simplex[i][1] + simplex[0][1])};
                    value[i] = f(simplex[i]);
                }
            }
        }
        order();
    }
    return {simplex[0], value[0]};
}

} // namespace detail

// Least-squares fit of the MP density to the histogram of an eigenvalue
// sample. Optimizes (log q, log sigma) by Nelder-Mead from three jittered
// starts around the supplied initial guess.
inline MPFit mp_fit(const std::vector<double>& eigenvalues, MPParams initial,
                    std::size_t bin_count = 80) {
    if (eigenvalues.size() < 20)
        throw std::invalid_argument("mp_fit: need at least 20 eigenvalues");

    const auto [mn_it, mx_it] = std::minmax_element(eigenvalues.begin(), eigenvalues.end());
    const double lo = std::max(1e-9, *mn_it * 0.95);
    const double hi = *mx_it * 1.05;
    const DensityCurve hist = histogram(eigenvalues, bin_count, lo, hi);
    const double width = hist.lambda[1] - hist.lambda[0];

    auto objective = [&](const std::array<double, 2>& p) {
        const MPParams mp{std::exp(p[0]), std::exp(p[1])};
        double acc = 0.0;
        for (std::size_t b = 0; b < hist.lambda.size(); ++b) {
            const double d = mp_density(hist.lambda[b], mp) - hist.rho[b];
            acc += d * d * width;
        }
        return acc;
    };

    const std::array<double, 2> base{std::log(initial.q), std::log(initial.sigma)};
    std::array<double, 2> best_point = base;
    double best_value = objective(base);
    StreamRng jitter(0x6d70666974ULL, 0);   // fixed seed: the fit is deterministic
    for (int restart = 0; restart < 3; ++restart) {
        std::array<double, 2> start = base;
        if (restart > 0) {
            start[0] += 0.3 * (jitter.next_uniform() - 0.5);
            start[1] += 0.3 * (jitter.next_uniform() - 0.5);
        }
        const auto [point, value] = detail::nelder_mead_2d(objective, start, 0.15);
        if (value < best_value) {
            best_value = value;
            best_point = point;
        }
    }

    MPFit fit;
    fit.params = {std::exp(best_point[0]), std::exp(best_point[1])};
    fit.residual = best_value;
    fit.converged = true;
    return fit;
}

} // namespace corrspec
