#pragma once

// Symmetric eigensolver: cyclic Jacobi for small matrices, Householder
// tridiagonalization followed by implicit-shift QL above dimension 64.
// Eigenvalues are returned in ascending order; eigenvectors (optional)
// are the matching orthonormal columns.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "corrspec/linalg.hpp"

namespace corrspec {

struct EigenDecomposition {
    std::vector<double> eigenvalues;   // ascending
    Eigen::MatrixXd eigenvectors;      // empty unless requested; column i <-> eigenvalue i
};

namespace detail {

inline double hypot2(double a, double b) { return std::sqrt(a * a + b * b); }

// Cyclic Jacobi with rotations applied until the off-diagonal mass vanishes.
inline void jacobi_eigen(Eigen::MatrixXd& a, std::vector<double>& d, Eigen::MatrixXd* v) {
    const Eigen::Index n = a.rows();
    if (v) v->setIdentity(n, n);

    const int max_sweeps = 100;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (Eigen::Index p = 0; p < n - 1; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (off <= 1e-30 * a.diagonal().squaredNorm() + 1e-300) break;

        for (Eigen::Index p = 0; p < n - 1; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double app = a(p, p);
                const double aqq = a(q, q);
                const double tau = (aqq - app) / (2.0 * apq);
                double t;
                if (tau >= 0.0)
                    t = 1.0 / (tau + std::sqrt(1.0 + tau * tau));
                else
                    t = -1.0 / (-tau + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;

                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                if (v) {
                    for (Eigen::Index k = 0; k < n; ++k) {
                        const double vkp = (*v)(k, p);
                        const double vkq = (*v)(k, q);
                        (*v)(k, p) = c * vkp - s * vkq;
                        (*v)(k, q) = s * vkp + c * vkq;
                    }
                }
            }
        }
    }
    d.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) d[static_cast<std::size_t>(i)] = a(i, i);
}

// Householder reduction to tridiagonal form. On exit d holds the diagonal,
// e the subdiagonal (e[0] unused); if accumulate, a is overwritten with the
// orthogonal transformation Q such that Q^T A Q = T.
inline void tred2(Eigen::MatrixXd& a, std::vector<double>& d, std::vector<double>& e,
                  bool accumulate) {
    const Eigen::Index n = a.rows();
    d.assign(static_cast<std::size_t>(n), 0.0);
    e.assign(static_cast<std::size_t>(n), 0.0);

    for (Eigen::Index i = n - 1; i >= 1; --i) {
        const Eigen::Index l = i - 1;
        double h = 0.0;
        double scale = 0.0;
        if (l > 0) {
            for (Eigen::Index k = 0; k <= l; ++k) scale += std::abs(a(i, k));
            if (scale == 0.0) {
                e[static_cast<std::size_t>(i)] = a(i, l);
            } else {
                for (Eigen::Index k = 0; k <= l; ++k) {
                    a(i, k) /= scale;
                    h += a(i, k) * a(i, k);
                }
                double f = a(i, l);
                double g = (f >= 0.0) ? -std::sqrt(h) : std::sqrt(h);
                e[static_cast<std::size_t>(i)] = scale * g;
                h -= f * g;
                a(i, l) = f - g;
                f = 0.0;
                for (Eigen::Index j = 0; j <= l; ++j) {
                    if (accumulate) a(j, i) = a(i, j) / h;
                    g = 0.0;
                    for (Eigen::Index k = 0; k <= j; ++k) g += a(j, k) * a(i, k);
                    for (Eigen::Index k = j + 1; k <= l; ++k) g += a(k, j) * a(i, k);
                    e[static_cast<std::size_t>(j)] = g / h;
                    f += e[static_cast<std::size_t>(j)] * a(i, j);
                }
                const double hh = f / (h + h);
                for (Eigen::Index j = 0; j <= l; ++j) {
                    f = a(i, j);
                    e[static_cast<std::size_t>(j)] = g = e[static_cast<std::size_t>(j)] - hh * f;
                    for (Eigen::Index k = 0; k <= j; ++k)
                        a(j, k) -= f * e[static_cast<std::size_t>(k)] + g * a(i, k);
                }
            }
        } else {
            e[static_cast<std::size_t>(i)] = a(i, l);
        }
        d[static_cast<std::size_t>(i)] = h;
    }
    if (accumulate) d[0] = 0.0;
    e[0] = 0.0;

    for (Eigen::Index i = 0; i < n; ++i) {
        if (accumulate) {
            const Eigen::Index l = i - 1;
            if (d[static_cast<std::size_t>(i)] != 0.0) {
                for (Eigen::Index j = 0; j <= l; ++j) {
                    double g = 0.0;
                    for (Eigen::Index k = 0; k <= l; ++k) g += a(i, k) * a(k, j);
                    for (Eigen::Index k = 0; k <= l; ++k) a(k, j) -= g * a(k, i);
                }
            }
            d[static_cast<std::size_t>(i)] = a(i, i);
            a(i, i) = 1.0;
            for (Eigen::Index j = 0; j < i; ++j) a(j, i) = a(i, j) = 0.0;
        } else {
            d[static_cast<std::size_t>(i)] = a(i, i);
        }
    }
}

// QL with implicit shifts on a tridiagonal matrix (d, e). If z != nullptr,
// rotations are accumulated into its columns.
inline void tqli(std::vector<double>& d, std::vector<double>& e, Eigen::MatrixXd* z) {
    const auto n = static_cast<Eigen::Index>(d.size());
    for (Eigen::Index i = 1; i < n; ++i) e[static_cast<std::size_t>(i - 1)] = e[static_cast<std::size_t>(i)];
    e[static_cast<std::size_t>(n - 1)] = 0.0;

    for (Eigen::Index l = 0; l < n; ++l) {
        int iter = 0;
        Eigen::Index m;
        do {
            for (m = l; m < n - 1; ++m) {
                const double dd = std::abs(d[static_cast<std::size_t>(m)]) +
                                  std::abs(d[static_cast<std::size_t>(m + 1)]);
                if (std::abs(e[static_cast<std::size_t>(m)]) <= 1e-16 * dd) break;
            }
            if (m != l) {
                if (++iter == 50)
                    throw std::runtime_error("sym_eigen: QL iteration failed to converge");
                double g = (d[static_cast<std::size_t>(l + 1)] - d[static_cast<std::size_t>(l)]) /
                           (2.0 * e[static_cast<std::size_t>(l)]);
                double r = hypot2(g, 1.0);
                g = d[static_cast<std::size_t>(m)] - d[static_cast<std::size_t>(l)] +
                    e[static_cast<std::size_t>(l)] / (g + std::copysign(r, g));
                double s = 1.0;
                double c = 1.0;
                double p = 0.0;
                Eigen::Index i;
                for (i = m - 1; i >= l; --i) {
                    double f = s * e[static_cast<std::size_t>(i)];
                    const double b = c * e[static_cast<std::size_t>(i)];
                    r = hypot2(f, g);
                    e[static_cast<std::size_t>(i + 1)] = r;
                    if (r == 0.0) {
                        d[static_cast<std::size_t>(i + 1)] -= p;
                        e[static_cast<std::size_t>(m)] = 0.0;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[static_cast<std::size_t>(i + 1)] - p;
                    r = (d[static_cast<std::size_t>(i)] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[static_cast<std::size_t>(i + 1)] = g + p;
                    g = c * r - b;
                    if (z) {
                        for (Eigen::Index k = 0; k < n; ++k) {
                            f = (*z)(k, i + 1);
                            (*z)(k, i + 1) = s * (*z)(k, i) + c * f;
                            (*z)(k, i) = c * (*z)(k, i) - s * f;
                        }
                    }
                }
                if (r == 0.0 && i >= l) continue;
                d[static_cast<std::size_t>(l)] -= p;
                e[static_cast<std::size_t>(l)] = g;
                e[static_cast<std::size_t>(m)] = 0.0;
            }
        } while (m != l);
    }
}

} // namespace detail

inline EigenDecomposition sym_eigen(const Eigen::MatrixXd& c, bool want_vectors = false) {
    const Eigen::Index n = c.rows();
    if (n != c.cols()) throw std::invalid_argument("sym_eigen: matrix not square");
    if (n == 0) throw std::invalid_argument("sym_eigen: empty matrix");
    const double asym = (c - c.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-9)
        throw std::invalid_argument("sym_eigen: input not symmetric (max asymmetry " +
                                    std::to_string(asym) + ")");

    Eigen::MatrixXd work = c;
    std::vector<double> d;
    EigenDecomposition out;

    if (n <= 64) {
        Eigen::MatrixXd vecs;
        detail::jacobi_eigen(work, d, want_vectors ? &vecs : nullptr);
        if (want_vectors) out.eigenvectors = std::move(vecs);
    } else {
        std::vector<double> e;
        detail::tred2(work, d, e, want_vectors);
        detail::tqli(d, e, want_vectors ? &work : nullptr);
        if (want_vectors) out.eigenvectors = std::move(work);
    }

    // sort ascending, keeping vectors aligned
    std::vector<std::size_t> order(d.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });
    out.eigenvalues.resize(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) out.eigenvalues[i] = d[order[i]];
    if (want_vectors) {
        Eigen::MatrixXd sorted(n, n);
        for (std::size_t i = 0; i < d.size(); ++i)
            sorted.col(static_cast<Eigen::Index>(i)) =
                out.eigenvectors.col(static_cast<Eigen::Index>(order[i]));
        out.eigenvectors = std::move(sorted);
    }
    return out;
}

inline EigenDecomposition sym_eigen(const CorrelationEstimate& c, bool want_vectors = false) {
    return sym_eigen(c.matrix, want_vectors);
}

} // namespace corrspec
