#pragma once

// Cluster factor models: simulation, exact theoretical correlation
// matrices, and their closed-form spectra.
//
// Model: background assets follow r_i = gamma_N m_N + (1-gamma_N) eps_i;
// an asset in cluster k follows
//   r_i = gamma_k m_k + (1-gamma_k) gamma_N m_N + (1-gamma_k)(1-gamma_N) eps_i
// with all modes and idiosyncratic terms i.i.d. standard normal.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "corrspec/linalg.hpp"
#include "corrspec/rng.hpp"

namespace corrspec {

struct ClusterSpec {
    Eigen::Index size = 0;     // N_k
    double coupling = 0.0;     // gamma_k in [0,1]
};

struct FactorModelConfig {
    Eigen::Index n_assets = 0; // N
    Eigen::Index n_obs = 0;    // T
    std::vector<ClusterSpec> clusters;
    double common_mode = 0.0;  // gamma_N in [0,1]
    std::uint64_t seed = 0;

    Eigen::Index n_clustered() const {
        Eigen::Index nbar = 0;
        for (const auto& c : clusters) nbar += c.size;
        return nbar;
    }
};

struct BlockCluster {
    Eigen::Index size = 0;     // N_k
    double rho = 0.0;          // intra-cluster correlation in [0,1]
};

struct BlockModel {
    std::vector<BlockCluster> clusters;
    Eigen::Index n_background = 0;     // N - Nbar

    Eigen::Index n_total() const {
        Eigen::Index n = n_background;
        for (const auto& c : clusters) n += c.size;
        return n;
    }
};

// Distinct eigenvalue / multiplicity pairs; multiplicities sum to N.
struct AnalyticSpectrum {
    std::vector<std::pair<double, Eigen::Index>> entries;
    Eigen::Index total = 0;
};

namespace detail {

inline void validate_config(const FactorModelConfig& cfg) {
    if (cfg.n_assets < 1 || cfg.n_obs < 1)
        throw std::invalid_argument("factor model: N and T must be positive");
    if (cfg.common_mode < 0.0 || cfg.common_mode > 1.0)
        throw std::invalid_argument("factor model: gamma_N must lie in [0,1]");
    Eigen::Index nbar = 0;
    for (const auto& c : cfg.clusters) {
        if (c.size < 1) throw std::invalid_argument("factor model: cluster size must be >= 1");
        if (c.coupling < 0.0 || c.coupling > 1.0)
            throw std::invalid_argument("factor model: gamma_k must lie in [0,1]");
        nbar += c.size;
    }
    if (nbar > cfg.n_assets)
        throw std::invalid_argument("factor model: sum of cluster sizes exceeds N");
}

inline AnalyticSpectrum collect_spectrum(std::map<double, Eigen::Index>& mult, Eigen::Index total) {
    AnalyticSpectrum spec;
    spec.total = total;
    for (const auto& [lambda, n] : mult)
        if (n > 0) spec.entries.emplace_back(lambda, n);
    return spec;
}

} // namespace detail

inline ReturnMatrix simulate(const FactorModelConfig& cfg) {
    detail::validate_config(cfg);
    const Eigen::Index n = cfg.n_assets;
    const Eigen::Index t = cfg.n_obs;
    const double gn = cfg.common_mode;

    // factor streams: stream 0 = common mode, 1..K = cluster modes,
    // K+1+i = idiosyncratic noise of asset i
    const auto k_clusters = static_cast<std::uint64_t>(cfg.clusters.size());
    Eigen::VectorXd common(t);
    {
        StreamRng rng(cfg.seed, 0);
        for (Eigen::Index j = 0; j < t; ++j) common(j) = rng.next_normal();
    }
    Eigen::MatrixXd modes(static_cast<Eigen::Index>(k_clusters), t);
    for (std::uint64_t k = 0; k < k_clusters; ++k) {
        StreamRng rng(cfg.seed, 1 + k);
        for (Eigen::Index j = 0; j < t; ++j)
            modes(static_cast<Eigen::Index>(k), j) = rng.next_normal();
    }

    ReturnMatrix r;
    r.data.resize(n, t);
    Eigen::Index row = 0;
    for (std::uint64_t k = 0; k < k_clusters; ++k) {
        const auto& cl = cfg.clusters[static_cast<std::size_t>(k)];
        const double gk = cl.coupling;
        for (Eigen::Index i = 0; i < cl.size; ++i, ++row) {
            StreamRng rng(cfg.seed, 1 + k_clusters + static_cast<std::uint64_t>(row));
            for (Eigen::Index j = 0; j < t; ++j) {
                r.data(row, j) = gk * modes(static_cast<Eigen::Index>(k), j) +
                                 (1.0 - gk) * gn * common(j) +
                                 (1.0 - gk) * (1.0 - gn) * rng.next_normal();
            }
        }
    }
    for (; row < n; ++row) {
        StreamRng rng(cfg.seed, 1 + k_clusters + static_cast<std::uint64_t>(row));
        for (Eigen::Index j = 0; j < t; ++j)
            r.data(row, j) = gn * common(j) + (1.0 - gn) * rng.next_normal();
    }
    return r;
}

// Exact model correlation matrix from the four covariance cases, normalized
// by the model variances so the diagonal is exactly one.
inline CorrelationEstimate theoretical_correlation(const FactorModelConfig& cfg) {
    detail::validate_config(cfg);
    const Eigen::Index n = cfg.n_assets;
    const double gn = cfg.common_mode;
    const double gn2 = gn * gn;
    const double bg_var = (1.0 - gn) * (1.0 - gn) + gn2;

    // per-asset cluster id (-1 = background), coupling, variance
    std::vector<int> cluster_of(static_cast<std::size_t>(n), -1);
    std::vector<double> gamma(static_cast<std::size_t>(n), 0.0);
    std::vector<double> var(static_cast<std::size_t>(n), bg_var);
    Eigen::Index row = 0;
    for (std::size_t k = 0; k < cfg.clusters.size(); ++k) {
        const double gk = cfg.clusters[k].coupling;
        const double omk = 1.0 - gk;
        const double v = omk * omk * (1.0 - gn) * (1.0 - gn) + omk * omk * gn2 + gk * gk;
        for (Eigen::Index i = 0; i < cfg.clusters[k].size; ++i, ++row) {
            cluster_of[static_cast<std::size_t>(row)] = static_cast<int>(k);
            gamma[static_cast<std::size_t>(row)] = gk;
            var[static_cast<std::size_t>(row)] = v;
        }
    }

    CorrelationEstimate c;
    c.matrix.resize(n, n);
    c.rect_ratio = cfg.n_obs > 0 ? static_cast<double>(n) / static_cast<double>(cfg.n_obs) : 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        c.matrix(i, i) = 1.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const int ki = cluster_of[static_cast<std::size_t>(i)];
            const int kj = cluster_of[static_cast<std::size_t>(j)];
            double cov;
            if (ki < 0 && kj < 0) {
                cov = gn2;
            } else if (ki < 0 || kj < 0) {
                const double gk = (ki >= 0) ? gamma[static_cast<std::size_t>(i)]
                                            : gamma[static_cast<std::size_t>(j)];
                cov = (1.0 - gk) * gn2;
            } else if (ki == kj) {
                const double gk = gamma[static_cast<std::size_t>(i)];
                const double omk = 1.0 - gk;
                cov = omk * omk * gn2 + gk * gk;
            } else {
                const double omk = 1.0 - gamma[static_cast<std::size_t>(i)];
                const double oml = 1.0 - gamma[static_cast<std::size_t>(j)];
                cov = omk * oml * gn2;
            }
            const double cij = cov / std::sqrt(var[static_cast<std::size_t>(i)] *
                                               var[static_cast<std::size_t>(j)]);
            c.matrix(i, j) = cij;
            c.matrix(j, i) = cij;
        }
    }
    return c;
}

// Spectrum of the model correlation matrix in the strong-cluster limit
// (gamma_k -> 1): zero modes, one eigenvalue N_k per cluster, and the
// common-mode block eigenvalues.
inline AnalyticSpectrum analytic_spectrum_strong_clusters(const FactorModelConfig& cfg) {
    detail::validate_config(cfg);
    const Eigen::Index n = cfg.n_assets;
    const Eigen::Index nbar = cfg.n_clustered();
    const auto k = static_cast<Eigen::Index>(cfg.clusters.size());
    const double gn = cfg.common_mode;
    const Eigen::Index n_bg = n - nbar;
    if (n_bg == 0 && gn > 0.0)
        throw std::invalid_argument(
            "analytic_spectrum_strong_clusters: empty background block with gamma_N > 0");

    std::map<double, Eigen::Index> mult;
    mult[0.0] += nbar - k;
    for (const auto& c : cfg.clusters) mult[static_cast<double>(c.size)] += 1;
    if (n_bg > 0) {
        const double denom = (1.0 - gn) * (1.0 - gn) + gn * gn;
        const double big = (static_cast<double>(n_bg) * gn * gn + (1.0 - gn) * (1.0 - gn)) / denom;
        const double small = (1.0 - gn) * (1.0 - gn) / denom;
        mult[big] += 1;
        if (n_bg > 1) mult[small] += n_bg - 1;
    }
    return detail::collect_spectrum(mult, n);
}

// Block-diagonal correlation matrix: each cluster has unit diagonal and
// off-diagonal rho_k, the background block is the identity.
inline CorrelationEstimate block_correlation(const BlockModel& model) {
    for (const auto& c : model.clusters) {
        if (c.size < 1) throw std::invalid_argument("block_correlation: cluster size must be >= 1");
        if (c.rho < 0.0 || c.rho > 1.0)
            throw std::invalid_argument("block_correlation: rho must lie in [0,1]");
    }
    if (model.n_background < 0)
        throw std::invalid_argument("block_correlation: negative background size");
    const Eigen::Index n = model.n_total();
    if (n < 1) throw std::invalid_argument("block_correlation: empty model");

    CorrelationEstimate c;
    c.matrix = Eigen::MatrixXd::Identity(n, n);
    Eigen::Index offset = 0;
    for (const auto& cl : model.clusters) {
        for (Eigen::Index i = 0; i < cl.size; ++i)
            for (Eigen::Index j = 0; j < cl.size; ++j)
                if (i != j) c.matrix(offset + i, offset + j) = cl.rho;
        offset += cl.size;
    }
    return c;
}

// Spectrum of a single rho-cluster of Nbar assets plus N-Nbar uncorrelated:
// {(1-rho) x (Nbar-1), 1 x (N-Nbar), Nbar*rho + (1-rho) x 1}.
inline AnalyticSpectrum analytic_spectrum_single_cluster(Eigen::Index n, Eigen::Index n_bar,
                                                         double rho) {
    if (n_bar < 1 || n_bar > n)
        throw std::invalid_argument("analytic_spectrum_single_cluster: need 1 <= Nbar <= N");
    if (rho < 0.0 || rho > 1.0)
        throw std::invalid_argument("analytic_spectrum_single_cluster: rho must lie in [0,1]");

    std::map<double, Eigen::Index> mult;
    if (n_bar > 1) mult[1.0 - rho] += n_bar - 1;
    if (n > n_bar) mult[1.0] += n - n_bar;
    mult[static_cast<double>(n_bar) * rho + (1.0 - rho)] += 1;
    return detail::collect_spectrum(mult, n);
}

// Full closed-form spectrum of a multi-cluster block model.
inline AnalyticSpectrum analytic_spectrum_block(const BlockModel& model) {
    const Eigen::Index n = model.n_total();
    std::map<double, Eigen::Index> mult;
    for (const auto& cl : model.clusters) {
        if (cl.size > 1) mult[1.0 - cl.rho] += cl.size - 1;
        mult[static_cast<double>(cl.size) * cl.rho + (1.0 - cl.rho)] += 1;
    }
    if (model.n_background > 0) mult[1.0] += model.n_background;
    return detail::collect_spectrum(mult, n);
}

// Factor-model parameters whose exact correlation matrix equals the given
// block model (no common mode): gamma = sqrt(rho)/(sqrt(rho)+sqrt(1-rho)).
inline FactorModelConfig config_for_block(const BlockModel& model, Eigen::Index n_obs,
                                          std::uint64_t seed) {
    FactorModelConfig cfg;
    cfg.n_assets = model.n_total();
    cfg.n_obs = n_obs;
    cfg.common_mode = 0.0;
    cfg.seed = seed;
    for (const auto& cl : model.clusters) {
        const double sr = std::sqrt(cl.rho);
        const double so = std::sqrt(1.0 - cl.rho);
        cfg.clusters.push_back({cl.size, sr / (sr + so)});
    }
    return cfg;
}

} // namespace corrspec
