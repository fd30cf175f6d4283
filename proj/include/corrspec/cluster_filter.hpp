#pragma once

// Inverse-problem pipeline: extract a strongly correlated cluster and a
// weakly correlated background from an empirical correlation matrix,
// assemble the block estimate, and run bootstrap / reshuffle spectral
// analyses with theoretical overlays.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "corrspec/eigen_sym.hpp"
#include "corrspec/linalg.hpp"
#include "corrspec/rmt.hpp"
#include "corrspec/rng.hpp"

namespace corrspec {

struct FilterThresholds {
    double rho_U = 0.5;    // intra-cluster lower bound
    double rho_D1 = 0.25;  // cluster-background upper bound (rho_D')
    double rho_D2 = 0.25;  // background-background upper bound (rho_D'')

    void validate() const {
        if (!(0.0 < rho_D1 && rho_D1 <= rho_D2 && rho_D2 < rho_U && rho_U <= 1.0))
            throw std::invalid_argument(
                "FilterThresholds: need 0 < rho_D' <= rho_D'' < rho_U <= 1");
    }
};

struct ClusterPartition {
    std::vector<Eigen::Index> cluster_idx;     // I_U
    std::vector<Eigen::Index> background_idx;  // I_D
    Eigen::Index source_dim = 0;
};

struct BootstrapSpec {
    int iterations = 100;
    Eigen::Index keep_background = 0;  // rows drawn from I_D per iteration
    bool reshuffle = false;
    std::uint64_t seed = 0;
    std::size_t hist_bins = 60;
    double hist_max = 2.0;             // aggregate histogram range [0, hist_max]
};

// Greedy seed-and-grow clique search on the rho_U threshold graph: seed at
// the largest off-diagonal entry, then repeatedly add the vertex with the
// best minimum correlation to the current set. Ties go to the lowest index.
inline std::optional<std::vector<Eigen::Index>>
find_cluster(const CorrelationEstimate& c, double rho_U, Eigen::Index min_size,
             Eigen::Index max_size) {
    const Eigen::Index n = c.dim();
    if (!(rho_U > 0.0 && rho_U < 1.0))
        throw std::invalid_argument("find_cluster: rho_U must lie in (0,1)");
    if (min_size < 2 || max_size < min_size)
        throw std::invalid_argument("find_cluster: need 2 <= min_size <= max_size");

    Eigen::Index bi = -1, bj = -1;
    double best = -2.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
            if (c.matrix(i, j) > best) {
                best = c.matrix(i, j);
                bi = i;
                bj = j;
            }
    if (bi < 0 || best < rho_U) return std::nullopt;

    std::vector<Eigen::Index> set{bi, bj};
    std::vector<bool> used(static_cast<std::size_t>(n), false);
    used[static_cast<std::size_t>(bi)] = used[static_cast<std::size_t>(bj)] = true;

    while (static_cast<Eigen::Index>(set.size()) < max_size) {
        Eigen::Index pick = -1;
        double pick_min = -2.0;
        for (Eigen::Index v = 0; v < n; ++v) {
            if (used[static_cast<std::size_t>(v)]) continue;
            double mn = 2.0;
            for (Eigen::Index u : set) mn = std::min(mn, c.matrix(v, u));
            if (mn >= rho_U && mn > pick_min) {
                pick_min = mn;
                pick = v;
            }
        }
        if (pick < 0) break;
        set.push_back(pick);
        used[static_cast<std::size_t>(pick)] = true;
    }
    if (static_cast<Eigen::Index>(set.size()) < min_size) return std::nullopt;
    std::sort(set.begin(), set.end());
    return set;
}

// Greedy maximal background set: candidates weakly correlated to the whole
// cluster, added in index order while pairwise compatibility holds.
inline std::vector<Eigen::Index> find_background(const CorrelationEstimate& c,
                                                 const std::vector<Eigen::Index>& cluster,
                                                 double rho_D1, double rho_D2) {
    const Eigen::Index n = c.dim();
    std::vector<bool> in_cluster(static_cast<std::size_t>(n), false);
    for (Eigen::Index i : cluster) {
        if (i < 0 || i >= n) throw std::out_of_range("find_background: cluster index out of range");
        in_cluster[static_cast<std::size_t>(i)] = true;
    }

    std::vector<Eigen::Index> background;
    for (Eigen::Index v = 0; v < n; ++v) {
        if (in_cluster[static_cast<std::size_t>(v)]) continue;
        bool ok = true;
        for (Eigen::Index u : cluster)
            if (std::abs(c.matrix(v, u)) > rho_D1) {
                ok = false;
                break;
            }
        for (Eigen::Index u : background) {
            if (!ok) break;
            if (std::abs(c.matrix(v, u)) > rho_D2) ok = false;
        }
        if (ok) background.push_back(v);
    }
    return background;
}

// Re-verifiable validity predicate for a partition against thresholds.
inline bool partition_is_valid(const CorrelationEstimate& c, const ClusterPartition& p,
                               const FilterThresholds& th) {
    for (Eigen::Index i : p.cluster_idx)
        for (Eigen::Index j : p.cluster_idx)
            if (i != j && c.matrix(i, j) < th.rho_U) return false;
    for (Eigen::Index i : p.cluster_idx)
        for (Eigen::Index j : p.background_idx)
            if (std::abs(c.matrix(i, j)) > th.rho_D1) return false;
    for (Eigen::Index i : p.background_idx)
        for (Eigen::Index j : p.background_idx)
            if (i != j && std::abs(c.matrix(i, j)) > th.rho_D2) return false;
    return true;
}

inline double mean_rho(const CorrelationEstimate& c, const std::vector<Eigen::Index>& cluster) {
    if (cluster.size() < 2) throw std::invalid_argument("mean_rho: need at least 2 indices");
    double acc = 0.0;
    for (Eigen::Index i : cluster)
        for (Eigen::Index j : cluster)
            if (i != j) acc += c.matrix(i, j);
    const auto nb = static_cast<double>(cluster.size());
    return acc / (nb * (nb - 1.0));
}

// Reordered (|I_U| + |I_D|)-dimensional submatrix with the cluster block
// leading and the background block trailing.
inline CorrelationEstimate assemble(const CorrelationEstimate& c, const ClusterPartition& p) {
    std::vector<Eigen::Index> order;
    order.reserve(p.cluster_idx.size() + p.background_idx.size());
    order.insert(order.end(), p.cluster_idx.begin(), p.cluster_idx.end());
    order.insert(order.end(), p.background_idx.begin(), p.background_idx.end());
    const auto m = static_cast<Eigen::Index>(order.size());
    for (Eigen::Index i : order)
        if (i < 0 || i >= c.dim()) throw std::out_of_range("assemble: index out of range");

    CorrelationEstimate out;
    out.rect_ratio = c.rect_ratio;
    out.matrix.resize(m, m);
    for (Eigen::Index a = 0; a < m; ++a)
        for (Eigen::Index b = 0; b < m; ++b)
            out.matrix(a, b) = c.matrix(order[static_cast<std::size_t>(a)],
                                        order[static_cast<std::size_t>(b)]);
    return out;
}

// Independently permute the T entries of each selected row (distinct
// permutation per row), preserving marginals while destroying cross- and
// auto-correlations.
inline ReturnMatrix reshuffle(const ReturnMatrix& r, const std::vector<Eigen::Index>& rows,
                              std::uint64_t seed) {
    ReturnMatrix out;
    out.data = r.data;
    out.standardized = r.standardized;
    const Eigen::Index t = r.n_obs();
    for (Eigen::Index row : rows) {
        if (row < 0 || row >= r.n_assets())
            throw std::out_of_range("reshuffle: row index out of range");
        StreamRng rng(seed, static_cast<std::uint64_t>(row));
        for (Eigen::Index j = t - 1; j > 0; --j) {
            const auto k = static_cast<Eigen::Index>(rng.next_below(static_cast<std::uint64_t>(j + 1)));
            std::swap(out.data(row, j), out.data(row, k));
        }
    }
    return out;
}

struct BootstrapResult {
    std::vector<std::vector<double>> eigenvalues;   // ascending, per iteration
    DensityCurve aggregate;                         // histogram of all eigenvalues <= hist_max
};

// Per iteration: keep every cluster row, draw keep_background rows from the
// background without replacement, optionally reshuffle the drawn rows,
// re-estimate the correlation of the standardized subpanel and
// eigendecompose it.
inline BootstrapResult bootstrap_spectra(const ReturnMatrix& r, const ClusterPartition& p,
                                         const BootstrapSpec& spec) {
    if (spec.iterations < 1) throw std::invalid_argument("bootstrap_spectra: iterations >= 1");
    if (spec.keep_background > static_cast<Eigen::Index>(p.background_idx.size()))
        throw std::invalid_argument("bootstrap_spectra: keep_background exceeds |I_D|");

    BootstrapResult result;
    result.eigenvalues.reserve(static_cast<std::size_t>(spec.iterations));
    std::vector<double> all;

    for (int it = 0; it < spec.iterations; ++it) {
        const std::uint64_t iter_seed = derive_seed(spec.seed, static_cast<std::uint64_t>(it));

        // partial Fisher-Yates over the background indices
        std::vector<Eigen::Index> pool = p.background_idx;
        StreamRng rng(iter_seed, 0);
        for (Eigen::Index i = 0; i < spec.keep_background; ++i) {
            const auto j = i + static_cast<Eigen::Index>(
                                   rng.next_below(static_cast<std::uint64_t>(pool.size()) -
                                                  static_cast<std::uint64_t>(i)));
            std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
        }
        pool.resize(static_cast<std::size_t>(spec.keep_background));

        std::vector<Eigen::Index> rows = p.cluster_idx;
        rows.insert(rows.end(), pool.begin(), pool.end());

        ReturnMatrix panel;
        panel.data.resize(static_cast<Eigen::Index>(rows.size()), r.n_obs());
        for (std::size_t i = 0; i < rows.size(); ++i)
            panel.data.row(static_cast<Eigen::Index>(i)) = r.data.row(rows[i]);

        if (spec.reshuffle) {
            std::vector<Eigen::Index> bg_rows;
            for (std::size_t i = p.cluster_idx.size(); i < rows.size(); ++i)
                bg_rows.push_back(static_cast<Eigen::Index>(i));
            panel = reshuffle(panel, bg_rows, derive_seed(iter_seed, 1));
        }

        const auto decomp = sym_eigen(pearson_estimator(standardize(panel)));
        result.eigenvalues.push_back(decomp.eigenvalues);
        all.insert(all.end(), decomp.eigenvalues.begin(), decomp.eigenvalues.end());
    }

    result.aggregate = histogram(all, spec.hist_bins, 0.0, spec.hist_max);
    return result;
}

// Two-atom overlay spectrum for the filtered panel. lambda2 defaults to the
// theoretical value 1; pass the empirical right-bulk mean to use it instead.
// Weights follow the (Nbar-1)/(N - large_eig_count) convention and are
// renormalized to sum to one.
inline DegenerateSpectrum overlay_spectrum(const ClusterPartition& p, const CorrelationEstimate& c,
                                           int large_eig_count, double lambda2 = 1.0) {
    const auto n_bar = static_cast<double>(p.cluster_idx.size());
    const auto n = static_cast<double>(p.cluster_idx.size() + p.background_idx.size());
    const double rho = mean_rho(c, p.cluster_idx);
    const double denom = n - static_cast<double>(large_eig_count);
    const double w1 = (n_bar - 1.0) / denom;
    if (!(w1 > 0.0) || !(w1 < 1.0))
        throw std::invalid_argument("overlay_spectrum: nonpositive or degenerate weights");

    DegenerateSpectrum spec;
    const double lambda1 = 1.0 - rho;
    if (std::abs(lambda1 - lambda2) < 1e-12) {
        spec.entries = {{lambda2, 1.0}};   // rho == 0 collapses to a single atom
    } else {
        spec.entries = {{lambda1, w1}, {lambda2, 1.0 - w1}};
    }
    spec.validate();
    return spec;
}

// Split an eigenvalue sample into bulks separated by gaps larger than
// `gap`. Input need not be sorted; bulks come back in ascending order.
inline std::vector<std::vector<double>> split_into_bulks(std::vector<double> values, double gap) {
    std::sort(values.begin(), values.end());
    std::vector<std::vector<double>> bulks;
    for (double v : values) {
        if (bulks.empty() || v - bulks.back().back() > gap) bulks.emplace_back();
        bulks.back().push_back(v);
    }
    return bulks;
}

} // namespace corrspec
