#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "corrspec/cluster_filter.hpp"
#include "corrspec/eigen_sym.hpp"
#include "corrspec/factor_model.hpp"
#include "corrspec/linalg.hpp"
#include "corrspec/rng.hpp"

using namespace corrspec;

namespace {

CorrelationEstimate wrap(const Eigen::MatrixXd& m) {
    CorrelationEstimate c;
    c.matrix = m;
    c.rect_ratio = 0.1;
    return c;
}

} // namespace

TEST_CASE("find_cluster on a perfect block") {
    const auto c = wrap(Eigen::MatrixXd::Ones(5, 5));
    const auto set = find_cluster(c, 0.9, 2, 5);
    REQUIRE(set.has_value());
    CHECK(*set == std::vector<Eigen::Index>{0, 1, 2, 3, 4});
}

TEST_CASE("find_cluster finds nothing in the identity") {
    const auto c = wrap(Eigen::MatrixXd::Identity(6, 6));
    CHECK_FALSE(find_cluster(c, 0.5, 2, 6).has_value());
}

TEST_CASE("find_cluster recovers a planted clique in noise") {
    const Eigen::Index n = 40;
    StreamRng rng(17, 0);
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
            m(i, j) = m(j, i) = 0.4 * (rng.next_uniform() - 0.5);   // |noise| <= 0.2
    const std::vector<Eigen::Index> planted{3, 8, 12, 19, 25, 31, 38};
    for (Eigen::Index i : planted)
        for (Eigen::Index j : planted)
            if (i != j) m(i, j) = 0.71;
    const auto c = wrap(m);

    const auto set = find_cluster(c, 0.5, 3, 10);
    REQUIRE(set.has_value());
    CHECK(*set == planted);

    // exhaustive oracle: no vertex outside the planted set can join it
    for (Eigen::Index v = 0; v < n; ++v) {
        if (std::find(planted.begin(), planted.end(), v) != planted.end()) continue;
        double mn = 2.0;
        for (Eigen::Index u : planted) mn = std::min(mn, m(v, u));
        CHECK(mn < 0.5);
    }
}

TEST_CASE("find_cluster argument validation") {
    const auto c = wrap(Eigen::MatrixXd::Identity(4, 4));
    CHECK_THROWS_AS(find_cluster(c, 1.5, 2, 4), std::invalid_argument);
    CHECK_THROWS_AS(find_cluster(c, 0.5, 1, 4), std::invalid_argument);
    CHECK_THROWS_AS(find_cluster(c, 0.5, 4, 3), std::invalid_argument);
}

TEST_CASE("find_background excludes correlated rows") {
    // 0-2: cluster block; 3 correlated with the cluster; 4-6 clean
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(7, 7);
    for (Eigen::Index i = 0; i < 3; ++i)
        for (Eigen::Index j = 0; j < 3; ++j)
            if (i != j) m(i, j) = 0.8;
    m(3, 0) = m(0, 3) = 0.6;
    m(4, 5) = m(5, 4) = 0.5;   // too correlated to co-exist in the background
    const auto c = wrap(m);

    // 3 is tied to the cluster; 5 clashes with the already-admitted 4
    const auto bg = find_background(c, {0, 1, 2}, 0.25, 0.25);
    CHECK(bg == std::vector<Eigen::Index>{4, 6});
    // relaxing the pairwise bound readmits 5
    const auto relaxed = find_background(c, {0, 1, 2}, 0.25, 0.6);
    CHECK(relaxed == std::vector<Eigen::Index>{4, 5, 6});

    CHECK_THROWS_AS(find_background(c, {99}, 0.25, 0.25), std::out_of_range);
}

TEST_CASE("partition validity predicate") {
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(5, 5);
    m(0, 1) = m(1, 0) = 0.8;
    m(2, 3) = m(3, 2) = 0.1;
    const auto c = wrap(m);
    FilterThresholds th{0.5, 0.25, 0.25};
    CHECK(partition_is_valid(c, {{0, 1}, {2, 3, 4}, 5}, th));
    CHECK_FALSE(partition_is_valid(c, {{0, 2}, {3, 4}, 5}, th));   // weak intra-cluster link

    CHECK_NOTHROW(th.validate());
    CHECK_THROWS_AS((FilterThresholds{0.2, 0.25, 0.25}).validate(), std::invalid_argument);
    CHECK_THROWS_AS((FilterThresholds{0.5, 0.3, 0.25}).validate(), std::invalid_argument);
}

TEST_CASE("mean_rho averages off-diagonal entries") {
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(3, 3);
    m(0, 1) = m(1, 0) = 0.6;
    m(0, 2) = m(2, 0) = 0.4;
    m(1, 2) = m(2, 1) = 0.2;
    const auto c = wrap(m);
    CHECK_THAT(mean_rho(c, {0, 1, 2}), Catch::Matchers::WithinAbs(0.4, 1e-15));
    CHECK_THAT(mean_rho(c, {0, 1}), Catch::Matchers::WithinAbs(0.6, 1e-15));
    CHECK_THROWS_AS(mean_rho(c, {0}), std::invalid_argument);
}

TEST_CASE("assemble reorders and its spectrum ignores index order") {
    const auto c = wrap(block_correlation(BlockModel{{{3, 0.7}}, 4}).matrix);
    const ClusterPartition p{{0, 1, 2}, {3, 5, 6}, 7};
    const auto a = assemble(c, p);
    REQUIRE(a.dim() == 6);
    CHECK(a.matrix(0, 1) == 0.7);
    CHECK(a.matrix(3, 4) == 0.0);
    CHECK(a.rect_ratio == c.rect_ratio);

    const ClusterPartition shuffled{{2, 0, 1}, {6, 3, 5}, 7};
    const auto b = assemble(c, shuffled);
    const auto ea = sym_eigen(a).eigenvalues;
    const auto eb = sym_eigen(b).eigenvalues;
    for (std::size_t i = 0; i < ea.size(); ++i)
        CHECK_THAT(ea[i], Catch::Matchers::WithinAbs(eb[i], 1e-12));

    CHECK_THROWS_AS(assemble(c, ClusterPartition{{0}, {9}, 7}), std::out_of_range);
}

TEST_CASE("reshuffle permutes rows in place deterministically") {
    ReturnMatrix r;
    r.data.resize(3, 200);
    StreamRng rng(23, 0);
    for (Eigen::Index i = 0; i < 3; ++i)
        for (Eigen::Index j = 0; j < 200; ++j) r.data(i, j) = rng.next_normal();

    const auto s1 = reshuffle(r, {0, 2}, 5);
    const auto s2 = reshuffle(r, {0, 2}, 5);
    CHECK((s1.data - s2.data).cwiseAbs().maxCoeff() == 0.0);
    CHECK((s1.data.row(1) - r.data.row(1)).cwiseAbs().maxCoeff() == 0.0);   // untouched row

    for (Eigen::Index row : {0, 2}) {
        std::vector<double> before(200), after(200);
        for (Eigen::Index j = 0; j < 200; ++j) {
            before[static_cast<std::size_t>(j)] = r.data(row, j);
            after[static_cast<std::size_t>(j)] = s1.data(row, j);
        }
        std::sort(before.begin(), before.end());
        std::sort(after.begin(), after.end());
        CHECK(before == after);   // marginals preserved exactly
        CHECK((s1.data.row(row) - r.data.row(row)).cwiseAbs().maxCoeff() > 0.0);
    }
    CHECK_THROWS_AS(reshuffle(r, {7}, 5), std::out_of_range);
}

TEST_CASE("reshuffle destroys cross-correlation") {
    const Eigen::Index t = 4000;
    ReturnMatrix r;
    r.data.resize(2, t);
    StreamRng rng(29, 0);
    for (Eigen::Index j = 0; j < t; ++j) {
        const double common = rng.next_normal();
        r.data(0, j) = common;
        r.data(1, j) = 0.95 * common + 0.05 * rng.next_normal();
    }
    const auto before = pearson_estimator(standardize(r));
    REQUIRE(before.matrix(0, 1) > 0.9);
    const auto after = pearson_estimator(standardize(reshuffle(r, {1}, 31)));
    CHECK(std::abs(after.matrix(0, 1)) < 3.0 / std::sqrt(static_cast<double>(t)));
}

TEST_CASE("bootstrap with the full background reproduces the direct pipeline") {
    FactorModelConfig cfg = config_for_block(BlockModel{{{4, 0.6}}, 6}, 400, 77);
    const auto r = simulate(cfg);
    const ClusterPartition p{{0, 1, 2, 3}, {4, 5, 6, 7, 8, 9}, 10};

    BootstrapSpec spec;
    spec.iterations = 1;
    spec.keep_background = 6;
    spec.seed = 3;
    const auto res = bootstrap_spectra(r, p, spec);
    REQUIRE(res.eigenvalues.size() == 1);
    REQUIRE(res.eigenvalues[0].size() == 10);

    const auto direct = sym_eigen(pearson_estimator(standardize(r)));
    for (std::size_t i = 0; i < 10; ++i)
        CHECK_THAT(res.eigenvalues[0][i], Catch::Matchers::WithinAbs(direct.eigenvalues[i], 1e-10));
}

TEST_CASE("bootstrap iteration shape and determinism") {
    FactorModelConfig cfg = config_for_block(BlockModel{{{3, 0.7}}, 12}, 300, 78);
    const auto r = simulate(cfg);
    const ClusterPartition p{{0, 1, 2}, {3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14}, 15};

    BootstrapSpec spec;
    spec.iterations = 20;
    spec.keep_background = 5;
    spec.reshuffle = true;
    spec.seed = 9;
    const auto a = bootstrap_spectra(r, p, spec);
    const auto b = bootstrap_spectra(r, p, spec);
    REQUIRE(a.eigenvalues.size() == 20);
    for (const auto& e : a.eigenvalues) {
        CHECK(e.size() == 8);
        CHECK(std::is_sorted(e.begin(), e.end()));
    }
    CHECK(a.eigenvalues == b.eigenvalues);
    CHECK(a.aggregate.lambda.size() == spec.hist_bins);

    spec.keep_background = 13;
    CHECK_THROWS_AS(bootstrap_spectra(r, p, spec), std::invalid_argument);
}

TEST_CASE("overlay_spectrum two-atom weights") {
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(28, 28);
    for (Eigen::Index i = 0; i < 7; ++i)
        for (Eigen::Index j = 0; j < 7; ++j)
            if (i != j) m(i, j) = 0.707;
    const auto c = wrap(m);
    ClusterPartition p;
    for (Eigen::Index i = 0; i < 7; ++i) p.cluster_idx.push_back(i);
    for (Eigen::Index i = 7; i < 28; ++i) p.background_idx.push_back(i);
    p.source_dim = 28;

    const auto spec = overlay_spectrum(p, c, 1);
    REQUIRE(spec.count() == 2);
    CHECK_THAT(spec.entries[0].first, Catch::Matchers::WithinAbs(0.293, 1e-12));
    CHECK_THAT(spec.entries[0].second, Catch::Matchers::WithinAbs(6.0 / 27.0, 1e-12));
    CHECK_THAT(spec.entries[1].first, Catch::Matchers::WithinAbs(1.0, 1e-12));
    CHECK_THAT(spec.entries[1].second, Catch::Matchers::WithinAbs(21.0 / 27.0, 1e-12));

    // rho = 0 collapses both atoms onto lambda = 1
    const auto id = wrap(Eigen::MatrixXd::Identity(28, 28).eval());
    const auto flat = overlay_spectrum(p, id, 1);
    REQUIRE(flat.count() == 1);
    CHECK(flat.entries[0].first == 1.0);
    CHECK(flat.entries[0].second == 1.0);
}

TEST_CASE("split_into_bulks groups by gap") {
    const auto bulks = split_into_bulks({0.1, 0.2, 0.15, 1.0, 1.05, 5.0}, 0.5);
    REQUIRE(bulks.size() == 3);
    CHECK(bulks[0].size() == 3);
    CHECK(bulks[1].size() == 2);
    CHECK(bulks[2] == std::vector<double>{5.0});
}
