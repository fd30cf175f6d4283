#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>

#include "corrspec/eigen_sym.hpp"
#include "corrspec/factor_model.hpp"
#include "corrspec/linalg.hpp"

using namespace corrspec;

namespace {

// flatten an AnalyticSpectrum into an ascending list with multiplicities
std::vector<double> expand_spectrum(const AnalyticSpectrum& s) {
    std::vector<double> out;
    for (const auto& [lam, n] : s.entries)
        for (Eigen::Index i = 0; i < n; ++i) out.push_back(lam);
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

TEST_CASE("simulate without couplings yields unit-variance uncorrelated rows") {
    FactorModelConfig cfg;
    cfg.n_assets = 8;
    cfg.n_obs = 4000;
    cfg.common_mode = 0.0;
    cfg.seed = 11;
    const auto r = simulate(cfg);
    REQUIRE(r.n_assets() == 8);
    REQUIRE(r.n_obs() == 4000);
    for (Eigen::Index i = 0; i < 8; ++i) {
        const double var = r.data.row(i).squaredNorm() / 4000.0;
        CHECK(var > 0.9);
        CHECK(var < 1.1);
    }
    const auto c = pearson_estimator(standardize(r));
    for (Eigen::Index i = 0; i < 8; ++i)
        for (Eigen::Index j = i + 1; j < 8; ++j) CHECK(std::abs(c.matrix(i, j)) < 0.1);
}

TEST_CASE("simulate with full common mode makes all rows identical") {
    FactorModelConfig cfg;
    cfg.n_assets = 5;
    cfg.n_obs = 50;
    cfg.common_mode = 1.0;
    cfg.seed = 12;
    const auto r = simulate(cfg);
    for (Eigen::Index i = 1; i < 5; ++i)
        CHECK((r.data.row(i) - r.data.row(0)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("simulate is deterministic in the seed") {
    FactorModelConfig cfg;
    cfg.n_assets = 10;
    cfg.n_obs = 30;
    cfg.clusters = {{4, 0.6}};
    cfg.common_mode = 0.2;
    cfg.seed = 99;
    const auto a = simulate(cfg);
    const auto b = simulate(cfg);
    CHECK((a.data - b.data).cwiseAbs().maxCoeff() == 0.0);
    cfg.seed = 100;
    const auto c = simulate(cfg);
    CHECK((a.data - c.data).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("theoretical_correlation closed-form entries") {
    FactorModelConfig cfg;
    cfg.n_assets = 210;
    cfg.n_obs = 1000;
    cfg.clusters = {{10, 0.7}};
    cfg.common_mode = 0.3;
    const auto c = theoretical_correlation(cfg);

    for (Eigen::Index i = 0; i < c.dim(); ++i)
        CHECK_THAT(c.matrix(i, i), Catch::Matchers::WithinAbs(1.0, 1e-15));
    CHECK_THAT(c.matrix.trace(), Catch::Matchers::WithinAbs(210.0, 1e-12));

    // intra-cluster: (0.09*0.09 + 0.49) / 0.5422
    CHECK_THAT(c.matrix(0, 1), Catch::Matchers::WithinAbs(0.918665, 1e-6));
    // background pair: 0.09 / 0.58
    CHECK_THAT(c.matrix(100, 200), Catch::Matchers::WithinAbs(0.155172, 1e-6));
    // cluster-background: 0.3 * 0.09 / sqrt(0.5422 * 0.58)
    CHECK_THAT(c.matrix(0, 100), Catch::Matchers::WithinAbs(0.3 * 0.09 / std::sqrt(0.5422 * 0.58), 1e-12));
    CHECK((c.matrix - c.matrix.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sample correlation converges to the model correlation") {
    FactorModelConfig cfg;
    cfg.n_assets = 20;
    cfg.n_obs = 50000;
    cfg.clusters = {{8, 0.55}};
    cfg.common_mode = 0.25;
    cfg.seed = 7;
    const auto sample = pearson_estimator(standardize(simulate(cfg)));
    const auto exact = theoretical_correlation(cfg);
    CHECK((sample.matrix - exact.matrix).cwiseAbs().maxCoeff() < 0.03);
}

TEST_CASE("intra-cluster sample correlation matches the closed form") {
    FactorModelConfig cfg;
    cfg.n_assets = 60;
    cfg.n_obs = 20000;
    cfg.clusters = {{50, 0.7}};
    cfg.common_mode = 0.3;
    cfg.seed = 8;
    const auto c = pearson_estimator(standardize(simulate(cfg)));
    double acc = 0.0;
    int cnt = 0;
    for (Eigen::Index i = 0; i < 50; ++i)
        for (Eigen::Index j = i + 1; j < 50; ++j) {
            acc += c.matrix(i, j);
            ++cnt;
        }
    CHECK_THAT(acc / cnt, Catch::Matchers::WithinAbs(0.918665, 0.02));
}

TEST_CASE("strong-coupling spectrum matches the gamma_k -> 1 limit") {
    FactorModelConfig cfg;
    cfg.n_assets = 40;
    cfg.n_obs = 100;
    cfg.clusters = {{6, 1.0 - 1e-9}, {4, 1.0 - 1e-9}};
    cfg.common_mode = 0.3;
    const auto limit = analytic_spectrum_strong_clusters(cfg);
    const auto numeric = sym_eigen(theoretical_correlation(cfg));
    const auto expect = expand_spectrum(limit);
    REQUIRE(numeric.eigenvalues.size() == expect.size());
    for (std::size_t i = 0; i < expect.size(); ++i)
        CHECK_THAT(numeric.eigenvalues[i], Catch::Matchers::WithinAbs(expect[i], 1e-6));
}

TEST_CASE("strong-cluster spectrum for a single 100-asset cluster") {
    FactorModelConfig cfg;
    cfg.n_assets = 500;
    cfg.n_obs = 2000;
    cfg.clusters = {{100, 1.0}};
    cfg.common_mode = 0.3;
    const auto s = analytic_spectrum_strong_clusters(cfg);
    // {0 x 99, small x 399, big x 1, 100 x 1}, small = 0.49/0.58
    std::map<double, Eigen::Index> got(s.entries.begin(), s.entries.end());
    CHECK(got.at(0.0) == 99);
    REQUIRE(s.entries.size() == 4);
    CHECK_THAT(s.entries[1].first, Catch::Matchers::WithinAbs(0.49 / 0.58, 1e-12));
    CHECK(s.entries[1].second == 399);
    CHECK(got.at(100.0) == 1);
    CHECK_THAT(s.entries[2].first,
               Catch::Matchers::WithinAbs((400.0 * 0.09 + 0.49) / 0.58, 1e-9));
    Eigen::Index total = 0;
    for (const auto& [lam, n] : s.entries) total += n;
    CHECK(total == 500);
}

TEST_CASE("block spectrum closed form agrees with direct diagonalization") {
    StreamRng rng(21, 0);
    for (int rep = 0; rep < 200; ++rep) {
        BlockModel model;
        const auto k = 1 + rng.next_below(2);
        Eigen::Index used = 0;
        for (std::uint64_t c = 0; c < k; ++c) {
            const auto size = static_cast<Eigen::Index>(2 + rng.next_below(3));
            model.clusters.push_back({size, 0.1 + 0.8 * rng.next_uniform()});
            used += size;
        }
        model.n_background = static_cast<Eigen::Index>(rng.next_below(
            static_cast<std::uint64_t>(9 - std::min<Eigen::Index>(used, 8))));
        if (model.n_total() > 8) model.n_background = 0;

        const auto exact = expand_spectrum(analytic_spectrum_block(model));
        const auto numeric = sym_eigen(block_correlation(model));
        REQUIRE(numeric.eigenvalues.size() == exact.size());
        for (std::size_t i = 0; i < exact.size(); ++i)
            CHECK_THAT(numeric.eigenvalues[i], Catch::Matchers::WithinAbs(exact[i], 1e-10));
    }
}

TEST_CASE("single-cluster spectrum special case") {
    const auto s = analytic_spectrum_single_cluster(28, 7, 0.707);
    const auto b = analytic_spectrum_block(BlockModel{{{7, 0.707}}, 21});
    CHECK(expand_spectrum(s) == expand_spectrum(b));
    // largest: Nbar*rho + (1-rho)
    CHECK_THAT(expand_spectrum(s).back(), Catch::Matchers::WithinAbs(5.242, 1e-12));

    const auto big = analytic_spectrum_single_cluster(500, 100, 0.85);
    CHECK_THAT(expand_spectrum(big).back(), Catch::Matchers::WithinAbs(85.15, 1e-12));
}

TEST_CASE("config_for_block reproduces the block correlation exactly") {
    BlockModel model{{{7, 0.707}, {5, 0.4}}, 16};
    const auto cfg = config_for_block(model, 1000, 3);
    CHECK(cfg.common_mode == 0.0);
    CHECK(cfg.n_assets == model.n_total());
    const auto c = theoretical_correlation(cfg);
    const auto b = block_correlation(model);
    CHECK((c.matrix - b.matrix).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("factor model input validation") {
    FactorModelConfig cfg;
    cfg.n_assets = 0;
    cfg.n_obs = 10;
    CHECK_THROWS_AS(simulate(cfg), std::invalid_argument);
    cfg.n_assets = 10;
    cfg.common_mode = 1.5;
    CHECK_THROWS_AS(simulate(cfg), std::invalid_argument);
    cfg.common_mode = 0.2;
    cfg.clusters = {{20, 0.5}};
    CHECK_THROWS_AS(theoretical_correlation(cfg), std::invalid_argument);
    cfg.clusters = {{4, -0.1}};
    CHECK_THROWS_AS(simulate(cfg), std::invalid_argument);

    CHECK_THROWS_AS(analytic_spectrum_single_cluster(5, 6, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(analytic_spectrum_single_cluster(5, 3, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(block_correlation(BlockModel{{{3, 1.2}}, 0}), std::invalid_argument);
    CHECK_THROWS_AS(block_correlation(BlockModel{{}, 0}), std::invalid_argument);
}
