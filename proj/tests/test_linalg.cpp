#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>

#include "corrspec/linalg.hpp"
#include "corrspec/density.hpp"
#include "corrspec/rng.hpp"

using namespace corrspec;

TEST_CASE("log_returns basics") {
    PriceSeries s;
    s.ticker = "X";
    s.prices = {100.0, 110.0};
    const auto r = log_returns(s);
    REQUIRE(r.size() == 1);
    CHECK_THAT(r[0], Catch::Matchers::WithinAbs(0.0953102, 1e-6));

    s.prices = {50.0, 50.0, 50.0};
    const auto flat = log_returns(s);
    REQUIRE(flat.size() == 2);
    CHECK(flat[0] == 0.0);
    CHECK(flat[1] == 0.0);
}

TEST_CASE("log_returns length and round trip") {
    PriceSeries s;
    s.ticker = "Y";
    StreamRng rng(1, 0);
    s.prices.push_back(100.0);
    for (int i = 0; i < 37; ++i)
        s.prices.push_back(s.prices.back() * std::exp(0.01 * rng.next_normal()));
    const auto r = log_returns(s);
    REQUIRE(r.size() == s.prices.size() - 1);
    // cumulative-exp rebuild reproduces the return series
    double p = s.prices[0];
    for (std::size_t i = 0; i < r.size(); ++i) {
        p *= std::exp(r[i]);
        CHECK_THAT(std::log(s.prices[i + 1] / s.prices[i]), Catch::Matchers::WithinAbs(r[i], 1e-12));
    }
    CHECK_THAT(p, Catch::Matchers::WithinRel(s.prices.back(), 1e-9));
}

TEST_CASE("log_returns rejects non-positive prices with index") {
    PriceSeries s;
    s.ticker = "Z";
    s.prices = {10.0, -1.0, 5.0};
    CHECK_THROWS_WITH(log_returns(s), Catch::Matchers::ContainsSubstring("index 1"));
}

TEST_CASE("standardize two-point row") {
    ReturnMatrix r;
    r.data.resize(1, 2);
    r.data << 1.0, -1.0;
    const auto out = standardize(r);
    CHECK(out.standardized);
    CHECK_THAT(out.data(0, 0), Catch::Matchers::WithinAbs(std::sqrt(0.5), 1e-12));
    CHECK_THAT(out.data(0, 1), Catch::Matchers::WithinAbs(-std::sqrt(0.5), 1e-12));
}

TEST_CASE("standardize is idempotent and centers rows") {
    ReturnMatrix r;
    r.data.resize(3, 40);
    StreamRng rng(2, 0);
    for (Eigen::Index i = 0; i < 3; ++i)
        for (Eigen::Index j = 0; j < 40; ++j) r.data(i, j) = 2.0 + 3.0 * rng.next_normal();
    const auto once = standardize(r);
    const auto twice = standardize(once);
    for (Eigen::Index i = 0; i < 3; ++i) {
        CHECK(std::abs(once.data.row(i).mean()) < 1e-12);
        const double var = once.data.row(i).squaredNorm() / 39.0;
        CHECK_THAT(var, Catch::Matchers::WithinAbs(1.0, 1e-9));
        for (Eigen::Index j = 0; j < 40; ++j)
            CHECK_THAT(twice.data(i, j), Catch::Matchers::WithinAbs(once.data(i, j), 1e-12));
    }
}

TEST_CASE("standardize rejects constant rows") {
    ReturnMatrix r;
    r.data = Eigen::MatrixXd::Constant(2, 10, 3.0);
    CHECK_THROWS_AS(standardize(r), std::domain_error);
}

TEST_CASE("pearson_estimator hand cases") {
    ReturnMatrix r;
    r.data.resize(2, 2);
    r.data << 1.0, 1.0, 1.0, 1.0;
    auto c = pearson_estimator(r);
    CHECK_THAT(c.matrix(0, 0), Catch::Matchers::WithinAbs(1.0, 1e-15));
    CHECK_THAT(c.matrix(0, 1), Catch::Matchers::WithinAbs(1.0, 1e-15));
    CHECK_THAT(c.rect_ratio, Catch::Matchers::WithinAbs(1.0, 1e-15));

    r.data << 1.0, -1.0, 1.0, 1.0;   // orthogonal rows
    c = pearson_estimator(r);
    CHECK_THAT(c.matrix(0, 1), Catch::Matchers::WithinAbs(0.0, 1e-15));
    CHECK_THAT(c.matrix(0, 0), Catch::Matchers::WithinAbs(1.0, 1e-15));
    CHECK_THAT(c.matrix(1, 1), Catch::Matchers::WithinAbs(1.0, 1e-15));
}

TEST_CASE("pearson_estimator off-diagonals shrink like 1/sqrt(T)") {
    const Eigen::Index n = 50, t = 5000;
    ReturnMatrix r;
    r.data.resize(n, t);
    for (Eigen::Index i = 0; i < n; ++i) {
        StreamRng rng(3, static_cast<std::uint64_t>(i));
        for (Eigen::Index j = 0; j < t; ++j) r.data(i, j) = rng.next_normal();
    }
    const auto c = pearson_estimator(standardize(r));
    double max_off = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) max_off = std::max(max_off, std::abs(c.matrix(i, j)));
    CHECK(max_off < 0.1);
}

TEST_CASE("pearson_estimator is symmetric and PSD on random inputs") {
    for (int rep = 0; rep < 20; ++rep) {
        StreamRng rng(100 + static_cast<std::uint64_t>(rep), 0);
        const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.next_below(8));
        const Eigen::Index t = n + 1 + static_cast<Eigen::Index>(rng.next_below(30));
        ReturnMatrix r;
        r.data.resize(n, t);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < t; ++j) r.data(i, j) = rng.next_normal();
        const auto c = pearson_estimator(r);
        CHECK((c.matrix - c.matrix.transpose()).cwiseAbs().maxCoeff() < 1e-12);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c.matrix);
        CHECK(es.eigenvalues().minCoeff() > -1e-9);
    }
}

TEST_CASE("standardized correlation eigenvalues sum to N") {
    const Eigen::Index n = 12, t = 300;
    ReturnMatrix r;
    r.data.resize(n, t);
    StreamRng rng(4, 0);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < t; ++j) r.data(i, j) = rng.next_normal();
    const auto c = pearson_estimator(standardize(r));
    // 1/T estimator with (T-1)-denominator standardization puts (T-1)/T on
    // the diagonal exactly
    const double expected = static_cast<double>(n) * static_cast<double>(t - 1) / static_cast<double>(t);
    CHECK_THAT(c.matrix.trace(), Catch::Matchers::WithinAbs(expected, 1e-9 * n));
}

TEST_CASE("histogram hand case and normalization") {
    const auto h = histogram({0.0, 1.0}, 2, 0.0, 2.0);
    REQUIRE(h.rho.size() == 2);
    CHECK_THAT(h.rho[0], Catch::Matchers::WithinAbs(0.5, 1e-12));
    CHECK_THAT(h.rho[1], Catch::Matchers::WithinAbs(0.5, 1e-12));

    StreamRng rng(5, 0);
    std::vector<double> v(5000);
    for (auto& x : v) x = rng.next_uniform() * 3.0 - 1.0;
    const auto h2 = histogram(v, 17, -1.0, 2.0);
    double mass = 0.0;
    const double w = h2.lambda[1] - h2.lambda[0];
    for (double d : h2.rho) mass += d * w;
    CHECK_THAT(mass, Catch::Matchers::WithinAbs(1.0, 1e-12));
}

TEST_CASE("histogram of large normal sample tracks the normal pdf") {
    StreamRng rng(6, 0);
    std::vector<double> v(1000000);
    for (auto& x : v) x = rng.next_normal();
    const auto h = histogram(v, 100, -4.0, 4.0);
    double max_dev = 0.0;
    for (std::size_t b = 0; b < h.lambda.size(); ++b) {
        const double pdf = std::exp(-0.5 * h.lambda[b] * h.lambda[b]) / std::sqrt(2.0 * M_PI);
        max_dev = std::max(max_dev, std::abs(h.rho[b] - pdf));
    }
    CHECK(max_dev < 0.02);
}

TEST_CASE("histogram error paths") {
    CHECK_THROWS_AS(histogram({}, 4, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(histogram({1.0}, 4, 1.0, 1.0), std::invalid_argument);
}
