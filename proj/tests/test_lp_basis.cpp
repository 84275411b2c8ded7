#include <doctest.h>

#include <cmath>

#include "lprel/error.hpp"
#include "lprel/lp_basis.hpp"
#include "lprel/numeric.hpp"
#include "lprel/rng.hpp"
#include "lprel/simulate.hpp"

using namespace lprel;

TEST_CASE("empirical cdf with and without ties") {
    Eigen::VectorXd z(3);
    z << 1, 2, 3;
    const Eigen::VectorXd u = empirical_cdf(z);
    CHECK(u[0] == doctest::Approx(1.0 / 3));
    CHECK(u[1] == doctest::Approx(2.0 / 3));
    CHECK(u[2] == doctest::Approx(1.0));

    Eigen::VectorXd t(3);
    t << 1, 1, 2;
    const Eigen::VectorXd ut = empirical_cdf(t);
    CHECK(ut[0] == doctest::Approx(0.5));
    CHECK(ut[1] == doctest::Approx(0.5));
    CHECK(ut[2] == doctest::Approx(1.0));

    Eigen::VectorXd empty;
    CHECK_THROWS_AS(empirical_cdf(empty), data_error);
}

TEST_CASE("empirical cdf range on funnel sample") {
    FunnelConfig cfg;
    cfg.seed = 2;
    const Dataset d = simulate_funnel(cfg);
    const Eigen::VectorXd u = empirical_cdf(d.z);
    CHECK(u.maxCoeff() == doctest::Approx(1.0));
    CHECK(u.minCoeff() == doctest::Approx(1.0 / 3565.0));
}

TEST_CASE("first basis function on three points") {
    Eigen::VectorXd z(3);
    z << 10, 20, 30;
    const LpBasis b = LpBasis::build(z, 1);
    CHECK(b.in_sample_values()(0, 0) == doctest::Approx(-1.2247448).epsilon(1e-6));
    CHECK(b.in_sample_values()(1, 0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(b.in_sample_values()(2, 0) == doctest::Approx(1.2247448).epsilon(1e-6));
}

TEST_CASE("orthonormality across sizes") {
    for (int n : {50, 500, 5000}) {
        for (int m : {2, 4, 8}) {
            RngStream rng(100 + n + m, "lp");
            Eigen::VectorXd z(n);
            for (int i = 0; i < n; ++i) z[i] = rng.normal();
            const LpBasis b = LpBasis::build(z, m);
            const Eigen::MatrixXd& v = b.in_sample_values();
            for (int j = 0; j < m; ++j) {
                CHECK(std::abs(v.col(j).sum()) <= 1e-8 * n);
                for (int k = 0; k <= j; ++k) {
                    const double g = v.col(j).dot(v.col(k)) / n;
                    CHECK(std::abs(g - (j == k ? 1.0 : 0.0)) < 1e-6);
                }
            }
        }
    }
}

TEST_CASE("rank invariance under increasing transforms") {
    RngStream rng(7, "rank-inv");
    const int n = 400;
    Eigen::VectorXd z(n);
    for (int i = 0; i < n; ++i) z[i] = rng.normal(0.0, 2.0);
    const LpBasis a = LpBasis::build(z, 6);
    Eigen::VectorXd g = z.array().exp();  // strictly increasing map
    const LpBasis b = LpBasis::build(g, 6);
    CHECK((a.in_sample_values() - b.in_sample_values()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("degree structure") {
    RngStream rng(9, "deg");
    Eigen::VectorXd z(200);
    for (int i = 0; i < 200; ++i) z[i] = rng.uniform();
    const LpBasis b = LpBasis::build(z, 6);
    const Eigen::MatrixXd& c = b.coefficients();
    for (int j = 0; j < 6; ++j) {
        CHECK(std::abs(c(j, j + 1)) > 1e-8);  // leading coefficient of degree j+1
        for (int d = j + 2; d <= 6; ++d) CHECK(c(j, d) == 0.0);
    }
}

TEST_CASE("kidney-sized basis with m=6") {
    RngStream rng(13, "kid");
    Eigen::VectorXd z(157);
    for (int i = 0; i < 157; ++i) z[i] = rng.normal();
    const LpBasis b = LpBasis::build(z, 6);
    CHECK(b.size() == 6);
    for (int j = 0; j < 6; ++j)
        CHECK(b.in_sample_values().col(j).squaredNorm() / 157.0 ==
              doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("evaluation: median, clamping, in-sample consistency") {
    RngStream rng(21, "eval");
    const int n = 999;
    Eigen::VectorXd z(n);
    for (int i = 0; i < n; ++i) z[i] = rng.normal();
    const LpBasis b = LpBasis::build(z, 5);

    Eigen::VectorXd s = z;
    std::sort(s.data(), s.data() + n);
    const double median = s[n / 2];
    CHECK(std::abs(b.evaluate(median)[0]) < 2.0 / std::sqrt(double(n)));

    const Eigen::VectorXd below = b.evaluate(s[0] - 100.0);
    const Eigen::VectorXd at_clamp = b.evaluate_u(0.5 / n);
    CHECK((below - at_clamp).cwiseAbs().maxCoeff() == 0.0);

    for (int i : {0, 17, n / 2, n - 1}) {
        const Eigen::VectorXd e = b.evaluate(z[i]);
        for (int j = 0; j < 5; ++j)
            CHECK(e[j] == doctest::Approx(b.in_sample_values()(i, j)).epsilon(1e-9));
    }
}

TEST_CASE("rank deficiency error") {
    Eigen::VectorXd z(10);
    z << 1, 1, 1, 1, 1, 2, 2, 2, 2, 2;  // two distinct values
    CHECK_THROWS_AS(LpBasis::build(z, 2), data_error);
    CHECK_NOTHROW(LpBasis::build(z, 1));
}
