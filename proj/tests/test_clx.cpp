#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "coveq/clx.hpp"
#include "coveq/dist.hpp"
#include "coveq/errors.hpp"
#include "oracle/oracle.hpp"
#include "support.hpp"

using coveq::SampleMatrix;

TEST_CASE("theta_hat on the exhaustive plus-minus design") {
    Eigen::MatrixXd m(4, 2);
    m << 1.0, 1.0, 1.0, -1.0, -1.0, 1.0, -1.0, -1.0;
    const SampleMatrix x{m};
    // Every |x| is 1, so the diagonal theta entries vanish by construction;
    // diagonal validation must be off to inspect the matrix.
    const coveq::SymMatrix theta = coveq::theta_hat(x, false);
    CHECK(std::abs(theta.data()(0, 0)) <= 1e-12);
    CHECK(std::abs(theta.data()(1, 1)) <= 1e-12);
    CHECK(theta.data()(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(theta.data()(1, 0) == doctest::Approx(1.0).epsilon(1e-12));

    try {
        coveq::theta_hat(x);
        FAIL("expected DegenerateDataError");
    } catch (const coveq::DegenerateDataError& e) {
        CHECK(e.column == 0);
    }
}

TEST_CASE("theta_hat matches the loop oracle") {
    std::mt19937_64 gen(201);
    for (int rep = 0; rep < 25; ++rep) {
        const Eigen::MatrixXd m = testsup::random_matrix(gen, 9, 4, 1.5);
        const Eigen::MatrixXd got = coveq::theta_hat(SampleMatrix{m}).data();
        const Eigen::MatrixXd want =
            testsup::from_rows(oracle::naive_theta(testsup::to_rows(m)));
        CHECK((got - want).cwiseAbs().maxCoeff() < 1e-12 * want.maxCoeff());
        CHECK(got.minCoeff() >= 0.0);
    }
}

TEST_CASE("duplicating every observation leaves theta unchanged") {
    std::mt19937_64 gen(211);
    const Eigen::MatrixXd m = testsup::random_matrix(gen, 6, 3);
    Eigen::MatrixXd doubled(12, 3);
    doubled << m, m;
    const Eigen::MatrixXd t1 = coveq::theta_hat(SampleMatrix{m}).data();
    const Eigen::MatrixXd t2 = coveq::theta_hat(SampleMatrix{doubled}).data();
    CHECK((t1 - t2).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, t1.maxCoeff()));
}

TEST_CASE("theta_hat scaling homogeneity") {
    std::mt19937_64 gen(221);
    const Eigen::MatrixXd m = testsup::random_matrix(gen, 8, 3);
    const double c = 2.6;
    Eigen::MatrixXd scaled = m;
    scaled.col(1) *= c;
    const Eigen::MatrixXd base = coveq::theta_hat(SampleMatrix{m}).data();
    const Eigen::MatrixXd got = coveq::theta_hat(SampleMatrix{scaled}).data();
    CHECK(testsup::rel_err(got(1, 1), c * c * c * c * base(1, 1)) < 1e-12);
    CHECK(testsup::rel_err(got(0, 1), c * c * base(0, 1)) < 1e-12);
    CHECK(testsup::rel_err(got(1, 2), c * c * base(1, 2)) < 1e-12);
    CHECK(testsup::rel_err(got(0, 2), base(0, 2)) < 1e-12);
}

TEST_CASE("theta_hat error contracts") {
    Eigen::MatrixXd constant(5, 2);
    constant << 3.0, 1.0, 3.0, 2.0, 3.0, 5.0, 3.0, 4.0, 3.0, 3.0;
    try {
        coveq::theta_hat(SampleMatrix{constant});
        FAIL("expected DegenerateDataError");
    } catch (const coveq::DegenerateDataError& e) {
        CHECK(e.column == 0);
        CHECK(std::string(e.what()).find("0") != std::string::npos);
    }
    CHECK_THROWS_AS(coveq::theta_hat(SampleMatrix{Eigen::MatrixXd::Ones(1, 2)}),
                    coveq::InsufficientDataError);
}

TEST_CASE("clx_test on an exact copy") {
    std::mt19937_64 gen(231);
    const Eigen::MatrixXd m = testsup::random_matrix(gen, 10, 5);
    const SampleMatrix x{m};
    const coveq::ClxOutcome out = coveq::clx_test(x, x);
    CHECK(out.m == 0.0);
    const double expected_norm = -4.0 * std::log(5.0) + std::log(std::log(5.0));
    CHECK(out.m_norm == doctest::Approx(expected_norm).epsilon(1e-14));
    CHECK(out.p.value ==
          doctest::Approx(coveq::gumbel_sf(out.m_norm).value).epsilon(1e-14));
    CHECK(out.argmax.first == 0);
    CHECK(out.argmax.second == 0);
}

TEST_CASE("clx_test matches the loop oracle") {
    std::mt19937_64 gen(241);
    for (int rep = 0; rep < 25; ++rep) {
        const Eigen::MatrixXd x = testsup::random_matrix(gen, 10, 4);
        const Eigen::MatrixXd y = testsup::random_matrix(gen, 10, 4, 1.3);
        const coveq::ClxOutcome out =
            coveq::clx_test(SampleMatrix{x}, SampleMatrix{y});
        const double want = oracle::naive_clx(testsup::to_rows(x), testsup::to_rows(y));
        CHECK(testsup::rel_err(out.m, want) < 1e-12);
    }
}

TEST_CASE("diagonal rescaling invariance") {
    std::mt19937_64 gen(251);
    const Eigen::MatrixXd x = testsup::random_matrix(gen, 12, 4);
    const Eigen::MatrixXd y = testsup::random_matrix(gen, 9, 4);
    Eigen::VectorXd d(4);
    d << 0.3, 2.0, 5.5, 1.2;
    const Eigen::MatrixXd xd = x * d.asDiagonal();
    const Eigen::MatrixXd yd = y * d.asDiagonal();
    const coveq::ClxOutcome base = coveq::clx_test(SampleMatrix{x}, SampleMatrix{y});
    const coveq::ClxOutcome scaled =
        coveq::clx_test(SampleMatrix{xd}, SampleMatrix{yd});
    CHECK(testsup::rel_err(scaled.m, base.m) < 1e-10);
    CHECK(scaled.argmax == base.argmax);
}

TEST_CASE("common column permutation maps the argmax") {
    std::mt19937_64 gen(261);
    const Eigen::MatrixXd x = testsup::random_matrix(gen, 11, 5);
    Eigen::MatrixXd y = testsup::random_matrix(gen, 11, 5);
    y(3, 2) += 4.0;  // push the maximum toward a known column pair
    const std::vector<int> perm = {4, 2, 0, 3, 1};
    Eigen::MatrixXd xp(x.rows(), 5), yp(y.rows(), 5);
    for (int j = 0; j < 5; ++j) {
        xp.col(j) = x.col(perm[j]);
        yp.col(j) = y.col(perm[j]);
    }
    const coveq::ClxOutcome base = coveq::clx_test(SampleMatrix{x}, SampleMatrix{y});
    const coveq::ClxOutcome permuted =
        coveq::clx_test(SampleMatrix{xp}, SampleMatrix{yp});
    CHECK(testsup::rel_err(permuted.m, base.m) < 1e-12);
    // perm maps new column j to old column perm[j]; invert for the argmax.
    std::pair<Eigen::Index, Eigen::Index> mapped{perm[permuted.argmax.first],
                                                 perm[permuted.argmax.second]};
    if (mapped.first > mapped.second) std::swap(mapped.first, mapped.second);
    CHECK(mapped == base.argmax);
}

TEST_CASE("swapping equal-size samples keeps m") {
    std::mt19937_64 gen(271);
    const Eigen::MatrixXd x = testsup::random_matrix(gen, 10, 4);
    const Eigen::MatrixXd y = testsup::random_matrix(gen, 10, 4);
    const coveq::ClxOutcome xy = coveq::clx_test(SampleMatrix{x}, SampleMatrix{y});
    const coveq::ClxOutcome yx = coveq::clx_test(SampleMatrix{y}, SampleMatrix{x});
    CHECK(testsup::rel_err(xy.m, yx.m) < 1e-13);
}

TEST_CASE("clx_test error contracts") {
    std::mt19937_64 gen(281);
    const Eigen::MatrixXd x2 = testsup::random_matrix(gen, 8, 2);
    CHECK_THROWS_AS(coveq::clx_test(SampleMatrix{x2}, SampleMatrix{x2}),
                    coveq::DimensionError);
    const Eigen::MatrixXd x3 = testsup::random_matrix(gen, 8, 3);
    const Eigen::MatrixXd y4 = testsup::random_matrix(gen, 8, 4);
    CHECK_THROWS_AS(coveq::clx_test(SampleMatrix{x3}, SampleMatrix{y4}),
                    coveq::DimensionError);
    Eigen::MatrixXd constant = testsup::random_matrix(gen, 8, 3);
    constant.col(2).setConstant(1.5);
    CHECK_THROWS_AS(coveq::clx_test(SampleMatrix{x3}, SampleMatrix{constant}),
                    coveq::DegenerateDataError);
}

TEST_CASE("m_norm is approximately Gumbel under the null") {
    // Model (i) null at p = 200, n = 100: coarse goodness of fit through the
    // p-value transform; KS distance against Uniform(0,1) equals the KS
    // distance of m_norm against G.
    std::mt19937_64 gen(291);
    const int reps = 500;
    std::vector<double> pvals;
    pvals.reserve(reps);
    for (int rep = 0; rep < reps; ++rep) {
        const Eigen::MatrixXd x = testsup::random_matrix(gen, 100, 200);
        const Eigen::MatrixXd y = testsup::random_matrix(gen, 100, 200);
        pvals.push_back(coveq::clx_test(SampleMatrix{x}, SampleMatrix{y}).p.value);
    }
    CHECK(testsup::ks_uniform(pvals) <= 0.12);
}
