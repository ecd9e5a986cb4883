#include "coveq/clx.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "coveq/dist.hpp"
#include "coveq/errors.hpp"

namespace coveq {

SymMatrix theta_hat(const SampleMatrix& x, bool validate_diagonal) {
    const Eigen::Index n = x.n_obs();
    const Eigen::Index p = x.n_vars();
    if (n < 2) {
        throw InsufficientDataError("theta_hat: need at least 2 observations");
    }
    if (validate_diagonal) {
        for (Eigen::Index j = 0; j < p; ++j) {
            if (x.data().col(j).maxCoeff() == x.data().col(j).minCoeff()) {
                throw DegenerateDataError(
                    "theta_hat: column " + std::to_string(j) + " is constant",
                    static_cast<long>(j));
            }
        }
    }
    Eigen::MatrixXd c = x.data();
    const Eigen::RowVectorXd mu = c.colwise().mean();
    c.rowwise() -= mu;
    const double nd = static_cast<double>(n);

    Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(p, p);
    sigma.selfadjointView<Eigen::Lower>().rankUpdate(c.transpose(), 1.0 / nd);
    sigma.triangularView<Eigen::StrictlyUpper>() = sigma.transpose();

    // theta_ij = (1/n) sum_u (c_ui c_uj)^2 - sigma_ij^2; the first factor is
    // a Gram product of the squared centered matrix.
    const Eigen::MatrixXd w = c.array().square().matrix();
    Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(p, p);
    theta.selfadjointView<Eigen::Lower>().rankUpdate(w.transpose(), 1.0 / nd);
    theta.triangularView<Eigen::StrictlyUpper>() = theta.transpose();
    theta -= sigma.cwiseProduct(sigma);
    // Cancellation can leave tiny negatives; the defining sum is >= 0.
    theta = theta.cwiseMax(0.0);

    if (validate_diagonal) {
        for (Eigen::Index j = 0; j < p; ++j) {
            if (theta(j, j) == 0.0) {
                throw DegenerateDataError(
                    "theta_hat: zero variance of squared deviations in column " +
                        std::to_string(j),
                    static_cast<long>(j));
            }
        }
    }
    return SymMatrix(std::move(theta));
}

ClxOutcome clx_test(const SampleMatrix& x, const SampleMatrix& y) {
    if (x.n_vars() != y.n_vars()) {
        throw DimensionError("clx_test: samples have " +
                             std::to_string(x.n_vars()) + " and " +
                             std::to_string(y.n_vars()) + " variables");
    }
    const Eigen::Index p = x.n_vars();
    if (p < 3) {
        throw DimensionError(
            "clx_test: need p >= 3 so that log log p is positive");
    }
    if (x.n_obs() < 2 || y.n_obs() < 2) {
        throw InsufficientDataError(
            "clx_test: need at least 2 observations per sample");
    }

    const Eigen::MatrixXd s1 = sample_covariance(x, CovDivisor::N).data();
    const Eigen::MatrixXd s2 = sample_covariance(y, CovDivisor::N).data();
    const Eigen::MatrixXd t1 = theta_hat(x).data();
    const Eigen::MatrixXd t2 = theta_hat(y).data();
    const double n1 = static_cast<double>(x.n_obs());
    const double n2 = static_cast<double>(y.n_obs());

    ClxOutcome out;
    out.m = -1.0;
    for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index j = i; j < p; ++j) {
            const double diff = s1(i, j) - s2(i, j);
            const double denom = t1(i, j) / n1 + t2(i, j) / n2;
            double ratio;
            if (denom > 0.0) {
                ratio = diff * diff / denom;
            } else if (diff == 0.0) {
                ratio = 0.0;
            } else {
                ratio = std::numeric_limits<double>::infinity();
            }
            if (ratio > out.m) {
                out.m = ratio;
                out.argmax = {i, j};
            }
        }
    }
    const double pd = static_cast<double>(p);
    out.m_norm = out.m - 4.0 * std::log(pd) + std::log(std::log(pd));
    out.p = gumbel_sf(out.m_norm);
    return out;
}

}  // namespace coveq
