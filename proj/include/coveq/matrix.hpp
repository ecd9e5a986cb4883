#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace coveq {

// n x p observation matrix: rows are observations, columns are variables.
// Entries must be finite; dimensions at least 1x1. Variable names are
// optional; when present there must be exactly one per column.
class SampleMatrix {
public:
    explicit SampleMatrix(Eigen::MatrixXd data,
                          std::vector<std::string> variable_names = {});

    const Eigen::MatrixXd& data() const { return data_; }
    Eigen::Index n_obs() const { return data_.rows(); }
    Eigen::Index n_vars() const { return data_.cols(); }
    bool has_names() const { return !names_.empty(); }
    const std::vector<std::string>& variable_names() const { return names_; }

private:
    Eigen::MatrixXd data_;
    std::vector<std::string> names_;
};

// Dense real symmetric matrix. Construction enforces squareness, finiteness,
// and |a_ij - a_ji| <= 1e-12 * max(1, |a_ij|) for all i, j.
class SymMatrix {
public:
    explicit SymMatrix(Eigen::MatrixXd data);

    const Eigen::MatrixXd& data() const { return data_; }
    Eigen::Index dim() const { return data_.rows(); }

private:
    Eigen::MatrixXd data_;
};

// Subtracts the column mean from every column. Requires n >= 2.
SampleMatrix center_columns(const SampleMatrix& x);

enum class CovDivisor { N, NMinus1 };

// (1/divisor) * sum_u (x_u - xbar)(x_u - xbar)^T. Requires n >= 2. The
// maximum-statistic path uses divisor N; N-1 is available for other uses.
SymMatrix sample_covariance(const SampleMatrix& x,
                            CovDivisor divisor = CovDivisor::N);

// Lower-triangular L with L L^T == a. Throws FactorizationError naming the
// failing pivot when a is not positive definite.
Eigen::MatrixXd cholesky(const SymMatrix& a);

// Smallest eigenvalue via power iteration on (cI - a), c the Gershgorin upper
// bound, with Rayleigh-quotient refinement. Deterministic start vectors.
// Throws ConvergenceError reporting the residual if no candidate reaches
// tol * max(1, ||a||).
double min_eigenvalue(const SymMatrix& a, double tol = 1e-9);

}  // namespace coveq
