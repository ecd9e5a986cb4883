#pragma once

#include <utility>

#include "coveq/matrix.hpp"
#include "coveq/pvalue.hpp"

namespace coveq {

struct ClxOutcome {
    double m = 0.0;       // M statistic, >= 0
    double m_norm = 0.0;  // M - 4 log p + log log p
    PValue p;
    std::pair<Eigen::Index, Eigen::Index> argmax{0, 0};  // 0-based, i <= j
};

// theta_hat_ij = (1/n) sum_u [(x_ui - xbar_i)(x_uj - xbar_j) - sigma_ij]^2
// with sigma the divisor-n sample covariance. Requires n >= 2. With
// validate_diagonal, a zero diagonal entry (constant column) raises
// DegenerateDataError naming the column.
SymMatrix theta_hat(const SampleMatrix& x, bool validate_diagonal = true);

// M = max_{i <= j} (sigma_ij1 - sigma_ij2)^2 / (theta_ij1/n1 + theta_ij2/n2),
// m_norm = M - 4 log p + log log p, p = gumbel_sf(m_norm). Requires p >= 3.
// Argmax ties break to the lexicographically smallest (i, j).
ClxOutcome clx_test(const SampleMatrix& x, const SampleMatrix& y);

}  // namespace coveq
