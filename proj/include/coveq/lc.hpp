#pragma once

#include "coveq/matrix.hpp"
#include "coveq/pvalue.hpp"

namespace coveq {

// Which tr(Sigma^2)-type estimators form the statistic. Full carries the
// third- and fourth-order U-statistic corrections, which make the components
// exactly location-invariant and keep the z-statistic calibrated when p is
// comparable to n. Simplified keeps only the leading second-moment terms; on
// empirically centered data its null mean is inflated by about
// (tr Sigma / n)^2 per sample, so it is only safe on data whose population
// mean is exactly zero (center = false) or when p << n.
enum class LcEstimator { Simplified, Full };

struct LcOptions {
    bool center = true;
    LcEstimator estimator = LcEstimator::Full;
};

struct LcComponents {
    double a_hat = 0.0;  // estimate of tr(Sigma1^2)
    double b_hat = 0.0;  // estimate of tr(Sigma2^2)
    double c_hat = 0.0;  // estimate of tr(Sigma1 Sigma2)
};

struct LcOutcome {
    double t_tilde = 0.0;
    double a_hat = 0.0;
    double b_hat = 0.0;
    double c_hat = 0.0;
    double sigma0_hat = 0.0;
    double z = 0.0;
    PValue p;
};

// Gram-based components. Simplified: a_hat = [1/(n1(n1-1))] sum_{u!=v}
// (x_u^T x_v)^2, b_hat analogous, c_hat = [1/(n1 n2)] sum_u sum_v
// (x_u^T y_v)^2. Full appends the distinct-index correction sums.
// Requires n1, n2 >= 4 (Simplified: >= 2) and equal column counts.
LcComponents lc_components(const SampleMatrix& x, const SampleMatrix& y,
                           const LcOptions& opts = {});

// t_tilde = a + b - 2c, sigma0_hat = (2/n2) a + (2/n1) b, z = t_tilde /
// sigma0_hat, p = normal_sf(z). Throws DegenerateDataError when
// sigma0_hat <= 0 (all-zero data).
LcOutcome lc_test(const SampleMatrix& x, const SampleMatrix& y,
                  const LcOptions& opts = {});

}  // namespace coveq
