#pragma once

// Brute-force reference implementations used only by the tests. Everything
// here works on plain nested vectors and literal index loops so that it
// shares no code with the library kernels it checks. The U-statistic loops
// refuse instances large enough to hurt CI time.

#include <cstddef>
#include <vector>

namespace oracle {

using Mat = std::vector<std::vector<double>>;  // rows are observations

struct LcStats {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
};

// Simplified statistic terms, literal sums over ordered index pairs:
// a = sum_{u != v} (x_u . x_v)^2 / (n1 (n1 - 1)), b analogous,
// c = sum_{u, v} (x_u . y_v)^2 / (n1 n2). No centering.
LcStats naive_lc(const Mat& x, const Mat& y);

// Full Li-Chen estimators with the third- and fourth-order correction
// terms, as literal sums over pairwise-distinct index tuples.
LcStats naive_lc_full(const Mat& x, const Mat& y);

// Entrywise theta matrix: theta_ij = (1/n) sum_u [(x_ui - mean_i)
// (x_uj - mean_j) - sigma_ij]^2 with sigma the divisor-n covariance.
Mat naive_theta(const Mat& x);

// Maximum standardized squared covariance difference over i <= j; the
// 0/0 cell convention is 0.
double naive_clx(const Mat& x, const Mat& y);

// Divisor-n (or n-1) sample covariance by double loop.
Mat naive_cov(const Mat& x, bool unbiased);

// All eigenvalues of a small symmetric matrix by shifted QR iteration,
// sorted ascending. Refuses n > 16.
std::vector<double> qr_eigenvalues(Mat a);

// Composite Simpson integral of f over [lo, hi] with n even panels.
double simpson(double (*f)(double), double lo, double hi, int n);

// Survival by quadrature: integral of the density from x to upper.
double quad_sf(double (*density)(double), double x, double upper, int n);

double chisq4_density(double t);
double normal_density(double t);

// Benjamini-Hochberg by definition walk-through; flags in input order.
std::vector<bool> naive_bh(const std::vector<double>& pvals, double alpha);

}  // namespace oracle
