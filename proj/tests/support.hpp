#pragma once

// Small helpers shared by the test suites: instance generation (independent
// of the library's own RNG), conversions to the oracle's plain-vector
// format, and a few statistical distances.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "coveq/matrix.hpp"
#include "oracle/oracle.hpp"

namespace testsup {

inline double rel_err(double got, double want) {
    const double scale = std::max(std::abs(got), std::abs(want));
    if (scale == 0.0) return 0.0;
    return std::abs(got - want) / scale;
}

inline oracle::Mat to_rows(const Eigen::MatrixXd& m) {
    oracle::Mat out(m.rows(), std::vector<double>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
    return out;
}

inline Eigen::MatrixXd from_rows(const oracle::Mat& rows) {
    Eigen::MatrixXd out(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows.front().size(); ++j) out(i, j) = rows[i][j];
    return out;
}

inline Eigen::MatrixXd random_matrix(std::mt19937_64& gen, Eigen::Index n,
                                     Eigen::Index p, double scale = 1.0) {
    std::normal_distribution<double> normal(0.0, scale);
    Eigen::MatrixXd m(n, p);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < p; ++j) m(i, j) = normal(gen);
    return m;
}

inline Eigen::MatrixXd random_symmetric(std::mt19937_64& gen, Eigen::Index p,
                                        double scale = 1.0) {
    const Eigen::MatrixXd m = random_matrix(gen, p, p, scale);
    return (m + m.transpose()) / 2.0;
}

inline Eigen::MatrixXd random_spd(std::mt19937_64& gen, Eigen::Index p) {
    const Eigen::MatrixXd m = random_matrix(gen, p, p);
    return m * m.transpose() + 0.5 * Eigen::MatrixXd::Identity(p, p);
}

inline Eigen::MatrixXd centered(const Eigen::MatrixXd& m) {
    return m.rowwise() - m.colwise().mean();
}

// Kolmogorov-Smirnov distance of a sample against Uniform(0,1).
inline double ks_uniform(std::vector<double> sample) {
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        d = std::max(d, sample[i] - static_cast<double>(i) / n);
        d = std::max(d, static_cast<double>(i + 1) / n - sample[i]);
    }
    return d;
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

}  // namespace testsup
