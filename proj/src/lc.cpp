#include "coveq/lc.hpp"

#include <cmath>
#include <string>

#include "coveq/detail/accum.hpp"
#include "coveq/dist.hpp"
#include "coveq/errors.hpp"

namespace coveq {

namespace {

void check_pair(const SampleMatrix& x, const SampleMatrix& y,
                Eigen::Index min_n) {
    if (x.n_vars() != y.n_vars()) {
        throw DimensionError("lc: samples have " + std::to_string(x.n_vars()) +
                             " and " + std::to_string(y.n_vars()) +
                             " variables");
    }
    if (x.n_obs() < min_n || y.n_obs() < min_n) {
        throw InsufficientDataError("lc: need at least " +
                                    std::to_string(min_n) +
                                    " observations per sample");
    }
}

// sum_{u != v} g_uv^2 for a symmetric Gram matrix.
double offdiag_square_sum(const Eigen::MatrixXd& g) {
    detail::NeumaierSum acc;
    const Eigen::Index n = g.rows();
    for (Eigen::Index v = 0; v < n; ++v) {
        for (Eigen::Index u = 0; u < n; ++u) {
            if (u != v) {
                acc.add(g(u, v) * g(u, v));
            }
        }
    }
    return acc.value();
}

double square_sum(const Eigen::MatrixXd& h) {
    detail::NeumaierSum acc;
    for (Eigen::Index j = 0; j < h.cols(); ++j) {
        for (Eigen::Index i = 0; i < h.rows(); ++i) {
            acc.add(h(i, j) * h(i, j));
        }
    }
    return acc.value();
}

// Full estimator of tr(Sigma^2) from one sample's Gram matrix:
//   [1/(n(n-1))] sum_{u!=v} g_uv^2
//   - [2/(n(n-1)(n-2))] sum* g_uv g_vk
//   + [1/(n(n-1)(n-2)(n-3))] sum* g_uv g_kl
// with sum* over pairwise-distinct indices. The distinct-index sums reduce to
// row-sum identities, so the cost stays O(n^2).
double full_trace_estimate(const Eigen::MatrixXd& g) {
    const Eigen::Index n = g.rows();
    const double nd = static_cast<double>(n);
    detail::NeumaierSum t1;     // sum_{u!=v} g_uv
    detail::NeumaierSum t2;     // sum_{u!=v} g_uv^2
    detail::NeumaierSum triples;  // sum_v (s_v^2 - q_v)
    for (Eigen::Index v = 0; v < n; ++v) {
        detail::NeumaierSum s_v;
        detail::NeumaierSum q_v;
        for (Eigen::Index u = 0; u < n; ++u) {
            if (u == v) {
                continue;
            }
            const double guv = g(u, v);
            s_v.add(guv);
            q_v.add(guv * guv);
            t1.add(guv);
            t2.add(guv * guv);
        }
        const double s = s_v.value();
        triples.add(s * s - q_v.value());
    }
    const double sum_pairs = t2.value();
    const double sum_triples = triples.value();
    const double sum_quads =
        t1.value() * t1.value() - 4.0 * sum_triples - 2.0 * sum_pairs;
    return sum_pairs / (nd * (nd - 1.0)) -
           2.0 * sum_triples / (nd * (nd - 1.0) * (nd - 2.0)) +
           sum_quads / (nd * (nd - 1.0) * (nd - 2.0) * (nd - 3.0));
}

// Full estimator of tr(Sigma1 Sigma2) from the cross Gram h = x y^T:
//   [1/(n1 n2)] sum h_uv^2
//   - [1/(n1 n2 (n1-1))] sum_v sum_{u!=k} h_uv h_kv
//   - [1/(n1 n2 (n2-1))] sum_u sum_{v!=l} h_uv h_ul
//   + [1/(n1 n2 (n1-1)(n2-1))] sum_{u!=k} sum_{v!=l} h_uv h_kl
double full_cross_estimate(const Eigen::MatrixXd& h) {
    const Eigen::Index n1 = h.rows();
    const Eigen::Index n2 = h.cols();
    const double a = static_cast<double>(n1);
    const double b = static_cast<double>(n2);

    detail::NeumaierSum total;  // S = sum h_uv
    detail::NeumaierSum q;      // Q = sum h_uv^2
    detail::NeumaierSum row_sq;  // sum_u R_u^2
    detail::NeumaierSum col_sq;  // sum_v C_v^2
    Eigen::VectorXd col_sums = Eigen::VectorXd::Zero(n2);
    for (Eigen::Index u = 0; u < n1; ++u) {
        detail::NeumaierSum r_u;
        for (Eigen::Index v = 0; v < n2; ++v) {
            const double huv = h(u, v);
            total.add(huv);
            q.add(huv * huv);
            r_u.add(huv);
            col_sums(v) += huv;
        }
        const double r = r_u.value();
        row_sq.add(r * r);
    }
    for (Eigen::Index v = 0; v < n2; ++v) {
        col_sq.add(col_sums(v) * col_sums(v));
    }

    const double s = total.value();
    const double qq = q.value();
    const double rows2 = row_sq.value();
    const double cols2 = col_sq.value();
    const double term2 = cols2 - qq;          // sum_v sum_{u!=k} h_uv h_kv
    const double term3 = rows2 - qq;          // sum_u sum_{v!=l} h_uv h_ul
    const double term4 = s * s - rows2 - cols2 + qq;
    return qq / (a * b) - term2 / (a * b * (a - 1.0)) -
           term3 / (a * b * (b - 1.0)) +
           term4 / (a * b * (a - 1.0) * (b - 1.0));
}

}  // namespace

LcComponents lc_components(const SampleMatrix& x, const SampleMatrix& y,
                           const LcOptions& opts) {
    const Eigen::Index min_n = opts.estimator == LcEstimator::Full ? 4 : 2;
    check_pair(x, y, min_n);
    const Eigen::MatrixXd xd =
        opts.center ? center_columns(x).data() : x.data();
    const Eigen::MatrixXd yd =
        opts.center ? center_columns(y).data() : y.data();

    const Eigen::Index n1 = x.n_obs();
    const Eigen::Index n2 = y.n_obs();
    Eigen::MatrixXd gx = Eigen::MatrixXd::Zero(n1, n1);
    gx.selfadjointView<Eigen::Lower>().rankUpdate(xd);
    gx.triangularView<Eigen::StrictlyUpper>() = gx.transpose();
    Eigen::MatrixXd gy = Eigen::MatrixXd::Zero(n2, n2);
    gy.selfadjointView<Eigen::Lower>().rankUpdate(yd);
    gy.triangularView<Eigen::StrictlyUpper>() = gy.transpose();
    const Eigen::MatrixXd h = xd * yd.transpose();

    LcComponents out;
    if (opts.estimator == LcEstimator::Full) {
        out.a_hat = full_trace_estimate(gx);
        out.b_hat = full_trace_estimate(gy);
        out.c_hat = full_cross_estimate(h);
    } else {
        const double d1 = static_cast<double>(n1);
        const double d2 = static_cast<double>(n2);
        out.a_hat = offdiag_square_sum(gx) / (d1 * (d1 - 1.0));
        out.b_hat = offdiag_square_sum(gy) / (d2 * (d2 - 1.0));
        out.c_hat = square_sum(h) / (d1 * d2);
    }
    return out;
}

LcOutcome lc_test(const SampleMatrix& x, const SampleMatrix& y,
                  const LcOptions& opts) {
    const LcComponents c = lc_components(x, y, opts);
    LcOutcome out;
    out.a_hat = c.a_hat;
    out.b_hat = c.b_hat;
    out.c_hat = c.c_hat;
    out.t_tilde = c.a_hat + c.b_hat - 2.0 * c.c_hat;
    const double n1 = static_cast<double>(x.n_obs());
    const double n2 = static_cast<double>(y.n_obs());
    out.sigma0_hat = (2.0 / n2) * c.a_hat + (2.0 / n1) * c.b_hat;
    if (!(out.sigma0_hat > 0.0)) {
        throw DegenerateDataError(
            "lc_test: sigma0_hat is not positive; data carry no variation");
    }
    out.z = out.t_tilde / out.sigma0_hat;
    out.p = normal_sf(out.z);
    return out;
}

}  // namespace coveq
