#include "coveq/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

#include "coveq/errors.hpp"

namespace coveq {

namespace {

void require_finite_entries(const Eigen::MatrixXd& m, const char* what) {
    if (!m.allFinite()) {
        throw DomainError(std::string(what) + ": non-finite entry");
    }
}

}  // namespace

SampleMatrix::SampleMatrix(Eigen::MatrixXd data,
                           std::vector<std::string> variable_names)
    : data_(std::move(data)), names_(std::move(variable_names)) {
    if (data_.rows() < 1 || data_.cols() < 1) {
        throw DimensionError("SampleMatrix: need at least one row and one column");
    }
    require_finite_entries(data_, "SampleMatrix");
    if (!names_.empty() &&
        static_cast<Eigen::Index>(names_.size()) != data_.cols()) {
        throw DimensionError("SampleMatrix: variable_names size " +
                             std::to_string(names_.size()) + " != column count " +
                             std::to_string(data_.cols()));
    }
}

SymMatrix::SymMatrix(Eigen::MatrixXd data) : data_(std::move(data)) {
    if (data_.rows() < 1 || data_.rows() != data_.cols()) {
        throw DimensionError("SymMatrix: matrix must be square and nonempty");
    }
    require_finite_entries(data_, "SymMatrix");
    const Eigen::Index p = data_.rows();
    for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index j = i + 1; j < p; ++j) {
            const double aij = data_(i, j);
            const double aji = data_(j, i);
            const double gap = std::abs(aij - aji);
            if (gap > 1e-12 * std::max(1.0, std::abs(aij)) ||
                gap > 1e-12 * std::max(1.0, std::abs(aji))) {
                throw DomainError("SymMatrix: symmetry violated at (" +
                                  std::to_string(i) + ", " + std::to_string(j) +
                                  ")");
            }
        }
    }
}

SampleMatrix center_columns(const SampleMatrix& x) {
    if (x.n_obs() < 2) {
        throw InsufficientDataError("center_columns: need at least 2 observations");
    }
    Eigen::MatrixXd c = x.data();
    const Eigen::RowVectorXd mu = c.colwise().mean();
    c.rowwise() -= mu;
    return SampleMatrix(std::move(c), x.variable_names());
}

SymMatrix sample_covariance(const SampleMatrix& x, CovDivisor divisor) {
    const Eigen::Index n = x.n_obs();
    if (n < 2) {
        throw InsufficientDataError(
            "sample_covariance: need at least 2 observations");
    }
    Eigen::MatrixXd c = x.data();
    const Eigen::RowVectorXd mu = c.colwise().mean();
    c.rowwise() -= mu;
    const double div =
        divisor == CovDivisor::N ? static_cast<double>(n)
                                 : static_cast<double>(n - 1);
    const Eigen::Index p = x.n_vars();
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(p, p);
    s.selfadjointView<Eigen::Lower>().rankUpdate(c.transpose(), 1.0 / div);
    s.triangularView<Eigen::StrictlyUpper>() = s.transpose();
    return SymMatrix(std::move(s));
}

Eigen::MatrixXd cholesky(const SymMatrix& a) {
    const Eigen::Index p = a.dim();
    const Eigen::MatrixXd& m = a.data();
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(p, p);
    for (Eigen::Index j = 0; j < p; ++j) {
        double d = m(j, j);
        if (j > 0) {
            d -= l.row(j).head(j).squaredNorm();
        }
        if (!(d > 0.0) || !std::isfinite(d)) {
            throw FactorizationError(
                "cholesky: matrix not positive definite at pivot " +
                    std::to_string(j),
                static_cast<long>(j));
        }
        const double ljj = std::sqrt(d);
        l(j, j) = ljj;
        const Eigen::Index rest = p - j - 1;
        if (rest > 0) {
            l.col(j).tail(rest) = m.col(j).tail(rest);
            if (j > 0) {
                l.col(j).tail(rest).noalias() -=
                    l.bottomLeftCorner(rest, j) * l.row(j).head(j).transpose();
            }
            l.col(j).tail(rest) /= ljj;
        }
    }
    return l;
}

namespace {

struct EigenPair {
    double value = 0.0;
    double residual = std::numeric_limits<double>::infinity();
    bool converged = false;
};

// Power iteration on b = cI - a from the given start, then Rayleigh-quotient
// refinement on a itself. Returns the eigenvalue of a that the pair settles
// on; callers keep the smallest converged candidate.
EigenPair refine_candidate(const Eigen::MatrixXd& a, double c,
                           Eigen::VectorXd v, double accept_tol) {
    const Eigen::Index p = a.rows();
    const double vanish = 1e-14 * std::max(1.0, std::abs(c));
    v.normalize();
    Eigen::VectorXd w(p);
    for (int it = 0; it < 500; ++it) {
        w.noalias() = c * v - a * v;
        const double norm = w.norm();
        if (norm <= vanish) {
            // v is numerically an eigenvector of a with eigenvalue ~c.
            break;
        }
        w /= norm;
        const double drift = (w - v).norm();
        v = w;
        if (drift <= 1e-8) {
            break;
        }
    }

    EigenPair best;
    for (int it = 0; it < 40; ++it) {
        const double rho = v.dot(a * v);
        const double res = (a * v - rho * v).norm();
        if (res < best.residual) {
            best.value = rho;
            best.residual = res;
        }
        if (res <= accept_tol) {
            break;
        }
        Eigen::MatrixXd shifted = a;
        shifted.diagonal().array() -= rho;
        Eigen::VectorXd next = Eigen::PartialPivLU<Eigen::MatrixXd>(shifted).solve(v);
        const double norm = next.norm();
        if (!next.allFinite() || norm == 0.0) {
            break;
        }
        v = next / norm;
    }
    best.converged = best.residual <= accept_tol;
    return best;
}

}  // namespace

double min_eigenvalue(const SymMatrix& a, double tol) {
    if (!(tol > 0.0)) {
        throw DomainError("min_eigenvalue: tol must be positive");
    }
    const Eigen::Index p = a.dim();
    const Eigen::MatrixXd& m = a.data();
    if (p == 1) {
        return m(0, 0);
    }

    const double scale = std::max(1.0, m.cwiseAbs().rowwise().sum().maxCoeff());
    const double c = (m.diagonal() +
                      (m.cwiseAbs().rowwise().sum() - m.diagonal().cwiseAbs()))
                         .maxCoeff();
    const double accept_tol = tol * scale;

    // All-ones start (documented default) plus a fixed pseudo-random start;
    // either alone can land on a non-extreme eigenvector, so keep the
    // smallest converged candidate.
    std::vector<Eigen::VectorXd> starts;
    starts.push_back(Eigen::VectorXd::Ones(p));
    std::mt19937_64 gen(0x9e3779b97f4a7c15ULL);
    Eigen::VectorXd r(p);
    for (Eigen::Index i = 0; i < p; ++i) {
        r(i) = static_cast<double>(gen() >> 11) * 0x1.0p-53 - 0.5;
    }
    starts.push_back(std::move(r));

    bool found = false;
    double lambda = 0.0;
    double best_residual = std::numeric_limits<double>::infinity();
    for (const auto& start : starts) {
        const EigenPair cand = refine_candidate(m, c, start, accept_tol);
        best_residual = std::min(best_residual, cand.residual);
        if (cand.converged && (!found || cand.value < lambda)) {
            found = true;
            lambda = cand.value;
        }
    }
    if (!found) {
        throw ConvergenceError(
            "min_eigenvalue: no eigenpair reached tolerance; best residual " +
                std::to_string(best_residual),
            best_residual);
    }
    return lambda;
}

}  // namespace coveq
