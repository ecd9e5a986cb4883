#include "coveq/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "coveq/errors.hpp"

namespace coveq {

namespace {

SymMatrix ar1_matrix(Eigen::Index p, double rho) {
    Eigen::MatrixXd s(p, p);
    for (Eigen::Index j = 0; j < p; ++j) {
        for (Eigen::Index i = 0; i < p; ++i) {
            s(i, j) = std::pow(rho, static_cast<double>(std::abs(i - j)));
        }
    }
    return SymMatrix(std::move(s));
}

// sigma_ij = (-1)^(i+j) * base^(|i-j|^(1/10)), with |i-j| = 0 mapped to
// exponent 0 so the diagonal is exactly 1.
SymMatrix alternating_decay_matrix(Eigen::Index p, double base) {
    Eigen::MatrixXd s(p, p);
    for (Eigen::Index j = 0; j < p; ++j) {
        for (Eigen::Index i = 0; i < p; ++i) {
            if (i == j) {
                s(i, j) = 1.0;
                continue;
            }
            const double gap = static_cast<double>(std::abs(i - j));
            const double mag = std::pow(base, std::pow(gap, 0.1));
            s(i, j) = ((i + j) % 2 == 0) ? mag : -mag;
        }
    }
    return SymMatrix(std::move(s));
}

// k-th (row-major) strict-upper position of a p x p matrix.
std::pair<Eigen::Index, Eigen::Index> upper_position(Eigen::Index p,
                                                     std::uint64_t k) {
    Eigen::Index i = 0;
    std::uint64_t row_len = static_cast<std::uint64_t>(p - 1);
    while (k >= row_len) {
        k -= row_len;
        --row_len;
        ++i;
    }
    return {i, i + 1 + static_cast<Eigen::Index>(k)};
}

}  // namespace

std::optional<CovModel> cov_model_from_string(std::string_view s) {
    if (s == "m1") return CovModel::M1;
    if (s == "m2") return CovModel::M2;
    if (s == "m3") return CovModel::M3;
    if (s == "m4") return CovModel::M4;
    if (s == "m5") return CovModel::M5;
    return std::nullopt;
}

std::optional<AltKind> alt_kind_from_string(std::string_view s) {
    if (s == "null") return AltKind::Null;
    if (s == "sparse") return AltKind::Sparse;
    if (s == "dense") return AltKind::Dense;
    return std::nullopt;
}

std::string to_string(CovModel m) {
    switch (m) {
        case CovModel::M1: return "m1";
        case CovModel::M2: return "m2";
        case CovModel::M3: return "m3";
        case CovModel::M4: return "m4";
        case CovModel::M5: return "m5";
    }
    throw SpecError("simgen: unknown model tag");
}

std::string to_string(AltKind a) {
    switch (a) {
        case AltKind::Null: return "null";
        case AltKind::Sparse: return "sparse";
        case AltKind::Dense: return "dense";
    }
    throw SpecError("simgen: unknown alternative tag");
}

void validate(const CovModelSpec& spec) {
    if (spec.p < 1) {
        throw SpecError("model spec: p must be positive");
    }
    if (spec.model == CovModel::M3 && spec.p % 5 != 0) {
        throw SpecError("model m3: p must be divisible by 5, got " +
                        std::to_string(spec.p));
    }
    const bool wants_rho =
        spec.model == CovModel::M1 && spec.alternative == AltKind::Dense;
    if (wants_rho && !spec.rho.has_value()) {
        throw SpecError("model m1 with dense alternative requires rho");
    }
    if (!wants_rho && spec.rho.has_value()) {
        throw SpecError("rho applies only to m1 with the dense alternative");
    }
    if (spec.rho.has_value() && !(std::abs(*spec.rho) < 1.0)) {
        throw SpecError("rho must satisfy |rho| < 1");
    }
    if (spec.alternative == AltKind::Sparse && spec.p < 4) {
        throw SpecError("sparse alternative requires p >= 4");
    }
}

SymMatrix null_covariance(const CovModelSpec& spec, Rng* rng) {
    validate(spec);
    const Eigen::Index p = spec.p;
    switch (spec.model) {
        case CovModel::M1:
            return SymMatrix(Eigen::MatrixXd::Identity(p, p));
        case CovModel::M2: {
            const SymMatrix omega = ar1_matrix(p, 0.5);
            const Eigen::MatrixXd l = cholesky(omega);
            const Eigen::MatrixXd k =
                l.triangularView<Eigen::Lower>().solve(
                    Eigen::MatrixXd::Identity(p, p));
            Eigen::MatrixXd s = Eigen::MatrixXd::Zero(p, p);
            s.selfadjointView<Eigen::Lower>().rankUpdate(k.transpose());
            s.triangularView<Eigen::StrictlyUpper>() = s.transpose();
            return SymMatrix(std::move(s));
        }
        case CovModel::M3: {
            Eigen::MatrixXd s = Eigen::MatrixXd::Zero(p, p);
            for (Eigen::Index b = 0; b < p; b += 5) {
                s.block(b, b, 5, 5).setConstant(0.5);
                s.block(b, b, 5, 5).diagonal().setConstant(1.0);
            }
            return SymMatrix(std::move(s));
        }
        case CovModel::M4:
            return alternating_decay_matrix(p, 0.4);
        case CovModel::M5: {
            if (rng == nullptr) {
                throw SpecError("model m5 requires an RNG stream");
            }
            Eigen::MatrixXd s = Eigen::MatrixXd::Identity(p, p);
            for (Eigen::Index i = 0; i < p; ++i) {
                for (Eigen::Index j = i + 1; j < p; ++j) {
                    const double v = rng->uniform() < 0.05 ? 0.5 : 0.0;
                    s(i, j) = v;
                    s(j, i) = v;
                }
            }
            const double lmin = min_eigenvalue(SymMatrix(s));
            const double delta = std::abs(lmin) + 0.05;
            s.diagonal().array() += delta;
            s /= 1.0 + delta;
            return SymMatrix(std::move(s));
        }
    }
    throw SpecError("simgen: unknown model tag");
}

CovPair sparse_alternative(const SymMatrix& base, Rng& rng,
                           std::optional<double> base_lmin) {
    const Eigen::Index p = base.dim();
    if (p < 4) {
        throw SpecError("sparse_alternative: requires p >= 4");
    }
    const std::uint64_t total =
        static_cast<std::uint64_t>(p) * static_cast<std::uint64_t>(p - 1) / 2;

    // Selection sampling: each draw picks among the not-yet-chosen positions,
    // then shifts past previously chosen ones in sorted order.
    std::vector<std::uint64_t> chosen;
    for (int t = 0; t < 4; ++t) {
        std::uint64_t k = rng.below(total - static_cast<std::uint64_t>(t));
        std::sort(chosen.begin(), chosen.end());
        for (const std::uint64_t c : chosen) {
            if (k >= c) {
                ++k;
            }
        }
        chosen.push_back(k);
    }

    const double max_diag = base.data().diagonal().maxCoeff();
    Eigen::MatrixXd u = Eigen::MatrixXd::Zero(p, p);
    std::vector<PerturbedEntry> entries;
    entries.reserve(4);
    for (const std::uint64_t k : chosen) {
        const auto [i, j] = upper_position(p, k);
        const double mag = rng.uniform() * 4.0 * max_diag;
        u(i, j) = mag;
        u(j, i) = mag;
        entries.push_back({i, j, mag});
    }

    const double lmin_pert = min_eigenvalue(SymMatrix(base.data() + u));
    const double lmin_base =
        base_lmin.has_value() ? *base_lmin : min_eigenvalue(base);
    const double delta = std::abs(std::min(lmin_pert, lmin_base)) + 0.05;

    Eigen::MatrixXd s1 = base.data();
    s1.diagonal().array() += delta;
    Eigen::MatrixXd s2 = s1 + u;
    return CovPair{SymMatrix(std::move(s1)), SymMatrix(std::move(s2)), delta,
                   std::move(entries)};
}

CovPair dense_alternative(const CovModelSpec& spec, Rng* rng) {
    validate(spec);
    if (spec.alternative != AltKind::Dense) {
        throw SpecError("dense_alternative: spec.alternative must be dense");
    }
    CovModelSpec null_spec = spec;
    null_spec.alternative = AltKind::Null;
    null_spec.rho.reset();
    SymMatrix sigma1 = null_covariance(null_spec, rng);
    switch (spec.model) {
        case CovModel::M1:
            return CovPair{std::move(sigma1), ar1_matrix(spec.p, *spec.rho),
                           0.0, {}};
        case CovModel::M4:
            return CovPair{std::move(sigma1),
                           alternating_decay_matrix(spec.p, 0.6), 0.0, {}};
        case CovModel::M2:
        case CovModel::M3:
        case CovModel::M5:
            return CovPair{std::move(sigma1),
                           SymMatrix(Eigen::MatrixXd::Identity(spec.p, spec.p)),
                           0.0,
                           {}};
    }
    throw SpecError("simgen: unknown model tag");
}

CovPair build_pair(const CovModelSpec& spec, Rng& rng) {
    validate(spec);
    switch (spec.alternative) {
        case AltKind::Null: {
            SymMatrix s = null_covariance(spec, &rng);
            SymMatrix s2 = s;
            return CovPair{std::move(s), std::move(s2), 0.0, {}};
        }
        case AltKind::Sparse: {
            const SymMatrix base = null_covariance(spec, &rng);
            return sparse_alternative(base, rng);
        }
        case AltKind::Dense:
            return dense_alternative(spec, &rng);
    }
    throw SpecError("simgen: unknown alternative tag");
}

SampleMatrix mvn_sample(const SymMatrix& sigma, Eigen::Index n, Rng& rng) {
    return mvn_sample_chol(cholesky(sigma), n, rng);
}

SampleMatrix mvn_sample_chol(const Eigen::MatrixXd& chol_lower,
                             Eigen::Index n, Rng& rng) {
    if (n < 1) {
        throw DomainError("mvn_sample: n must be positive");
    }
    const Eigen::Index p = chol_lower.rows();
    Eigen::MatrixXd z(n, p);
    for (Eigen::Index u = 0; u < n; ++u) {
        for (Eigen::Index j = 0; j < p; ++j) {
            z(u, j) = rng.normal();
        }
    }
    return SampleMatrix(z * chol_lower.transpose());
}

}  // namespace coveq
